use proptest::prelude::*;
use yeastloc_core::io::{
    parse_bin_assignments, parse_feature_defs, parse_feature_table, parse_state_vectors,
    parse_state_vectors_with, serialize_bin_assignments, serialize_feature_defs,
    serialize_feature_table, serialize_state_vectors,
};
use yeastloc_core::pipeline::DEFAULT_FEATURE_ORDER;
use yeastloc_core::{
    generate, BinAssignment, Compartment, DuplicatePolicy, FeatureStatus, FeatureVectorTable,
    SynthSpec,
};

const FEATURE_DEFS: &str = include_str!("../data/yeast_feature_defs.tsv");
const UNKNOWNS: &str = include_str!("../data/unknown_localization.tsv");

#[test]
fn feature_table_metadata_parses() {
    let defs = parse_feature_defs(FEATURE_DEFS).unwrap();
    assert_eq!(defs.len(), 30);
    let count = |s| defs.iter().filter(|d| d.status == s).count();
    assert_eq!(count(FeatureStatus::Important), 10);
    assert_eq!(count(FeatureStatus::Included), 9);
    assert_eq!(count(FeatureStatus::Redundant), 11);

    let mit1 = &defs[0];
    assert_eq!(
        (mit1.name.as_str(), mit1.bin_count, mit1.pct_change),
        ("MIT1", 2, 5.1)
    );
    let pi = defs.iter().find(|d| d.name == "PI").unwrap();
    assert_eq!(pi.bin_count, 10);
    let glyc = defs.iter().find(|d| d.name == "GLYC").unwrap();
    assert_eq!(glyc.bin_count, 1);

    let kept: Vec<&str> = defs
        .iter()
        .filter(|d| d.status != FeatureStatus::Redundant)
        .map(|d| d.name.as_str())
        .collect();
    assert_eq!(kept, DEFAULT_FEATURE_ORDER);
}

#[test]
fn unknown_localization_rows() {
    assert!(parse_state_vectors(UNKNOWNS).is_err());
    let rows = parse_state_vectors_with(UNKNOWNS, DuplicatePolicy::KeepFirst).unwrap();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.label.is_none() && r.subset == 0));
    let first = &rows[0];
    assert_eq!(first.id, "YAL003W");
    assert_eq!(first.milli, [1, 698, 145, 0, 156]);
    assert_eq!(first.prior.argmax(), Compartment::N);
    let yal022c = rows.iter().find(|r| r.id == "YAL022C").unwrap();
    assert_eq!(yal022c.prior.argmax(), Compartment::C);
}

#[test]
fn generated_datasets_round_trip() {
    for seed in 0..20 {
        let spec = SynthSpec {
            seed,
            n_proteins: 7 + seed as usize * 5,
            n_features: 1 + seed as usize % 4,
            bins_per_feature: 1 + seed as usize % 5,
            strictly_positive: seed % 2 == 0,
            ..Default::default()
        };
        let d = generate(&spec).unwrap();

        let sv = serialize_state_vectors(&d.proteins);
        let proteins = parse_state_vectors(&sv).unwrap();
        assert_eq!(proteins, d.proteins);
        assert_eq!(serialize_state_vectors(&proteins), sv);

        let fd = serialize_feature_defs(&d.features);
        let features = parse_feature_defs(&fd).unwrap();
        assert_eq!(features, d.features);

        let ft = serialize_feature_table(&d.feature_table);
        let table = parse_feature_table(&ft, Some(&features)).unwrap();
        assert_eq!(table, d.feature_table);
        assert_eq!(serialize_feature_table(&table), ft);

        let bn = serialize_bin_assignments(&d.bins);
        assert_eq!(parse_bin_assignments(&bn).unwrap(), d.bins);
    }
}

fn table_strategy() -> impl Strategy<Value = Vec<(u8, usize, [f64; 5])>> {
    prop::collection::vec(
        (0u8..6, 0usize..10, prop::array::uniform5(0.0f64..=1.0)),
        0..40,
    )
}

proptest! {
    #[test]
    fn arbitrary_tables_reparse_within_print_precision(entries in table_strategy()) {
        let mut table = FeatureVectorTable::new();
        for (f, bin, v) in &entries {
            table.insert(format!("FEAT{f}"), *bin, *v).unwrap();
        }
        let parsed = parse_feature_table(&serialize_feature_table(&table), None).unwrap();
        prop_assert_eq!(parsed.len(), table.len());
        for ((fa, ba, va), (fb, bb, vb)) in table.iter().zip(parsed.iter()) {
            prop_assert_eq!((fa, ba), (fb, bb));
            for (x, y) in va.iter().zip(vb) {
                prop_assert!((x - y).abs() <= 5e-7 + 1e-15);
            }
        }
    }

    #[test]
    fn arbitrary_assignments_round_trip(
        entries in prop::collection::vec(("[A-Z]{3}[0-9]{3}[WC]", "[A-Z0-9]{2,8}", 0usize..20), 0..60),
    ) {
        let mut bins = BinAssignment::new();
        for (p, f, b) in &entries {
            bins.insert(p.clone(), f.clone(), *b);
        }
        let text = serialize_bin_assignments(&bins);
        prop_assert_eq!(parse_bin_assignments(&text).unwrap(), bins);
    }
}
