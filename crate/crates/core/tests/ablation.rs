use yeastloc_core::{
    ablate_feature, brute_force_posterior, generate, Compartment, Dataset, EngineKind,
    FeatureCategory, FeatureDef, FeatureStatus, PipelineConfig, ProteinRecord, SynthSpec,
};

fn def(name: &str, bins: usize) -> FeatureDef {
    FeatureDef {
        name: name.into(),
        category: FeatureCategory::Motif,
        subtype: "test".into(),
        pct_change: 0.0,
        status: FeatureStatus::Important,
        bin_count: bins,
    }
}

/// Uniform priors; `SIGNAL` alone decides the label, `FLAT` carries no information.
fn one_signal_dataset() -> Dataset {
    let mut d = Dataset {
        proteins: Vec::new(),
        features: vec![def("SIGNAL", 5), def("FLAT", 1)],
        feature_table: Default::default(),
        bins: Default::default(),
    };
    for c in Compartment::ALL {
        let mut v = [0.1; 5];
        v[c.index()] = 0.9;
        d.feature_table.insert("SIGNAL", c.index(), v).unwrap();
    }
    d.feature_table.insert("FLAT", 0, [0.5; 5]).unwrap();
    for i in 0..35usize {
        let c = Compartment::from_index(i % 5).unwrap();
        let id = format!("P{i:03}");
        d.proteins
            .push(ProteinRecord::new(&id, Some(c), (i % 7) as u8, [200; 5]).unwrap());
        d.bins.insert(&id, "SIGNAL", c.index());
        d.bins.insert(&id, "FLAT", 0);
    }
    d
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn removing_the_informative_feature_costs_accuracy() {
    let d = one_signal_dataset();
    let cfg = PipelineConfig::with_features(&names(&["SIGNAL", "FLAT"]));
    let pct = ablate_feature(&d, &cfg, "SIGNAL", EngineKind::Bayes).unwrap();
    // Without it every prior stays uniform and resolves to C: one hit in five.
    assert!((pct - 80.0).abs() < 1e-9, "{pct}");
}

#[test]
fn appending_the_informative_feature_reports_the_same_sign() {
    let d = one_signal_dataset();
    let cfg = PipelineConfig::with_features(&names(&["FLAT"]));
    let pct = ablate_feature(&d, &cfg, "SIGNAL", EngineKind::Bayes).unwrap();
    assert!((pct - 80.0).abs() < 1e-9, "{pct}");
}

#[test]
fn flat_feature_is_exactly_neutral() {
    let d = one_signal_dataset();
    let cfg = PipelineConfig::with_features(&names(&["SIGNAL", "FLAT"]));
    assert_eq!(
        ablate_feature(&d, &cfg, "FLAT", EngineKind::Bayes).unwrap(),
        0.0
    );
}

#[test]
fn removing_the_only_feature_is_an_error() {
    let d = one_signal_dataset();
    let cfg = PipelineConfig::with_features(&names(&["SIGNAL"]));
    assert!(ablate_feature(&d, &cfg, "SIGNAL", EngineKind::Bayes).is_err());
}

/// Repeating a feature squares its likelihood ratios, which flips the argmax
/// for a sizeable share of proteins on this corpus. The ablation delta must
/// equal minus the share of flipped labels found by the brute-force product.
#[test]
fn duplicated_feature_delta_matches_flip_count() {
    let mut d = generate(&SynthSpec {
        seed: 17,
        n_proteins: 700,
        ..Default::default()
    })
    .unwrap();
    let source = d.features[0].clone();
    d.features.push(FeatureDef {
        name: "DUP".into(),
        ..source.clone()
    });
    for b in 0..source.bin_count {
        let v = *d.feature_table.get(&source.name, b).unwrap();
        d.feature_table.insert("DUP", b, v).unwrap();
    }
    for p in &d.proteins {
        let (b, _) = d.feature_vector(&p.id, &source.name).unwrap();
        d.bins.insert(&p.id, "DUP", b);
    }
    let order: Vec<String> = d.features.iter().map(|f| f.name.clone()).collect();

    let mut flipped = 0;
    for p in &d.proteins {
        let fvs: Vec<[f64; 5]> = order
            .iter()
            .map(|f| *d.feature_vector(&p.id, f).unwrap().1)
            .collect();
        let post = brute_force_posterior(&p.prior, &fvs).unwrap();
        if Some(post.argmax()) != p.label {
            flipped += 1;
        }
    }
    assert!(flipped > 0);

    // 700 proteins give seven folds of exactly 100, so the unweighted mean is exact.
    let cfg = PipelineConfig::with_features(&order);
    let pct = ablate_feature(&d, &cfg, "DUP", EngineKind::Bayes).unwrap();
    let expected = -100.0 * flipped as f64 / 700.0;
    assert!((pct - expected).abs() < 1e-9, "{pct} vs {expected}");
}
