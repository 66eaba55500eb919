//! Exact sequential state-vector updates.
//!
//! A protein's state vector is multiplied componentwise by the feature vector of
//! each bin it falls in, renormalized, and floored with a pseudo-count so no
//! compartment is ever eliminated outright.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::model::{normalize, Compartment, ProteinRecord, StateVector, N_COMPARTMENTS};

pub const DEFAULT_PSEUDO_COUNT: f64 = 0.0001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesConfig {
    pseudo_count: f64,
}

impl BayesConfig {
    /// `pseudo_count` must lie in (0, 0.01).
    pub fn new(pseudo_count: f64) -> Result<Self> {
        if !(pseudo_count > 0.0 && pseudo_count < 0.01) {
            return Err(Error::Config(format!(
                "pseudo_count {pseudo_count} outside (0, 0.01)"
            )));
        }
        Ok(BayesConfig { pseudo_count })
    }

    pub fn pseudo_count(&self) -> f64 {
        self.pseudo_count
    }
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            pseudo_count: DEFAULT_PSEUDO_COUNT,
        }
    }
}

/// One update in a localization chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub feature: String,
    pub bin: usize,
    pub input: StateVector,
    pub output: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationTrace {
    pub protein: String,
    pub steps: Vec<TraceStep>,
    pub final_state: StateVector,
    pub predicted: Compartment,
}

impl LocalizationTrace {
    /// One line per step: feature, bin, then the five output probabilities.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let _ = write!(out, "{}\t{}", s.feature, s.bin);
            for p in s.output.components() {
                let _ = write!(out, "\t{p:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Applies one feature vector to a state vector.
pub fn update(
    prior: &StateVector,
    feature_vec: &[f64; N_COMPARTMENTS],
    cfg: &BayesConfig,
) -> Result<StateVector> {
    let mut w = [0.0; N_COMPARTMENTS];
    for i in 0..N_COMPARTMENTS {
        let f = feature_vec[i];
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidComponent { index: i, value: f });
        }
        w[i] = prior.components()[i] * f;
    }
    let s = match normalize(w) {
        Ok(s) => s,
        Err(Error::DegenerateStateVector) => return Err(Error::Annihilated),
        Err(e) => return Err(e),
    };
    Ok(s.with_floor(cfg.pseudo_count))
}

/// Runs `step` over `feature_order`, starting from the pseudo-counted prior.
/// Shared by the exact engine and the network emulator.
pub(crate) fn run_chain<F>(
    p: &ProteinRecord,
    feature_order: &[String],
    d: &Dataset,
    pseudo_count: f64,
    mut step: F,
) -> Result<LocalizationTrace>
where
    F: FnMut(&StateVector, &[f64; N_COMPARTMENTS]) -> Result<StateVector>,
{
    let mut state = p.prior;
    let mut steps = Vec::with_capacity(feature_order.len());
    for (k, feature) in feature_order.iter().enumerate() {
        if k == 0 {
            state = state.with_floor(pseudo_count);
        }
        let (bin, fv) = d.feature_vector(&p.id, feature)?;
        let output = step(&state, fv)?;
        steps.push(TraceStep {
            feature: feature.clone(),
            bin,
            input: state,
            output,
        });
        state = output;
    }
    Ok(LocalizationTrace {
        protein: p.id.clone(),
        steps,
        predicted: state.argmax(),
        final_state: state,
    })
}

/// Chains [`update`] over `feature_order` for one protein.
pub fn localize(
    p: &ProteinRecord,
    feature_order: &[String],
    d: &Dataset,
    cfg: &BayesConfig,
) -> Result<LocalizationTrace> {
    run_chain(p, feature_order, d, cfg.pseudo_count, |s, fv| {
        update(s, fv, cfg)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinAssignment, FeatureVectorTable};

    fn sv(v: [f64; 5]) -> StateVector {
        normalize(v).unwrap()
    }

    fn close(a: &StateVector, b: &[f64; 5], tol: f64) -> bool {
        a.components()
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_prior_passes_feature_through() {
        let out = update(
            &StateVector::uniform(),
            &[0.5, 0.25, 0.1, 0.1, 0.05],
            &BayesConfig::default(),
        )
        .unwrap();
        assert!(close(&out, &[0.5, 0.25, 0.1, 0.1, 0.05], 1e-12));
    }

    #[test]
    fn zeros_are_pseudo_counted() {
        let out = update(
            &sv([0.3, 0.7, 0.0, 0.0, 0.0]),
            &[1.0; 5],
            &BayesConfig::default(),
        )
        .unwrap();
        // (0.3, 0.7, 1e-4, 1e-4, 1e-4) / 1.0003
        let want = [
            0.299_910_026_991_902_45,
            0.699_790_062_981_105_7,
            9.997_000_899_730_081e-5,
            9.997_000_899_730_081e-5,
            9.997_000_899_730_081e-5,
        ];
        assert!(close(&out, &want, 1e-15));
    }

    #[test]
    fn single_mass_prior_survives_uniform_feature() {
        let out = update(
            &sv([1.0, 0.0, 0.0, 0.0, 0.0]),
            &[0.5; 5],
            &BayesConfig::default(),
        )
        .unwrap();
        let e = 1e-4;
        let want = sv([1.0, e, e, e, e]);
        assert_eq!(out, want);
    }

    #[test]
    fn annihilation_is_an_error() {
        let r = update(
            &sv([1.0, 0.0, 0.0, 0.0, 0.0]),
            &[0.0, 0.5, 0.5, 0.5, 0.5],
            &BayesConfig::default(),
        );
        assert_eq!(r, Err(Error::Annihilated));
    }

    #[test]
    fn rejects_fraction_outside_unit_interval() {
        let r = update(
            &StateVector::uniform(),
            &[1.5, 0.0, 0.0, 0.0, 0.0],
            &BayesConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidComponent { index: 0, .. })));
    }

    #[test]
    fn config_bounds() {
        assert!(BayesConfig::new(0.0).is_err());
        assert!(BayesConfig::new(0.01).is_err());
        assert!(BayesConfig::new(0.001).is_ok());
        assert_eq!(BayesConfig::default().pseudo_count(), 0.0001);
    }

    fn dataset() -> Dataset {
        let p = ProteinRecord::new("YAL001C", Some(Compartment::N), 5, [1, 997, 0, 2, 0]).unwrap();
        let mut table = FeatureVectorTable::new();
        table.insert("A", 0, [0.5, 0.1, 0.2, 0.1, 0.1]).unwrap();
        table.insert("B", 1, [0.2, 0.2, 0.3, 0.2, 0.1]).unwrap();
        let mut bins = BinAssignment::new();
        bins.insert("YAL001C", "A", 0);
        bins.insert("YAL001C", "B", 1);
        Dataset {
            proteins: vec![p],
            feature_table: table,
            bins,
            ..Default::default()
        }
    }

    #[test]
    fn empty_chain_returns_prior() {
        let d = dataset();
        let t = localize(&d.proteins[0], &[], &d, &BayesConfig::default()).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.final_state, d.proteins[0].prior);
        assert_eq!(t.predicted, Compartment::N);
    }

    #[test]
    fn singleton_chain_matches_update() {
        let d = dataset();
        let cfg = BayesConfig::default();
        let t = localize(&d.proteins[0], &["A".to_string()], &d, &cfg).unwrap();
        let start = d.proteins[0].prior.with_floor(cfg.pseudo_count());
        let direct = update(&start, d.feature_table.get("A", 0).unwrap(), &cfg).unwrap();
        assert_eq!(t.final_state, direct);
        assert_eq!(t.steps[0].input, start);
    }

    #[test]
    fn chained_steps_link_and_dump() {
        let d = dataset();
        let order = vec!["A".to_string(), "B".to_string()];
        let t = localize(&d.proteins[0], &order, &d, &BayesConfig::default()).unwrap();
        assert_eq!(t.steps[0].output, t.steps[1].input);
        assert_eq!(t.predicted, t.final_state.argmax());
        let dump = t.dump();
        let lines: Vec<_> = dump.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("B\t1\t"));
        assert_eq!(lines[0].split('\t').count(), 7);
    }

    #[test]
    fn missing_assignment_names_protein_and_feature() {
        let d = dataset();
        let err = localize(
            &d.proteins[0],
            &["Z".to_string()],
            &d,
            &BayesConfig::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::MissingAssignment {
                protein: "YAL001C".into(),
                feature: "Z".into()
            }
        );
    }
}
