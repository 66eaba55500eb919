//! Deterministic Bayes-consistent synthetic datasets and a brute-force posterior
//! oracle.
//!
//! Generated labels are the exact engine's prediction over every feature, so a
//! perfect emulator scores 100% on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::bayes::{localize, BayesConfig};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::model::{
    BinAssignment, FeatureCategory, FeatureDef, FeatureStatus, FeatureVectorTable, ProteinRecord,
    StateVector, N_COMPARTMENTS, N_SUBSETS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_proteins: usize,
    pub n_features: usize,
    pub bins_per_feature: usize,
    /// Gamma shape of the per-compartment prior draws; small values give peaked priors.
    pub prior_concentration: f64,
    /// Keep every prior component and feature fraction strictly positive.
    pub strictly_positive: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            n_proteins: 200,
            n_features: 5,
            bins_per_feature: 3,
            prior_concentration: 1.0,
            strictly_positive: true,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_proteins < usize::from(N_SUBSETS) {
            return Err(Error::Config(format!(
                "n_proteins {} leaves some of the {N_SUBSETS} subsets empty",
                self.n_proteins
            )));
        }
        if self.n_features < 1 || self.bins_per_feature < 1 {
            return Err(Error::Config(
                "n_features and bins_per_feature must be at least 1".into(),
            ));
        }
        if !(self.prior_concentration > 0.0 && self.prior_concentration.is_finite()) {
            return Err(Error::Config("prior_concentration must be positive".into()));
        }
        Ok(())
    }
}

pub fn feature_name(k: usize) -> String {
    format!("F{:02}", k + 1)
}

pub fn protein_id(i: usize) -> String {
    format!("SYN{i:04}")
}

/// Fractions are quantized to the six decimals the table format stores, so a
/// generated dataset equals its own serialized-and-reparsed form.
fn quantize(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn feature_vector(rng: &mut ChaCha8Rng, strictly_positive: bool) -> [f64; N_COMPARTMENTS] {
    if strictly_positive {
        return std::array::from_fn(|_| quantize(rng.random_range(0.05..0.95)));
    }
    loop {
        let v: [f64; N_COMPARTMENTS] = std::array::from_fn(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                quantize(rng.random_range(0.0..=1.0))
            }
        });
        if v.iter().any(|&x| x > 0.0) {
            return v;
        }
    }
}

/// Largest-remainder apportionment of `weights` into integers summing to 1000,
/// optionally reserving one unit per component.
fn to_milli(weights: [f64; N_COMPARTMENTS], reserve_one: bool) -> [u32; N_COMPARTMENTS] {
    let base: u32 = if reserve_one { 1 } else { 0 };
    let budget = 1000 - base * N_COMPARTMENTS as u32;
    let sum: f64 = weights.iter().sum();
    let exact = weights.map(|w| w / sum * f64::from(budget));
    let mut milli = exact.map(|e| e.floor() as u32);
    let mut left = budget - milli.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..N_COMPARTMENTS).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        milli[i] += 1;
        left -= 1;
    }
    milli.map(|m| m + base)
}

/// Builds a synthetic dataset whose labels are the exact engine's predictions.
pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gamma = Gamma::new(spec.prior_concentration, 1.0)
        .map_err(|e| Error::Config(format!("prior_concentration: {e}")))?;

    let features: Vec<FeatureDef> = (0..spec.n_features)
        .map(|k| FeatureDef {
            name: feature_name(k),
            category: FeatureCategory::Motif,
            subtype: "synthetic".into(),
            pct_change: 0.0,
            status: FeatureStatus::Important,
            bin_count: spec.bins_per_feature,
        })
        .collect();

    let mut feature_table = FeatureVectorTable::new();
    for f in &features {
        for bin in 0..f.bin_count {
            feature_table.insert(
                f.name.clone(),
                bin,
                feature_vector(&mut rng, spec.strictly_positive),
            )?;
        }
    }

    let mut proteins = Vec::with_capacity(spec.n_proteins);
    let mut bins = BinAssignment::new();
    for i in 0..spec.n_proteins {
        let id = protein_id(i);
        let weights: [f64; N_COMPARTMENTS] = std::array::from_fn(|_| {
            let g: f64 = gamma.sample(&mut rng);
            // a zero draw from small shapes would leave the weights degenerate
            g.max(1e-12)
        });
        let milli = to_milli(weights, spec.strictly_positive);
        let subset = (i % usize::from(N_SUBSETS)) as u8;
        proteins.push(ProteinRecord::new(id.clone(), None, subset, milli)?);
        for f in &features {
            bins.insert(id.clone(), f.name.clone(), rng.random_range(0..f.bin_count));
        }
    }

    let mut d = Dataset {
        proteins,
        features,
        feature_table,
        bins,
    };
    let order: Vec<String> = d.features.iter().map(|f| f.name.clone()).collect();
    let cfg = BayesConfig::default();
    let labels = d
        .proteins
        .iter()
        .map(|p| localize(p, &order, &d, &cfg).map(|t| t.predicted))
        .collect::<Result<Vec<_>>>()?;
    for (p, label) in d.proteins.iter_mut().zip(labels) {
        p.label = Some(label);
    }
    Ok(d)
}

/// Posterior from one componentwise product of the prior and every feature
/// vector, normalized once at the end. Deliberately shares no code with the
/// sequential engine.
pub fn brute_force_posterior(
    prior: &StateVector,
    feature_vectors: &[[f64; N_COMPARTMENTS]],
) -> Result<StateVector> {
    let mut product = *prior.components();
    for fv in feature_vectors {
        for (p, f) in product.iter_mut().zip(fv) {
            *p *= f;
        }
    }
    let total: f64 = product.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateStateVector);
    }
    Ok(StateVector::from_normalized(product.map(|p| p / total)))
}
