//! Teacher-forced training of the network emulator, chained network inference,
//! evaluation, 7-fold cross-validation and single-feature ablation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayes::{localize, run_chain, BayesConfig, LocalizationTrace};
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::metrics::{error_limit_pct, fmt_fraction, sensitivity, ConfusionMatrix};
use crate::mlp::{Mlp, MlpConfig, ParamBuffer, TrainConfig, INPUT_SIZE, OUTPUT_SIZE};
use crate::model::{normalize, Compartment, ProteinRecord, N_COMPARTMENTS, N_SUBSETS};

/// The ten "important" and nine "included" features of the yeast feature table,
/// in file order. A 13-feature subset is reported to work as well, but its
/// members are unknown, so all 19 are used.
pub const DEFAULT_FEATURE_ORDER: [&str; 19] = [
    "MIT1", "GLYC", "SIGNALP", "SIG1", "NUG1", "PI", "TMS1", "MGAYOUNG", "KNOCKOUT", "MRLASD",
    "PLMNEW1", "FARN", "GGI", "MIT2", "HDEL", "NUC2", "POX1", "MRCYELU", "MRCYCSD",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub feature_order: Vec<String>,
    pub bayes: BayesConfig,
    pub mlp: MlpConfig,
    pub train: TrainConfig,
    pub train_subsets: BTreeSet<u8>,
    pub test_subsets: BTreeSet<u8>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            feature_order: DEFAULT_FEATURE_ORDER
                .iter()
                .map(|s| s.to_string())
                .collect(),
            bayes: BayesConfig::default(),
            mlp: MlpConfig::default(),
            train: TrainConfig::default(),
            train_subsets: (0..6).collect(),
            test_subsets: BTreeSet::from([6]),
        }
    }
}

impl PipelineConfig {
    pub fn with_features(features: &[String]) -> Self {
        PipelineConfig {
            feature_order: features.to_vec(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_order.is_empty() {
            return Err(Error::Config("feature_order must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for f in &self.feature_order {
            if !seen.insert(f) {
                return Err(Error::Config(format!("feature {f} listed twice")));
            }
        }
        if let Some(s) = self
            .train_subsets
            .iter()
            .chain(&self.test_subsets)
            .find(|&&s| s >= N_SUBSETS)
        {
            return Err(Error::Config(format!("subset {s} outside 0..6")));
        }
        if !self.train_subsets.is_disjoint(&self.test_subsets) {
            return Err(Error::Config(
                "train_subsets and test_subsets overlap".into(),
            ));
        }
        self.mlp.validate()?;
        self.train.validate()
    }
}

/// One teacher-forced (input, target) example for the emulator.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    /// Current state vector followed by the feature vector.
    pub input: [f64; INPUT_SIZE],
    /// Exact engine output for that step.
    pub target: [f64; OUTPUT_SIZE],
    pub protein: String,
    pub feature: String,
    pub step: usize,
}

fn network_input(state: &[f64; N_COMPARTMENTS], fv: &[f64; N_COMPARTMENTS]) -> [f64; INPUT_SIZE] {
    let mut x = [0.0; INPUT_SIZE];
    x[..N_COMPARTMENTS].copy_from_slice(state);
    x[N_COMPARTMENTS..].copy_from_slice(fv);
    x
}

/// Pairs from every protein (labeled or not) in the training subsets. The chain
/// always advances on the exact engine's output.
pub fn build_training_pairs(d: &Dataset, cfg: &PipelineConfig) -> Result<Vec<TrainingPair>> {
    let mut pairs = Vec::new();
    for p in d
        .proteins
        .iter()
        .filter(|p| cfg.train_subsets.contains(&p.subset))
    {
        let trace = localize(p, &cfg.feature_order, d, &cfg.bayes)?;
        for (step, s) in trace.steps.into_iter().enumerate() {
            let fv = d
                .feature_table
                .get(&s.feature, s.bin)
                .expect("bin resolved during localize");
            pairs.push(TrainingPair {
                input: network_input(s.input.components(), fv),
                target: *s.output.components(),
                protein: p.id.clone(),
                feature: s.feature,
                step,
            });
        }
    }
    Ok(pairs)
}

/// A trained emulator and its per-epoch mean squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub model: Mlp,
    pub history: Vec<f64>,
    /// False when `max_epochs` ran out before the threshold was reached.
    pub converged: bool,
}

impl TrainingRun {
    /// Two columns: 1-based epoch and epoch-mean MSE.
    pub fn history_tsv(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.history.iter().enumerate() {
            let _ = writeln!(out, "{}\t{e}", i + 1);
        }
        out
    }
}

pub fn train_emulator(pairs: &[TrainingPair], cfg: &PipelineConfig) -> Result<TrainingRun> {
    if pairs.is_empty() {
        return Err(Error::Empty("no training pairs"));
    }
    cfg.train.validate()?;
    let mut model = Mlp::init(&cfg.mlp)?;
    let mut velocity = ParamBuffer::zeros_like(&model);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.train.max_epochs {
        if cfg.train.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for &i in &order {
            let pair = &pairs[i];
            total += model.train_step(&pair.input, &pair.target, &cfg.train, &mut velocity)?;
        }
        let epoch_mse = total / pairs.len() as f64;
        history.push(epoch_mse);
        if epoch_mse < cfg.train.mse_threshold {
            converged = true;
            break;
        }
    }
    Ok(TrainingRun {
        model,
        history,
        converged,
    })
}

/// Chains the network over `cfg.feature_order`, renormalizing its outputs at
/// every step.
pub fn predict_nn(
    m: &Mlp,
    p: &ProteinRecord,
    cfg: &PipelineConfig,
    d: &Dataset,
) -> Result<LocalizationTrace> {
    run_chain(
        p,
        &cfg.feature_order,
        d,
        cfg.bayes.pseudo_count(),
        |s, fv| normalize(m.forward(&network_input(s.components(), fv))),
    )
}

/// Anything that can assign a compartment to a protein.
pub trait Predictor {
    fn predict(&self, p: &ProteinRecord, cfg: &PipelineConfig, d: &Dataset) -> Result<Compartment>;
}

/// The two localization engines.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Bayes,
    Nn(Mlp),
}

impl Engine {
    pub fn trace(
        &self,
        p: &ProteinRecord,
        cfg: &PipelineConfig,
        d: &Dataset,
    ) -> Result<LocalizationTrace> {
        match self {
            Engine::Bayes => localize(p, &cfg.feature_order, d, &cfg.bayes),
            Engine::Nn(m) => predict_nn(m, p, cfg, d),
        }
    }
}

impl Predictor for Engine {
    fn predict(&self, p: &ProteinRecord, cfg: &PipelineConfig, d: &Dataset) -> Result<Compartment> {
        self.trace(p, cfg, d).map(|t| t.predicted)
    }
}

/// Which engine cross-validation should build for each fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Bayes,
    Nn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetScore {
    pub subset: u8,
    pub n_proteins: usize,
    pub n_correct: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_proteins: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    /// 100 × (1 − accuracy).
    pub error_limit: f64,
    pub confusion: ConfusionMatrix,
    pub per_subset: Vec<SubsetScore>,
}

impl EvalReport {
    /// Overall figures, the confusion matrix, then per-compartment sensitivity.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_proteins\t{}", self.n_proteins);
        let _ = writeln!(out, "n_correct\t{}", self.n_correct);
        let _ = writeln!(out, "accuracy\t{:.3}", self.accuracy);
        let _ = writeln!(out, "error_limit_pct\t{:.1}", self.error_limit);
        out.push_str(&self.confusion.to_tsv());
        out.push_str("sensitivity");
        for c in Compartment::ALL {
            let _ = write!(out, "\t{}", fmt_fraction(sensitivity(&self.confusion, c)));
        }
        out.push('\n');
        out
    }
}

/// Scores `engine` against the labeled proteins of `cfg.test_subsets`.
pub fn evaluate<P: Predictor + ?Sized>(
    d: &Dataset,
    cfg: &PipelineConfig,
    engine: &P,
) -> Result<EvalReport> {
    let mut confusion = ConfusionMatrix::new();
    let mut per_subset: Vec<SubsetScore> = cfg
        .test_subsets
        .iter()
        .map(|&subset| SubsetScore {
            subset,
            n_proteins: 0,
            n_correct: 0,
        })
        .collect();
    for p in &d.proteins {
        let Some(label) = p.label else { continue };
        let Some(score) = per_subset.iter_mut().find(|s| s.subset == p.subset) else {
            continue;
        };
        let predicted = engine.predict(p, cfg, d)?;
        confusion.record(label, predicted);
        score.n_proteins += 1;
        score.n_correct += usize::from(predicted == label);
    }
    let n_proteins = confusion.total() as usize;
    if n_proteins == 0 {
        return Err(Error::NoLabeledProteins);
    }
    let n_correct = confusion.correct() as usize;
    let accuracy = n_correct as f64 / n_proteins as f64;
    Ok(EvalReport {
        n_proteins,
        n_correct,
        accuracy,
        error_limit: error_limit_pct(accuracy),
        confusion,
        per_subset,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    /// Report `f` scores subset `f`.
    pub folds: Vec<EvalReport>,
    /// Unweighted mean of the fold accuracies.
    pub mean_accuracy: f64,
}

impl CrossValidation {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tn_proteins\tn_correct\taccuracy\n");
        for (f, r) in self.folds.iter().enumerate() {
            let _ = writeln!(
                out,
                "{f}\t{}\t{}\t{:.3}",
                r.n_proteins, r.n_correct, r.accuracy
            );
        }
        let _ = writeln!(out, "mean\t\t\t{:.3}", self.mean_accuracy);
        out
    }
}

fn fold_config(cfg: &PipelineConfig, fold: u8) -> PipelineConfig {
    PipelineConfig {
        train_subsets: (0..N_SUBSETS).filter(|&s| s != fold).collect(),
        test_subsets: BTreeSet::from([fold]),
        ..cfg.clone()
    }
}

fn run_fold(d: &Dataset, cfg: &PipelineConfig, kind: EngineKind) -> Result<EvalReport> {
    let engine = match kind {
        EngineKind::Bayes => Engine::Bayes,
        EngineKind::Nn => {
            let pairs = build_training_pairs(d, cfg)?;
            Engine::Nn(train_emulator(&pairs, cfg)?.model)
        }
    };
    evaluate(d, cfg, &engine)
}

/// Trains on six subsets and tests on the seventh, for each of the seven folds.
/// Network folds train concurrently, each with its own model.
pub fn cross_validate(
    d: &Dataset,
    cfg: &PipelineConfig,
    kind: EngineKind,
) -> Result<CrossValidation> {
    cfg.validate()?;
    for fold in 0..N_SUBSETS {
        if !d
            .proteins
            .iter()
            .any(|p| p.subset == fold && p.label.is_some())
        {
            return Err(Error::MissingFold(fold));
        }
    }
    let configs: Vec<PipelineConfig> = (0..N_SUBSETS).map(|f| fold_config(cfg, f)).collect();
    let folds: Vec<EvalReport> = match kind {
        EngineKind::Bayes => configs
            .iter()
            .map(|c| run_fold(d, c, kind))
            .collect::<Result<_>>()?,
        EngineKind::Nn => std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| scope.spawn(move || run_fold(d, c, kind)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("fold thread panicked"))
                .collect::<Result<Vec<_>>>()
        })?,
    };
    let mean_accuracy = folds.iter().map(|r| r.accuracy).sum::<f64>() / folds.len() as f64;
    Ok(CrossValidation {
        folds,
        mean_accuracy,
    })
}

/// Change in cross-validated accuracy, in percentage points, attributable to
/// `feature`: accuracy with it minus accuracy without it. A feature already in
/// the order is removed; an absent one is appended.
pub fn ablate_feature(
    d: &Dataset,
    cfg: &PipelineConfig,
    feature: &str,
    kind: EngineKind,
) -> Result<f64> {
    if d.feature(feature).is_none() {
        return Err(Error::UnknownFeature(feature.to_string()));
    }
    let mut other = cfg.clone();
    let present = cfg.feature_order.iter().any(|f| f == feature);
    if present {
        other.feature_order.retain(|f| f != feature);
        if other.feature_order.is_empty() {
            return Err(Error::Config(format!(
                "cannot ablate {feature}: it is the only feature"
            )));
        }
    } else {
        other.feature_order.push(feature.to_string());
    }
    let base = cross_validate(d, cfg, kind)?.mean_accuracy;
    let alt = cross_validate(d, &other, kind)?.mean_accuracy;
    let (with, without) = if present { (base, alt) } else { (alt, base) };
    Ok(100.0 * with - 100.0 * without)
}
