//! Subcellular localization of yeast proteins by sequential state-vector updates.
//!
//! A protein starts from a prior probability vector over five compartments and is
//! refined one binned feature at a time. [`bayes`] performs the exact
//! multiplicative update; [`mlp`] is a sigmoid network that [`pipeline`] trains to
//! emulate it and chains at prediction time.

pub mod bayes;
pub mod error;
pub mod io;
pub mod metrics;
pub mod mlp;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use bayes::{localize, update, BayesConfig, LocalizationTrace, TraceStep};
pub use error::{Error, Result};
pub use io::{validate_dataset, Dataset, DuplicatePolicy, Issue, ValidationReport};
pub use metrics::{accuracy, error_limit_pct, sensitivity, ConfusionMatrix};
pub use mlp::{gradient_check, gradient_check_against, Mlp, MlpConfig, ParamBuffer, TrainConfig};
pub use model::{
    argmax_compartment, normalize, BinAssignment, Compartment, FeatureCategory, FeatureDef,
    FeatureStatus, FeatureVectorTable, ProteinRecord, StateVector,
};
pub use pipeline::{
    ablate_feature, build_training_pairs, cross_validate, evaluate, predict_nn, train_emulator,
    CrossValidation, Engine, EngineKind, EvalReport, PipelineConfig, Predictor, TrainingPair,
    TrainingRun,
};
pub use synth::{brute_force_posterior, generate, SynthSpec};
