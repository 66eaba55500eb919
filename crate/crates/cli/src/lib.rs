//! The `yeastloc` command line: validate, synth, train, predict, evaluate,
//! crossval and ablate.
//!
//! Exit codes: 0 success, 1 domain or validation failure, 2 I/O or parse failure.

pub mod chart;
pub mod config;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use yeastloc_core::io::{
    parse_bin_assignments, parse_feature_defs, parse_feature_table, parse_state_vectors_with,
    serialize_bin_assignments, serialize_feature_defs, serialize_feature_table,
    serialize_state_vectors,
};
use yeastloc_core::pipeline::EngineKind;
use yeastloc_core::{
    ablate_feature, build_training_pairs, cross_validate, evaluate, generate, train_emulator,
    validate_dataset, Dataset, DuplicatePolicy, Engine, Error, Mlp, PipelineConfig, SynthSpec,
};

pub use config::RunConfig;

pub const STATE_VECTORS_FILE: &str = "state_vectors.tsv";
pub const FEATURE_DEFS_FILE: &str = "feature_defs.tsv";
pub const FEATURE_TABLE_FILE: &str = "feature_table.tsv";
pub const BINS_FILE: &str = "bins.tsv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn domain(e: impl fmt::Display) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::parse(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "yeastloc",
    version,
    about = "Predict the subcellular compartment of yeast proteins"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a dataset is complete for the configured features.
    Validate(DataArgs),
    /// Write a synthetic Bayes-consistent dataset.
    Synth(SynthArgs),
    /// Train the network emulator on the training subsets.
    Train(TrainArgs),
    /// Localize one protein.
    Predict(PredictArgs),
    /// Score an engine on the test subsets.
    Evaluate(EngineArgs),
    /// Seven-fold cross-validation.
    Crossval(EngineArgs),
    /// Cross-validated accuracy change attributable to each feature.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DuplicateArg {
    Reject,
    KeepFirst,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding the four standard file names; explicit paths override it.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub state_vectors: Option<PathBuf>,
    #[arg(long)]
    pub feature_defs: Option<PathBuf>,
    #[arg(long)]
    pub feature_table: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<PathBuf>,
    /// Run configuration (`key = value` lines).
    #[arg(long, env = "YEASTLOC_CONFIG")]
    pub config: Option<PathBuf>,
    /// Overrides both the weight-initialization and shuffling seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// How repeated protein ids in the state-vector file are handled.
    #[arg(long, value_enum, default_value = "reject")]
    pub allow_duplicates: DuplicateArg,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub proteins: usize,
    #[arg(long, default_value_t = 5)]
    pub features: usize,
    #[arg(long, default_value_t = 3)]
    pub bins_per_feature: usize,
    #[arg(long, default_value_t = 1.0)]
    pub prior_concentration: f64,
    /// Allow zero fractions and zero prior components.
    #[arg(long)]
    pub non_strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Epoch-MSE history; defaults to `<model>.mse.tsv`.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Nn,
    Bayes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Ascii,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Defaults to `nn` when a model is given, `bayes` otherwise.
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub protein: String,
    /// Print every per-feature step.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum)]
    pub chart: Option<ChartArg>,
    /// SVG destination; defaults to `<protein>.svg`.
    #[arg(long)]
    pub chart_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Feature to ablate; repeatable. Defaults to every feature in the order.
    #[arg(long = "feature")]
    pub features: Vec<String>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn with_path(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Parse { line, message } => {
            CliError::parse(format!("{}:{line}: {message}", path.display()))
        }
        other => CliError::parse(format!("{}: {other}", path.display())),
    }
}

impl DataArgs {
    fn path(&self, explicit: &Option<PathBuf>, file: &str, flag: &str) -> CliResult<PathBuf> {
        explicit
            .clone()
            .or_else(|| self.data_dir.as_ref().map(|d| d.join(file)))
            .ok_or_else(|| CliError::parse(format!("missing --{flag} (or --data-dir)")))
    }

    pub fn load(&self) -> CliResult<Dataset> {
        let sv = self.path(&self.state_vectors, STATE_VECTORS_FILE, "state-vectors")?;
        let fd = self.path(&self.feature_defs, FEATURE_DEFS_FILE, "feature-defs")?;
        let ft = self.path(&self.feature_table, FEATURE_TABLE_FILE, "feature-table")?;
        let bn = self.path(&self.bins, BINS_FILE, "bins")?;
        let policy = match self.allow_duplicates {
            DuplicateArg::Reject => DuplicatePolicy::Reject,
            DuplicateArg::KeepFirst => DuplicatePolicy::KeepFirst,
        };
        let proteins = parse_state_vectors_with(&read(&sv)?, policy).map_err(with_path(&sv))?;
        let features = parse_feature_defs(&read(&fd)?).map_err(with_path(&fd))?;
        let feature_table =
            parse_feature_table(&read(&ft)?, Some(&features)).map_err(with_path(&ft))?;
        let bins = parse_bin_assignments(&read(&bn)?).map_err(with_path(&bn))?;
        Ok(Dataset {
            proteins,
            features,
            feature_table,
            bins,
        })
    }

    pub fn run_config(&self) -> CliResult<RunConfig> {
        let mut rc = match &self.config {
            Some(path) => RunConfig::parse(&read(path)?, &path.display().to_string())?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            rc.mlp_seed = Some(seed);
            rc.train_seed = Some(seed);
        }
        Ok(rc)
    }

    /// Loads the dataset, resolves the pipeline config and refuses incomplete data.
    fn prepare(&self) -> CliResult<(Dataset, PipelineConfig)> {
        let d = self.load()?;
        let cfg = self.run_config()?.pipeline(&d)?;
        let report = validate_dataset(&d, &cfg.feature_order);
        if !report.is_empty() {
            return Err(CliError::domain(format!(
                "dataset is incomplete for the configured features:\n{}",
                report.to_string().trim_end()
            )));
        }
        Ok((d, cfg))
    }
}

impl EngineArgs {
    fn kind(&self) -> EngineArg {
        self.engine.unwrap_or(if self.model.is_some() {
            EngineArg::Nn
        } else {
            EngineArg::Bayes
        })
    }

    fn build(&self) -> CliResult<Engine> {
        match self.kind() {
            EngineArg::Bayes => Ok(Engine::Bayes),
            EngineArg::Nn => {
                let path = self
                    .model
                    .as_ref()
                    .ok_or_else(|| CliError::domain("--engine nn requires --model"))?;
                let m = Mlp::deserialize(&read(path)?).map_err(with_path(path))?;
                Ok(Engine::Nn(m))
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::parse(format!("stdout: {e}")))
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Validate(a) => cmd_validate(&a, out),
        Command::Synth(a) => cmd_synth(&a).map(|()| 0),
        Command::Train(a) => cmd_train(&a, out, err).map(|()| 0),
        Command::Predict(a) => cmd_predict(&a, out).map(|()| 0),
        Command::Evaluate(a) => cmd_evaluate(&a, out).map(|()| 0),
        Command::Crossval(a) => cmd_crossval(&a, out).map(|()| 0),
        Command::Ablate(a) => cmd_ablate(&a, out).map(|()| 0),
    }
}

fn cmd_validate(a: &DataArgs, out: &mut dyn Write) -> CliResult<i32> {
    let d = a.load()?;
    let cfg = a.run_config()?.pipeline(&d)?;
    let report = validate_dataset(&d, &cfg.feature_order);
    emit(out, &report.to_string())?;
    Ok(if report.is_empty() { 0 } else { 1 })
}

fn cmd_synth(a: &SynthArgs) -> CliResult {
    let spec = SynthSpec {
        seed: a.seed,
        n_proteins: a.proteins,
        n_features: a.features,
        bins_per_feature: a.bins_per_feature,
        prior_concentration: a.prior_concentration,
        strictly_positive: !a.non_strict,
    };
    let d = generate(&spec).map_err(CliError::domain)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    write_file(
        &a.out.join(STATE_VECTORS_FILE),
        &serialize_state_vectors(&d.proteins),
    )?;
    write_file(
        &a.out.join(FEATURE_DEFS_FILE),
        &serialize_feature_defs(&d.features),
    )?;
    write_file(
        &a.out.join(FEATURE_TABLE_FILE),
        &serialize_feature_table(&d.feature_table),
    )?;
    write_file(&a.out.join(BINS_FILE), &serialize_bin_assignments(&d.bins))
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (d, mut cfg) = a.data.prepare()?;
    if let Some(n) = a.max_epochs {
        cfg.train.max_epochs = n;
        cfg.validate().map_err(CliError::domain)?;
    }
    let pairs = build_training_pairs(&d, &cfg).map_err(CliError::domain)?;
    let run = train_emulator(&pairs, &cfg).map_err(CliError::domain)?;
    write_file(&a.model, &run.model.serialize())?;
    let history = a.history.clone().unwrap_or_else(|| {
        let mut p = a.model.clone().into_os_string();
        p.push(".mse.tsv");
        PathBuf::from(p)
    });
    write_file(&history, &run.history_tsv())?;
    if !run.converged {
        let _ = writeln!(
            err,
            "warning: did not converge within {} epochs",
            cfg.train.max_epochs
        );
    }
    emit(
        out,
        &format!(
            "pairs\t{}\nepochs\t{}\nfinal_mse\t{:e}\nconverged\t{}\n",
            pairs.len(),
            run.history.len(),
            run.history.last().copied().unwrap_or(f64::NAN),
            run.converged
        ),
    )
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> CliResult {
    let (d, cfg) = a.engine.data.prepare()?;
    let engine = a.engine.build()?;
    let p = d
        .protein(&a.protein)
        .ok_or_else(|| CliError::domain(format!("unknown protein {}", a.protein)))?;
    let trace = engine.trace(p, &cfg, &d).map_err(CliError::domain)?;
    let name = match engine {
        Engine::Bayes => "bayes",
        Engine::Nn(_) => "nn",
    };
    let mut text = format!(
        "protein\t{}\nengine\t{name}\npredicted\t{}\n",
        p.id, trace.predicted
    );
    for (c, v) in yeastloc_core::Compartment::ALL
        .iter()
        .zip(trace.final_state.components())
    {
        text.push_str(&format!("{c}\t{v:.6}\n"));
    }
    if a.trace {
        text.push_str("# feature\tbin\tC\tN\tM\tT\tE\n");
        text.push_str(&trace.dump());
    }
    match a.chart {
        Some(ChartArg::Ascii) => text.push_str(&chart::ascii(&trace.final_state)),
        Some(ChartArg::Svg) => {
            let path = a
                .chart_out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.svg", p.id)));
            write_file(&path, &chart::svg(&trace.final_state, &p.id))?;
            text.push_str(&format!("chart\t{}\n", path.display()));
        }
        None => {}
    }
    emit(out, &text)
}

fn cmd_evaluate(a: &EngineArgs, out: &mut dyn Write) -> CliResult {
    let (d, cfg) = a.data.prepare()?;
    let engine = a.build()?;
    let report = evaluate(&d, &cfg, &engine).map_err(CliError::domain)?;
    emit(out, &report.to_tsv())
}

fn engine_kind(a: &EngineArgs) -> EngineKind {
    match a.kind() {
        EngineArg::Bayes => EngineKind::Bayes,
        EngineArg::Nn => EngineKind::Nn,
    }
}

fn cmd_crossval(a: &EngineArgs, out: &mut dyn Write) -> CliResult {
    let (d, cfg) = a.data.prepare()?;
    let cv = cross_validate(&d, &cfg, engine_kind(a)).map_err(CliError::domain)?;
    emit(out, &cv.to_tsv())
}

fn cmd_ablate(a: &AblateArgs, out: &mut dyn Write) -> CliResult {
    let (d, cfg) = a.engine.data.prepare()?;
    let features = if a.features.is_empty() {
        cfg.feature_order.clone()
    } else {
        a.features.clone()
    };
    let kind = engine_kind(&a.engine);
    let mut text = String::from("feature\tpct_change\n");
    for f in &features {
        let pct = ablate_feature(&d, &cfg, f, kind).map_err(CliError::domain)?;
        text.push_str(&format!("{f}\t{pct:.1}\n"));
    }
    emit(out, &text)
}
