use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use demaudit_core::debias::{QueryWording, SamplingMode};
use demaudit_core::demographic::Axis;
use demaudit_core::ingest::CorpusFormat;
use demaudit_core::stats::Design;
use demaudit_core::Gamma;
use serde::Serialize;

/// Demographic-bias auditing and debiasing for text-to-image backends.
///
/// Precedence for every option: command-line flag, then the `--config`
/// file, then the built-in default.
#[derive(Parser, Debug, Serialize)]
#[command(name = "demaudit", version, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// All outputs go here; output names must stay inside it.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// error, warn, info, debug, trace or off.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: String,
    /// JSON file with a `version` field, global options and per-command
    /// blocks such as `{"audit": {"n": 500}}`.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Validate an embedding corpus and write it in canonical form.
    Ingest(IngestArgs),
    /// Train an RBF-SVM on one axis.
    Train(TrainArgs),
    /// Score a trained model on a labeled corpus.
    Evaluate(EvaluateArgs),
    /// Run a prompt campaign against a backend.
    Audit(AuditArgs),
    /// Line up audit reports of the same campaign.
    Compare(CompareArgs),
    /// Per-image homogenization scores and their densities.
    Homogenize(HomogenizeArgs),
    #[command(subcommand)]
    Debias(DebiasCommand),
    #[command(subcommand)]
    Survey(SurveyCommand),
    /// Draw embeddings from the synthetic backend.
    Simulate(SimulateArgs),
}

fn gamma_as_flag<S: serde::Serializer>(g: &Gamma, s: S) -> Result<S::Ok, S::Error> {
    match g {
        Gamma::Scale => s.serialize_str("scale"),
        Gamma::Value(v) => s.serialize_str(&v.to_string()),
    }
}

impl Command {
    /// Primary output name, relative to the output directory.
    pub fn out(&self) -> &std::path::Path {
        match self {
            Command::Ingest(a) => &a.out,
            Command::Train(a) => &a.out,
            Command::Evaluate(a) => &a.out,
            Command::Audit(a) => &a.out,
            Command::Compare(a) => &a.out,
            Command::Homogenize(a) => &a.out,
            Command::Debias(DebiasCommand::Sample(a)) => &a.out,
            Command::Debias(DebiasCommand::Regulate(a)) => &a.out,
            Command::Survey(SurveyCommand::Analyze(a)) => &a.out,
            Command::Survey(SurveyCommand::Power(a)) => &a.out,
            Command::Simulate(a) => &a.out,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Audit(_) => "audit",
            Command::Compare(_) => "compare",
            Command::Homogenize(_) => "homogenize",
            Command::Debias(DebiasCommand::Sample(_)) => "debias sample",
            Command::Debias(DebiasCommand::Regulate(_)) => "debias regulate",
            Command::Survey(SurveyCommand::Analyze(_)) => "survey analyze",
            Command::Survey(SurveyCommand::Power(_)) => "survey power",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the input's extension.
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long)]
    pub merge_fairface: bool,
    #[arg(long)]
    pub laion_filter: bool,
    #[arg(long, default_value = "corpus.jsonl")]
    pub out: PathBuf,
    /// Defaults to the output's extension.
    #[arg(long)]
    pub out_format: Option<CorpusFormat>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long, default_value = "race")]
    pub axis: Axis,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value = "scale")]
    #[serde(serialize_with = "gamma_as_flag")]
    pub gamma: Gamma,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Hold out this fraction (seeded, stratified) and evaluate on it.
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long, default_value = "metrics.json")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantMode {
    None,
    Iid,
    Balanced,
}

#[derive(Args, Debug, Serialize)]
pub struct AuditArgs {
    /// `sim:<preset>`, `sim:@<world.json>` or `remote` (URL from
    /// DEMAUDIT_BACKEND_URL).
    #[arg(long)]
    pub backend: String,
    /// professions32, attributes8 or person.
    #[arg(long)]
    pub campaign: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Embedding dimension for simulator presets; defaults to the model's.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Seed that lays out a preset's embedding clouds.
    #[arg(long, default_value_t = 0)]
    pub world_seed: u64,
    /// Without models, the simulator's true labels are used.
    #[arg(long, requires = "gender_model")]
    pub race_model: Option<PathBuf>,
    #[arg(long, requires = "race_model")]
    pub gender_model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    pub variants: VariantMode,
    /// `uniform` or a JSON file of cell probabilities.
    #[arg(long, default_value = "uniform")]
    pub target: String,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// Also write the long-format CSV.
    #[arg(long)]
    pub csv: bool,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    /// Audit reports; the first is the reference.
    #[arg(long = "report", required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long, default_value = "comparison.json")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Race,
    File,
}

#[derive(Args, Debug, Serialize)]
pub struct HomogenizeArgs {
    /// `label=path` or `path` (labelled by file stem). Repeatable.
    #[arg(long, required = true)]
    pub input: Vec<String>,
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long, value_enum, default_value = "race")]
    pub group_by: GroupBy,
    /// Labels records that carry no race.
    #[arg(long)]
    pub race_model: Option<PathBuf>,
    /// Larger groups are subsampled (seeded) to this size.
    #[arg(long, default_value_t = demaudit_core::embedding::FULL_PASS_LIMIT)]
    pub max_items: usize,
    #[arg(long, default_value_t = 256)]
    pub kde_points: usize,
    /// `groupA:groupB` pairs to test. Repeatable.
    #[arg(long)]
    pub test: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "homogenization.json")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DebiasCommand {
    /// Draw model variants from a target distribution.
    Sample(SampleArgs),
    /// Inject demographic words into prompts that lack them.
    Regulate(RegulateArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value = "uniform")]
    pub target: String,
    #[arg(long, default_value_t = 12_000)]
    pub n: usize,
    #[arg(long, default_value = "iid")]
    pub mode: SamplingMode,
    #[arg(long, default_value = "variants.json")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClientKind {
    /// Offline keyword tables.
    Mock,
    /// Chat-completion endpoint from DEMAUDIT_LLM_* variables.
    Remote,
}

#[derive(Args, Debug, Serialize)]
pub struct RegulateArgs {
    /// Repeatable.
    #[arg(long)]
    pub prompt: Vec<String>,
    /// One prompt per line.
    #[arg(long)]
    pub prompts_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mock")]
    pub client: ClientKind,
    #[arg(long, default_value = "uniform")]
    pub target: String,
    #[arg(long, default_value = "profession")]
    pub wording: QueryWording,
    #[arg(long, default_value = "regulated.json")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyCommand {
    /// Pairwise tests and box statistics for survey responses.
    Analyze(AnalyzeArgs),
    /// Sample size for a t-test.
    Power(PowerArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "condition")]
    pub group_col: String,
    #[arg(long, default_value = "answer")]
    pub value_col: String,
    /// `a:b,c:d`. Defaults to every pair of groups.
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "survey.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct PowerArgs {
    #[arg(long, default_value_t = 0.5)]
    pub effect: f64,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "two_sample")]
    pub design: Design,
    #[arg(long, default_value = "power.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    /// `sim:<preset>` or `sim:@<world.json>`.
    #[arg(long)]
    pub backend: String,
    /// Prompt group to draw from. Repeatable.
    #[arg(long, required = true)]
    pub group: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Cell such as `Black/Female`.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = demaudit_core::simulator::DEFAULT_DIM)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub world_seed: u64,
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    /// Also write the world configuration.
    #[arg(long)]
    pub dump_world: bool,
    #[arg(long, default_value = "corpus.jsonl")]
    pub out: PathBuf,
}
