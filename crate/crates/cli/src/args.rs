use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logme_core::rank::{Representation, Tuning};
use logme_core::store::LabelKind;
use logme_core::{Dtype, PoolingStrategy, SolverConfig, TauVariant};

#[derive(Debug, Parser)]
#[command(name = "logme", version, about = "Pool embeddings, compute LogME scores and rank encoders")]
pub struct Cli {
    /// Worker threads; falls back to LOGME_THREADS, then to the number of
    /// available cores. Never changes any output.
    #[arg(long, global = true, value_parser = parse_threads)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

pub fn parse_threads(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected an integer >= 1, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a token-level store into instance features.
    Pool(PoolArgs),
    /// Score one feature store against its labels.
    Score(ScoreArgs),
    /// Score every model in a jobs file and rank them.
    Rank(RankArgs),
    /// Build a ranking report from precomputed scores and performances.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Cls,
    MeanSeq,
    MeanToken,
}

impl From<StrategyArg> for PoolingStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Cls => PoolingStrategy::ClsToken,
            StrategyArg::MeanSeq => PoolingStrategy::MeanSequence,
            StrategyArg::MeanToken => PoolingStrategy::MeanToken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

impl From<DtypeArg> for Dtype {
    fn from(d: DtypeArg) -> Self {
        match d {
            DtypeArg::F32 => Dtype::F32,
            DtypeArg::F64 => Dtype::F64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelKindArg {
    Classes,
    Scalars,
}

impl From<LabelKindArg> for LabelKind {
    fn from(k: LabelKindArg) -> Self {
        match k {
            LabelKindArg::Classes => LabelKind::Classes,
            LabelKindArg::Scalars => LabelKind::Scalars,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuningArg {
    Frozen,
    Tuned,
}

impl From<TuningArg> for Tuning {
    fn from(t: TuningArg) -> Self {
        match t {
            TuningArg::Frozen => Tuning::Frozen,
            TuningArg::Tuned => Tuning::Tuned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReprArg {
    Cls,
    Mean,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Cls => Representation::Cls,
            ReprArg::Mean => Representation::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TauVariantArg {
    Symmetric,
    RankByY,
}

impl From<TauVariantArg> for TauVariant {
    fn from(v: TauVariantArg) -> Self {
        match v {
            TauVariantArg::Symmetric => TauVariant::Symmetric,
            TauVariantArg::RankByY => TauVariant::RankByY,
        }
    }
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Token-level feature store (or its manifest).
    #[arg(long)]
    pub input: PathBuf,
    /// Word-to-subword alignment JSON; required for mean-token.
    #[arg(long)]
    pub alignment: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    /// Output feature file; the manifest is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Count the [CLS] slot in sequence means.
    #[arg(long)]
    pub include_cls: bool,
    /// Output precision (default: same as the input).
    #[arg(long, value_enum)]
    pub dtype: Option<DtypeArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Relative change in evidence below which iteration stops.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl SolverArgs {
    pub fn apply(&self, mut config: SolverConfig) -> SolverConfig {
        if let Some(tol) = self.tol {
            config.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            config.max_iter = max_iter;
        }
        config
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Feature store, its manifest, or a CSV with the label in the last column.
    #[arg(long)]
    pub features: PathBuf,
    /// Label store (default: the one named by the manifest).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// How to read the label column of a CSV input.
    #[arg(long, value_enum, default_value = "classes")]
    pub label_kind: LabelKindArg,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Jobs file listing the models to score.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for per-model scores and the combined report.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the jobs file's solver settings.
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// CSV with model_id,score[,performance].
    #[arg(long)]
    pub scores: PathBuf,
    /// CSV with model_id,performance; overrides performances in --scores.
    #[arg(long)]
    pub perf: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset name for the report (default: the scores file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, value_enum, default_value = "frozen")]
    pub tuning: TuningArg,
    #[arg(long, value_enum, default_value = "mean")]
    pub repr: ReprArg,
    #[arg(long, value_enum, default_value = "symmetric")]
    pub tau_variant: TauVariantArg,
}
