//! Command-line surface and config-file merging.
//!
//! Every option is optional at the parsing layer; values resolve with the
//! precedence CLI flag > config file > built-in default. The config file is
//! a flat JSON object whose keys mirror the long flag names of the command
//! being run.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "chsh", version, about = "CHSH quantum correlation toolkit")]
pub struct Cli {
    /// Worker threads for data-parallel stages (0 = all logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON config file; CLI flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled dataset.
    Generate(GenerateArgs),
    /// Label behaviours from a JSONL file with a membership oracle.
    Classify(ClassifyArgs),
    /// Train an SVM or MLP on a labelled dataset.
    Train(TrainArgs),
    /// Evaluate a trained model.
    Eval(EvalArgs),
    /// Classify a 2D slice grid.
    Slice(SliceArgs),
    /// Monte Carlo relative volumes.
    Volume(VolumeArgs),
    /// Boundary-vs-see-saw comparison pipeline (distance histogram).
    Appendixa(AppendixaArgs),
}

macro_rules! merge_options {
    ($self:ident, $other:ident: $($field:ident),* $(,)?) => {
        $( if $self.$field.is_none() { $self.$field = $other.$field; } )*
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    /// corr4 | full8
    #[arg(long)]
    pub space: Option<String>,
    /// uniform | balanced | offset | spread | simplex
    #[arg(long)]
    pub method: Option<String>,
    /// Number of points (offset mode emits n/2 pairs).
    #[arg(long)]
    pub n: Option<usize>,
    /// Offset for boundary pairs.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Spread width.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// NPA level backing boundary searches (1 | 1ab | 2 | 3).
    #[arg(long)]
    pub level: Option<String>,
    /// Labelling oracle: tlm | local | npa:<level>.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Keep only directions exiting through the canonical CHSH facet.
    #[arg(long)]
    pub facet_filter: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Optional CSV mirror of the dataset.
    #[arg(long)]
    pub csv: Option<std::path::PathBuf>,
}

impl GenerateArgs {
    pub fn merge(mut self, other: GenerateArgs) -> Self {
        merge_options!(self, other: space, method, n, epsilon, sigma, level, oracle,
            facet_filter, seed, out, csv);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: Option<std::path::PathBuf>,
    /// tlm | local | npa:<level> | seesaw:<d>,<seeds>
    #[arg(long)]
    pub oracle: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl ClassifyArgs {
    pub fn merge(mut self, other: ClassifyArgs) -> Self {
        merge_options!(self, other: input, oracle, seed, out);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<std::path::PathBuf>,
    /// svm | mlp
    #[arg(long)]
    pub model: Option<String>,
    /// focal | bbce (MLP only)
    #[arg(long)]
    pub loss: Option<String>,
    /// Focal loss alpha.
    #[arg(long)]
    pub focal_alpha: Option<f64>,
    /// Focal loss gamma.
    #[arg(long)]
    pub focal_gamma: Option<f64>,
    /// Clamp deep weights non-negative (convex logits, MLP only).
    #[arg(long)]
    pub convex: Option<bool>,
    /// Training restarts, at most 10 (MLP only).
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed of the train/validation/test split.
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Comma-separated C grid (SVM only).
    #[arg(long)]
    pub grid_c: Option<String>,
    /// Comma-separated gamma grid (SVM only).
    #[arg(long)]
    pub grid_gamma: Option<String>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Optional JSON evaluation report on the held-out test split.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
}

impl TrainArgs {
    pub fn merge(mut self, other: TrainArgs) -> Self {
        merge_options!(self, other: data, model, loss, focal_alpha, focal_gamma, convex,
            restarts, seed, split_seed, grid_c, grid_gamma, out, report);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<std::path::PathBuf>,
    /// Labelled dataset; split with --split-seed to recover the test set.
    #[arg(long)]
    pub data: Option<std::path::PathBuf>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Extra uniform dataset for an unbalanced-accuracy row.
    #[arg(long)]
    pub unbalanced: Option<std::path::PathBuf>,
    /// Comma-separated spread widths.
    #[arg(long)]
    pub spread: Option<String>,
    #[arg(long)]
    pub spread_n: Option<usize>,
    /// NPA level for spread boundary harvesting.
    #[arg(long)]
    pub level: Option<String>,
    /// Comma-separated slice names (slice1, slice2, full8pr).
    #[arg(long)]
    pub slices: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl EvalArgs {
    pub fn merge(mut self, other: EvalArgs) -> Self {
        merge_options!(self, other: model, data, split_seed, unbalanced, spread, spread_n,
            level, slices, seed, out);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceArgs {
    /// slice1 | slice2 | full8pr
    #[arg(long)]
    pub spec: Option<String>,
    /// tlm | local | npa:<level> | model:<path>
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output path; .csv writes CSV, anything else JSON.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl SliceArgs {
    pub fn merge(mut self, other: SliceArgs) -> Self {
        merge_options!(self, other: spec, classifier, resolution, out);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeArgs {
    /// corr4 | full8 (ns region) — ignored for --region simplex.
    #[arg(long)]
    pub space: Option<String>,
    /// ns | simplex
    #[arg(long)]
    pub region: Option<String>,
    /// Comma-separated oracles: tlm | local | npa:<level>.
    #[arg(long)]
    pub oracles: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; .csv writes CSV, anything else JSON.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

impl VolumeArgs {
    pub fn merge(mut self, other: VolumeArgs) -> Self {
        merge_options!(self, other: space, region, oracles, n, seed, out);
        self
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixaArgs {
    /// Number of facet-filtered directions.
    #[arg(long)]
    pub n: Option<usize>,
    /// See-saw local dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// See-saw seeds per direction.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// NPA level of the boundary point (default 1ab).
    #[arg(long)]
    pub level: Option<String>,
    /// Sweep budget per seed.
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Prefix for <prefix>_hist.csv and <prefix>_summary.json.
    #[arg(long)]
    pub out_prefix: Option<String>,
}

impl AppendixaArgs {
    pub fn merge(mut self, other: AppendixaArgs) -> Self {
        merge_options!(self, other: n, d, seeds, level, max_sweeps, seed, out_prefix);
        self
    }
}
