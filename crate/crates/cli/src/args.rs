use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vesseltok_core::extract::DEFAULT_TAU;
use vesseltok_core::field::{FieldConfig, DEFAULT_CHUNK, DEFAULT_PSEUDO_RADIUS, DESK_GRID};
use vesseltok_core::metrics::{MetricsConfig, CLDICE_EPSILON};

#[derive(Parser, Debug)]
#[command(name = "vesseltok", version, about = "Centerline graph tokenization and reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic graphs with known Betti numbers.
    Synth(SynthArgs),
    /// Rasterize a graph into a binary occupancy grid.
    Rasterize(RasterizeArgs),
    /// Rasterize, extract and score a graph against itself.
    Roundtrip(RoundtripArgs),
    /// Train the tokenizer on one or more graphs.
    Train(TrainArgs),
    /// Encode a graph into latent tokens.
    Encode(EncodeArgs),
    /// Decode latent tokens into a probability grid.
    Decode(DecodeArgs),
    /// Recover a centerline graph from an occupancy grid.
    Extract(ExtractArgs),
    /// Score a predicted graph against a reference graph.
    Eval(EvalArgs),
    /// Sweep the pseudo radius over a phantom set and check the loop trade-off.
    AblateRadius(AblateRadiusArgs),
    /// Train small tokenizers over a (K, C) grid and report fidelity and compression.
    AblateLatent(AblateLatentArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Pseudo radius of the occupancy field.
    #[arg(long, default_value_t = DEFAULT_PSEUDO_RADIUS)]
    pub radius: f64,
    /// Voxels per axis.
    #[arg(long, default_value_t = DESK_GRID)]
    pub grid: usize,
    /// Edge length of the rasterization work blocks.
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    pub chunk: usize,
    /// Occupancy threshold.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
}

impl FieldArgs {
    pub fn field_config(&self) -> FieldConfig {
        FieldConfig {
            pseudo_radius: self.radius,
            grid_dims: [self.grid; 3],
            chunk_edge: self.chunk.min(self.grid.max(1)),
        }
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            epsilon: CLDICE_EPSILON,
            pseudo_radius: self.radius,
            grid_dims: [self.grid; 3],
            tau: self.tau,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Tree,
    Loop,
    Tubes,
    Grid,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub count: usize,
    /// Seed of the first graph; graph i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Uniform per-axis node perturbation.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub branching: usize,
    /// Ring size for loops.
    #[arg(long, default_value_t = 24)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2)]
    pub tubes: usize,
    #[arg(long, default_value_t = 0.2)]
    pub separation: f64,
    #[arg(long, default_value_t = 17)]
    pub nodes_per_tube: usize,
    /// Join neighbouring tubes at both ends.
    #[arg(long)]
    pub bridged: bool,
    #[arg(long, default_value_t = 3)]
    pub nx: usize,
    #[arg(long, default_value_t = 3)]
    pub ny: usize,
    /// Subdivide edges until each graph has this many nodes.
    #[arg(long)]
    pub densify: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RasterizeArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Assemble the field from N³-voxel crops.
    #[arg(long, value_name = "N")]
    pub chunked: Option<usize>,
    /// Case label; defaults to the graph file stem.
    #[arg(long)]
    pub case: Option<String>,
    /// Report CSV to append to.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the extracted graph.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// K=32, C=4, d=64, 2+4 layers.
    Toy,
    /// K=4, C=2, d=16, 1+1 layers.
    Micro,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Number of latent tokens.
    #[arg(long)]
    pub k: Option<usize>,
    /// Channels per token.
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub heads: Option<usize>,
    #[arg(long)]
    pub encoder_layers: Option<usize>,
    #[arg(long)]
    pub decoder_layers: Option<usize>,
    #[arg(long)]
    pub frequencies: Option<usize>,
    #[arg(long)]
    pub lambda_kl: Option<f64>,
    /// Parameter initialization seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training graphs.
    #[arg(required = true)]
    pub graphs: Vec<PathBuf>,
    /// Key = value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr_peak: Option<f64>,
    #[arg(long)]
    pub lr_min: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Query points per graph and epoch.
    #[arg(long)]
    pub queries: Option<usize>,
    /// Pseudo radius used to label training queries.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Seed of the query, rotation and noise stream.
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// Randomly rotate each graph every epoch.
    #[arg(long)]
    pub rotate: bool,
    /// Output directory for model.vtck, loss.csv and config.txt.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Seed of the stored latent sample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    pub tokens: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = DESK_GRID)]
    pub grid: usize,
    /// Expected token count; must match the checkpoint.
    #[arg(long)]
    pub k: Option<usize>,
    /// Expected channel count; must match the checkpoint.
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    pub grid: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Drop components with fewer nodes.
    #[arg(long, default_value_t = 0)]
    pub min_component: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AblateRadiusArgs {
    /// Graphs to sweep; the built-in bridged-tube phantoms when omitted.
    pub graphs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.008, 0.016, 0.032])]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Per-radius summary CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-case report CSV.
    #[arg(long)]
    pub cases_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AblateLatentArgs {
    /// Training graphs; a small built-in set when omitted.
    pub graphs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32])]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4])]
    pub cs: Vec<usize>,
    #[arg(long, default_value_t = 800)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1024)]
    pub queries: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr_peak: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub lr_min: f64,
    /// Pseudo radius for training labels and evaluation.
    #[arg(long, default_value_t = 0.06)]
    pub radius: f64,
    /// Evaluation grid.
    #[arg(long, default_value_t = 48)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
