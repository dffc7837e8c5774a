use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plotread::decode::FitMethod;

#[derive(Debug, Parser)]
#[command(
    name = "plotread",
    version,
    about = "Synthetic scatter plots, data extraction and evaluation"
)]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a corpus of ground-truth charts.
    Gen(GenArgs),
    /// Decode charts into data tables.
    Decode(DecodeArgs),
    /// Score decoded tables against the ground truth.
    Eval(EvalArgs),
    /// Compare all fit methods on one corpus.
    Bench(BenchArgs),
    /// Write the built-in glyph templates as PNG files.
    Glyphs(GlyphsArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a PNG rendering of every chart.
    #[arg(long)]
    pub render: bool,
    /// `default`, `rotated` or a path to a profile JSON file.
    #[arg(long, default_value = "default")]
    pub profile: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ransac,
    Theilsen,
    Lad,
    Ols2,
}

impl From<Method> for FitMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Ransac => FitMethod::Ransac,
            Method::Theilsen => FitMethod::TheilSen,
            Method::Lad => FitMethod::Lad,
            Method::Ols2 => FitMethod::Ols2,
        }
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["from_scenes", "from_images"])))]
pub struct DecodeArgs {
    /// Corpus directory written by `gen`.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Decode the ground-truth annotation scenes.
    #[arg(long)]
    pub from_scenes: bool,
    /// Detect objects in the rendered PNGs first.
    #[arg(long)]
    pub from_images: bool,
    #[arg(long, value_enum, default_value = "ransac")]
    pub method: Method,
    /// Minimum detection confidence.
    #[arg(long, default_value_t = 0.3)]
    pub conf: f64,
    /// `none`, `default` or a path to a noise JSON file.
    #[arg(long, default_value = "none")]
    pub noise: String,
    /// Skip label rotation fixing in image mode.
    #[arg(long)]
    pub no_deskew: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Corpus directory written by `gen`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output directory of `decode`.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// IoU threshold for detector PR curves.
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchSource {
    Scenes,
    Images,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "scenes")]
    pub source: BenchSource,
    /// `none`, `default` or a path. Defaults to `default` for scenes and
    /// `none` for images.
    #[arg(long)]
    pub noise: Option<String>,
    /// With image source, add a no-deskew row per method.
    #[arg(long)]
    pub no_deskew_variants: bool,
    #[arg(long, default_value_t = 0.3)]
    pub conf: f64,
}

#[derive(Debug, Args)]
pub struct GlyphsArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Pixel magnification.
    #[arg(long, default_value_t = 8)]
    pub scale: u32,
}
