use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use wifi_survey::ApId;

#[derive(Debug, Parser)]
#[command(name = "wifi-survey", version, about = "Simulate, align, train and evaluate WiFi fingerprint surveys")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Continuous,
    Grid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scripted survey from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Align a scan log to an odometry track and write the fingerprint CSV.
    Align {
        #[arg(long)]
        odometry: PathBuf,
        #[arg(long)]
        scans: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a localization model on a fingerprint dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        /// Scenario file whose `train` section is the base configuration.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Per-epoch loss CSV; defaults to the model path with a `.loss.csv` suffix.
        #[arg(long)]
        loss_out: Option<PathBuf>,
    },
    /// Score a trained model against a labelled dataset.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Training dataset, used to report reference-point density.
        #[arg(long)]
        train_dataset: Option<PathBuf>,
        /// Surveyed floor area in square meters.
        #[arg(long)]
        area: Option<f64>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Reference-point density ablation.
    Ablate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.5,0.25")]
        fractions: Vec<f64>,
        /// Number of seeds; seeds 1..=N are used.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        /// Scenario file whose `train` section is the base configuration.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Per-cell mean RSSI of one access point.
    Heatmap {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        ap: ApId,
        #[arg(long, default_value_t = 0.33)]
        cell: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a robot survey against a grid survey of the same space.
    CompareTruth {
        #[arg(long)]
        robot: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Floor area in square meters; defaults to the bounding box of all points.
        #[arg(long)]
        area: Option<f64>,
        /// Robot survey duration in seconds; defaults to the timestamp span.
        #[arg(long)]
        robot_duration: Option<f64>,
        /// Grid survey duration in seconds.
        #[arg(long)]
        grid_duration: Option<f64>,
    },
}
