use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use descry_core::scoring::{Aggregation, BaselineSpec};

mod commands;

#[derive(Parser)]
#[command(name = "descry", version, about = "Zero-shot classification by descriptors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Image embedding store
    #[arg(long)]
    images: PathBuf,
    /// Text embedding store (grounded descriptors and class-name prompts)
    #[arg(long)]
    texts: PathBuf,
    /// Dictionary JSON file
    #[arg(long)]
    dictionaries: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mean,
    Max,
}

impl From<Mode> for Aggregation {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mean => Aggregation::Mean,
            Mode::Max => Aggregation::Max,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Templates {
    Single,
    Ensemble,
}

impl Templates {
    fn spec(self) -> BaselineSpec {
        match self {
            Templates::Single => BaselineSpec::single(),
            Templates::Ensemble => BaselineSpec::ensemble(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build descriptor dictionaries by prompting a language model
    Generate {
        /// Lines of `category_id` or `category_id<TAB>display name`
        #[arg(long)]
        categories: PathBuf,
        /// Dictionary file to create or extend
        #[arg(long)]
        out: PathBuf,
        /// Response cache directory
        #[arg(long, default_value = "llm_cache")]
        cache_dir: PathBuf,
        /// Serve from the cache only; a miss is an error
        #[arg(long)]
        offline: bool,
        #[arg(long, default_value = descry_core::dictionary::DEFAULT_MODEL)]
        model: String,
    },
    /// List the texts a dictionary set needs embedded
    Texts {
        #[arg(long)]
        dictionaries: PathBuf,
        /// Only texts absent from this store
        #[arg(long)]
        missing_from: Option<PathBuf>,
        /// Also list class-name prompts for this template set
        #[arg(long, value_enum)]
        baseline: Option<Templates>,
    },
    /// Classify one image
    Classify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        image_id: String,
        #[arg(long, value_enum, default_value = "mean")]
        mode: Mode,
        /// Score class-name prompts instead of descriptors
        #[arg(long, value_enum)]
        baseline: Option<Templates>,
        /// Print the full result as JSON
        #[arg(long)]
        json: bool,
    },
    /// Show the descriptor evidence behind a decision
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        image_id: String,
        /// A second category to compare against the winner
        #[arg(long)]
        contrast: Option<String>,
        #[arg(long, value_enum, default_value = "mean")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Rank all images for one category
    Retrieve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        category: String,
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value = "mean")]
        mode: Mode,
        #[arg(long, value_enum)]
        baseline: Option<Templates>,
        /// File of relevant image ids, one per line; reports recall@k
        #[arg(long)]
        relevant: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Top-1 accuracy against the class-name baseline
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        /// JSON-lines manifest of {image_id, category_id, subgroup?}
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "mean")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "single")]
        templates: Templates,
        /// Also report per-subgroup accuracy for tagged rows
        #[arg(long)]
        subgroups: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic data set with brute-force answers
    Oracle {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        categories: usize,
        #[arg(long, default_value_t = 8)]
        descriptors: usize,
        #[arg(long, default_value_t = 100)]
        images: usize,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service
    Serve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, env = descry_service::PORT_ENV, default_value_t = descry_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
