use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hcr::commands::{
    describe_training, extract_to_csv, recognize_command, synth_command, test_command,
    train_command, SplitSpec, TrainOptions, DEFAULT_PCA_K,
};
use hcr::image::CharacterCell;
use hcr::mlp::{TrainConfig, DEFAULT_ALPHA, DEFAULT_ETA};
use hcr::preprocess::{PipelineConfig, DEFAULT_MIN_AREA};
use hcr::synth::{class_names, TEMPLATES};
use hcr::Error;

/// Handwritten character recognition: loci features, PCA and a
/// backpropagation network.
#[derive(Parser)]
#[command(name = "hcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options accepted by every subcommand. `test` and `recognize` take the
/// loci and network settings from the weights file instead.
#[derive(Args, Clone)]
struct Common {
    /// Seed for sample rendering, splitting, weight init and shuffling.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = CharacterCell::DEFAULT_SIDE)]
    cell_side: usize,
    /// Smallest ink component kept by segmentation, in pixels.
    #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
    min_area: usize,
    /// Fixed binarization threshold; Otsu when absent.
    #[arg(long)]
    threshold: Option<u8>,
    /// Principal components kept.
    #[arg(long, default_value_t = DEFAULT_PCA_K)]
    pca_k: usize,
    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "30")]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    target_error: f64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    /// Reshuffle training order every epoch.
    #[arg(long)]
    shuffle: bool,
    /// Reduce each character cell to its outline before feature extraction.
    #[arg(long)]
    edges: bool,
    /// Write every preprocessing stage as PGM under this directory
    /// (extract and recognize).
    #[arg(long)]
    dump_stages: Option<PathBuf>,
}

impl Common {
    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            cell_side: self.cell_side,
            min_area: self.min_area,
            edges: self.edges,
            threshold: self.threshold,
        }
    }

    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            pca_k: self.pca_k,
            hidden: self.hidden.clone(),
            train: TrainConfig {
                eta: self.eta,
                alpha: self.alpha,
                target_error: self.target_error,
                max_epochs: self.max_epochs,
                seed: self.seed,
                shuffle: self.shuffle,
            },
            pipeline: self.pipeline(),
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Use only this many samples per class for training (seeded split).
    #[arg(long)]
    n_train: Option<usize>,
    /// Test samples per class following the training ones in the split.
    #[arg(long)]
    n_test: Option<usize>,
}

impl SplitArgs {
    fn spec(&self) -> Option<SplitSpec> {
        match (self.n_train, self.n_test) {
            (None, None) => None,
            (a, b) => Some(SplitSpec {
                n_train: a.unwrap_or(0),
                n_test: b.unwrap_or(0),
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic glyph dataset as PGM files in class directories.
    Synth {
        out_dir: PathBuf,
        /// Glyph names, comma separated. Defaults to the first --n-classes.
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
        #[arg(long, default_value_t = 3)]
        n_classes: usize,
        #[arg(long, default_value_t = 125)]
        per_class: usize,
        /// Per-pixel flip probability.
        #[arg(long, default_value_t = 0.01)]
        jitter: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Write loci features (label,f0,...,f80) for a class tree or one image.
    Extract {
        input: PathBuf,
        /// Output CSV; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit PCA and train the network on a class tree or feature CSV.
    Train {
        data: PathBuf,
        /// Weights file to write.
        #[arg(long, short)]
        weights: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Score a weights file on a labelled class tree or feature CSV.
    Test {
        weights: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Segment a string image and classify each character left to right.
    Recognize {
        weights: PathBuf,
        image: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> hcr::Result<()> {
    match cli.command {
        Command::Synth {
            out_dir,
            classes,
            n_classes,
            per_class,
            jitter,
            common,
        } => {
            let classes = if classes.is_empty() {
                if n_classes > TEMPLATES.len() {
                    return Err(Error::Dimension(format!(
                        "only {} glyphs are built in",
                        TEMPLATES.len()
                    )));
                }
                class_names(n_classes)
            } else {
                classes
            };
            let written = synth_command(&out_dir, &classes, per_class, jitter, common.seed)?;
            println!(
                "wrote {} images for {} to {}",
                written.len(),
                classes.join(","),
                out_dir.display()
            );
        }
        Command::Extract { input, out, common } => {
            let csv = extract_to_csv(&input, &common.pipeline(), common.dump_stages.as_deref())?;
            match out {
                Some(path) => fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?,
                None => print!("{csv}"),
            }
        }
        Command::Train {
            data,
            weights,
            split,
            common,
        } => {
            let trained = train_command(&data, &weights, split.spec(), &common.train_options())?;
            println!("{}", describe_training(&trained.summary));
            println!("wrote {}", weights.display());
        }
        Command::Test {
            weights,
            data,
            split,
            common,
        } => {
            print!(
                "{}",
                test_command(&weights, &data, split.spec(), common.seed)?.render()
            );
        }
        Command::Recognize {
            weights,
            image,
            common,
        } => {
            print!(
                "{}",
                recognize_command(&weights, &image, common.dump_stages.as_deref())?.render()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::FAILURE;
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hcr: {e}");
            ExitCode::FAILURE
        }
    }
}
