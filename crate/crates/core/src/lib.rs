//! Handwritten character recognition from binary images.
//!
//! The pipeline has four stages, each in its own module:
//!
//! 1. [`preprocess`]: binarize a scanned string, crop it, fill holes,
//!    segment it into characters and normalize each into a square cell.
//! 2. [`loci`]: describe each cell by its 81-bin Characteristic Loci
//!    histogram.
//! 3. [`pca`]: reduce loci vectors to a few principal components.
//! 4. [`mlp`]: classify the reduced vectors with a multilayer perceptron
//!    trained by backpropagation with momentum.
//!
//! [`dataset`], [`weights`], [`synth`] and [`commands`] tie the stages into
//! the train/test/recognize workflow driven by the `hcr` binary, and
//! [`experiment`] runs whole synthetic train/test experiments in memory.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod image;
pub mod loci;
pub mod matrix;
pub mod mlp;
pub mod pca;
pub mod pgm;
pub mod preprocess;
pub mod synth;
pub mod textio;
pub mod weights;

pub use error::{Error, Result};
pub use image::{BinaryImage, BoundingBox, CharacterCell, GrayImage, RgbImage};
pub use loci::{extract_loci, LociVector, LOCI_BINS};
pub use mlp::{Activation, Network, Pattern, TrainConfig, TrainReport};
pub use pca::{fit_pca, FeatureMatrix, PcaModel};
pub use preprocess::{preprocess_string, PipelineConfig};
pub use weights::{Prediction, WeightsFile};
