//! Whole synthetic experiments run in memory: render glyphs, featurize,
//! split, train, and score on the held-out part.

use crate::commands::{
    evaluate, train_from_samples, RecognitionReport, TrainOptions, DEFAULT_PCA_K,
};
use crate::dataset::{featurize_single, split_dataset, Dataset, Sample};
use crate::error::Result;
use crate::mlp::{TrainConfig, TrainReport, DEFAULT_ALPHA, DEFAULT_ETA};
use crate::preprocess::PipelineConfig;
use crate::synth::{class_names, render_sample, template};
use crate::weights::WeightsFile;

/// Settings for one experiment. The same `seed` drives rendering, the
/// split, weight initialization and (when enabled) shuffling.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub hidden: Vec<usize>,
    pub max_epochs: usize,
    pub target_error: f64,
    pub eta: f64,
    pub alpha: f64,
    pub shuffle: bool,
    pub pca_k: usize,
    pub jitter: f64,
    pub seed: u64,
    pub pipeline: PipelineConfig,
}

impl ExperimentSpec {
    /// `n_classes` built-in glyphs with 100 training and 25 test samples
    /// each, the default eta and alpha, target MSE 0.01 and 1% pixel noise.
    pub fn synthetic(n_classes: usize, hidden: usize, max_epochs: usize) -> Self {
        Self {
            classes: class_names(n_classes),
            n_train: 100,
            n_test: 25,
            hidden: vec![hidden],
            max_epochs,
            target_error: 0.01,
            eta: DEFAULT_ETA,
            alpha: DEFAULT_ALPHA,
            shuffle: false,
            pca_k: DEFAULT_PCA_K,
            jitter: 0.01,
            seed: 1,
            pipeline: PipelineConfig::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn train_options(&self) -> TrainOptions {
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
            pipeline: self.pipeline,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub weights: WeightsFile,
    pub training: TrainReport,
    pub test: RecognitionReport,
}

impl ExperimentOutcome {
    pub fn accuracy(&self) -> f64 {
        self.test.accuracy().unwrap_or(0.0)
    }
}

/// Renders and featurizes `n_train + n_test` samples per class. These are
/// the same images `synth` would write with the same seed and jitter.
pub fn synthetic_dataset(spec: &ExperimentSpec) -> Result<Dataset> {
    let per_class = spec.n_train + spec.n_test;
    let mut samples = Vec::with_capacity(per_class * spec.classes.len());
    for (ci, name) in spec.classes.iter().enumerate() {
        let glyph = template(name)?;
        for i in 0..per_class {
            let image = render_sample(glyph, ci, i, spec.jitter, spec.seed);
            let where_ = format!("<synthetic {name} #{i}>");
            samples.push(Sample {
                label: name.clone(),
                class_index: ci,
                features: featurize_single(&image, &spec.pipeline, where_.as_ref())?.to_vec(),
                source: None,
            });
        }
    }
    Ok(Dataset {
        class_names: spec.classes.clone(),
        samples,
    })
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let dataset = synthetic_dataset(spec)?;
    let (train, test) = split_dataset(&dataset, spec.n_train, spec.n_test, spec.seed)?;
    let weights = train_from_samples(&dataset.class_names, &train, &spec.train_options())?;
    let test = evaluate(&weights, &test)?;
    Ok(ExperimentOutcome {
        training: weights.summary,
        weights,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_deterministic_and_disjoint() {
        let spec = ExperimentSpec {
            n_train: 10,
            n_test: 5,
            ..ExperimentSpec::synthetic(3, 8, 20)
        };
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.test, b.test);
        assert_eq!(a.test.total, 15);

        let ds = synthetic_dataset(&spec).unwrap();
        let (train, test) = split_dataset(&ds, 10, 5, spec.seed).unwrap();
        for t in &test {
            assert!(!train
                .iter()
                .any(|s| s.features == t.features && s.label == t.label));
        }
    }
}
