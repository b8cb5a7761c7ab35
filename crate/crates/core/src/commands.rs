//! The train, test, recognize, extract and synth workflows behind the `hcr`
//! binary, usable directly from library code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::{build_dataset, load_dataset, split_dataset, to_csv, Dataset, Sample};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::loci::{extract_loci, LOCI_BINS};
use crate::mlp::{one_hot, Network, Pattern, TrainConfig, TrainReport};
use crate::pca::{fit_pca, FeatureMatrix};
use crate::pgm::{load_pgm, write_pgm, PgmEncoding};
use crate::preprocess::{trace_string, PipelineConfig, PreprocessTrace};
use crate::synth::write_dataset;
use crate::weights::{Prediction, WeightsFile};

pub const DEFAULT_PCA_K: usize = 6;

/// Model shape and training parameters for [`train_from_samples`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub pca_k: usize,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub pipeline: PipelineConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            pca_k: DEFAULT_PCA_K,
            hidden: vec![30],
            train: TrainConfig::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Per-class train/test counts for commands that work on part of a
/// dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub n_train: usize,
    pub n_test: usize,
}

/// Predictions plus the accuracy tally.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionReport {
    pub predictions: Vec<Prediction>,
    pub total: usize,
    /// Correct predictions among those with a known expected label.
    pub correct: usize,
}

/// `100 * correct / total`.
pub fn accuracy_percent(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * correct as f64 / total as f64)
}

impl RecognitionReport {
    pub fn from_predictions(predictions: Vec<Prediction>) -> Self {
        let correct = predictions
            .iter()
            .filter(|p| p.is_correct() == Some(true))
            .count();
        Self {
            total: predictions.len(),
            correct,
            predictions,
        }
    }

    /// `None` when there is nothing to score.
    pub fn accuracy(&self) -> Option<f64> {
        if self.predictions.iter().all(|p| p.expected.is_none()) {
            return None;
        }
        accuracy_percent(self.correct, self.total)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.predictions.iter().map(|p| p.label.as_str()).collect()
    }

    /// One line per prediction, then the accuracy line when labels were
    /// known.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for p in &self.predictions {
            let acts: Vec<String> = p.activations.iter().map(|a| format!("{a:.4}")).collect();
            let mut line = p.label.clone();
            if let Some(b) = p.bbox {
                line = format!("{line} box=({},{},{},{})", b.x0, b.y0, b.x1, b.y1);
            }
            if let Some(e) = &p.expected {
                let mark = if *e == p.label { "ok" } else { "MISS" };
                line = format!("{line} expected={e} {mark}");
            }
            let _ = writeln!(s, "{line} [{}]", acts.join(" "));
        }
        match self.accuracy() {
            Some(a) => {
                let _ = writeln!(s, "accuracy: {}/{} = {a:.1}%", self.correct, self.total);
            }
            None => {
                let _ = writeln!(s, "recognized: {}", self.labels().join(" "));
            }
        }
        s
    }
}

fn patterns(
    samples: &[Sample],
    reduce: impl Fn(&[f64]) -> Result<Vec<f64>>,
    n_classes: usize,
) -> Result<Vec<Pattern>> {
    samples
        .iter()
        .map(|s| {
            Ok(Pattern {
                input: reduce(&s.features)?,
                target: one_hot(s.class_index, n_classes)?,
            })
        })
        .collect()
}

/// Fits PCA on `train` alone, then trains a fresh network on the projected
/// features. The network's initial weights come from `options.train.seed`.
pub fn train_from_samples(
    class_names: &[String],
    train: &[Sample],
    options: &TrainOptions,
) -> Result<WeightsFile> {
    if train.is_empty() {
        return Err(Error::EmptyDataset("no training samples".into()));
    }
    if options.pca_k == 0 || options.pca_k > LOCI_BINS {
        return Err(Error::Dimension(format!(
            "pca-k must be in 1..={LOCI_BINS}, got {}",
            options.pca_k
        )));
    }
    if let Some(s) = train.iter().find(|s| s.class_index >= class_names.len()) {
        return Err(Error::Dimension(format!(
            "sample class index {} out of range",
            s.class_index
        )));
    }
    let features = FeatureMatrix::new(
        &train
            .iter()
            .map(|s| s.features.as_slice())
            .collect::<Vec<_>>(),
    )?;
    let pca = fit_pca(&features, options.pca_k)?;
    let patterns = patterns(train, |f| pca.project(f), class_names.len())?;
    let cfg = &options.train;
    let mut network = Network::new(
        options.pca_k,
        &options.hidden,
        class_names.len(),
        cfg.eta,
        cfg.alpha,
        cfg.seed,
    )?;
    let summary = network.train(&patterns, cfg)?;
    Ok(WeightsFile {
        class_names: class_names.to_vec(),
        pipeline: options.pipeline,
        pca,
        network,
        summary,
    })
}

fn select(
    dataset: Dataset,
    split: Option<SplitSpec>,
    seed: u64,
    want_test: bool,
) -> Result<Dataset> {
    let Some(split) = split else {
        return Ok(dataset);
    };
    let (train, test) = split_dataset(&dataset, split.n_train, split.n_test, seed)?;
    Ok(Dataset {
        class_names: dataset.class_names,
        samples: if want_test { test } else { train },
    })
}

/// Trains on a class-directory tree or feature CSV and writes the weights
/// file. With a split, only the training part of each class is used.
pub fn train_command(
    data: &Path,
    weights_out: &Path,
    split: Option<SplitSpec>,
    options: &TrainOptions,
) -> Result<WeightsFile> {
    let dataset = select(
        load_dataset(data, &options.pipeline)?,
        split,
        options.train.seed,
        false,
    )?;
    let weights = train_from_samples(&dataset.class_names, &dataset.samples, options)?;
    weights.write(weights_out)?;
    Ok(weights)
}

pub fn describe_training(report: &TrainReport) -> String {
    format!(
        "epochs: {}  final mse: {:.6}  converged: {}",
        report.epochs_run,
        report.final_mse,
        if report.converged { "yes" } else { "no" }
    )
}

pub fn evaluate(weights: &WeightsFile, samples: &[Sample]) -> Result<RecognitionReport> {
    Ok(RecognitionReport::from_predictions(
        weights.evaluate(samples)?,
    ))
}

/// Scores a trained model on a labelled dataset, featurized with the
/// model's own loci settings. `split` and `seed` must match the ones used
/// for training to test on the held-out part.
pub fn test_command(
    weights_path: &Path,
    data: &Path,
    split: Option<SplitSpec>,
    seed: u64,
) -> Result<RecognitionReport> {
    let weights = WeightsFile::read(weights_path)?;
    let dataset = select(load_dataset(data, &weights.pipeline)?, split, seed, true)?;
    if dataset.samples.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no test samples in {}",
            data.display()
        )));
    }
    evaluate(&weights, &dataset.samples)
}

/// Reads a string image and classifies every character, left to right.
pub fn recognize_command(
    weights_path: &Path,
    image_path: &Path,
    dump_stages: Option<&Path>,
) -> Result<RecognitionReport> {
    let weights = WeightsFile::read(weights_path)?;
    let image = load_pgm(image_path)?;
    let (predictions, trace) = weights.recognize(&image).map_err(|e| match e {
        Error::EmptyImage(_) => {
            Error::EmptyImage(format!("no character found in {}", image_path.display()))
        }
        other => other,
    })?;
    if let Some(dir) = dump_stages {
        write_stages(dir, &image, &trace)?;
    }
    Ok(RecognitionReport::from_predictions(predictions))
}

/// Loci features for a class-directory tree (one sample per image) or for
/// every character of a single image, labelled by the file stem.
pub fn extract_command(
    input: &Path,
    config: &PipelineConfig,
    dump_stages: Option<&Path>,
) -> Result<Vec<Sample>> {
    if input.is_dir() {
        let dataset = build_dataset(input, config)?;
        if let Some(dir) = dump_stages {
            for s in &dataset.samples {
                let src = s.source.as_ref().expect("directory samples have sources");
                let image = load_pgm(src)?;
                write_stages(
                    &dir.join(&s.label).join(stem(src)),
                    &image,
                    &trace_string(&image, config)?,
                )?;
            }
        }
        return Ok(dataset.samples);
    }
    let image = load_pgm(input)?;
    let trace = trace_string(&image, config)?;
    if let Some(dir) = dump_stages {
        write_stages(dir, &image, &trace)?;
    }
    let label = stem(input);
    trace
        .cells
        .iter()
        .map(|c| {
            Ok(Sample {
                label: label.clone(),
                class_index: 0,
                features: extract_loci(c)?.to_vec(),
                source: Some(input.to_path_buf()),
            })
        })
        .collect()
}

pub fn extract_to_csv(
    input: &Path,
    config: &PipelineConfig,
    dump_stages: Option<&Path>,
) -> Result<String> {
    to_csv(&extract_command(input, config, dump_stages)?)
}

pub fn synth_command(
    out_dir: &Path,
    classes: &[String],
    n_per_class: usize,
    jitter: f64,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    if classes.is_empty() {
        return Err(Error::EmptyDataset("no classes requested".into()));
    }
    write_dataset(out_dir, classes, n_per_class, jitter, seed)
}

fn gray(image: &BinaryImage) -> Result<GrayImage> {
    image
        .to_gray()
        .ok_or_else(|| Error::InvalidImage("cannot write an empty stage image".into()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Writes each preprocessing stage as a PGM under `dir`: the input, the
/// binary image, the crop, the hole-filled crop with character boxes drawn
/// in gray, and one file per normalized cell.
pub fn write_stages(
    dir: &Path,
    input: &GrayImage,
    trace: &PreprocessTrace,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut boxed = gray(&trace.filled)?;
    for b in &trace.boxes {
        let (x0, y0, x1, y1) = (
            b.x0 - trace.crop.x0,
            b.y0 - trace.crop.y0,
            b.x1 - trace.crop.x0,
            b.y1 - trace.crop.y0,
        );
        for x in x0..=x1 {
            for y in [y0, y1] {
                if !trace.filled.get(x, y) {
                    boxed.set(x, y, 128);
                }
            }
        }
        for y in y0..=y1 {
            for x in [x0, x1] {
                if !trace.filled.get(x, y) {
                    boxed.set(x, y, 128);
                }
            }
        }
    }
    let mut stages = vec![
        ("01_input.pgm".to_string(), input.clone()),
        ("02_binary.pgm".to_string(), gray(&trace.binary)?),
        ("03_cropped.pgm".to_string(), gray(&trace.cropped)?),
        ("04_filled.pgm".to_string(), gray(&trace.filled)?),
        ("05_boxes.pgm".to_string(), boxed),
    ];
    for (i, c) in trace.cells.iter().enumerate() {
        stages.push((format!("06_cell_{i:02}.pgm"), gray(&c.to_image())?));
    }
    stages
        .into_iter()
        .map(|(name, img)| {
            let path = dir.join(name);
            write_pgm(&path, &img, PgmEncoding::Plain)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prediction(label: &str, expected: &str) -> Prediction {
        Prediction {
            class_index: 0,
            label: label.into(),
            activations: vec![0.5],
            expected: Some(expected.into()),
            bbox: None,
        }
    }

    fn report(correct: usize, total: usize) -> RecognitionReport {
        let preds = (0..total)
            .map(|i| {
                if i < correct {
                    prediction("a", "a")
                } else {
                    prediction("a", "b")
                }
            })
            .collect();
        RecognitionReport::from_predictions(preds)
    }

    #[test]
    fn accuracy_is_correct_over_total() {
        let r = report(23, 25);
        assert_eq!((r.correct, r.total), (23, 25));
        assert_eq!(r.accuracy(), Some(92.0));
        assert!(r.render().ends_with("accuracy: 23/25 = 92.0%\n"));
        assert_eq!(report(0, 7).accuracy(), Some(0.0));
        assert_eq!(report(25, 25).accuracy(), Some(100.0));
        assert_eq!(accuracy_percent(0, 0), None);
    }

    #[test]
    fn unlabelled_reports_have_no_accuracy() {
        let mut p = prediction("x", "x");
        p.expected = None;
        let r = RecognitionReport::from_predictions(vec![p]);
        assert_eq!(r.accuracy(), None);
        assert!(r.render().contains("recognized: x"));
    }

    #[test]
    fn activations_print_with_four_decimals() {
        let mut p = prediction("a", "a");
        p.activations = vec![0.123456, -1.0];
        let r = RecognitionReport::from_predictions(vec![p]);
        assert!(r.render().contains("[0.1235 -1.0000]"));
    }

    #[test]
    fn bad_pca_k_is_rejected() {
        let s = Sample {
            label: "a".into(),
            class_index: 0,
            features: vec![0.0; LOCI_BINS],
            source: None,
        };
        for k in [0, LOCI_BINS + 1] {
            let opts = TrainOptions {
                pca_k: k,
                ..TrainOptions::default()
            };
            assert!(matches!(
                train_from_samples(&["a".into()], std::slice::from_ref(&s), &opts),
                Err(Error::Dimension(_))
            ));
        }
    }
}
