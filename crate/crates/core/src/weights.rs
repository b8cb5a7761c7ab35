//! Self-describing weights file.
//!
//! A trained recognizer is saved as line-oriented text:
//!
//! ```text
//! HCRNN 1
//! CLASSES <n>
//! <one class name per line>
//! LOCI <cell side> <min area> <edges 0|1> <threshold|otsu>
//! PCA <k> <M>
//! <mean row>
//! <k component rows>
//! EIGENVALUES <k values>
//! NET
//! SIZES <input> <hidden...> <output>
//! ACTIVATIONS <one per non-input layer>
//! ETA <eta>
//! ALPHA <alpha>
//! WEIGHTS <layer count>
//! LAYER <l> <rows> <cols>
//! <rows lines of cols reals>
//! ...
//! SUMMARY <epochs> <final mse> <converged 0|1>
//! END
//! ```
//!
//! Reals are written with 17 significant digits, so reading a file back
//! reproduces the network bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::image::{BoundingBox, GrayImage};
use crate::loci::{extract_loci, LOCI_BINS};
use crate::matrix::Matrix;
use crate::mlp::{argmax, Activation, LayerSpec, Network, TrainReport};
use crate::pca::PcaModel;
use crate::preprocess::{trace_string, PipelineConfig, PreprocessTrace};
use crate::textio::{fmt_real, fmt_row, parse_count, Lines};

pub const MAGIC: &str = "HCRNN";
pub const VERSION: u32 = 1;

/// Everything needed to recognize characters without re-entering any
/// training parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsFile {
    pub class_names: Vec<String>,
    pub pipeline: PipelineConfig,
    pub pca: PcaModel,
    pub network: Network,
    pub summary: TrainReport,
}

/// Classification of one feature vector or character cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_index: usize,
    pub label: String,
    pub activations: Vec<f64>,
    /// Ground-truth label when known.
    pub expected: Option<String>,
    /// Character location when the prediction came from a page.
    pub bbox: Option<BoundingBox>,
}

impl Prediction {
    pub fn is_correct(&self) -> Option<bool> {
        self.expected.as_ref().map(|e| *e == self.label)
    }
}

impl WeightsFile {
    /// Projects 81 loci bins through the stored PCA and runs the network.
    pub fn predict_features(&self, loci: &[f64]) -> Result<Prediction> {
        let reduced = self.pca.project(loci)?;
        let activations = self.network.predict(&reduced)?;
        let class_index = argmax(&activations);
        Ok(Prediction {
            label: self.class_names[class_index].clone(),
            class_index,
            activations,
            expected: None,
            bbox: None,
        })
    }

    pub fn classify_features(&self, loci: &[f64]) -> Result<usize> {
        Ok(self.predict_features(loci)?.class_index)
    }

    /// Segments a page and classifies each character, left to right.
    pub fn recognize(&self, image: &GrayImage) -> Result<(Vec<Prediction>, PreprocessTrace)> {
        let trace = trace_string(image, &self.pipeline)?;
        let predictions = trace
            .cells
            .iter()
            .zip(&trace.boxes)
            .map(|(cell, bbox)| {
                let mut p = self.predict_features(&extract_loci(cell)?.to_vec())?;
                p.bbox = Some(*bbox);
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((predictions, trace))
    }

    /// Classifies labelled samples. Fails on labels the model never saw.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<Vec<Prediction>> {
        samples
            .iter()
            .map(|s| {
                if !self.class_names.contains(&s.label) {
                    return Err(Error::Dimension(format!(
                        "class {:?} is not among the trained classes {:?}",
                        s.label, self.class_names
                    )));
                }
                let mut p = self.predict_features(&s.features)?;
                p.expected = Some(s.label.clone());
                Ok(p)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC} {VERSION}");
        let _ = writeln!(s, "CLASSES {}", self.class_names.len());
        for c in &self.class_names {
            let _ = writeln!(s, "{c}");
        }
        let p = &self.pipeline;
        let _ = writeln!(
            s,
            "LOCI {} {} {} {}",
            p.cell_side,
            p.min_area,
            u8::from(p.edges),
            p.threshold
                .map_or_else(|| "otsu".to_string(), |t| t.to_string())
        );
        s.push_str(&self.pca.to_text());
        let net = &self.network;
        let _ = writeln!(s, "NET");
        let sizes: Vec<String> = net.sizes().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "SIZES {}", sizes.join(" "));
        let acts: Vec<String> = net.layers()[1..]
            .iter()
            .map(|l| l.activation.to_string())
            .collect();
        let _ = writeln!(s, "ACTIVATIONS {}", acts.join(" "));
        let _ = writeln!(s, "ETA {}", fmt_real(net.eta));
        let _ = writeln!(s, "ALPHA {}", fmt_real(net.alpha));
        let _ = writeln!(s, "WEIGHTS {}", net.weights().len());
        for (l, w) in net.weights().iter().enumerate() {
            let _ = writeln!(s, "LAYER {} {} {}", l + 1, w.rows(), w.cols());
            for row in w.iter_rows() {
                let _ = writeln!(s, "{}", fmt_row(row));
            }
        }
        let r = &self.summary;
        let _ = writeln!(
            s,
            "SUMMARY {} {} {}",
            r.epochs_run,
            fmt_real(r.final_mse),
            u8::from(r.converged)
        );
        let _ = writeln!(s, "END");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);

        let (n, fields) = lines
            .next_line("header")
            .map(|(n, l)| (n, l.split_whitespace().collect::<Vec<_>>()))?;
        match fields.as_slice() {
            [m, v] if *m == MAGIC => {
                if v.parse::<u32>().ok() != Some(VERSION) {
                    return Err(Error::format(format!(
                        "line {n}: unsupported weights version {v}"
                    )));
                }
            }
            _ => {
                return Err(Error::format(format!(
                    "line {n}: not a {MAGIC} weights file"
                )))
            }
        }

        let (n, fields) = lines.expect_keyword("CLASSES")?;
        let n_classes = parse_count(fields.first(), "class count", n)?;
        let mut class_names = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            class_names.push(lines.next_line("class name")?.1.to_string());
        }

        let (n, fields) = lines.expect_keyword("LOCI")?;
        let flag = |f: Option<&&str>| match f {
            Some(&"0") => Ok(false),
            Some(&"1") => Ok(true),
            _ => Err(Error::format(format!("line {n}: bad LOCI flag"))),
        };
        let threshold = match fields.get(3) {
            Some(&"otsu") => None,
            Some(t) => Some(
                t.parse::<u8>()
                    .map_err(|_| Error::format(format!("line {n}: bad threshold")))?,
            ),
            None => return Err(Error::format(format!("line {n}: missing threshold"))),
        };
        let pipeline = PipelineConfig {
            cell_side: parse_count(fields.first(), "cell side", n)?,
            min_area: parse_count(fields.get(1), "min area", n)?,
            edges: flag(fields.get(2))?,
            threshold,
        };

        let pca = PcaModel::read_block(&mut lines)?;
        if pca.input_dim() != LOCI_BINS {
            return Err(Error::format(format!(
                "PCA expects {} inputs, loci give {LOCI_BINS}",
                pca.input_dim()
            )));
        }

        lines.expect_keyword("NET")?;
        let (n, fields) = lines.expect_keyword("SIZES")?;
        let sizes = fields
            .iter()
            .map(|f| f.parse::<usize>().ok())
            .collect::<Option<Vec<_>>>()
            .filter(|s| s.len() >= 2)
            .ok_or_else(|| Error::format(format!("line {n}: bad SIZES")))?;
        let (n, fields) = lines.expect_keyword("ACTIVATIONS")?;
        if fields.len() != sizes.len() - 1 {
            return Err(Error::format(format!(
                "line {n}: need {} activations",
                sizes.len() - 1
            )));
        }
        let acts = fields
            .iter()
            .map(|f| f.parse::<Activation>())
            .collect::<Result<Vec<_>>>()?;
        let eta = lines
            .expect_keyword("ETA")
            .and_then(|(n, f)| single_real(&f, n))?;
        let alpha = lines
            .expect_keyword("ALPHA")
            .and_then(|(n, f)| single_real(&f, n))?;

        let (n, fields) = lines.expect_keyword("WEIGHTS")?;
        let n_layers = parse_count(fields.first(), "layer count", n)?;
        if n_layers != sizes.len() - 1 {
            return Err(Error::format(format!(
                "line {n}: {n_layers} weight layers for {} sizes",
                sizes.len()
            )));
        }
        let mut weights = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (n, fields) = lines.expect_keyword("LAYER")?;
            let rows = parse_count(fields.get(1), "rows", n)?;
            let cols = parse_count(fields.get(2), "cols", n)?;
            if parse_count(fields.first(), "layer index", n)? != l + 1 {
                return Err(Error::format(format!("line {n}: layers out of order")));
            }
            if rows != sizes[l] + 1 || cols != sizes[l + 1] {
                return Err(Error::format(format!(
                    "line {n}: layer {} shape {rows}x{cols} mismatches SIZES",
                    l + 1
                )));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                data.extend(lines.reals(cols, "weight row")?);
            }
            weights.push(Matrix::from_vec(rows, cols, data).expect("rows x cols values read"));
        }

        let (n, fields) = lines.expect_keyword("SUMMARY")?;
        let summary = TrainReport {
            epochs_run: parse_count(fields.first(), "epochs", n)?,
            final_mse: fields
                .get(1)
                .and_then(|f| f.parse::<f64>().ok())
                .ok_or_else(|| Error::format(format!("line {n}: bad final MSE")))?,
            converged: flag(fields.get(2))?,
        };
        lines.expect_keyword("END")?;

        let mut layers = vec![LayerSpec {
            size: sizes[0],
            activation: Activation::Logsig,
        }];
        layers.extend(
            sizes[1..]
                .iter()
                .zip(acts)
                .map(|(&size, activation)| LayerSpec { size, activation }),
        );
        let network = Network::from_weights(layers, weights, eta, alpha)
            .map_err(|e| Error::format(format!("inconsistent network: {e}")))?;
        if network.input_size() != pca.k() {
            return Err(Error::format(format!(
                "network takes {} inputs but PCA yields {}",
                network.input_size(),
                pca.k()
            )));
        }
        if network.output_size() != class_names.len() {
            return Err(Error::format(format!(
                "network has {} outputs for {} classes",
                network.output_size(),
                class_names.len()
            )));
        }
        Ok(Self {
            class_names,
            pipeline,
            pca,
            network,
            summary,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Format {
            path: Some(path.to_path_buf()),
            message: format!("unreadable: {e}"),
        })?;
        Self::from_text(&text).map_err(|e| e.at_path(path))
    }
}

fn single_real(fields: &[&str], line: usize) -> Result<f64> {
    match fields {
        [v] => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::format(format!("line {line}: bad number {v:?}"))),
        _ => Err(Error::format(format!("line {line}: expected one number"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 1-1-1 network with all-zero weights over a 1-component PCA.
    fn minimal(class_names: &[&str]) -> WeightsFile {
        let mut comp = vec![0.0; LOCI_BINS];
        comp[0] = 1.0;
        let pca = PcaModel::from_parts(
            vec![0.0; LOCI_BINS],
            Matrix::from_vec(1, LOCI_BINS, comp).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let layers = vec![
            LayerSpec {
                size: 1,
                activation: Activation::Logsig,
            },
            LayerSpec {
                size: 1,
                activation: Activation::Logsig,
            },
            LayerSpec {
                size: class_names.len(),
                activation: Activation::Tansig,
            },
        ];
        let network = Network::from_weights(
            layers,
            vec![Matrix::zeros(2, 1), Matrix::zeros(2, class_names.len())],
            0.5,
            0.9,
        )
        .unwrap();
        WeightsFile {
            class_names: class_names.iter().map(|s| s.to_string()).collect(),
            pipeline: PipelineConfig::default(),
            pca,
            network,
            summary: TrainReport {
                epochs_run: 0,
                final_mse: 0.0,
                converged: false,
            },
        }
    }

    #[test]
    fn zero_network_always_picks_first_class() {
        let w = minimal(&["only"]);
        let w = WeightsFile::from_text(&w.to_text()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v: Vec<f64> = (0..LOCI_BINS).map(|_| rng.gen_range(0.0..3.0)).collect();
            assert_eq!(w.classify_features(&v).unwrap(), 0);
        }
        // with several outputs all at tanh(0) = 0 the tie goes to index 0
        let w = minimal(&["a", "b", "c"]);
        assert_eq!(w.classify_features(&[0.5; LOCI_BINS]).unwrap(), 0);
    }

    #[test]
    fn round_trip_is_exact() {
        let mut w = minimal(&["x", "y"]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in w.network.weights_mut() {
            m.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v = rng.gen_range(-3.0..3.0));
        }
        w.pipeline = PipelineConfig {
            cell_side: 24,
            min_area: 2,
            edges: true,
            threshold: Some(100),
        };
        w.summary = TrainReport {
            epochs_run: 12,
            final_mse: 0.0123,
            converged: true,
        };
        let text = w.to_text();
        assert!(text.starts_with("HCRNN 1\n"));
        assert_eq!(WeightsFile::from_text(&text).unwrap(), w);
    }

    #[test]
    fn rejects_bad_headers_versions_and_truncation() {
        let text = minimal(&["a"]).to_text();
        let bad_magic = text.replacen("HCRNN", "HCRNX", 1);
        let bad_version = text.replacen("HCRNN 1", "HCRNN 2", 1);
        for bad in [bad_magic, bad_version, String::new()] {
            assert!(matches!(
                WeightsFile::from_text(&bad),
                Err(Error::Format { .. })
            ));
        }
        let lines: Vec<&str> = text.lines().collect();
        for cut in 1..lines.len() {
            let truncated = lines[..cut].join("\n");
            assert!(
                matches!(
                    WeightsFile::from_text(&truncated),
                    Err(Error::Format { .. })
                ),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn evaluate_rejects_unknown_classes() {
        let w = minimal(&["a"]);
        let s = Sample {
            label: "zzz".into(),
            class_index: 0,
            features: vec![0.0; LOCI_BINS],
            source: None,
        };
        assert!(matches!(w.evaluate(&[s]), Err(Error::Dimension(_))));
    }
}
