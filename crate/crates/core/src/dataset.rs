//! Labelled feature datasets: building them from image folders, splitting
//! them, and the `label,f0,...,f80` CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::loci::{extract_loci, LociVector, LOCI_BINS};
use crate::pgm::load_pgm;
use crate::preprocess::{preprocess_string, PipelineConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: String,
    pub class_index: usize,
    pub features: Vec<f64>,
    /// Where the sample came from, if it came from a file.
    pub source: Option<PathBuf>,
}

/// Samples plus the class names that `class_index` refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub class_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }
}

/// Loci features of an image expected to hold exactly one character.
pub fn featurize_single(
    image: &GrayImage,
    config: &PipelineConfig,
    path: &Path,
) -> Result<LociVector> {
    let cells = preprocess_string(image, config).map_err(|e| match e {
        Error::EmptyImage(_) => Error::Segmentation {
            path: path.to_path_buf(),
            found: 0,
        },
        other => other,
    })?;
    if cells.len() != 1 {
        return Err(Error::Segmentation {
            path: path.to_path_buf(),
            found: cells.len(),
        });
    }
    extract_loci(&cells[0])
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Featurizes `root/<class>/*.pgm`. Classes are indexed in sorted name
/// order and samples come out in sorted path order.
pub fn build_dataset(root: &Path, config: &PipelineConfig) -> Result<Dataset> {
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    if class_dirs.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no class directories in {}",
            root.display()
        )));
    }
    let mut class_names = Vec::with_capacity(class_dirs.len());
    let mut samples = Vec::new();
    for (index, dir) in class_dirs.iter().enumerate() {
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let files: Vec<PathBuf> = sorted_entries(dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_pgm(p))
            .collect();
        if files.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "class directory {} has no PGM images",
                dir.display()
            )));
        }
        for path in files {
            let image = load_pgm(&path)?;
            let features = featurize_single(&image, config, &path)?.to_vec();
            samples.push(Sample {
                label: label.clone(),
                class_index: index,
                features,
                source: Some(path),
            });
        }
        class_names.push(label);
    }
    Ok(Dataset {
        class_names,
        samples,
    })
}

/// Per-class seeded shuffle, then the first `n_train` of each class go to
/// training and the next `n_test` to testing.
///
/// Training samples are interleaved across classes (one from each class in
/// turn) so that online training sees every class throughout an epoch.
/// Test samples come out grouped by class.
pub fn split_dataset(
    dataset: &Dataset,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_class_train = Vec::with_capacity(dataset.n_classes());
    let mut test = Vec::new();
    for (ci, name) in dataset.class_names.iter().enumerate() {
        let mut members: Vec<&Sample> = dataset
            .samples
            .iter()
            .filter(|s| s.class_index == ci)
            .collect();
        if members.len() < n_train + n_test {
            return Err(Error::EmptyDataset(format!(
                "class {name:?} has {} samples, need {} + {}",
                members.len(),
                n_train,
                n_test
            )));
        }
        members.shuffle(&mut rng);
        per_class_train.push(members[..n_train].to_vec());
        test.extend(
            members[n_train..n_train + n_test]
                .iter()
                .map(|s| (*s).clone()),
        );
    }
    let mut train = Vec::with_capacity(n_train * dataset.n_classes());
    for i in 0..n_train {
        for class in &per_class_train {
            train.push(class[i].clone());
        }
    }
    Ok((train, test))
}

/// Header row of the dataset CSV.
pub fn csv_header() -> String {
    let mut s = String::from("label");
    for i in 0..LOCI_BINS {
        let _ = write!(s, ",f{i}");
    }
    s
}

/// One CSV row; values carry 9 significant digits.
pub fn csv_row(label: &str, features: &[f64]) -> String {
    let mut s = label.to_string();
    for f in features {
        let _ = write!(s, ",{f:.8e}");
    }
    s
}

pub fn to_csv(samples: &[Sample]) -> Result<String> {
    let mut out = csv_header();
    out.push('\n');
    for s in samples {
        if s.label.contains([',', '"', '\n', '\r']) {
            return Err(Error::format(format!(
                "label {:?} cannot be written to CSV",
                s.label
            )));
        }
        if s.features.len() != LOCI_BINS {
            return Err(Error::Dimension(format!(
                "CSV rows hold {LOCI_BINS} features, sample has {}",
                s.features.len()
            )));
        }
        out.push_str(&csv_row(&s.label, &s.features));
        out.push('\n');
    }
    Ok(out)
}

/// Parses a dataset CSV. Classes are indexed in sorted label order.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.starts_with("label,")) {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default().to_string();
        let features = fields
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::format(format!("line {}: non-numeric feature", n + 1)))?;
        if features.len() != LOCI_BINS {
            return Err(Error::format(format!(
                "line {}: expected {LOCI_BINS} features, found {}",
                n + 1,
                features.len()
            )));
        }
        rows.push((label, features));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset("CSV has no rows".into()));
    }
    let mut class_names: Vec<String> = rows.iter().map(|(l, _)| l.clone()).collect();
    class_names.sort();
    class_names.dedup();
    let samples = rows
        .into_iter()
        .map(|(label, features)| Sample {
            class_index: class_names
                .binary_search(&label)
                .expect("label collected above"),
            label,
            features,
            source: None,
        })
        .collect();
    Ok(Dataset {
        class_names,
        samples,
    })
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::Format {
        path: Some(path.to_path_buf()),
        message: format!("unreadable: {e}"),
    })?;
    parse_csv(&text).map_err(|e| e.at_path(path))
}

/// A dataset from either a folder of class directories or a CSV file.
pub fn load_dataset(path: &Path, config: &PipelineConfig) -> Result<Dataset> {
    if path.is_dir() {
        build_dataset(path, config)
    } else {
        read_csv(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgm::{write_pgm, PgmEncoding};
    use crate::synth::{render_clean, template};

    fn toy(n_per_class: usize, classes: usize) -> Dataset {
        let class_names: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
        let samples = (0..classes)
            .flat_map(|c| {
                (0..n_per_class).map(move |i| Sample {
                    label: format!("c{c}"),
                    class_index: c,
                    features: vec![(c * 1000 + i) as f64; LOCI_BINS],
                    source: None,
                })
            })
            .collect();
        Dataset {
            class_names,
            samples,
        }
    }

    #[test]
    fn split_is_seeded_disjoint_and_sized() {
        let ds = toy(10, 3);
        let (tr, te) = split_dataset(&ds, 6, 3, 42).unwrap();
        assert_eq!((tr.len(), te.len()), (18, 9));
        let (tr2, te2) = split_dataset(&ds, 6, 3, 42).unwrap();
        assert_eq!((&tr, &te), (&tr2, &te2));
        for t in &te {
            assert!(!tr.iter().any(|s| s.features == t.features));
        }
        // round-robin class order in the training list
        let order: Vec<usize> = tr.iter().take(6).map(|s| s.class_index).collect();
        assert_eq!(order, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn split_without_test_keeps_everything_for_training() {
        let ds = toy(5, 2);
        let (tr, te) = split_dataset(&ds, 5, 0, 1).unwrap();
        assert_eq!(tr.len(), 10);
        assert!(te.is_empty());
    }

    #[test]
    fn split_needs_enough_samples() {
        assert!(matches!(
            split_dataset(&toy(5, 2), 4, 2, 1),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn csv_round_trip_within_printed_precision() {
        let mut ds = toy(2, 2);
        ds.samples[0].features[3] = 0.123456789123;
        let text = to_csv(&ds.samples).unwrap();
        assert!(text.starts_with("label,f0,f1,"));
        assert!(text.lines().next().unwrap().ends_with(",f80"));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.class_names, ds.class_names);
        assert_eq!(back.samples.len(), 4);
        assert_eq!(back.samples[0].features[3], 0.123456789);
        assert!(matches!(parse_csv("a,1,2\n"), Err(Error::Format { .. })));
    }

    #[test]
    fn builds_from_class_folders() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["tee", "ell"] {
            let d = dir.path().join(name);
            fs::create_dir(&d).unwrap();
            write_pgm(
                d.join("a.pgm"),
                &render_clean(template(name).unwrap()),
                PgmEncoding::Raw,
            )
            .unwrap();
        }
        let ds = build_dataset(dir.path(), &PipelineConfig::default()).unwrap();
        assert_eq!(ds.class_names, vec!["ell", "tee"]);
        let idx: Vec<usize> = ds.samples.iter().map(|s| s.class_index).collect();
        assert_eq!(idx, vec![0, 1]);
        assert!(ds.samples.iter().all(|s| s.features.len() == LOCI_BINS));
    }

    #[test]
    fn build_errors_name_their_cause() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("empty")).unwrap();
        assert!(matches!(
            build_dataset(dir.path(), &PipelineConfig::default()),
            Err(Error::EmptyDataset(_))
        ));

        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().join("bad");
        fs::create_dir(&d).unwrap();
        fs::write(d.join("x.pgm"), b"P5 garbage").unwrap();
        match build_dataset(dir.path(), &PipelineConfig::default()) {
            Err(Error::Format { path: Some(p), .. }) => assert!(p.ends_with("x.pgm")),
            other => panic!("{other:?}"),
        }

        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().join("two");
        fs::create_dir(&d).unwrap();
        let mut page = GrayImage::filled(40, 20, 255).unwrap();
        for y in 5..15 {
            for x in (3..8).chain(25..30) {
                page.set(x, y, 0);
            }
        }
        write_pgm(d.join("pair.pgm"), &page, PgmEncoding::Plain).unwrap();
        assert!(matches!(
            build_dataset(dir.path(), &PipelineConfig::default()),
            Err(Error::Segmentation { found: 2, .. })
        ));
    }
}
