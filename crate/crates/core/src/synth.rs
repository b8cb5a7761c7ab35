//! Synthetic handwriting-like glyphs.
//!
//! Each class is a stroke template in the unit square. A sample is the
//! template drawn with a round pen on a 32x32 page after a random
//! translation (up to 2 px each way), an independent scale per axis (up to
//! 10%), and random pixel flips at rate `jitter`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pgm::{write_pgm, PgmEncoding};
use crate::preprocess::{preprocess_string, PipelineConfig};

pub const GLYPH_CANVAS: usize = 32;
const NOMINAL_SIZE: f64 = 20.0;
const PEN_RADIUS: f64 = 1.5;
const MAX_SHIFT: i64 = 2;
const MAX_SCALE: f64 = 0.10;

type Segment = ((f64, f64), (f64, f64));

/// A named stroke skeleton; coordinates in `[0, 1]`, y pointing down.
#[derive(Debug, Clone, Copy)]
pub struct GlyphTemplate {
    pub name: &'static str,
    pub strokes: &'static [Segment],
}

pub const TEMPLATES: &[GlyphTemplate] = &[
    GlyphTemplate {
        name: "tee",
        strokes: &[((0.0, 0.0), (1.0, 0.0)), ((0.5, 0.0), (0.5, 1.0))],
    },
    GlyphTemplate {
        name: "ell",
        strokes: &[((0.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (1.0, 1.0))],
    },
    GlyphTemplate {
        name: "ex",
        strokes: &[((0.0, 0.0), (1.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))],
    },
    GlyphTemplate {
        name: "zed",
        strokes: &[
            ((0.0, 0.0), (1.0, 0.0)),
            ((1.0, 0.0), (0.0, 1.0)),
            ((0.0, 1.0), (1.0, 1.0)),
        ],
    },
    GlyphTemplate {
        name: "aitch",
        strokes: &[
            ((0.0, 0.0), (0.0, 1.0)),
            ((1.0, 0.0), (1.0, 1.0)),
            ((0.0, 0.5), (1.0, 0.5)),
        ],
    },
    GlyphTemplate {
        name: "vee",
        strokes: &[((0.0, 0.0), (0.5, 1.0)), ((0.5, 1.0), (1.0, 0.0))],
    },
    GlyphTemplate {
        name: "eff",
        strokes: &[
            ((0.0, 0.0), (0.0, 1.0)),
            ((0.0, 0.0), (1.0, 0.0)),
            ((0.0, 0.5), (0.7, 0.5)),
        ],
    },
    GlyphTemplate {
        name: "plus",
        strokes: &[((0.5, 0.0), (0.5, 1.0)), ((0.0, 0.5), (1.0, 0.5))],
    },
    GlyphTemplate {
        name: "wye",
        strokes: &[
            ((0.0, 0.0), (0.5, 0.5)),
            ((1.0, 0.0), (0.5, 0.5)),
            ((0.5, 0.5), (0.5, 1.0)),
        ],
    },
    GlyphTemplate {
        name: "kay",
        strokes: &[
            ((0.0, 0.0), (0.0, 1.0)),
            ((1.0, 0.0), (0.0, 0.5)),
            ((0.0, 0.5), (1.0, 1.0)),
        ],
    },
];

pub fn template(name: &str) -> Result<&'static GlyphTemplate> {
    TEMPLATES.iter().find(|t| t.name == name).ok_or_else(|| {
        let known: Vec<&str> = TEMPLATES.iter().map(|t| t.name).collect();
        Error::Dimension(format!(
            "unknown glyph {name:?}; known: {}",
            known.join(", ")
        ))
    })
}

/// The first `n` template names.
pub fn class_names(n: usize) -> Vec<String> {
    TEMPLATES
        .iter()
        .take(n)
        .map(|t| t.name.to_string())
        .collect()
}

/// Random per-sample distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub dx: i64,
    pub dy: i64,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl Distortion {
    pub const NONE: Distortion = Distortion {
        dx: 0,
        dy: 0,
        scale_x: 1.0,
        scale_y: 1.0,
    };

    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self {
            dx: rng.gen_range(-MAX_SHIFT..=MAX_SHIFT),
            dy: rng.gen_range(-MAX_SHIFT..=MAX_SHIFT),
            scale_x: 1.0 + rng.gen_range(-MAX_SCALE..=MAX_SCALE),
            scale_y: 1.0 + rng.gen_range(-MAX_SCALE..=MAX_SCALE),
        }
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let (wx, wy) = (p.0 - a.0, p.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((wx * vx + wy * vy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * vx - p.0, a.1 + t * vy - p.1);
    (cx * cx + cy * cy).sqrt()
}

/// Draws `glyph` on a blank `GLYPH_CANVAS`-square page; `true` is ink.
pub fn draw_glyph(glyph: &GlyphTemplate, distortion: Distortion) -> Vec<bool> {
    let n = GLYPH_CANVAS;
    let half = n as f64 / 2.0;
    let (sx, sy) = (
        NOMINAL_SIZE * distortion.scale_x,
        NOMINAL_SIZE * distortion.scale_y,
    );
    let (cx, cy) = (half + distortion.dx as f64, half + distortion.dy as f64);
    let map = |(u, v): (f64, f64)| (cx + (u - 0.5) * sx, cy + (v - 0.5) * sy);
    let segments: Vec<Segment> = glyph
        .strokes
        .iter()
        .map(|&(a, b)| (map(a), map(b)))
        .collect();
    let mut ink = vec![false; n * n];
    for y in 0..n {
        for x in 0..n {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            ink[y * n + x] = segments
                .iter()
                .any(|&(a, b)| segment_distance(p, a, b) <= PEN_RADIUS);
        }
    }
    ink
}

fn to_gray(ink: &[bool], width: usize, height: usize) -> GrayImage {
    let data = ink.iter().map(|&i| if i { 0 } else { 255 }).collect();
    GrayImage::new(width, height, data).expect("canvas is non-empty")
}

fn sample_rng(seed: u64, class: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((class as u64) << 32) | index as u64);
    rng
}

const MAX_NOISE_DRAWS: usize = 100;

fn is_single_character(image: &GrayImage) -> bool {
    preprocess_string(image, &PipelineConfig::default()).is_ok_and(|cells| cells.len() == 1)
}

/// Sample `index` of class `class`: distortion and noise drawn from a
/// stream private to that pair, so the same sample comes out regardless of
/// how many others are generated.
///
/// Noise that splits the page into more than one character (a stray speck
/// beside the glyph, a stroke cut in two) is redrawn, so every sample is a
/// valid single-character image. After `MAX_NOISE_DRAWS` failures the
/// noise-free glyph is used.
pub fn render_sample(
    glyph: &GlyphTemplate,
    class: usize,
    index: usize,
    jitter: f64,
    seed: u64,
) -> GrayImage {
    let mut rng = sample_rng(seed, class, index);
    let distortion = Distortion::sample(&mut rng);
    let clean = draw_glyph(glyph, distortion);
    if jitter > 0.0 {
        for _ in 0..MAX_NOISE_DRAWS {
            let noisy: Vec<bool> = clean
                .iter()
                .map(|&p| p ^ rng.gen_bool(jitter.min(1.0)))
                .collect();
            let image = to_gray(&noisy, GLYPH_CANVAS, GLYPH_CANVAS);
            if is_single_character(&image) {
                return image;
            }
        }
    }
    to_gray(&clean, GLYPH_CANVAS, GLYPH_CANVAS)
}

/// Undistorted, noise-free rendering.
pub fn render_clean(glyph: &GlyphTemplate) -> GrayImage {
    to_gray(
        &draw_glyph(glyph, Distortion::NONE),
        GLYPH_CANVAS,
        GLYPH_CANVAS,
    )
}

/// Glyphs side by side on one page, left to right, with `gap` blank
/// columns between the 32-pixel glyph canvases.
pub fn render_string(glyphs: &[&GlyphTemplate], gap: usize, seed: u64) -> GrayImage {
    let n = GLYPH_CANVAS;
    let width = (glyphs.len() * (n + gap) + gap).max(1);
    let mut page = vec![false; width * n];
    for (k, g) in glyphs.iter().enumerate() {
        let mut rng = sample_rng(seed, usize::MAX >> 32, k);
        let ink = draw_glyph(g, Distortion::sample(&mut rng));
        let x0 = gap + k * (n + gap);
        for y in 0..n {
            for x in 0..n {
                page[y * width + x0 + x] = ink[y * n + x];
            }
        }
    }
    to_gray(&page, width, n)
}

/// Writes `n_per_class` P5 images per class to `out_dir/<class>/`.
/// Returns the written paths in class then index order.
pub fn write_dataset(
    out_dir: &Path,
    classes: &[String],
    n_per_class: usize,
    jitter: f64,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    if !(0.0..=1.0).contains(&jitter) {
        return Err(Error::Dimension(format!("jitter {jitter} not in [0, 1]")));
    }
    let templates = classes
        .iter()
        .map(|c| template(c))
        .collect::<Result<Vec<_>>>()?;
    let mut written = Vec::with_capacity(classes.len() * n_per_class);
    for (ci, (name, glyph)) in classes.iter().zip(templates).enumerate() {
        let dir = out_dir.join(name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for i in 0..n_per_class {
            let path = dir.join(format!("{name}_{i:04}.pgm"));
            write_pgm(
                &path,
                &render_sample(glyph, ci, i, jitter, seed),
                PgmEncoding::Raw,
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loci::extract_loci;

    #[test]
    fn at_least_six_templates_with_unique_names() {
        assert!(TEMPLATES.len() >= 6);
        let mut names: Vec<&str> = TEMPLATES.iter().map(|t| t.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), TEMPLATES.len());
        assert!(template("nope").is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let g = template("zed").unwrap();
        assert_eq!(
            render_sample(g, 3, 7, 0.0, 9),
            render_sample(g, 3, 7, 0.0, 9)
        );
        assert_eq!(
            render_sample(g, 3, 7, 0.05, 9),
            render_sample(g, 3, 7, 0.05, 9)
        );
        assert_ne!(
            render_sample(g, 3, 7, 0.0, 9),
            render_sample(g, 3, 8, 0.0, 9)
        );
    }

    #[test]
    fn every_clean_glyph_is_one_character() {
        for t in TEMPLATES {
            let cells = preprocess_string(&render_clean(t), &PipelineConfig::default()).unwrap();
            assert_eq!(cells.len(), 1, "{}", t.name);
        }
    }

    #[test]
    fn noisy_samples_are_single_characters() {
        for (ci, t) in TEMPLATES.iter().enumerate() {
            for i in 0..150 {
                let img = render_sample(t, ci, i, 0.03, 9);
                assert!(is_single_character(&img), "{} #{i}", t.name);
            }
        }
    }

    #[test]
    fn distinct_classes_have_distinct_loci() {
        let feats: Vec<Vec<f64>> = TEMPLATES
            .iter()
            .map(|t| {
                let cells =
                    preprocess_string(&render_clean(t), &PipelineConfig::default()).unwrap();
                extract_loci(&cells[0]).unwrap().to_vec()
            })
            .collect();
        for i in 0..feats.len() {
            for j in i + 1..feats.len() {
                assert_ne!(
                    feats[i], feats[j],
                    "{} vs {}",
                    TEMPLATES[i].name, TEMPLATES[j].name
                );
            }
        }
    }

    #[test]
    fn string_segments_in_drawn_order() {
        let glyphs: Vec<&GlyphTemplate> = ["ell", "ex", "tee"]
            .iter()
            .map(|n| template(n).unwrap())
            .collect();
        let page = render_string(&glyphs, 6, 1);
        let cells = preprocess_string(&page, &PipelineConfig::default()).unwrap();
        assert_eq!(cells.len(), 3);
    }
}
