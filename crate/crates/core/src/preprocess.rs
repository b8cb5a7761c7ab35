//! Turns a scanned string of characters into size-normalized binary cells.
//!
//! The default chain is binarize, crop, fill holes, segment and normalize.
//! Edge detection is available but only applied when
//! [`PipelineConfig::edges`] is set, in which case each normalized cell is
//! reduced to its outline.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, BoundingBox, CharacterCell, GrayImage, RgbImage};

/// Blank border kept around the glyph inside a normalized cell.
pub const CELL_MARGIN: usize = 2;

/// Components smaller than this many pixels are treated as noise.
pub const DEFAULT_MIN_AREA: usize = 4;

/// Knobs of the preprocessing chain. Stored in weights files so test-time
/// featurization matches training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub cell_side: usize,
    pub min_area: usize,
    pub edges: bool,
    /// Fixed binarization threshold; Otsu when `None`.
    pub threshold: Option<u8>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cell_side: CharacterCell::DEFAULT_SIDE,
            min_area: DEFAULT_MIN_AREA,
            edges: false,
            threshold: None,
        }
    }
}

/// ITU-R 601 luma, rounded to the nearest integer.
pub fn rgb_to_gray(image: &RgbImage) -> GrayImage {
    let data = image
        .pixels()
        .iter()
        .map(|&[r, g, b]| {
            let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(image.width(), image.height(), data)
        .expect("RgbImage guarantees a non-empty consistent grid")
}

/// Otsu's threshold: the `t` maximizing between-class variance where the
/// dark class is `{gray < t}`. The smallest maximizer wins; a uniform
/// image yields 0.
pub fn otsu_threshold(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    let total = image.pixels().len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(g, &c)| g as f64 * c as f64)
        .sum();

    let mut best_t = 0u8;
    let mut best_var = 0.0f64;
    let mut count_below = 0.0f64;
    let mut sum_below = 0.0f64;
    for t in 1..=255usize {
        count_below += hist[t - 1] as f64;
        sum_below += (t - 1) as f64 * hist[t - 1] as f64;
        let count_above = total - count_below;
        if count_below == 0.0 || count_above == 0.0 {
            continue;
        }
        let mean_below = sum_below / count_below;
        let mean_above = (sum_all - sum_below) / count_above;
        let w0 = count_below / total;
        let w1 = count_above / total;
        let var = w0 * w1 * (mean_below - mean_above).powi(2);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }
    best_t
}

/// Pixel is ink iff `gray < threshold`.
pub fn binarize(image: &GrayImage, threshold: Option<u8>) -> BinaryImage {
    let t = threshold.unwrap_or_else(|| otsu_threshold(image));
    let data = image.pixels().iter().map(|&g| g < t).collect();
    BinaryImage::new(image.width(), image.height(), data).expect("same extent as the gray image")
}

/// Tightest box around all ink, or `None` for a blank image.
pub fn ink_box(image: &BinaryImage) -> Option<BoundingBox> {
    let (w, h) = (image.width(), image.height());
    let mut bbox: Option<BoundingBox> = None;
    for y in 0..h {
        for x in 0..w {
            if image.get(x, y) {
                let p = BoundingBox::new(x, y, x, y);
                bbox = Some(bbox.map_or(p, |b| b.union(&p)));
            }
        }
    }
    bbox
}

/// Removes blank rows and columns around the ink.
pub fn crop_to_ink(image: &BinaryImage) -> Result<(BinaryImage, BoundingBox)> {
    let bbox = ink_box(image).ok_or_else(|| Error::EmptyImage("nothing to crop".into()))?;
    Ok((image.sub_image(&bbox)?, bbox))
}

const FOUR: [(isize, isize); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];
const EIGHT: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

fn neighbor(x: usize, y: usize, d: (isize, isize), w: usize, h: usize) -> Option<(usize, usize)> {
    let nx = x.checked_add_signed(d.0)?;
    let ny = y.checked_add_signed(d.1)?;
    (nx < w && ny < h).then_some((nx, ny))
}

/// Keeps ink pixels with at least one background 4-neighbor. Pixels past the
/// border count as background.
pub fn detect_edges(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    let mut out = BinaryImage::blank(w, h);
    for y in 0..h {
        for x in 0..w {
            if !image.get(x, y) {
                continue;
            }
            let boundary = FOUR.iter().any(|&d| match neighbor(x, y, d, w, h) {
                Some((nx, ny)) => !image.get(nx, ny),
                None => true,
            });
            if boundary {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Fills background regions that are not 4-connected to the image border.
pub fn fill_holes(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let on_border = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            if on_border && !image.get(x, y) && !outside[y * w + x] {
                outside[y * w + x] = true;
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for &d in &FOUR {
            if let Some((nx, ny)) = neighbor(x, y, d, w, h) {
                let i = ny * w + nx;
                if !outside[i] && !image.get(nx, ny) {
                    outside[i] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    let data = outside.into_iter().map(|o| !o).collect();
    BinaryImage::new(w, h, data).expect("same extent")
}

/// An 8-connected ink component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub bbox: BoundingBox,
    pub area: usize,
}

/// Result of connected-component labelling. Label 0 is background;
/// component `i` carries label `i + 1`.
#[derive(Debug, Clone)]
pub struct Labelling {
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

/// Labels 8-connected ink components in raster order of their first pixel.
pub fn label_components(image: &BinaryImage) -> Labelling {
    let (w, h) = (image.width(), image.height());
    let mut labels = vec![0u32; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !image.get(x, y) || labels[y * w + x] != 0 {
                continue;
            }
            let label = components.len() as u32 + 1;
            let mut bbox = BoundingBox::new(x, y, x, y);
            let mut area = 0;
            labels[y * w + x] = label;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                area += 1;
                bbox = bbox.union(&BoundingBox::new(cx, cy, cx, cy));
                for &d in &EIGHT {
                    if let Some((nx, ny)) = neighbor(cx, cy, d, w, h) {
                        let i = ny * w + nx;
                        if image.get(nx, ny) && labels[i] == 0 {
                            labels[i] = label;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            components.push(Component { bbox, area });
        }
    }
    Labelling { labels, components }
}

/// Two boxes belong to the same character when their column ranges overlap
/// by at least half the narrower box's width.
pub fn overlaps_horizontally(a: &BoundingBox, b: &BoundingBox) -> bool {
    2 * a.horizontal_overlap(b) >= a.width().min(b.width())
}

/// One box per character, left to right.
///
/// Components under `min_area` pixels are dropped as noise, then boxes
/// stacked over one another (diacritics, broken strokes) are merged until no
/// pair overlaps horizontally by half or more.
pub fn find_bounding_boxes(image: &BinaryImage, min_area: usize) -> Result<Vec<BoundingBox>> {
    let mut boxes: Vec<BoundingBox> = label_components(image)
        .components
        .into_iter()
        .filter(|c| c.area >= min_area)
        .map(|c| c.bbox)
        .collect();
    if boxes.is_empty() {
        return Err(Error::EmptyImage("no character components found".into()));
    }
    'merge: loop {
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if overlaps_horizontally(&boxes[i], &boxes[j]) {
                    let absorbed = boxes.swap_remove(j);
                    boxes[i] = boxes[i].union(&absorbed);
                    continue 'merge;
                }
            }
        }
        break;
    }
    boxes.sort();
    Ok(boxes)
}

/// Scales the glyph inside `bbox` with nearest-neighbor sampling so its
/// longer side spans `side - 2 * CELL_MARGIN`, keeping the aspect ratio, and
/// centers it on a blank `side` x `side` cell.
pub fn normalize_cell(
    image: &BinaryImage,
    bbox: &BoundingBox,
    side: usize,
) -> Result<CharacterCell> {
    if side <= 2 * CELL_MARGIN {
        return Err(Error::InvalidImage(format!(
            "cell side {side} leaves no room inside a {CELL_MARGIN}-pixel margin"
        )));
    }
    image.check_box(bbox)?;
    let (w, h) = (bbox.width(), bbox.height());
    let has_ink = (bbox.y0..=bbox.y1).any(|y| (bbox.x0..=bbox.x1).any(|x| image.get(x, y)));
    if !has_ink {
        return Err(Error::EmptyImage("bounding box contains no ink".into()));
    }

    let avail = side - 2 * CELL_MARGIN;
    let scale = avail as f64 / w.max(h) as f64;
    let scaled = |n: usize| ((n as f64 * scale).round() as usize).clamp(1, avail);
    let (new_w, new_h) = (scaled(w), scaled(h));
    let (ox, oy) = ((side - new_w) / 2, (side - new_h) / 2);

    let mut data = vec![false; side * side];
    for v in 0..new_h {
        let sy = bbox.y0 + ((2 * v + 1) * h / (2 * new_h)).min(h - 1);
        for u in 0..new_w {
            let sx = bbox.x0 + ((2 * u + 1) * w / (2 * new_w)).min(w - 1);
            data[(oy + v) * side + ox + u] = image.get(sx, sy);
        }
    }
    CharacterCell::new(side, data)
}

/// Every intermediate product of [`preprocess_string`].
#[derive(Debug, Clone)]
pub struct PreprocessTrace {
    pub binary: BinaryImage,
    /// Location of the cropped region in the input.
    pub crop: BoundingBox,
    pub cropped: BinaryImage,
    pub filled: BinaryImage,
    /// Character boxes in input-image coordinates, left to right.
    pub boxes: Vec<BoundingBox>,
    pub cells: Vec<CharacterCell>,
}

/// Runs the full chain and keeps every stage.
pub fn trace_string(image: &GrayImage, config: &PipelineConfig) -> Result<PreprocessTrace> {
    let binary = binarize(image, config.threshold);
    let (cropped, crop) = crop_to_ink(&binary)?;
    let filled = fill_holes(&cropped);
    let local_boxes = find_bounding_boxes(&filled, config.min_area)?;
    let cells = local_boxes
        .iter()
        .map(|b| {
            let cell = normalize_cell(&filled, b, config.cell_side)?;
            if config.edges {
                CharacterCell::from_image(&detect_edges(&cell.to_image()))
            } else {
                Ok(cell)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let boxes = local_boxes
        .iter()
        .map(|b| {
            BoundingBox::new(
                b.x0 + crop.x0,
                b.y0 + crop.y0,
                b.x1 + crop.x0,
                b.y1 + crop.y0,
            )
        })
        .collect();
    Ok(PreprocessTrace {
        binary,
        crop,
        cropped,
        filled,
        boxes,
        cells,
    })
}

/// Segments a string image into normalized character cells, left to right.
pub fn preprocess_string(image: &GrayImage, config: &PipelineConfig) -> Result<Vec<CharacterCell>> {
    trace_string(image, config).map(|t| t.cells)
}
