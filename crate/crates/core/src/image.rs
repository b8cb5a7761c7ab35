//! Pixel grids used throughout the pipeline.
//!
//! All images are stored row-major. Binary images use `true` for ink
//! (black) and `false` for background (white).

use crate::error::{Error, Result};

/// 8-bit RGB image, row-major, one `[r, g, b]` triple per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("RGB image has zero extent".into()));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "RGB data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }
}

/// 8-bit grayscale image; 0 is black, 255 is white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage("gray image has zero extent".into()));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "gray data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Uniform image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Inclusive axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Length of the shared column range, zero when disjoint.
    pub fn horizontal_overlap(&self, other: &BoundingBox) -> usize {
        let lo = self.x0.max(other.x0);
        let hi = self.x1.min(other.x1);
        if hi >= lo {
            hi - lo + 1
        } else {
            0
        }
    }

    fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 <= self.x1 && self.y0 <= self.y1 && self.x1 < width && self.y1 < height
    }
}

/// Two-level image. `true` marks ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "binary data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// All-background image.
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    /// Builds an image from rows of `'#'` (ink) and any other character
    /// (background). Handy for tests and examples.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::InvalidImage("ragged ascii rows".into()));
            }
            data.extend(row.chars().map(|c| c == '#'));
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.data[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().filter(|&&p| p).count()
    }

    pub fn has_ink(&self) -> bool {
        self.data.iter().any(|&p| p)
    }

    pub fn full_box(&self) -> Option<BoundingBox> {
        if self.width == 0 || self.height == 0 {
            None
        } else {
            Some(BoundingBox::new(0, 0, self.width - 1, self.height - 1))
        }
    }

    /// Copy of the pixels inside `bbox`.
    pub fn sub_image(&self, bbox: &BoundingBox) -> Result<BinaryImage> {
        self.check_box(bbox)?;
        let mut data = Vec::with_capacity(bbox.width() * bbox.height());
        for y in bbox.y0..=bbox.y1 {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + bbox.x0..=row + bbox.x1]);
        }
        BinaryImage::new(bbox.width(), bbox.height(), data)
    }

    pub(crate) fn check_box(&self, bbox: &BoundingBox) -> Result<()> {
        if bbox.fits(self.width, self.height) {
            Ok(())
        } else {
            Err(Error::InvalidImage(format!(
                "box {:?} outside {}x{} image",
                bbox, self.width, self.height
            )))
        }
    }

    /// Renders ink as 0 and background as 255.
    pub fn to_gray(&self) -> Option<GrayImage> {
        let data = self.data.iter().map(|&p| if p { 0 } else { 255 }).collect();
        GrayImage::new(self.width, self.height, data).ok()
    }
}

/// Fixed-size square cell holding one size-normalized character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharacterCell {
    side: usize,
    data: Vec<bool>,
}

impl CharacterCell {
    pub const DEFAULT_SIDE: usize = 32;

    pub fn new(side: usize, data: Vec<bool>) -> Result<Self> {
        if side == 0 || data.len() != side * side {
            return Err(Error::InvalidImage(format!(
                "cell data length {} does not match side {}",
                data.len(),
                side
            )));
        }
        Ok(Self { side, data })
    }

    pub fn from_image(image: &BinaryImage) -> Result<Self> {
        if image.width() != image.height() {
            return Err(Error::InvalidImage(format!(
                "cell must be square, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Self::new(image.width(), image.pixels().to_vec())
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.side + x]
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().filter(|&&p| p).count()
    }

    pub fn to_image(&self) -> BinaryImage {
        BinaryImage {
            width: self.side,
            height: self.side,
            data: self.data.clone(),
        }
    }
}
