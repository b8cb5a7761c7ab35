//! Reading and writing 8-bit PGM images (plain `P2` and raw `P5`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// PGM flavor on write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// `P2`, ASCII samples.
    Plain,
    /// `P5`, one byte per sample.
    Raw,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::format(format!("truncated data while reading {what}"))
            } else {
                Error::format(format!("expected a number for {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(format!("{what} out of range")))
    }
}

/// Decodes a PGM byte buffer. Samples are rescaled to 0..=255 when
/// maxval is below 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 {
        return Err(Error::format("missing PGM magic number"));
    }
    let raw = match &bytes[..2] {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::format(format!(
                "unsupported magic {:?}, expected P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format("zero image extent"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(format!("maxval {maxval} not in 1..=255")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("image extent overflows"))?;

    let mut samples = Vec::with_capacity(n);
    if raw {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::format("truncated data after header"));
        }
        let start = cur.pos + 1;
        let end = start + n;
        if end > bytes.len() {
            return Err(Error::format(format!(
                "truncated data: expected {n} samples, found {}",
                bytes.len().saturating_sub(start)
            )));
        }
        samples.extend_from_slice(&bytes[start..end]);
        if let Some(&v) = samples.iter().find(|&&v| v as usize > maxval) {
            return Err(Error::format(format!("sample {v} exceeds maxval {maxval}")));
        }
    } else {
        for _ in 0..n {
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(Error::format(format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v as u8);
        }
    }
    if maxval != 255 {
        for s in &mut samples {
            *s = ((*s as usize * 255 + maxval / 2) / maxval) as u8;
        }
    }
    GrayImage::new(width, height, samples)
}

pub fn encode_pgm(image: &GrayImage, encoding: PgmEncoding) -> Vec<u8> {
    let header = format!(
        "{}\n{} {}\n255\n",
        match encoding {
            PgmEncoding::Plain => "P2",
            PgmEncoding::Raw => "P5",
        },
        image.width(),
        image.height()
    );
    let mut out = header.into_bytes();
    match encoding {
        PgmEncoding::Raw => out.extend_from_slice(image.pixels()),
        PgmEncoding::Plain => {
            for row in image.pixels().chunks(image.width()) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::Format {
        path: Some(path.to_path_buf()),
        message: format!("unreadable: {e}"),
    })?;
    parse_pgm(&bytes).map_err(|e| e.at_path(path))
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage, encoding: PgmEncoding) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image, encoding)).map_err(|e| Error::io(path, e))
}
