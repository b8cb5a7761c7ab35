//! Characteristic Loci features.
//!
//! Every background pixel of a cell gets a code built from the number of
//! ink strokes crossed by rays cast up, down, left and right (each capped at
//! two). The feature vector is the histogram of the 81 possible codes,
//! divided by the number of ink pixels.

use crate::error::{Error, Result};
use crate::image::CharacterCell;

/// Number of distinct loci codes, 3 states in each of 4 directions.
pub const LOCI_BINS: usize = 81;

const CAP: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    fn step(self) -> (isize, isize) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }
}

/// Capped stroke crossings in the four directions. Each field is 0, 1 or 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CrossingCounts {
    pub up: u8,
    pub down: u8,
    pub left: u8,
    pub right: u8,
}

impl CrossingCounts {
    pub fn new(up: u8, down: u8, left: u8, right: u8) -> Result<Self> {
        if [up, down, left, right].iter().any(|&c| c > CAP) {
            return Err(Error::InvalidLocus(format!(
                "crossing counts ({up},{down},{left},{right}) exceed {CAP}"
            )));
        }
        Ok(Self {
            up,
            down,
            left,
            right,
        })
    }
}

/// Base-3 code with `up` as the least significant digit:
/// `up + 3 down + 9 left + 27 right`.
pub fn loci_code(counts: CrossingCounts) -> usize {
    counts.up as usize
        + 3 * counts.down as usize
        + 9 * counts.left as usize
        + 27 * counts.right as usize
}

/// Number of maximal ink runs met walking from `(x, y)` (exclusive) to the
/// border in `direction`, capped at 2. The start must be background.
pub fn crossing_count(
    cell: &CharacterCell,
    x: usize,
    y: usize,
    direction: Direction,
) -> Result<u8> {
    let side = cell.side();
    if x >= side || y >= side {
        return Err(Error::InvalidLocus(format!(
            "({x},{y}) outside {side}x{side} cell"
        )));
    }
    if cell.get(x, y) {
        return Err(Error::InvalidLocus(format!("({x},{y}) is an ink pixel")));
    }
    let (dx, dy) = direction.step();
    let (mut cx, mut cy) = (x, y);
    let mut runs = 0u8;
    let mut in_ink = false;
    loop {
        match (cx.checked_add_signed(dx), cy.checked_add_signed(dy)) {
            (Some(nx), Some(ny)) if nx < side && ny < side => {
                cx = nx;
                cy = ny;
            }
            _ => break,
        }
        let ink = cell.get(cx, cy);
        if ink && !in_ink {
            runs += 1;
            if runs == CAP {
                break;
            }
        }
        in_ink = ink;
    }
    Ok(runs)
}

/// The 81-bin normalized loci histogram of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LociVector {
    bins: [f64; LOCI_BINS],
}

impl LociVector {
    pub fn bins(&self) -> &[f64; LOCI_BINS] {
        &self.bins
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.bins.to_vec()
    }
}

/// Per-pixel code table, `None` on ink. Runs in time linear in the pixel
/// count: each direction is a single sweep tracking how many ink runs have
/// started so far.
pub fn loci_codes(cell: &CharacterCell) -> Vec<Option<usize>> {
    let n = cell.side();
    let idx = |x: usize, y: usize| y * n + x;
    let mut up = vec![0u8; n * n];
    let mut down = vec![0u8; n * n];
    let mut left = vec![0u8; n * n];
    let mut right = vec![0u8; n * n];

    // `seen` counts runs that started strictly before the current pixel
    // along the sweep direction.
    let sweep = |table: &mut Vec<u8>, coords: &mut dyn Iterator<Item = (usize, usize)>| {
        let mut seen = 0u8;
        let mut prev_ink = false;
        for (x, y) in coords {
            table[idx(x, y)] = seen;
            let ink = cell.get(x, y);
            if ink && !prev_ink {
                seen = (seen + 1).min(CAP);
            }
            prev_ink = ink;
        }
    };
    for x in 0..n {
        sweep(&mut up, &mut (0..n).map(|y| (x, y)));
        sweep(&mut down, &mut (0..n).rev().map(|y| (x, y)));
    }
    for y in 0..n {
        sweep(&mut left, &mut (0..n).map(|x| (x, y)));
        sweep(&mut right, &mut (0..n).rev().map(|x| (x, y)));
    }

    (0..n * n)
        .map(|i| {
            (!cell.pixels()[i]).then(|| {
                loci_code(CrossingCounts {
                    up: up[i],
                    down: down[i],
                    left: left[i],
                    right: right[i],
                })
            })
        })
        .collect()
}

/// Unnormalized histogram: bin `c` counts background pixels with code `c`.
pub fn loci_histogram(cell: &CharacterCell) -> [u32; LOCI_BINS] {
    let mut hist = [0u32; LOCI_BINS];
    for code in loci_codes(cell).into_iter().flatten() {
        hist[code] += 1;
    }
    hist
}

/// Loci histogram divided by the ink pixel count.
pub fn extract_loci(cell: &CharacterCell) -> Result<LociVector> {
    let ink = cell.ink_count();
    if ink == 0 {
        return Err(Error::EmptyImage(
            "cell has no ink to normalize loci by".into(),
        ));
    }
    let hist = loci_histogram(cell);
    let mut bins = [0.0; LOCI_BINS];
    for (b, &h) in bins.iter_mut().zip(hist.iter()) {
        *b = h as f64 / ink as f64;
    }
    Ok(LociVector { bins })
}
