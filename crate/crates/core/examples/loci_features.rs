//! Characteristic loci of a small hand-drawn cell: the code of every
//! background pixel, then the normalized histogram.
//!
//!     cargo run --example loci_features

use hcr::image::{BinaryImage, CharacterCell};
use hcr::loci::{crossing_count, extract_loci, loci_codes, Direction};

fn main() -> hcr::Result<()> {
    let cell = CharacterCell::from_image(&BinaryImage::from_ascii(&[
        "........", ".######.", ".#....#.", ".#....#.", ".######.", "......#.", "......#.",
        "........",
    ])?)?;

    println!("codes (ink shown as ##):");
    let codes = loci_codes(&cell);
    for y in 0..cell.side() {
        let row: Vec<String> = (0..cell.side())
            .map(|x| codes[y * cell.side() + x].map_or("##".to_string(), |c| format!("{c:2}")))
            .collect();
        println!("  {}", row.join(" "));
    }

    let (x, y) = (3, 2);
    print!("\ncrossings from ({x},{y}):");
    for d in Direction::ALL {
        print!(" {d:?}={}", crossing_count(&cell, x, y, d)?);
    }
    println!();

    let loci = extract_loci(&cell)?;
    println!(
        "\nnon-empty bins (count / ink pixels = {}):",
        cell.ink_count()
    );
    for (code, v) in loci.bins().iter().enumerate().filter(|(_, v)| **v > 0.0) {
        let (u, d, l, r) = (code % 3, code / 3 % 3, code / 9 % 3, code / 27);
        println!("  code {code:2} (up {u} down {d} left {l} right {r}): {v:.4}");
    }
    Ok(())
}
