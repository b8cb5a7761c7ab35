//! Segments a synthetic three-character string and prints each normalized
//! cell as ASCII art. Pass a directory to also get every stage as PGM.
//!
//!     cargo run --example preprocess_stages [dump_dir]

use std::path::PathBuf;

use hcr::commands::write_stages;
use hcr::preprocess::{trace_string, PipelineConfig};
use hcr::synth::{render_string, template};

fn main() -> hcr::Result<()> {
    let glyphs = ["kay", "aitch", "zed"].map(|n| template(n).expect("built-in glyph"));
    let page = render_string(&glyphs, 8, 3);
    let config = PipelineConfig {
        cell_side: 16,
        ..PipelineConfig::default()
    };
    let trace = trace_string(&page, &config)?;

    println!(
        "page {}x{}, ink crop {:?}",
        page.width(),
        page.height(),
        trace.crop
    );
    for (bbox, cell) in trace.boxes.iter().zip(&trace.cells) {
        println!(
            "\ncharacter at x {}..={}, y {}..={}",
            bbox.x0, bbox.x1, bbox.y0, bbox.y1
        );
        for y in 0..cell.side() {
            let row: String = (0..cell.side())
                .map(|x| if cell.get(x, y) { '#' } else { '.' })
                .collect();
            println!("  {row}");
        }
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        let written = write_stages(&dir, &page, &trace)?;
        println!(
            "\nwrote {} stage images to {}",
            written.len(),
            dir.display()
        );
    }
    Ok(())
}
