//! Trains a recognizer on synthetic glyphs in memory, then reads a string
//! of unseen glyphs left to right.
//!
//!     cargo run --release --example recognize_string [glyph ...]

use hcr::experiment::{run_experiment, ExperimentSpec};
use hcr::synth::{render_string, template, TEMPLATES};

fn main() -> hcr::Result<()> {
    let spec = ExperimentSpec::synthetic(TEMPLATES.len(), 40, 1000);
    let outcome = run_experiment(&spec)?;
    println!(
        "trained on {} classes: {} epochs, held-out accuracy {:.1}%",
        spec.classes.len(),
        outcome.training.epochs_run,
        outcome.accuracy()
    );

    let mut words: Vec<String> = std::env::args().skip(1).collect();
    if words.is_empty() {
        words = ["wye", "eff", "kay", "plus"].map(String::from).to_vec();
    }
    let glyphs = words
        .iter()
        .map(|w| template(w))
        .collect::<hcr::Result<Vec<_>>>()?;
    let page = render_string(&glyphs, 6, 99);

    let (predictions, _) = outcome.weights.recognize(&page)?;
    for (want, p) in words.iter().zip(&predictions) {
        let top = p.activations[p.class_index];
        println!("  drew {want:<6} read {:<6} (activation {top:.4})", p.label);
    }
    let read: Vec<&str> = predictions.iter().map(|p| p.label.as_str()).collect();
    println!("string: {}", read.join(" "));
    Ok(())
}
