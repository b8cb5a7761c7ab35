//! Runs the 3-class and 6-class synthetic experiments and prints a table of
//! training effort and test accuracy.
//!
//!     cargo run --release --example table_reproduction [seed]

use std::time::Instant;

use hcr::experiment::{run_experiment, ExperimentSpec};

fn main() -> hcr::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let rows = [
        ExperimentSpec::synthetic(3, 30, 700),
        ExperimentSpec::synthetic(6, 54, 1200),
        ExperimentSpec::synthetic(6, 60, 1200),
    ];
    println!(
        "{:<40} {:>6} {:>6} {:>7} {:>7} {:>10} {:>9}",
        "classes", "train", "test", "hidden", "epochs", "final mse", "accuracy"
    );
    for spec in rows {
        let spec = spec.with_seed(seed);
        let start = Instant::now();
        let out = run_experiment(&spec)?;
        println!(
            "{:<40} {:>6} {:>6} {:>7} {:>7} {:>10.5} {:>8.1}%  ({:.1}s)",
            spec.classes.join(" "),
            spec.n_train,
            spec.n_test,
            spec.hidden[0],
            out.training.epochs_run,
            out.training.final_mse,
            out.accuracy(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
