//! Saves a trained recognizer, loads it back and checks that both give the
//! same answers.
//!
//!     cargo run --release --example weights_file

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hcr::experiment::{run_experiment, ExperimentSpec};
use hcr::{WeightsFile, LOCI_BINS};

fn main() -> hcr::Result<()> {
    let outcome = run_experiment(&ExperimentSpec::synthetic(3, 10, 300))?;
    let path = std::env::temp_dir().join("hcr_example_weights.txt");
    outcome.weights.write(&path)?;
    let text = std::fs::read_to_string(&path).expect("just written");
    println!(
        "wrote {} ({} lines); header:",
        path.display(),
        text.lines().count()
    );
    for line in text.lines().take(6) {
        println!("  {}", &line[..line.len().min(72)]);
    }

    let loaded = WeightsFile::read(&path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut same = 0;
    for _ in 0..100 {
        let v: Vec<f64> = (0..LOCI_BINS).map(|_| rng.gen_range(0.0..2.0)).collect();
        let a = outcome.weights.predict_features(&v)?;
        let b = loaded.predict_features(&v)?;
        same += usize::from(a.activations == b.activations);
    }
    println!("identical activations on {same}/100 random vectors");

    let corrupted = text.replacen("HCRNN 1", "HCRNN 9", 1);
    match WeightsFile::from_text(&corrupted) {
        Err(e) => println!("corrupted header rejected: {e}"),
        Ok(_) => println!("corrupted header accepted"),
    }
    let _ = std::fs::remove_file(&path);
    Ok(())
}
