//! Trains a 2-2-1 network on XOR with backpropagation and momentum.
//!
//!     cargo run --example xor_backprop

use hcr::mlp::{Network, Pattern, TrainConfig};

fn main() -> hcr::Result<()> {
    let patterns: Vec<Pattern> = [
        ([0.0, 0.0], 0.0),
        ([0.0, 1.0], 1.0),
        ([1.0, 0.0], 1.0),
        ([1.0, 1.0], 0.0),
    ]
    .iter()
    .map(|(x, y)| Pattern {
        input: x.to_vec(),
        target: vec![*y],
    })
    .collect();
    let config = TrainConfig {
        eta: 0.5,
        alpha: 0.9,
        target_error: 0.01,
        max_epochs: 5000,
        seed: 42,
        shuffle: false,
    };
    let mut net = Network::new(2, &[2], 1, config.eta, config.alpha, config.seed)?;
    println!("initial mse {:.4}", net.dataset_mse(&patterns)?);
    let report = net.train(&patterns, &config)?;
    println!(
        "after {} epochs: mse {:.5}, converged {}",
        report.epochs_run, report.final_mse, report.converged
    );
    for p in &patterns {
        let y = net.predict(&p.input)?[0];
        println!("  {:?} -> {y:.4} (class {})", p.input, u8::from(y > 0.5));
    }
    Ok(())
}
