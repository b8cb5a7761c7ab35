//! Fits PCA to loci features of synthetic glyphs and shows how much
//! variance the leading components keep and how the classes separate.
//!
//!     cargo run --release --example pca_reduce

use hcr::experiment::{synthetic_dataset, ExperimentSpec};
use hcr::pca::{fit_pca, FeatureMatrix, PcaModel};

fn main() -> hcr::Result<()> {
    let spec = ExperimentSpec {
        n_train: 40,
        n_test: 0,
        ..ExperimentSpec::synthetic(6, 1, 1)
    };
    let data = synthetic_dataset(&spec)?;
    let rows: Vec<&[f64]> = data.samples.iter().map(|s| s.features.as_slice()).collect();
    let features = FeatureMatrix::new(&rows)?;

    let full = fit_pca(&features, features.dim())?;
    let total: f64 = full.eigenvalues().iter().sum();
    let mut kept = 0.0;
    println!("component  eigenvalue  cumulative variance");
    for (i, l) in full.eigenvalues().iter().take(10).enumerate() {
        kept += l;
        println!("{:>9}  {l:>10.5}  {:>18.1}%", i + 1, 100.0 * kept / total);
    }

    let pca = fit_pca(&features, 2)?;
    println!("\nclass means in the first two components:");
    for (ci, name) in data.class_names.iter().enumerate() {
        let projected: Vec<Vec<f64>> = data
            .samples
            .iter()
            .filter(|s| s.class_index == ci)
            .map(|s| pca.project(&s.features))
            .collect::<hcr::Result<_>>()?;
        let n = projected.len() as f64;
        let m0 = projected.iter().map(|p| p[0]).sum::<f64>() / n;
        let m1 = projected.iter().map(|p| p[1]).sum::<f64>() / n;
        println!("  {name:<6} ({m0:>7.3}, {m1:>7.3})");
    }

    let reread = PcaModel::from_text(&pca.to_text())?;
    assert_eq!(reread, pca);
    println!(
        "\ntext block round trip: identical ({} lines)",
        pca.to_text().lines().count()
    );
    Ok(())
}
