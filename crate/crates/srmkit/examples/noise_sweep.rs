//! Alignment quality as a function of observation noise.
//!
//! Re-runs the recovery simulation over a grid of additive-noise scales.
//! Shared-space correlation degrades gracefully while staying far above the
//! native-space baseline, and variance explained tracks the shrinking
//! signal fraction.
//!
//! Run with: cargo run --example noise_sweep

use srmkit::sim::{run_simulation, SimulationSpec};

fn main() -> srmkit::Result<()> {
    println!("{:>6}  {:>14}  {:>14}  {:>10}", "noise", "shared pearson", "native pearson", "var expl");
    for sigma in [0.0, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let spec = SimulationSpec {
            units: 24,
            examples: 320,
            networks: 5,
            noise_sigma: sigma,
            runs: 5,
            seed: 17,
            ..SimulationSpec::default()
        };
        let result = run_simulation(&spec)?;
        println!(
            "{sigma:>6.2}  {:>14.4}  {:>14.4}  {:>10.4}",
            result.shared_pearson.mean, result.native_pearson.mean, result.variance_explained.mean
        );
    }
    println!("\nnoise is i.i.d. per network, so it never aligns: the shared");
    println!("space keeps the common signal while averaging the noise away");
    Ok(())
}
