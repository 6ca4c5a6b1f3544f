//! The scalar statistics behind every reported number.
//!
//! Pearson and Spearman correlations (with tie-averaged ranks) on small
//! hand-checkable vectors, then percentile-bootstrap confidence intervals:
//! how they narrow with sample size and how degenerate inputs are flagged
//! instead of silently producing zero-width nonsense.
//!
//! Run with: cargo run --example bootstrap_statistics

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use srmkit::stats::{bootstrap_ci, pearson, spearman};

fn main() -> srmkit::Result<()> {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let linear = [2.0, 4.0, 6.0, 8.0, 10.0];
    let convex = [1.0, 4.0, 9.0, 16.0, 25.0];
    println!("y = 2x:   pearson = {:+.4}, spearman = {:+.4}", pearson(&x, &linear)?, spearman(&x, &linear)?);
    println!(
        "y = x^2:  pearson = {:+.4}, spearman = {:+.4}   (monotone but curved)",
        pearson(&x, &convex)?,
        spearman(&x, &convex)?
    );

    // ties share the average of the ranks they span
    let tied = [1.0, 2.0, 2.0, 3.0];
    let other = [10.0, 20.0, 30.0, 40.0];
    println!("with ties: spearman = {:+.4}\n", spearman(&tied, &other)?);

    // CI width shrinks roughly like 1/sqrt(n)
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("bootstrap 95% CI for the mean of uniform(0,1) samples:");
    for n in [10usize, 100, 1000] {
        let sample: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let ci = bootstrap_ci(&sample, 0.95, 10_000, 1)?;
        println!(
            "  n = {n:>4}: mean = {:.4}, ci = [{:.4}, {:.4}], width = {:.4}",
            ci.mean,
            ci.lo,
            ci.hi,
            ci.hi - ci.lo
        );
    }

    // an all-equal sample cannot express uncertainty; the flag says so
    let flat = [3.0; 8];
    let ci = bootstrap_ci(&flat, 0.95, 10_000, 2)?;
    println!(
        "\nall-equal sample: ci = [{}, {}], degenerate = {}",
        ci.lo, ci.hi, ci.degenerate
    );
    Ok(())
}
