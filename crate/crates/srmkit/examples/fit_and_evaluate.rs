//! The full alignment workflow in memory: fit, transform, evaluate.
//!
//! Five networks observe the same stimuli through different orthogonal
//! bases. The shared response model is fit on one half of the examples
//! (the alignment set); all reported numbers come from the held-out half.
//! After alignment, inter-network comparisons in the shared space recover
//! the within-network geometry almost perfectly, while native-space
//! comparisons stay near zero.
//!
//! Run with: cargo run --example fit_and_evaluate

use srmkit::rsm::{average_inter_rsm, average_within_rsm, rsm_correlation, CorrMethod};
use srmkit::sim::{generate_run, SimulationSpec, TransformFamily};
use srmkit::srm::{fit_srm, transform, variance_explained};
use srmkit::Matrix;

fn main() -> srmkit::Result<()> {
    // the simulation harness doubles as a data generator with a fixed split
    let spec = SimulationSpec {
        units: 24,
        examples: 300,
        networks: 5,
        transform_family: TransformFamily::Orthogonal,
        seed: 42,
        ..SimulationSpec::default()
    };
    let data = generate_run(&spec, 0)?;
    println!(
        "{} networks, {} units, {} alignment + {} test examples",
        data.alignment.len(),
        data.alignment[0].units(),
        data.alignment[0].examples(),
        data.test[0].examples()
    );

    // fit on the alignment set only
    let model = fit_srm(&data.alignment, 24, 200, 1e-9, 0)?;
    println!(
        "fit: k={} iterations={} converged={} final objective={:.3e}",
        model.k,
        model.iterations,
        model.converged,
        model.final_objective()
    );
    println!(
        "largest transform orthonormality error: {:.2e}",
        model.max_orthonormality_error()
    );

    // every metric below uses only held-out examples
    let projected = transform(&model, &data.test)?;
    let native: Vec<Matrix> = data.test.iter().map(|a| a.data().clone()).collect();

    let reference = average_within_rsm(&native)?;
    let shared = average_inter_rsm(&projected)?;
    let raw = average_inter_rsm(&native)?;

    println!("\nheld-out alignment quality (inter-RSM vs within-RSM):");
    println!(
        "  shared space: pearson = {:+.4}",
        rsm_correlation(&shared, &reference, CorrMethod::Pearson)?
    );
    println!(
        "  native space: pearson = {:+.4}",
        rsm_correlation(&raw, &reference, CorrMethod::Pearson)?
    );
    println!(
        "  variance explained on test set = {:.4}",
        variance_explained(&model, &data.test)?
    );
    Ok(())
}
