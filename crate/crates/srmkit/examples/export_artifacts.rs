//! File formats: matrices, manifests, model directories, reports.
//!
//! Round-trips a matrix through the binary and CSV formats (binary is
//! bitwise exact), ingests a manifest of activity files, fits and saves a
//! model directory, reloads it, and writes a self-describing JSON report
//! whose canonical form is byte-stable across regeneration.
//!
//! Run with: cargo run --example export_artifacts

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use srmkit::io::{
    ingest_activations, load_model, read_matrix, save_model, write_matrix, MatrixFormat, Report,
};
use srmkit::mat::max_abs_diff;
use srmkit::srm::fit_srm;
use srmkit::Matrix;

fn main() -> srmkit::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let root = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // exact binary round-trip, shortest-round-trip CSV
    let m = Matrix::from_array(Array2::from_shape_fn((7, 5), |_| {
        StandardNormal.sample(&mut rng)
    }))
    .unwrap();
    write_matrix(&m, &root.join("m.amat"), MatrixFormat::Binary)?;
    write_matrix(&m, &root.join("m.csv"), MatrixFormat::Csv)?;
    let bin = read_matrix(&root.join("m.amat"))?;
    let csv = read_matrix(&root.join("m.csv"))?;
    println!("binary round-trip max diff: {:e}", max_abs_diff(&m, &bin));
    println!("csv round-trip max diff:    {:e}", max_abs_diff(&m, &csv));

    // a manifest is one `network_id, layer_id, path` line per matrix
    let mut manifest = String::from("# three networks, one layer\n");
    for net in 0..3 {
        let x = Matrix::from_array(Array2::from_shape_fn((6, 40), |_| {
            StandardNormal.sample(&mut rng)
        }))
        .unwrap();
        let file = format!("net{net}.amat");
        write_matrix(&x, &root.join(&file), MatrixFormat::Binary)?;
        manifest.push_str(&format!("net{net:02}, layer0, {file}\n"));
    }
    std::fs::write(root.join("manifest.txt"), manifest)?;
    let mats = ingest_activations(&root.join("manifest.txt"))?;
    println!(
        "\ningested {} matrices, first is {} / {} ({} units x {} examples)",
        mats.len(),
        mats[0].network_id,
        mats[0].layer_id,
        mats[0].units(),
        mats[0].examples()
    );

    // model directories hold per-network transforms + shared matrix + metadata
    let model = fit_srm(&mats, 4, 100, 1e-9, 0)?;
    save_model(&model, &root.join("model"))?;
    let reloaded = load_model(&root.join("model"))?;
    println!(
        "model round-trip: k = {}, final objective drift = {:e}",
        reloaded.k,
        (reloaded.final_objective() - model.final_objective()).abs()
    );

    // reports echo every resolved input and pin the seed
    let mut report = Report::new("demo", 7);
    report
        .echo("networks", mats.len())
        .convention("column_normalization", &*model.normalization)
        .metric("final_objective", model.final_objective());
    report.save(&root.join("report.json"))?;
    let again = Report::load(&root.join("report.json"))?;
    println!(
        "report canonical form stable: {}",
        report.canonical_string() == again.canonical_string()
    );
    println!("\nfiles under {}:", root.display());
    let mut names: Vec<String> = std::fs::read_dir(root)?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for n in names {
        println!("  {n}");
    }
    Ok(())
}
