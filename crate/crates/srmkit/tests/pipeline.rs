//! Library-level integration: flows that span ingestion, fitting,
//! model persistence, and RSM evaluation together.

use std::fs;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use srmkit::io::{ingest_activations, load_model, save_model, write_matrix, MatrixFormat};
use srmkit::mat::{max_abs_diff, random_orthogonal};
use srmkit::rsm::{average_inter_rsm, average_within_rsm, rsm_correlation, CorrMethod};
use srmkit::srm::{fit_srm, srm_objective, transform, variance_explained, ActivityMatrix};
use srmkit::Matrix;

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_array(Array2::from_shape_fn((rows, cols), |_| {
        StandardNormal.sample(&mut rng)
    }))
    .unwrap()
}

/// N orthogonally mixed views of one source, optionally noisy.
fn mixed_views(n: usize, m: usize, count: usize, sigma: f64, seed: u64) -> Vec<ActivityMatrix> {
    let h = gaussian(n, m, seed);
    (0..count)
        .map(|i| {
            let q = random_orthogonal(n, seed * 10 + i as u64);
            let mut x = q.matmul(&h).into_array();
            if sigma > 0.0 {
                x += &gaussian(n, m, seed * 100 + i as u64).array().mapv(|v| sigma * v);
            }
            ActivityMatrix::new(format!("net{i:02}"), "l0", Matrix::from_array(x).unwrap())
                .unwrap()
        })
        .collect()
}

#[test]
fn manifest_bundle_survives_relocation() {
    // a manifest with relative subdirectory paths plus its matrix files is
    // a relocatable unit: copying the tree must not change what loads
    let src = tempfile::tempdir().unwrap();
    fs::create_dir(src.path().join("data")).unwrap();
    let mut manifest = String::new();
    for i in 0..3 {
        let m = gaussian(5, 9, 100 + i);
        write_matrix(&m, &src.path().join(format!("data/n{i}.amat")), MatrixFormat::Binary)
            .unwrap();
        manifest.push_str(&format!("net{i}, conv, data/n{i}.amat\n"));
    }
    fs::write(src.path().join("manifest.txt"), manifest).unwrap();
    let original = ingest_activations(&src.path().join("manifest.txt")).unwrap();

    let dst = tempfile::tempdir().unwrap();
    let moved = dst.path().join("bundle");
    fs::create_dir_all(moved.join("data")).unwrap();
    for entry in fs::read_dir(src.path().join("data")).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), moved.join("data").join(entry.file_name())).unwrap();
    }
    fs::copy(src.path().join("manifest.txt"), moved.join("manifest.txt")).unwrap();
    drop(src); // the original location is gone entirely

    let relocated = ingest_activations(&moved.join("manifest.txt")).unwrap();
    assert_eq!(original.len(), relocated.len());
    for (a, b) in original.iter().zip(&relocated) {
        assert_eq!(a.network_id, b.network_id);
        assert_eq!(max_abs_diff(a.data(), b.data()), 0.0);
    }
}

#[test]
fn manifest_mixes_binary_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = gaussian(4, 8, 200);
    let b = gaussian(4, 8, 201);
    write_matrix(&a, &dir.path().join("a.amat"), MatrixFormat::Binary).unwrap();
    write_matrix(&b, &dir.path().join("b.csv"), MatrixFormat::Csv).unwrap();
    fs::write(
        dir.path().join("manifest.txt"),
        "netA, l0, a.amat\nnetB, l0, b.csv\n",
    )
    .unwrap();
    let mats = ingest_activations(&dir.path().join("manifest.txt")).unwrap();
    assert_eq!(mats.len(), 2);
    assert_eq!(max_abs_diff(mats[0].data(), &a), 0.0);
    // csv serialization is value-exact, so equality is still exact
    assert_eq!(max_abs_diff(mats[1].data(), &b), 0.0);
}

#[test]
fn reloaded_model_transforms_and_scores_identically() {
    let train = mixed_views(10, 60, 4, 0.2, 300);
    let test = mixed_views(10, 40, 4, 0.2, 301);
    let model = fit_srm(&train, 6, 50, 1e-9, 0).unwrap();

    let dir = tempfile::tempdir().unwrap();
    save_model(&model, dir.path()).unwrap();
    let back = load_model(dir.path()).unwrap();

    let z_orig = transform(&model, &test).unwrap();
    let z_back = transform(&back, &test).unwrap();
    for (a, b) in z_orig.iter().zip(&z_back) {
        assert_eq!(max_abs_diff(a, b), 0.0); // binary persistence is bitwise
    }
    assert_eq!(
        variance_explained(&model, &test).unwrap(),
        variance_explained(&back, &test).unwrap()
    );
    assert_eq!(
        srm_objective(&model, &train).unwrap(),
        srm_objective(&back, &train).unwrap()
    );
}

#[test]
fn ingest_fit_project_pipeline_reaches_unit_metrics() {
    // write a noiseless mixed fixture to disk, run the whole chain through
    // the file layer, and check the alignment metrics it exists to produce
    let dir = tempfile::tempdir().unwrap();
    let n = 12;
    let (m_align, m_test) = (80, 50);
    let h_align = gaussian(n, m_align, 400);
    let h_test = gaussian(n, m_test, 401);
    let mut align = String::new();
    let mut test = String::new();
    for i in 0..5u64 {
        let q = random_orthogonal(n, 410 + i);
        write_matrix(&q.matmul(&h_align), &dir.path().join(format!("a{i}.amat")), MatrixFormat::Binary).unwrap();
        write_matrix(&q.matmul(&h_test), &dir.path().join(format!("t{i}.amat")), MatrixFormat::Binary).unwrap();
        align.push_str(&format!("net{i:02}, l0, a{i}.amat\n"));
        test.push_str(&format!("net{i:02}, l0, t{i}.amat\n"));
    }
    fs::write(dir.path().join("align.txt"), align).unwrap();
    fs::write(dir.path().join("test.txt"), test).unwrap();

    let train = ingest_activations(&dir.path().join("align.txt")).unwrap();
    let held_out = ingest_activations(&dir.path().join("test.txt")).unwrap();
    let model = fit_srm(&train, n, 50, 1e-9, 0).unwrap();
    assert!(model.converged);

    let projected = transform(&model, &held_out).unwrap();
    let native: Vec<Matrix> = held_out.iter().map(|a| a.data().clone()).collect();

    let wrsm = average_within_rsm(&native).unwrap();
    let shared_irsm = average_inter_rsm(&projected).unwrap();
    let native_irsm = average_inter_rsm(&native).unwrap();

    for method in [CorrMethod::Pearson, CorrMethod::Spearman] {
        let shared = rsm_correlation(&shared_irsm, &wrsm, method).unwrap();
        let native_corr = rsm_correlation(&native_irsm, &wrsm, method).unwrap();
        assert!(shared > 0.999, "{method:?}: shared = {shared}");
        assert!(native_corr < shared, "{method:?}: native {native_corr} vs {shared}");
    }
    assert!(variance_explained(&model, &held_out).unwrap() > 0.999);
}

#[test]
fn objective_matches_per_network_terms() {
    let mats = mixed_views(8, 30, 3, 0.5, 500);
    let model = fit_srm(&mats, 4, 40, 1e-9, 0).unwrap();

    // independent per-term accumulation against the same shared matrix
    let mut by_hand = 0.0;
    for (a, w) in mats.iter().zip(&model.transforms) {
        let z = srmkit::normalize_columns(a.data()).unwrap();
        let diff = Matrix::from_array(z.array() - w.matmul(&model.shared).array()).unwrap();
        by_hand += srmkit::frobenius_norm(&diff).powi(2);
    }
    let reported = srm_objective(&model, &mats).unwrap();
    assert!((reported - by_hand).abs() <= 1e-9 * by_hand.max(1.0));
    // the fit's own trace ends at the same value
    assert!((reported - model.final_objective()).abs() <= 1e-9 * reported.max(1.0));
}

#[test]
fn objective_with_zero_shared_is_total_energy() {
    let mats = mixed_views(6, 20, 3, 0.0, 600);
    let mut model = fit_srm(&mats, 4, 40, 1e-9, 0).unwrap();
    model.shared = Matrix::from_array(Array2::zeros((4, 20))).unwrap();
    // unit-scaled columns: each of the 20 columns has norm 1, per network
    let total = srm_objective(&model, &mats).unwrap();
    assert!((total - 3.0 * 20.0).abs() < 1e-9, "total = {total}");
}

#[test]
fn evaluate_rejects_network_order_mismatch() {
    let mats = mixed_views(7, 25, 3, 0.0, 700);
    let model = fit_srm(&mats, 7, 40, 1e-9, 0).unwrap();
    let mut reordered = mats.clone();
    reordered.swap(0, 2);
    // same shapes, so projection cannot catch it structurally; the fitted
    // transforms simply belong to other networks and scores must differ
    let aligned = variance_explained(&model, &mats).unwrap();
    let shuffled = variance_explained(&model, &reordered).unwrap();
    assert!(aligned > shuffled + 0.5, "{aligned} vs {shuffled}");

    let fewer = &mats[..2];
    assert!(transform(&model, fewer).is_err());
}

#[test]
fn multi_layer_manifest_supports_per_layer_fits() {
    // unequal unit counts per layer; each layer fits independently
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for (layer, n) in [("early", 9), ("late", 5)] {
        let h = gaussian(n, 30, 800 + n as u64);
        for i in 0..3u64 {
            let q = random_orthogonal(n, 810 + 10 * n as u64 + i);
            let file = format!("{layer}_{i}.amat");
            write_matrix(&q.matmul(&h), &dir.path().join(&file), MatrixFormat::Binary).unwrap();
            manifest.push_str(&format!("net{i:02}, {layer}, {file}\n"));
        }
    }
    fs::write(dir.path().join("manifest.txt"), manifest).unwrap();

    let all = ingest_activations(&dir.path().join("manifest.txt")).unwrap();
    assert_eq!(all.len(), 6);
    for (layer, n) in [("early", 9), ("late", 5)] {
        let mats: Vec<ActivityMatrix> = all
            .iter()
            .filter(|m| m.layer_id == layer)
            .cloned()
            .collect();
        assert_eq!(mats.len(), 3);
        assert!(mats.iter().all(|m| m.units() == n));
        let model = fit_srm(&mats, n, 30, 1e-9, 0).unwrap();
        let scale = 3.0 * 30.0;
        assert!(model.final_objective() < 1e-10 * scale, "layer {layer}");
    }
}

#[test]
fn transform_applies_to_new_recordings_of_any_length() {
    let train = mixed_views(8, 40, 3, 0.0, 900);
    let model = fit_srm(&train, 8, 30, 1e-9, 0).unwrap();
    // a later, longer recording from the same networks: mixed_views reuses
    // the per-network mixing transforms for a fixed seed, only h is new
    let longer = mixed_views(8, 70, 3, 0.0, 900);
    let z = transform(&model, &longer).unwrap();
    assert!(z.iter().all(|m| m.rows() == 8 && m.cols() == 70));
    // same source mixed by the same transforms: projections agree pairwise
    for pair in z.windows(2) {
        assert!(max_abs_diff(&pair[0], &pair[1]) < 1e-6);
    }
}
