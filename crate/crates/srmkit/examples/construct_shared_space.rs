//! Direct construction of a shared space from RSM equality.
//!
//! When two networks have identical within-RSMs, a shared space exists in
//! closed form: one thin SVD yields orthonormal transforms for both
//! networks and the shared pattern matrix, no iterative fitting needed.
//! The example builds such a pair, constructs the shared space, and checks
//! the exact guarantees: tiny reconstruction residuals, orthonormal
//! transforms, and a shared matrix whose Gram matrix equals the data's.
//!
//! Run with: cargo run --example construct_shared_space

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use srmkit::mat::{frobenius_norm, max_abs_diff, normalize_columns, orthonormality_error, random_orthogonal};
use srmkit::srm::{build_srm_from_rsm_equal, ActivityMatrix};
use srmkit::Matrix;

fn main() -> srmkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = Matrix::from_array(Array2::from_shape_fn((16, 90), |_| {
        StandardNormal.sample(&mut rng)
    }))
    .unwrap();

    // B = QA shares A's within-RSM for any orthogonal Q
    let q = random_orthogonal(16, 9);
    let b = q.matmul(&a);

    let net_a = ActivityMatrix::new("a", "demo", a.clone())?;
    let net_b = ActivityMatrix::new("b", "demo", b)?;
    let (wa, wb, shared) = build_srm_from_rsm_equal(&net_a, &net_b)?;
    println!(
        "construction succeeded: transforms {}x{}, shared {}x{}",
        wa.rows(),
        wa.cols(),
        shared.rows(),
        shared.cols()
    );

    // the guarantees, measured (construction works on unit-norm columns)
    let za = normalize_columns(net_a.data())?;
    let zb = normalize_columns(net_b.data())?;
    let res_a = frobenius_norm(&Matrix::from_array(za.array() - wa.matmul(&shared).array()).unwrap());
    let res_b = frobenius_norm(&Matrix::from_array(zb.array() - wb.matmul(&shared).array()).unwrap());
    println!("  |A - Wa S|_F = {:.2e}   |B - Wb S|_F = {:.2e}", res_a, res_b);
    println!(
        "  orthonormality error: Wa {:.2e}, Wb {:.2e}",
        orthonormality_error(&wa),
        orthonormality_error(&wb)
    );

    // the shared matrix carries the exact common geometry: S^T S = A^T A
    let gram_gap = max_abs_diff(&shared.t_matmul(&shared), &za.t_matmul(&za));
    println!("  max |S^T S - A^T A| = {:.2e}", gram_gap);

    // unrelated networks have different RSMs; construction refuses them
    let mut rng2 = ChaCha8Rng::seed_from_u64(6);
    let other = ActivityMatrix::new(
        "c",
        "demo",
        Matrix::from_array(Array2::from_shape_fn((16, 90), |_| {
            StandardNormal.sample(&mut rng2)
        }))
        .unwrap(),
    )?;
    match build_srm_from_rsm_equal(&net_a, &other) {
        Err(e) => println!("\nindependent network rejected as expected:\n  {e}"),
        Ok(_) => println!("\nunexpected: independent networks share a space"),
    }
    Ok(())
}
