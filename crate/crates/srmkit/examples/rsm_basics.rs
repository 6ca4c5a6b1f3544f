//! Representational similarity matrices from the ground up.
//!
//! Builds within- and inter-network RSMs for a small synthetic pair of
//! networks, checks the invariance that makes RSMs useful (an orthogonal
//! change of basis leaves the within-RSM untouched), and compares RSMs with
//! Pearson and Spearman correlations over their upper triangles.
//!
//! Run with: cargo run --example rsm_basics

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use srmkit::mat::{max_abs_diff, random_orthogonal};
use srmkit::rsm::{inter_rsm, rsm_correlation, within_rsm, CorrMethod};
use srmkit::Matrix;

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_array(Array2::from_shape_fn((rows, cols), |_| {
        StandardNormal.sample(&mut rng)
    }))
    .unwrap()
}

fn main() -> srmkit::Result<()> {
    // 8 units observed on 6 examples; columns are activity patterns
    let a = gaussian(8, 6, 1);

    let wa = within_rsm(&a)?;
    println!("within-RSM of A ({}x{}):", wa.size(), wa.size());
    for i in 0..wa.size() {
        let row: Vec<String> = (0..wa.size()).map(|j| format!("{:+.3}", wa.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
    println!("diagonal is exactly 1, matrix is symmetric by construction\n");

    // a second network seeing the same examples through its own basis
    let q = random_orthogonal(8, 7);
    let b = q.matmul(&a);

    // rotation never changes within-network geometry
    let wb = within_rsm(&b)?;
    println!(
        "max |within_rsm(QA) - within_rsm(A)| = {:.2e}  (orthogonal invariance)",
        max_abs_diff(wa.values(), wb.values())
    );

    // across networks the same rotation is fully visible
    let between = inter_rsm(&a, &b)?;
    println!(
        "inter-RSM(A, QA) vs within-RSM(A): pearson = {:+.4}",
        rsm_correlation(&between, &wa, CorrMethod::Pearson)?
    );
    println!("native-space inter-RSM does not match: the bases disagree\n");

    // but between two copies in the same basis it matches exactly
    let same_basis = inter_rsm(&a, &a)?;
    println!(
        "inter-RSM(A, A) vs within-RSM(A): pearson = {:+.4}, spearman = {:+.4}",
        rsm_correlation(&same_basis, &wa, CorrMethod::Pearson)?,
        rsm_correlation(&same_basis, &wa, CorrMethod::Spearman)?
    );
    Ok(())
}
