//! Dense real-matrix primitives: thin SVD, QR with a fixed sign convention,
//! column scaling, norms, and random transform generation.
//!
//! Every function here is a pure function of its inputs. [`Matrix`] values
//! are immutable after construction and safe to share across threads.

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consts;
use crate::error::{Error, Result};

/// A dense, finite, row-major `rows x cols` matrix of `f64` values.
///
/// Construction rejects empty shapes and non-finite entries, so downstream
/// numerical code never has to re-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Array2<f64>,
}

impl Matrix {
    /// Build from an owned `ndarray` array, validating shape and finiteness.
    pub fn from_array(data: Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for ((row, col), &v) in data.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::InvalidMatrix { row, col });
            }
        }
        Ok(Matrix { data })
    }

    /// Build from a row-major flat buffer.
    pub fn from_shape_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "buffer of {} values cannot fill a {rows}x{cols} matrix",
                    values.len()
                ),
            });
        }
        let data = Array2::from_shape_vec((rows, cols), values).expect("shape checked above");
        Self::from_array(data)
    }

    /// Build from nested row slices. Rows must all have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let cols = rows[0].len();
        let mut flat = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: format!("ragged rows: {} vs {}", row.len(), cols),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_shape_vec(rows.len(), cols, flat)
    }

    /// Internal constructor for values produced by our own finite arithmetic.
    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        debug_assert!(data.nrows() > 0 && data.ncols() > 0);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Matrix { data }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_array_unchecked(Array2::eye(n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_array_unchecked(Array2::zeros((rows, cols)))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[[row, col]]
    }

    pub fn array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_array_unchecked(self.data.t().to_owned())
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        Matrix::from_array_unchecked(self.data.dot(&other.data))
    }

    /// `self^T * other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        Matrix::from_array_unchecked(self.data.t().dot(&other.data))
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        Matrix::from_array_unchecked(self.data.dot(&other.data.t()))
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.data.iter().copied().collect()
    }

    /// Columns selected by `indices`, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        Matrix::from_array_unchecked(self.data.select(Axis(1), indices))
    }
}

/// Compensated (Kahan) sum of squares; keeps Frobenius norms and objective
/// values stable enough for the 1e-10 monotonicity slack used in fit traces.
fn sum_of_squares(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let term = v * v - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum
}

/// Frobenius norm, `sqrt(sum of squared entries)`. Zero iff the zero matrix.
pub fn frobenius_norm(a: &Matrix) -> f64 {
    frobenius_norm_sq(a).sqrt()
}

/// Squared Frobenius norm with compensated summation.
pub fn frobenius_norm_sq(a: &Matrix) -> f64 {
    sum_of_squares(a.array().iter().copied())
}

/// Largest absolute entrywise difference between two same-shape matrices.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(
        (a.rows(), a.cols()),
        (b.rows(), b.cols()),
        "max_abs_diff requires equal shapes"
    );
    a.array()
        .iter()
        .zip(b.array().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Max-abs deviation of `m^T m` from the identity.
pub fn orthonormality_error(m: &Matrix) -> f64 {
    let gram = m.t_matmul(m);
    let k = gram.rows();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram.get(i, j) - target).abs());
        }
    }
    worst
}

/// Thin singular value decomposition `a = u * diag(sigma) * vt`.
///
/// `u` has orthonormal columns, `vt` orthonormal rows, and `sigma` is sorted
/// non-increasing. Column signs are fixed so the largest-magnitude entry of
/// each left singular vector is positive, making the factorization
/// deterministic.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub vt: Matrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `u * diag(sigma) * vt`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.u.array().clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            scaled.column_mut(j).mapv_inplace(|v| v * s);
        }
        Matrix::from_array_unchecked(scaled.dot(self.vt.array()))
    }
}

fn to_nalgebra(a: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_iterator(a.rows(), a.cols(), a.array().iter().copied())
}

fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Matrix {
    let mut data = Array2::zeros((m.nrows(), m.ncols()));
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data[[i, j]] = m[(i, j)];
        }
    }
    Matrix::from_array_unchecked(data)
}

/// Thin SVD of `a`, optionally truncated to the leading `rank` triplets.
pub fn thin_svd(a: &Matrix, rank: Option<usize>) -> Result<ThinSvd> {
    let full = a.rows().min(a.cols());
    let r = match rank {
        Some(r) if r > full => {
            return Err(Error::RankTooLarge {
                requested: r,
                max: full,
            })
        }
        Some(0) => {
            return Err(Error::RankTooLarge {
                requested: 0,
                max: full,
            })
        }
        Some(r) => r,
        None => full,
    };

    let svd = to_nalgebra(a).svd(true, true);
    let u_full = svd.u.as_ref().expect("u requested");
    let vt_full = svd.v_t.as_ref().expect("v_t requested");

    let mut u = Array2::zeros((a.rows(), r));
    let mut vt = Array2::zeros((r, a.cols()));
    let mut sigma = Vec::with_capacity(r);
    for j in 0..r {
        sigma.push(svd.singular_values[j]);
        // sign convention: largest-|entry| of each left singular vector > 0
        let mut pivot = 0;
        let mut best = -1.0f64;
        for i in 0..a.rows() {
            let mag = u_full[(i, j)].abs();
            if mag > best {
                best = mag;
                pivot = i;
            }
        }
        let flip = if u_full[(pivot, j)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..a.rows() {
            u[[i, j]] = flip * u_full[(i, j)];
        }
        for c in 0..a.cols() {
            vt[[j, c]] = flip * vt_full[(j, c)];
        }
    }

    Ok(ThinSvd {
        u: Matrix::from_array_unchecked(u),
        sigma,
        vt: Matrix::from_array_unchecked(vt),
    })
}

/// Thin QR decomposition with the sign convention `diag(r) >= 0`.
///
/// Returns `(q, r)` with `q` having orthonormal columns and `r` upper
/// triangular. The non-negative diagonal makes the factorization unique for
/// full-column-rank input, and is exactly the correction that turns the QR
/// of a Gaussian matrix into a Haar-distributed orthogonal factor.
pub fn qr(a: &Matrix) -> (Matrix, Matrix) {
    let qr = to_nalgebra(a).qr();
    let mut q = qr.q();
    let mut r = qr.unpack_r();
    let k = r.nrows().min(r.ncols());
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..q.nrows() {
                q[(i, j)] = -q[(i, j)];
            }
            for c in 0..r.ncols() {
                r[(j, c)] = -r[(j, c)];
            }
        }
    }
    (from_nalgebra(&q), from_nalgebra(&r))
}

/// Haar-distributed random `n x n` orthogonal matrix.
///
/// Uses the QR of a standard-Gaussian matrix with the R-diagonal sign
/// correction, which samples the orthogonal group uniformly.
pub fn random_orthogonal(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_orthogonal_with(n, &mut rng)
}

/// [`random_orthogonal`] drawing from a caller-supplied RNG stream.
pub fn random_orthogonal_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    assert!(n >= 1, "orthogonal matrix needs n >= 1");
    let gaussian =
        Array2::from_shape_fn((n, n), |_| StandardNormal.sample(rng));
    let (q, _r) = qr(&Matrix::from_array_unchecked(gaussian));
    q
}

/// Uniformly random `n x n` permutation matrix (Fisher–Yates).
pub fn random_permutation(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_permutation_with(n, &mut rng)
}

/// [`random_permutation`] drawing from a caller-supplied RNG stream.
pub fn random_permutation_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    assert!(n >= 1, "permutation matrix needs n >= 1");
    let mut dest: Vec<usize> = (0..n).collect();
    for j in (1..n).rev() {
        let pick = rng.gen_range(0..=j);
        dest.swap(j, pick);
    }
    let mut p = Array2::zeros((n, n));
    for (col, &row) in dest.iter().enumerate() {
        p[[row, col]] = 1.0;
    }
    Matrix::from_array_unchecked(p)
}

fn column_norms(a: &Matrix) -> Vec<f64> {
    (0..a.cols())
        .map(|j| sum_of_squares(a.array().column(j).iter().copied()).sqrt())
        .collect()
}

/// Scale every column to unit Euclidean norm.
///
/// This is the canonical preprocessing for RSM and SRM computations: it
/// commutes exactly with orthogonal transforms (norms are preserved), so
/// Gram matrices of normalized data are invariant under them. On
/// column-centered data the resulting Gram matrix is the Pearson
/// correlation matrix.
pub fn normalize_columns(a: &Matrix) -> Result<Matrix> {
    let norms = column_norms(a);
    let scale = max_abs_entry(a);
    let mut out = a.array().clone();
    for (j, &norm) in norms.iter().enumerate() {
        if norm <= consts::DEGENERATE_COLUMN_RTOL * scale || norm == 0.0 {
            return Err(Error::DegenerateColumn {
                col: j,
                reason: "zero Euclidean norm".into(),
            });
        }
        out.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(Matrix::from_array_unchecked(out))
}

/// Center each column to zero mean, then scale it to unit Euclidean norm.
///
/// After this, `a^T a` is exactly the column-wise Pearson correlation
/// matrix of the input. Constant columns have no variance and are rejected.
pub fn standardize_columns(a: &Matrix) -> Result<Matrix> {
    let rows = a.rows() as f64;
    let mut out = a.array().clone();
    for j in 0..a.cols() {
        let mean = out.column(j).sum() / rows;
        out.column_mut(j).mapv_inplace(|v| v - mean);
        let norm = sum_of_squares(out.column(j).iter().copied()).sqrt();
        let raw_norm = sum_of_squares(a.array().column(j).iter().copied()).sqrt();
        if norm == 0.0 || norm <= consts::DEGENERATE_COLUMN_RTOL * raw_norm.max(1.0) {
            return Err(Error::DegenerateColumn {
                col: j,
                reason: "constant column (zero variance)".into(),
            });
        }
        out.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(Matrix::from_array_unchecked(out))
}

/// True if any column is (numerically) constant across its entries.
pub fn constant_column(a: &Matrix) -> Option<usize> {
    for j in 0..a.cols() {
        let col = a.array().column(j);
        let first = col[0];
        let scale = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        if col
            .iter()
            .all(|&v| (v - first).abs() <= consts::DEGENERATE_COLUMN_RTOL * scale)
        {
            return Some(j);
        }
    }
    None
}

fn max_abs_entry(a: &Matrix) -> f64 {
    a.array().iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0)
}
