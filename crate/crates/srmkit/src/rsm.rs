//! Representational similarity matrices and the scalar alignment metrics
//! built from them.
//!
//! An activity matrix holds one column per example; its within-network RSM
//! is the Gram matrix of unit-normalized columns (cosine similarity), and
//! the inter-network RSM between two matrices correlates columns across
//! them. Columns are scaled to unit norm without centering, which makes
//! every RSM exactly invariant under orthogonal transforms of the unit
//! space; on column-centered data (see `standardize_columns`) the entries
//! coincide with Pearson correlations.

use ndarray::Array2;

use crate::consts;
use crate::error::{Error, Result};
use crate::mat::{normalize_columns, Matrix};
use crate::stats;

/// How RSMs turn into comparison vectors, stated once so reports can cite
/// it next to every correlation they carry.
pub const VECTORIZATION_POLICY: &str =
    "strict upper triangle; inter-RSMs symmetrized as (M + M^T)/2 first";

/// Which comparison an [`Rsm`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsmKind {
    /// Columns of one matrix against themselves: symmetric, unit diagonal.
    Within,
    /// Columns of one matrix against another's: no symmetry guarantee.
    Inter,
}

/// An m x m similarity matrix over example pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Rsm {
    values: Matrix,
    kind: RsmKind,
}

impl Rsm {
    /// Wrap a precomputed similarity matrix, enforcing the kind's
    /// invariants: square; entries in [-1, 1] within 1e-10; for the within
    /// kind additionally symmetric with unit diagonal within 1e-10.
    pub fn new(values: Matrix, kind: RsmKind) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::DimensionMismatch {
                what: format!("RSM must be square, got {}x{}", values.rows(), values.cols()),
            });
        }
        let m = values.rows();
        let tol = consts::RSM_TOL;
        for i in 0..m {
            for j in 0..m {
                let v = values.get(i, j);
                if v < -1.0 - tol || v > 1.0 + tol {
                    return Err(Error::DimensionMismatch {
                        what: format!("RSM entry ({i}, {j}) = {v} outside [-1, 1]"),
                    });
                }
                if kind == RsmKind::Within {
                    if (values.get(i, j) - values.get(j, i)).abs() > tol {
                        return Err(Error::DimensionMismatch {
                            what: format!("within-RSM not symmetric at ({i}, {j})"),
                        });
                    }
                    if i == j && (v - 1.0).abs() > tol {
                        return Err(Error::DimensionMismatch {
                            what: format!("within-RSM diagonal entry {i} = {v}, expected 1"),
                        });
                    }
                }
            }
        }
        Ok(Rsm { values, kind })
    }

    pub fn kind(&self) -> RsmKind {
        self.kind
    }

    /// Number of examples m (the RSM is m x m).
    pub fn size(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    /// The comparison vector this RSM contributes to a correlation:
    /// within kind takes the strict upper triangle (the diagonal is
    /// identically 1); inter kind first symmetrizes as (M + M^T)/2, then
    /// takes the strict upper triangle, making the two kinds commensurable.
    pub fn comparison_vector(&self) -> Vec<f64> {
        let m = self.size();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                let v = match self.kind {
                    RsmKind::Within => self.values.get(i, j),
                    RsmKind::Inter => 0.5 * (self.values.get(i, j) + self.values.get(j, i)),
                };
                out.push(v);
            }
        }
        out
    }
}

/// Gram matrix of unit-normalized columns, clamped into [-1, 1] with an
/// exactly-unit diagonal.
fn normalized_gram(a: &Matrix, b: &Matrix, same: bool) -> Matrix {
    let gram = a.t_matmul(b);
    let mut out = gram.into_array();
    out.mapv_inplace(|v| v.clamp(-1.0, 1.0));
    if same {
        // self-similarity of a unit vector is 1 by definition
        for i in 0..out.nrows() {
            out[[i, i]] = 1.0;
        }
        symmetrize_in_place(&mut out);
    }
    Matrix::from_array_unchecked(out)
}

fn symmetrize_in_place(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// A column constant across units describes no activity pattern, so any
/// similarity against it is vacuous; RSM construction rejects such input.
fn reject_constant_columns(a: &Matrix) -> Result<()> {
    match crate::mat::constant_column(a) {
        Some(col) => Err(Error::DegenerateColumn {
            col,
            reason: "constant across units; no pattern to correlate".into(),
        }),
        None => Ok(()),
    }
}

/// Within-network RSM: pairwise cosine similarity of `a`'s columns.
///
/// Equals the column-wise Pearson correlation matrix when `a`'s columns are
/// centered (for raw data, standardize first). Invariant under any
/// orthogonal transform `q`: `within_rsm(q a) = within_rsm(a)` up to
/// floating-point rounding.
pub fn within_rsm(a: &Matrix) -> Result<Rsm> {
    reject_constant_columns(a)?;
    let z = normalize_columns(a)?;
    Ok(Rsm {
        values: normalized_gram(&z, &z, true),
        kind: RsmKind::Within,
    })
}

/// Inter-network RSM: entry (i, j) is the cosine similarity between column
/// i of `a` and column j of `b`. Both matrices must describe the same m
/// examples; unit counts must match so the columns live in one space.
pub fn inter_rsm(a: &Matrix, b: &Matrix) -> Result<Rsm> {
    if a.cols() != b.cols() {
        return Err(Error::ExampleCountMismatch {
            left: a.cols(),
            right: b.cols(),
            context: String::new(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            what: format!(
                "inter-RSM needs equal unit counts, got {} vs {}",
                a.rows(),
                b.rows()
            ),
        });
    }
    reject_constant_columns(a)?;
    reject_constant_columns(b)?;
    let za = normalize_columns(a)?;
    let zb = normalize_columns(b)?;
    Ok(Rsm {
        values: normalized_gram(&za, &zb, false),
        kind: RsmKind::Inter,
    })
}

/// Entrywise mean of same-kind, same-size RSMs.
pub fn average_rsm(rsms: &[Rsm]) -> Result<Rsm> {
    let first = rsms.first().ok_or(Error::EmptyList)?;
    for r in &rsms[1..] {
        if r.kind != first.kind {
            return Err(Error::KindMismatch);
        }
        if r.size() != first.size() {
            return Err(Error::SizeMismatch {
                left: first.size(),
                right: r.size(),
            });
        }
    }
    let mut acc = first.values.array().clone();
    for r in &rsms[1..] {
        acc += r.values.array();
    }
    acc.mapv_inplace(|v| v / rsms.len() as f64);
    Ok(Rsm {
        values: Matrix::from_array_unchecked(acc),
        kind: first.kind,
    })
}

/// Correlation method for comparing two RSMs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrMethod {
    Pearson,
    Spearman,
}

impl CorrMethod {
    pub fn name(self) -> &'static str {
        match self {
            CorrMethod::Pearson => "pearson",
            CorrMethod::Spearman => "spearman",
        }
    }
}

/// Correlate two RSMs over the same m examples.
///
/// Each side is vectorized per its kind (see [`Rsm::comparison_vector`]),
/// then the requested correlation of the two vectors is returned. Mixing
/// kinds is allowed; that comparison (inter-RSM against within-RSM) is
/// exactly the alignment metric the evaluation pipeline reports.
pub fn rsm_correlation(x: &Rsm, y: &Rsm, method: CorrMethod) -> Result<f64> {
    if x.size() != y.size() {
        return Err(Error::SizeMismatch {
            left: x.size(),
            right: y.size(),
        });
    }
    if x.size() < 2 {
        return Err(Error::DimensionMismatch {
            what: "RSM correlation needs at least 2 examples".into(),
        });
    }
    let vx = x.comparison_vector();
    let vy = y.comparison_vector();
    match method {
        CorrMethod::Pearson => stats::pearson(&vx, &vy),
        CorrMethod::Spearman => stats::spearman(&vx, &vy),
    }
}

/// One unordered pair's within-RSM agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct PairValue {
    /// Indices of the pair in the input order.
    pub left: usize,
    pub right: usize,
    pub value: f64,
}

/// Mean within-RSM agreement across all unordered pairs of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct WrsmConsistency {
    pub mean: f64,
    pub pairs: Vec<PairValue>,
}

/// Pearson correlation between the within-RSMs of every unordered pair of
/// matrices, plus the mean over pairs. Measures whether the inputs share a
/// representational geometry before any alignment.
pub fn pairwise_wrsm_consistency(mats: &[Matrix]) -> Result<WrsmConsistency> {
    if mats.len() < 2 {
        return Err(Error::TooFewNetworks { got: mats.len() });
    }
    let rsms: Vec<Rsm> = mats.iter().map(within_rsm).collect::<Result<_>>()?;
    let vectors: Vec<Vec<f64>> = rsms.iter().map(Rsm::comparison_vector).collect();
    let mut pairs = Vec::new();
    let mut sum = 0.0;
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let value = stats::pearson(&vectors[i], &vectors[j])?;
            sum += value;
            pairs.push(PairValue {
                left: i,
                right: j,
                value,
            });
        }
    }
    Ok(WrsmConsistency {
        mean: sum / pairs.len() as f64,
        pairs,
    })
}

/// Entrywise mean of the within-RSMs of several matrices.
pub fn average_within_rsm(mats: &[Matrix]) -> Result<Rsm> {
    let rsms: Vec<Rsm> = mats.iter().map(within_rsm).collect::<Result<_>>()?;
    average_rsm(&rsms)
}

/// Mean inter-network RSM over all ordered pairs (i, j), i != j.
///
/// Computed from unordered pairs: the ordered mean adds each pair's
/// inter-RSM and its transpose, so the result is symmetric by
/// construction. This halves the Gram-matrix work relative to visiting
/// ordered pairs directly while producing the identical matrix.
pub fn average_inter_rsm(mats: &[Matrix]) -> Result<Rsm> {
    if mats.len() < 2 {
        return Err(Error::TooFewNetworks { got: mats.len() });
    }
    let normalized: Vec<Matrix> = mats.iter().map(normalize_columns).collect::<Result<_>>()?;
    let m = normalized[0].cols();
    for z in &normalized[1..] {
        if z.cols() != m {
            return Err(Error::ExampleCountMismatch {
                left: m,
                right: z.cols(),
                context: String::new(),
            });
        }
        if z.rows() != normalized[0].rows() {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "inter-RSM needs equal unit counts, got {} vs {}",
                    normalized[0].rows(),
                    z.rows()
                ),
            });
        }
    }
    let n = normalized.len();
    let mut acc = Array2::<f64>::zeros((m, m));
    for i in 0..n {
        for j in (i + 1)..n {
            let gram = normalized[i].t_matmul(&normalized[j]);
            let g = gram.array();
            acc += g;
            acc += &g.t();
        }
    }
    let scale = (n * (n - 1)) as f64;
    acc.mapv_inplace(|v| (v / scale).clamp(-1.0, 1.0));
    // accumulation order differs between mirror entries; make the
    // mathematical symmetry exact
    symmetrize_in_place(&mut acc);
    Ok(Rsm {
        values: Matrix::from_array_unchecked(acc),
        kind: RsmKind::Inter,
    })
}
