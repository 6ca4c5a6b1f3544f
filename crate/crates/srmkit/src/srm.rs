//! The shared response model: orthonormal per-network transforms onto one
//! shared pattern matrix.
//!
//! For activity matrices X_1..X_N (units x examples, columns aligned across
//! networks) the model solves
//!
//! ```text
//!     min over W_i, S of  sum_i || X_i - W_i S ||_F^2
//!     subject to          W_i^T W_i = I_k
//! ```
//!
//! by deterministic alternating minimization: each W_i update is an
//! orthogonal Procrustes problem solved exactly by the SVD of X_i S^T, and
//! the S update is the closed-form average of the back-projections
//! W_i^T X_i. Both half-steps solve their subproblem exactly, so the
//! objective never increases.
//!
//! All entry points scale data columns to unit norm first (the same
//! convention the RSM module uses), so fitted models, projections, and
//! variance-explained values are directly comparable with RSM metrics.

use crate::consts;
use crate::error::{Error, Result};
use crate::mat::{
    frobenius_norm_sq, normalize_columns, orthonormality_error, thin_svd, Matrix,
};
use crate::rsm::within_rsm;

/// One network's recorded activity: an n x m matrix whose m columns are the
/// activity patterns evoked by m examples.
#[derive(Debug, Clone)]
pub struct ActivityMatrix {
    pub network_id: String,
    pub layer_id: String,
    data: Matrix,
}

impl ActivityMatrix {
    /// Requires at least two example columns; unit count n >= 1 and finite
    /// entries are guaranteed by [`Matrix`].
    pub fn new(
        network_id: impl Into<String>,
        layer_id: impl Into<String>,
        data: Matrix,
    ) -> Result<Self> {
        if data.cols() < 2 {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "activity matrix needs at least 2 example columns, got {}",
                    data.cols()
                ),
            });
        }
        Ok(ActivityMatrix {
            network_id: network_id.into(),
            layer_id: layer_id.into(),
            data,
        })
    }

    /// Unit count n.
    pub fn units(&self) -> usize {
        self.data.rows()
    }

    /// Example count m.
    pub fn examples(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }
}

/// Column-scaling policy applied before fitting and evaluation. Recorded in
/// every model so serialized artifacts are self-describing.
pub const NORMALIZATION_POLICY: &str = "unit-norm (no centering)";

/// A fitted shared response model.
#[derive(Debug, Clone)]
pub struct SrmModel {
    /// Shared dimension.
    pub k: usize,
    /// Network ids, in fit order; `transforms[i]` belongs to `network_ids[i]`.
    pub network_ids: Vec<String>,
    /// Layer the model was fit on.
    pub layer_id: String,
    /// Orthonormal-column transforms, one n_i x k matrix per network.
    pub transforms: Vec<Matrix>,
    /// Shared pattern matrix, k x m_train.
    pub shared: Matrix,
    /// Objective value after each alternating iteration; non-increasing
    /// within a 1e-10 slack.
    pub fit_trace: Vec<f64>,
    /// Whether the relative-change criterion was met before `max_iters`.
    pub converged: bool,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Convergence tolerance the fit used.
    pub tol: f64,
    /// Column-scaling policy baked into the fit.
    pub normalization: String,
    /// Rank-deficiency notes from Procrustes updates, empty in the generic
    /// case.
    pub warnings: Vec<String>,
}

impl SrmModel {
    /// Objective value at the end of the fit.
    pub fn final_objective(&self) -> f64 {
        *self.fit_trace.last().expect("fit trace is never empty")
    }

    /// Largest deviation of any transform from orthonormal columns.
    pub fn max_orthonormality_error(&self) -> f64 {
        self.transforms
            .iter()
            .map(orthonormality_error)
            .fold(0.0, f64::max)
    }
}

/// Snapshot handed to a fit observer after each alternating iteration.
pub struct FitIteration<'a> {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Objective value after this iteration's S update.
    pub objective: f64,
    /// Transforms as of this iteration.
    pub transforms: &'a [Matrix],
    /// Shared matrix as of this iteration.
    pub shared: &'a Matrix,
}

fn validate_fit_inputs(mats: &[ActivityMatrix], k: usize) -> Result<(usize, usize)> {
    if mats.len() < 2 {
        return Err(Error::TooFewNetworks { got: mats.len() });
    }
    let m = mats[0].examples();
    let layer = &mats[0].layer_id;
    let mut min_n = usize::MAX;
    for a in mats {
        if a.examples() != m {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "network {:?} has {} examples, expected {m}",
                    a.network_id,
                    a.examples()
                ),
            });
        }
        if &a.layer_id != layer {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "mixed layers in one fit: {:?} vs {:?}",
                    layer, a.layer_id
                ),
            });
        }
        min_n = min_n.min(a.units());
    }
    if k == 0 || k > min_n {
        return Err(Error::KTooLarge {
            k,
            max: min_n,
            what: "smallest network unit count".into(),
        });
    }
    if k > m {
        return Err(Error::KTooLarge {
            k,
            max: m,
            what: "example count".into(),
        });
    }
    Ok((m, min_n))
}

/// Orthogonal Procrustes solution `w = u v^T` from the thin SVD of
/// `x s^T`, which minimizes `||x - w s||_F` over orthonormal-column `w`.
/// Returns the smallest singular value of `x s^T` alongside so callers can
/// detect rank deficiency (the minimizer is then non-unique; the SVD's
/// deterministic basis completion picks one, and `w` stays orthonormal).
fn procrustes(x: &Matrix, s: &Matrix) -> Result<(Matrix, f64)> {
    let target = x.matmul_t(s);
    let svd = thin_svd(&target, None)?;
    let sigma_min = *svd
        .sigma
        .last()
        .expect("thin SVD of a nonempty matrix has at least one triplet");
    Ok((svd.u.matmul(&svd.vt), sigma_min))
}

/// Fit the shared response model.
///
/// `mats` must hold at least two networks over the same m examples (unit
/// counts may differ); `k` is the shared dimension, at most `min n_i` and
/// at most m. Columns are scaled to unit norm internally. The shared
/// matrix is initialized from the top-k right-singular structure of the
/// first network's scaled data, making the fit fully deterministic; `seed`
/// is reserved for randomized restarts and does not affect this path.
///
/// Iteration stops when the objective's relative change falls below `tol`
/// or after `max_iters` iterations; running out of iterations is not an
/// error (`converged` is false and the trace is still returned).
pub fn fit_srm(
    mats: &[ActivityMatrix],
    k: usize,
    max_iters: usize,
    tol: f64,
    seed: u64,
) -> Result<SrmModel> {
    fit_srm_observed(mats, k, max_iters, tol, seed, |_| {})
}

/// [`fit_srm`] with a per-iteration observer, for callers that audit the
/// trajectory (objective descent, per-iteration orthonormality).
pub fn fit_srm_observed(
    mats: &[ActivityMatrix],
    k: usize,
    max_iters: usize,
    tol: f64,
    _seed: u64,
    mut observer: impl FnMut(FitIteration<'_>),
) -> Result<SrmModel> {
    let (_m, _min_n) = validate_fit_inputs(mats, k)?;
    if max_iters == 0 {
        return Err(Error::InvalidSpec("max_iters must be at least 1".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidSpec(format!("tol must be nonnegative, got {tol}")));
    }

    let data: Vec<Matrix> = mats
        .iter()
        .map(|a| {
            normalize_columns(a.data()).map_err(|e| e.context(format!("network {:?}", a.network_id)))
        })
        .collect::<Result<_>>()?;
    let n_nets = data.len() as f64;
    // constant across iterations; the objective identity below needs it
    let total_sq: f64 = data.iter().map(frobenius_norm_sq).sum();

    // S0: top-k right-singular structure (sigma * v^T) of the first network
    let init = thin_svd(&data[0], Some(k))?;
    let mut shared = {
        let mut sv = init.vt.into_array();
        for (j, &s) in init.sigma.iter().enumerate() {
            sv.row_mut(j).mapv_inplace(|v| v * s);
        }
        Matrix::from_array_unchecked(sv)
    };

    let mut transforms: Vec<Matrix> = Vec::new();
    let mut fit_trace = Vec::new();
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iters {
        iterations = iter;

        let mut new_transforms = Vec::with_capacity(data.len());
        for (idx, x) in data.iter().enumerate() {
            let (w, sigma_min) = procrustes(x, &shared)?;
            if sigma_min <= consts::SVD_FACTOR_TOL {
                warnings.push(format!(
                    "iteration {iter}: Procrustes target for network {:?} is rank-deficient \
                     (smallest singular value {sigma_min:.3e}); transform completed via the \
                     deterministic SVD basis",
                    mats[idx].network_id
                ));
            }
            new_transforms.push(w);
        }
        transforms = new_transforms;

        // S = (1/N) sum_i W_i^T X_i
        let mut acc = transforms[0].t_matmul(&data[0]).into_array();
        for (w, x) in transforms.iter().zip(&data).skip(1) {
            acc += w.t_matmul(x).array();
        }
        acc.mapv_inplace(|v| v / n_nets);
        shared = Matrix::from_array_unchecked(acc);

        // At the post-S-update point, sum_i W_i^T X_i = N S and
        // ||W_i S||_F = ||S||_F, so the objective collapses to
        // total_sq - N ||S||_F^2 exactly. Compensated norms keep the
        // cancellation error well under the 1e-10 trace slack.
        let objective = (total_sq - n_nets * frobenius_norm_sq(&shared)).max(0.0);
        fit_trace.push(objective);
        observer(FitIteration {
            iteration: iter,
            objective,
            transforms: &transforms,
            shared: &shared,
        });

        if fit_trace.len() >= 2 {
            let prev = fit_trace[fit_trace.len() - 2];
            let base = fit_trace[0];
            let rel = if base > 0.0 {
                (prev - objective).abs() / base
            } else {
                0.0
            };
            if rel < tol {
                converged = true;
                break;
            }
        } else if objective == 0.0 {
            // perfect fit on the first iteration; nothing left to improve
            converged = true;
            break;
        }
    }

    Ok(SrmModel {
        k,
        network_ids: mats.iter().map(|a| a.network_id.clone()).collect(),
        layer_id: mats[0].layer_id.clone(),
        transforms,
        shared,
        fit_trace,
        converged,
        iterations,
        tol,
        normalization: NORMALIZATION_POLICY.into(),
        warnings,
    })
}

/// Construct an exact two-network model from matching representational
/// geometry, the constructive half of the equal-RSM equivalence.
///
/// When `within_rsm(a) = within_rsm(b)`, the scaled data satisfy
/// `a^T a = b^T b`, so both share the right-singular structure: from the
/// thin SVD `a = U_a Sigma V^T`, setting `S = Sigma V^T`, `W_a = U_a`, and
/// `W_b = b V Sigma^{-1}` reconstructs both matrices exactly with
/// orthonormal transforms. (`W_b` is `b`'s left-singular basis paired
/// against `a`'s `V`, so no sign or ordering mismatch between two
/// independent SVDs can enter.) The construction requires distinct,
/// nonzero singular values; near-ties make it non-unique and are rejected.
pub fn build_srm_from_rsm_equal(
    a: &ActivityMatrix,
    b: &ActivityMatrix,
) -> Result<(Matrix, Matrix, Matrix)> {
    if a.examples() != b.examples() {
        return Err(Error::ExampleCountMismatch {
            left: a.examples(),
            right: b.examples(),
            context: format!(" (networks {:?}, {:?})", a.network_id, b.network_id),
        });
    }
    let za = normalize_columns(a.data())
        .map_err(|e| e.context(format!("network {:?}", a.network_id)))?;
    let zb = normalize_columns(b.data())
        .map_err(|e| e.context(format!("network {:?}", b.network_id)))?;

    let rsm_a = within_rsm(&za)?;
    let rsm_b = within_rsm(&zb)?;
    let diff = crate::mat::max_abs_diff(rsm_a.values(), rsm_b.values());
    if diff > consts::RSM_EQUALITY_TOL {
        return Err(Error::RsmMismatch {
            max_abs_diff: diff,
            tol: consts::RSM_EQUALITY_TOL,
        });
    }

    let svd = thin_svd(&za, None)?;
    let sigma_max = svd.sigma[0];
    let mut min_gap = svd.sigma.last().copied().unwrap_or(0.0);
    for w in svd.sigma.windows(2) {
        min_gap = min_gap.min(w[0] - w[1]);
    }
    if sigma_max <= 0.0 || min_gap < consts::SPECTRUM_GAP_RTOL * sigma_max {
        return Err(Error::DegenerateSpectrum {
            gap: min_gap,
            tol: consts::SPECTRUM_GAP_RTOL * sigma_max,
        });
    }

    let w_a = svd.u.clone();
    // s = sigma * v^T
    let mut s = svd.vt.array().clone();
    for (j, &sv) in svd.sigma.iter().enumerate() {
        s.row_mut(j).mapv_inplace(|v| v * sv);
    }
    let s = Matrix::from_array_unchecked(s);
    // w_b = b v sigma^{-1}
    let mut v = svd.vt.transpose().into_array();
    for (j, &sv) in svd.sigma.iter().enumerate() {
        v.column_mut(j).mapv_inplace(|val| val / sv);
    }
    let w_b = zb.matmul(&Matrix::from_array_unchecked(v));

    let ortho = orthonormality_error(&w_b);
    if ortho > consts::SRM_TRANSFORM_TOL {
        // equal RSMs guarantee orthonormality in exact arithmetic; a
        // violation here means the inputs only matched within tolerance
        return Err(Error::RsmMismatch {
            max_abs_diff: ortho,
            tol: consts::SRM_TRANSFORM_TOL,
        });
    }
    Ok((w_a, w_b, s))
}

fn validate_apply_inputs(model: &SrmModel, mats: &[ActivityMatrix]) -> Result<()> {
    if mats.len() != model.transforms.len() {
        return Err(Error::NetworkCountMismatch {
            model: model.transforms.len(),
            input: mats.len(),
        });
    }
    let m = mats[0].examples();
    for (i, a) in mats.iter().enumerate() {
        if a.units() != model.transforms[i].rows() {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "network {:?} has {} units but transform {i} expects {}",
                    a.network_id,
                    a.units(),
                    model.transforms[i].rows()
                ),
            });
        }
        if a.examples() != m {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "network {:?} has {} examples, expected {m}",
                    a.network_id,
                    a.examples()
                ),
            });
        }
    }
    Ok(())
}

/// Project each network's (unit-scaled) activity into the shared space:
/// output i is `W_i^T X_i`, a k x m matrix. Matrices must arrive in the
/// model's network order.
pub fn transform(model: &SrmModel, mats: &[ActivityMatrix]) -> Result<Vec<Matrix>> {
    validate_apply_inputs(model, mats)?;
    mats.iter()
        .zip(&model.transforms)
        .map(|(a, w)| {
            let z = normalize_columns(a.data())
                .map_err(|e| e.context(format!("network {:?}", a.network_id)))?;
            Ok(w.t_matmul(&z))
        })
        .collect()
}

/// Fraction of the (unit-scaled) data's energy reconstructed by the model
/// on the given matrices, typically a held-out test set.
///
/// The shared response for this data is re-estimated as
/// `S* = (1/N) sum_i W_i^T X_i` using the fitted transforms; the value is
/// `1 - sum_i ||X_i - W_i S*||_F^2 / sum_i ||X_i||_F^2`.
pub fn variance_explained(model: &SrmModel, mats: &[ActivityMatrix]) -> Result<f64> {
    validate_apply_inputs(model, mats)?;
    let data: Vec<Matrix> = mats
        .iter()
        .map(|a| {
            normalize_columns(a.data()).map_err(|e| e.context(format!("network {:?}", a.network_id)))
        })
        .collect::<Result<_>>()?;
    let n_nets = data.len() as f64;
    let mut acc = model.transforms[0].t_matmul(&data[0]).into_array();
    for (w, x) in model.transforms.iter().zip(&data).skip(1) {
        acc += w.t_matmul(x).array();
    }
    acc.mapv_inplace(|v| v / n_nets);
    let shared_star = Matrix::from_array_unchecked(acc);

    let mut residual = 0.0;
    let mut total = 0.0;
    for (w, x) in model.transforms.iter().zip(&data) {
        let recon = w.matmul(&shared_star);
        let diff = Matrix::from_array_unchecked(x.array() - recon.array());
        residual += frobenius_norm_sq(&diff);
        total += frobenius_norm_sq(x);
    }
    Ok(1.0 - residual / total)
}

/// The model's objective on the given (unit-scaled) data: the summed
/// squared reconstruction error against the model's own shared matrix.
/// Example counts must match the shared matrix' width, so this is chiefly
/// meaningful on the training data.
pub fn srm_objective(model: &SrmModel, mats: &[ActivityMatrix]) -> Result<f64> {
    validate_apply_inputs(model, mats)?;
    if mats[0].examples() != model.shared.cols() {
        return Err(Error::DimensionMismatch {
            what: format!(
                "data has {} examples but the shared matrix covers {}",
                mats[0].examples(),
                model.shared.cols()
            ),
        });
    }
    let mut objective = 0.0;
    for (a, w) in mats.iter().zip(&model.transforms) {
        let z = normalize_columns(a.data())
            .map_err(|e| e.context(format!("network {:?}", a.network_id)))?;
        let recon = w.matmul(&model.shared);
        let diff = Matrix::from_array_unchecked(z.array() - recon.array());
        objective += frobenius_norm_sq(&diff);
    }
    Ok(objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{max_abs_diff, random_orthogonal, Matrix};
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_array_unchecked(Array2::from_shape_fn((rows, cols), |_| {
            StandardNormal.sample(&mut rng)
        }))
    }

    fn activity(id: &str, data: Matrix) -> ActivityMatrix {
        ActivityMatrix::new(id, "test-layer", data).unwrap()
    }

    /// N orthogonal copies of one source: the model class fits exactly.
    fn orthogonal_family(n: usize, m: usize, nets: usize, seed: u64) -> Vec<ActivityMatrix> {
        let h = random_matrix(n, m, seed);
        (0..nets)
            .map(|i| {
                let q = random_orthogonal(n, seed + 1 + i as u64);
                activity(&format!("net{i}"), q.matmul(&h))
            })
            .collect()
    }

    #[test]
    fn activity_matrix_needs_two_examples() {
        let one_col = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(ActivityMatrix::new("a", "l", one_col).is_err());
    }

    #[test]
    fn fit_validates_inputs() {
        let mats = orthogonal_family(6, 12, 2, 0);
        assert!(matches!(
            fit_srm(&mats[..1], 3, 10, 1e-9, 0),
            Err(Error::TooFewNetworks { got: 1 })
        ));
        assert!(matches!(
            fit_srm(&mats, 7, 10, 1e-9, 0),
            Err(Error::KTooLarge { k: 7, max: 6, .. })
        ));
        assert!(matches!(
            fit_srm(&mats, 0, 10, 1e-9, 0),
            Err(Error::KTooLarge { k: 0, .. })
        ));
        let mismatched = vec![
            activity("a", random_matrix(6, 12, 1)),
            activity("b", random_matrix(6, 10, 2)),
        ];
        assert!(matches!(
            fit_srm(&mismatched, 3, 10, 1e-9, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fit_k_larger_than_examples_rejected() {
        let mats = vec![
            activity("a", random_matrix(8, 4, 1)),
            activity("b", random_matrix(8, 4, 2)),
        ];
        assert!(matches!(
            fit_srm(&mats, 5, 10, 1e-9, 0),
            Err(Error::KTooLarge { k: 5, max: 4, .. })
        ));
    }

    #[test]
    fn identical_networks_fit_perfectly() {
        let x = random_matrix(8, 20, 3);
        let mats = vec![activity("a", x.clone()), activity("b", x.clone())];
        let model = fit_srm(&mats, 8, 50, 1e-12, 0).unwrap();
        let scale = 2.0 * frobenius_norm_sq(&normalize_columns(&x).unwrap());
        assert!(
            model.final_objective() < 1e-10 * scale,
            "objective {}",
            model.final_objective()
        );
        // identical inputs give identical Procrustes problems
        assert!(max_abs_diff(&model.transforms[0], &model.transforms[1]) < 1e-12);
        assert!(model.converged);
    }

    #[test]
    fn orthogonal_family_reaches_zero_objective() {
        let mats = orthogonal_family(12, 60, 4, 7);
        let model = fit_srm(&mats, 12, 100, 1e-12, 0).unwrap();
        let scale: f64 = mats
            .iter()
            .map(|a| frobenius_norm_sq(&normalize_columns(a.data()).unwrap()))
            .sum();
        assert!(
            model.final_objective() < 1e-8 * scale,
            "objective {} vs scale {scale}",
            model.final_objective()
        );
        assert!(model.max_orthonormality_error() < consts::SRM_TRANSFORM_TOL);
    }

    #[test]
    fn rank_one_shared_data_k1() {
        // X_i = w_i s^T with unit w_i: a k=1 model reconstructs exactly
        let m = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s_row: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mats: Vec<ActivityMatrix> = (0..3)
            .map(|i| {
                let q = random_orthogonal(6, 40 + i);
                let w: Vec<f64> = (0..6).map(|r| q.get(r, 0)).collect();
                let data = Array2::from_shape_fn((6, m), |(r, c)| w[r] * s_row[c]);
                activity(&format!("net{i}"), Matrix::from_array(data).unwrap())
            })
            .collect();
        let model = fit_srm(&mats, 1, 50, 1e-12, 0).unwrap();
        assert!(model.final_objective() < 1e-8, "objective {}", model.final_objective());
        let ve = variance_explained(&model, &mats).unwrap();
        assert!(ve > 1.0 - 1e-8, "variance explained {ve}");
    }

    #[test]
    fn fit_trace_monotone_within_slack() {
        let mats: Vec<ActivityMatrix> = (0..3)
            .map(|i| activity(&format!("net{i}"), random_matrix(10, 40, 70 + i)))
            .collect();
        let model = fit_srm(&mats, 4, 60, 0.0, 0).unwrap();
        assert!(!model.converged); // tol 0 never triggers
        assert_eq!(model.fit_trace.len(), 60);
        for w in model.fit_trace.windows(2) {
            assert!(
                w[1] <= w[0] + consts::FIT_TRACE_SLACK,
                "trace increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn per_iteration_transforms_stay_orthonormal() {
        let mats = orthogonal_family(10, 50, 3, 21);
        let mut worst = 0.0f64;
        let _ = fit_srm_observed(&mats, 10, 40, 1e-12, 0, |it| {
            for w in it.transforms {
                worst = worst.max(orthonormality_error(w));
            }
        })
        .unwrap();
        assert!(worst < consts::SRM_TRANSFORM_TOL, "worst orthonormality {worst}");
    }

    #[test]
    fn trace_objective_matches_direct_objective() {
        // the trace uses the collapsed identity; check it against the
        // definition computed from the model's own parameters
        let mats: Vec<ActivityMatrix> = (0..3)
            .map(|i| activity(&format!("net{i}"), random_matrix(9, 25, 80 + i)))
            .collect();
        let model = fit_srm(&mats, 5, 30, 1e-12, 0).unwrap();
        let direct = srm_objective(&model, &mats).unwrap();
        let traced = model.final_objective();
        assert!(
            (direct - traced).abs() < 1e-9 * direct.max(1.0),
            "direct {direct} vs traced {traced}"
        );
    }

    #[test]
    fn procrustes_beats_random_alternatives() {
        let mats = orthogonal_family(8, 30, 3, 33);
        let model = fit_srm(&mats, 5, 30, 1e-12, 0).unwrap();
        let x = normalize_columns(mats[0].data()).unwrap();
        let fitted = &model.transforms[0];
        let fitted_obj = {
            let diff =
                Matrix::from_array_unchecked(x.array() - fitted.matmul(&model.shared).array());
            frobenius_norm_sq(&diff)
        };
        for seed in 0..100 {
            let tall = random_matrix(8, 5, 2000 + seed);
            let (q, _) = crate::mat::qr(&tall);
            let obj = {
                let diff =
                    Matrix::from_array_unchecked(x.array() - q.matmul(&model.shared).array());
                frobenius_norm_sq(&diff)
            };
            assert!(
                fitted_obj <= obj + 1e-12,
                "random transform beat Procrustes: {obj} < {fitted_obj}"
            );
        }
    }

    #[test]
    fn nonconvergence_is_not_an_error() {
        let mats: Vec<ActivityMatrix> = (0..2)
            .map(|i| activity(&format!("net{i}"), random_matrix(12, 40, 90 + i)))
            .collect();
        let model = fit_srm(&mats, 6, 2, 1e-15, 0).unwrap();
        assert!(!model.converged);
        assert_eq!(model.iterations, 2);
        assert_eq!(model.fit_trace.len(), 2);
    }

    #[test]
    fn construction_from_equal_rsm_self() {
        let a = activity("a", random_matrix(8, 20, 44));
        let (w_a, w_b, s) = build_srm_from_rsm_equal(&a, &a).unwrap();
        assert!(max_abs_diff(&w_a, &w_b) < 1e-9);
        let za = normalize_columns(a.data()).unwrap();
        let recon = w_a.matmul(&s);
        assert!(max_abs_diff(&recon, &za) < 1e-9);
    }

    #[test]
    fn construction_from_rotated_copy() {
        let a = activity("a", random_matrix(8, 20, 45));
        let q = random_orthogonal(8, 46);
        let b = activity("b", q.matmul(a.data()));
        let (w_a, w_b, s) = build_srm_from_rsm_equal(&a, &b).unwrap();
        let za = normalize_columns(a.data()).unwrap();
        let zb = normalize_columns(b.data()).unwrap();
        let norm = frobenius_norm_sq(&za).sqrt();
        assert!(max_abs_diff(&w_a.matmul(&s), &za) < consts::SVD_CONSTRUCTION_RTOL * norm);
        assert!(max_abs_diff(&w_b.matmul(&s), &zb) < consts::SVD_CONSTRUCTION_RTOL * norm);
        assert!(orthonormality_error(&w_a) < consts::SRM_TRANSFORM_TOL);
        assert!(orthonormality_error(&w_b) < consts::SRM_TRANSFORM_TOL);
    }

    #[test]
    fn construction_rejects_mismatched_geometry() {
        let a = activity("a", random_matrix(8, 20, 47));
        let b = activity("b", random_matrix(8, 20, 48));
        assert!(matches!(
            build_srm_from_rsm_equal(&a, &b),
            Err(Error::RsmMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_repeated_singular_values() {
        // the identity has a fully degenerate spectrum
        let a = activity("a", Matrix::identity(4));
        assert!(matches!(
            build_srm_from_rsm_equal(&a, &a),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn transform_identity_model_passes_through() {
        // hand-built model with identity transforms: output = scaled input
        let x = random_matrix(5, 8, 50);
        let z = normalize_columns(&x).unwrap();
        let mats = vec![activity("a", z.clone()), activity("b", z.clone())];
        let model = SrmModel {
            k: 5,
            network_ids: vec!["a".into(), "b".into()],
            layer_id: "test-layer".into(),
            transforms: vec![Matrix::identity(5), Matrix::identity(5)],
            shared: z.clone(),
            fit_trace: vec![0.0],
            converged: true,
            iterations: 1,
            tol: 1e-9,
            normalization: NORMALIZATION_POLICY.into(),
            warnings: vec![],
        };
        let out = transform(&model, &mats).unwrap();
        // z has unit columns already, so scaling is a no-op
        assert!(max_abs_diff(&out[0], &z) < 1e-12);
        assert!(max_abs_diff(&out[1], &z) < 1e-12);
    }

    #[test]
    fn transform_of_training_data_at_perfect_fit_equals_shared() {
        let mats = orthogonal_family(10, 40, 3, 55);
        let model = fit_srm(&mats, 10, 100, 1e-13, 0).unwrap();
        let outs = transform(&model, &mats).unwrap();
        for out in outs {
            assert!(
                max_abs_diff(&out, &model.shared) < consts::SRM_TRANSFORM_TOL,
                "projection differs from shared matrix"
            );
        }
    }

    #[test]
    fn transform_validates_shapes() {
        let mats = orthogonal_family(6, 12, 2, 60);
        let model = fit_srm(&mats, 3, 10, 1e-9, 0).unwrap();
        assert!(matches!(
            transform(&model, &mats[..1]),
            Err(Error::NetworkCountMismatch { model: 2, input: 1 })
        ));
        let wrong_units = vec![
            activity("a", random_matrix(5, 12, 61)),
            activity("b", random_matrix(6, 12, 62)),
        ];
        assert!(matches!(
            transform(&model, &wrong_units),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn variance_explained_near_one_for_orthogonal_family() {
        let train = orthogonal_family(12, 96, 4, 65);
        let model = fit_srm(&train, 12, 100, 1e-12, 0).unwrap();
        // fresh columns from the same mixing: x_i = q_i h2
        let h2 = random_matrix(12, 48, 999);
        let test: Vec<ActivityMatrix> = (0..4)
            .map(|i| {
                let q = random_orthogonal(12, 65 + 1 + i as u64);
                activity(&format!("net{i}"), q.matmul(&h2))
            })
            .collect();
        let ve = variance_explained(&model, &test).unwrap();
        assert!(ve > 0.999, "variance explained {ve}");
    }

    #[test]
    fn variance_explained_low_for_independent_networks() {
        let mats: Vec<ActivityMatrix> = (0..10)
            .map(|i| activity(&format!("net{i}"), random_matrix(48, 300, 700 + i)))
            .collect();
        let model = fit_srm(&mats, 4, 40, 1e-9, 0).unwrap();
        let fresh: Vec<ActivityMatrix> = (0..10)
            .map(|i| activity(&format!("net{i}"), random_matrix(48, 300, 800 + i)))
            .collect();
        let ve = variance_explained(&model, &fresh).unwrap();
        assert!(ve < 0.3, "variance explained {ve}");
    }

    #[test]
    fn objective_zero_shared_equals_total_energy() {
        let mats = orthogonal_family(6, 12, 2, 70);
        let mut model = fit_srm(&mats, 3, 10, 1e-9, 0).unwrap();
        model.shared = Matrix::zeros(3, 12);
        let obj = srm_objective(&model, &mats).unwrap();
        let total: f64 = mats
            .iter()
            .map(|a| frobenius_norm_sq(&normalize_columns(a.data()).unwrap()))
            .sum();
        assert!((obj - total).abs() < 1e-9 * total);
    }

    #[test]
    fn objective_matches_per_term_oracle() {
        let mats = orthogonal_family(7, 15, 3, 75);
        let model = fit_srm(&mats, 4, 20, 1e-9, 0).unwrap();
        let total = srm_objective(&model, &mats).unwrap();
        let mut oracle = 0.0;
        for (a, w) in mats.iter().zip(&model.transforms) {
            let z = normalize_columns(a.data()).unwrap();
            let recon = w.matmul(&model.shared);
            for i in 0..z.rows() {
                for j in 0..z.cols() {
                    let d = z.get(i, j) - recon.get(i, j);
                    oracle += d * d;
                }
            }
        }
        assert!((total - oracle).abs() < 1e-10 * oracle.max(1.0));
    }

    #[test]
    fn shared_space_rsm_matches_input_rsm_at_perfect_fit() {
        let mats = orthogonal_family(10, 40, 3, 85);
        let model = fit_srm(&mats, 10, 100, 1e-13, 0).unwrap();
        let shared_rsm = within_rsm(&model.shared).unwrap();
        for a in &mats {
            let input_rsm = within_rsm(a.data()).unwrap();
            let diff = max_abs_diff(shared_rsm.values(), input_rsm.values());
            assert!(diff < consts::SRM_TRANSFORM_TOL, "RSM diff {diff}");
        }
    }

    #[test]
    fn converse_equal_gram_at_perfect_fit() {
        let mats = orthogonal_family(10, 40, 3, 95);
        let model = fit_srm(&mats, 10, 100, 1e-13, 0).unwrap();
        let sts = model.shared.t_matmul(&model.shared);
        for a in &mats {
            let z = normalize_columns(a.data()).unwrap();
            let gram = z.t_matmul(&z);
            assert!(max_abs_diff(&sts, &gram) < consts::SRM_TRANSFORM_TOL);
        }
    }

    #[test]
    fn mixed_layers_rejected() {
        let a = ActivityMatrix::new("a", "layer1", random_matrix(6, 12, 1)).unwrap();
        let b = ActivityMatrix::new("b", "layer2", random_matrix(6, 12, 2)).unwrap();
        assert!(matches!(
            fit_srm(&[a, b], 3, 10, 1e-9, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unequal_unit_counts_supported() {
        // networks of different sizes share one k-dimensional space
        let h = random_matrix(6, 30, 11);
        let pad = random_matrix(9, 30, 12);
        let tall_q = {
            let (q, _) = crate::mat::qr(&random_matrix(9, 6, 13));
            q
        };
        let mats = vec![
            activity("small", h.clone()),
            activity("large", {
                // embed h's column space into 9 dimensions plus noise
                let embedded = tall_q.matmul(&h);
                Matrix::from_array(embedded.array() + pad.array().mapv(|v| v * 1e-3)).unwrap()
            }),
        ];
        let model = fit_srm(&mats, 4, 40, 1e-9, 0).unwrap();
        assert_eq!(model.transforms[0].rows(), 6);
        assert_eq!(model.transforms[1].rows(), 9);
        assert_eq!(model.transforms[0].cols(), 4);
        assert!(model.max_orthonormality_error() < consts::SRM_TRANSFORM_TOL);
    }
}
