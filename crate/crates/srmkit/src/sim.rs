//! Synthetic-recovery simulation: generate multi-network activity as
//! orthogonal (or permutation) mixes of one shared source, fit the shared
//! response model on an alignment split, and measure how well the shared
//! space recovers the source geometry on the held-out split.
//!
//! Every run is an independent, fully seeded replicate; aggregates come
//! with percentile-bootstrap confidence intervals over runs.

use std::path::PathBuf;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consts;
use crate::error::{Error, Result};
use crate::io::{read_matrix, RunRecord};
use crate::mat::{random_orthogonal_with, random_permutation_with, Matrix};
use crate::rsm::{average_inter_rsm, average_within_rsm, rsm_correlation, CorrMethod, Rsm};
use crate::srm::{fit_srm, transform, variance_explained, ActivityMatrix, SrmModel};
use crate::stats::{bootstrap_ci, BootstrapCi};

/// Family of mixing transforms applied to the shared source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformFamily {
    Orthogonal,
    Permutation,
}

impl TransformFamily {
    pub fn name(self) -> &'static str {
        match self {
            TransformFamily::Orthogonal => "orthogonal",
            TransformFamily::Permutation => "permutation",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "orthogonal" => Ok(TransformFamily::Orthogonal),
            "permutation" => Ok(TransformFamily::Permutation),
            other => Err(Error::InvalidSpec(format!(
                "unknown transform family {other:?} (expected orthogonal or permutation)"
            ))),
        }
    }
}

/// Where the shared source matrix H comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    /// Standard-Gaussian H drawn fresh per run from the run's seed.
    Gaussian,
    /// H read from a matrix file; its dims override `units`/`examples` and
    /// the same H is used in every run.
    Supplied(PathBuf),
}

impl SourceSpec {
    pub fn describe(&self) -> String {
        match self {
            SourceSpec::Gaussian => "gaussian".into(),
            SourceSpec::Supplied(path) => format!("file:{}", path.display()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("gaussian") {
            Ok(SourceSpec::Gaussian)
        } else if let Some(path) = t.strip_prefix("file:") {
            Ok(SourceSpec::Supplied(PathBuf::from(path)))
        } else {
            Err(Error::InvalidSpec(format!(
                "unknown source {t:?} (expected `gaussian` or `file:<path>`)"
            )))
        }
    }
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    /// Units n per network.
    pub units: usize,
    /// Examples m (columns), split across alignment and test sets.
    pub examples: usize,
    /// Number of networks N.
    pub networks: usize,
    pub transform_family: TransformFamily,
    pub source: SourceSpec,
    /// Additive i.i.d. Gaussian noise scale; 0 keeps the mixing exact.
    pub noise_sigma: f64,
    /// Fraction of examples in the alignment (fitting) set.
    pub split_fraction: f64,
    /// Independent replicates.
    pub runs: usize,
    pub seed: u64,
    /// Shared dimension for the fit; defaults to `units`.
    pub k: Option<usize>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            units: 64,
            examples: 1024,
            networks: 10,
            transform_family: TransformFamily::Orthogonal,
            source: SourceSpec::Gaussian,
            noise_sigma: 0.0,
            split_fraction: 0.5,
            runs: 50,
            seed: 0,
            k: None,
        }
    }
}

impl SimulationSpec {
    /// Check every invariant that does not require reading the source file.
    pub fn validate(&self) -> Result<()> {
        if self.networks < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 networks, got {}",
                self.networks
            )));
        }
        if self.runs == 0 {
            return Err(Error::InvalidSpec("runs must be at least 1".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "split_fraction must lie strictly between 0 and 1, got {}",
                self.split_fraction
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "noise_sigma must be a nonnegative finite number, got {}",
                self.noise_sigma
            )));
        }
        if self.source == SourceSpec::Gaussian {
            if self.units == 0 {
                return Err(Error::InvalidSpec("units must be at least 1".into()));
            }
            split_sizes(self.examples, self.split_fraction)?;
            if let Some(k) = self.k {
                if k == 0 || k > self.units {
                    return Err(Error::KTooLarge {
                        k,
                        max: self.units,
                        what: "units".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Shared dimension the fit will use.
    pub fn resolved_k(&self, units: usize) -> usize {
        self.k.unwrap_or(units).min(units)
    }
}

/// Alignment/test column counts for m examples. The alignment set must
/// support a fit (>= 2 columns) and the test set an RSM correlation
/// (>= 3 columns).
fn split_sizes(examples: usize, fraction: f64) -> Result<(usize, usize)> {
    let align = (examples as f64 * fraction).round() as usize;
    let test = examples.saturating_sub(align);
    if align < 2 || test < 3 {
        return Err(Error::InvalidSpec(format!(
            "examples = {examples} with split_fraction = {fraction} leaves {align} alignment \
             and {test} test columns; need at least 2 and 3"
        )));
    }
    Ok((align, test))
}

/// Derive an independent stream seed from a base seed and an index.
///
/// Uses the splitmix64 finalizer over `base XOR (golden-ratio * (index+1))`.
/// The mapping is fixed (changing it would re-randomize every published
/// run) and documented here so external tools can reproduce per-run seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything one simulation run produces before evaluation.
#[derive(Debug, Clone)]
pub struct GeneratedRun {
    /// Per-network alignment-split activity.
    pub alignment: Vec<ActivityMatrix>,
    /// Per-network test-split activity.
    pub test: Vec<ActivityMatrix>,
    /// The mixing transforms actually applied, for oracle checks.
    pub ground_truth: Vec<Matrix>,
}

/// Generate the data for run `run_index` of `spec`.
///
/// The run's RNG stream is `derive_seed(spec.seed, run_index)`; draw order
/// is fixed: source H (Gaussian mode only), then the N mixing transforms,
/// then N noise matrices (only when `noise_sigma > 0`), then the column
/// shuffle for the alignment/test split. One shuffle serves all networks so
/// columns stay aligned across them.
pub fn generate_run(spec: &SimulationSpec, run_index: usize) -> Result<GeneratedRun> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, run_index as u64));

    let h = match &spec.source {
        SourceSpec::Gaussian => Matrix::from_array(Array2::from_shape_fn(
            (spec.units, spec.examples),
            |_| StandardNormal.sample(&mut rng),
        ))
        .expect("gaussian draws are finite"),
        SourceSpec::Supplied(path) => read_matrix(path)
            .map_err(|e| e.context(format!("source matrix {}", path.display())))?,
    };
    let (n, m) = (h.rows(), h.cols());
    let (n_align, _n_test) = split_sizes(m, spec.split_fraction)?;
    if let Some(k) = spec.k {
        if k == 0 || k > n {
            return Err(Error::KTooLarge {
                k,
                max: n,
                what: "source unit count".into(),
            });
        }
    }

    let ground_truth: Vec<Matrix> = (0..spec.networks)
        .map(|_| match spec.transform_family {
            TransformFamily::Orthogonal => random_orthogonal_with(n, &mut rng),
            TransformFamily::Permutation => random_permutation_with(n, &mut rng),
        })
        .collect();

    let mut mixed: Vec<Matrix> = ground_truth.iter().map(|q| q.matmul(&h)).collect();
    if spec.noise_sigma > 0.0 {
        for x in &mut mixed {
            let noise = Array2::from_shape_fn((n, m), |_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g * spec.noise_sigma
            });
            *x = Matrix::from_array_unchecked(x.array() + &noise);
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    for j in (1..m).rev() {
        let pick = rng.gen_range(0..=j);
        order.swap(j, pick);
    }
    let align_idx = &order[..n_align];
    let test_idx = &order[n_align..];

    let mut alignment = Vec::with_capacity(spec.networks);
    let mut test = Vec::with_capacity(spec.networks);
    for (i, x) in mixed.iter().enumerate() {
        let id = format!("net{i:02}");
        alignment.push(ActivityMatrix::new(&id, "sim", x.select_columns(align_idx))?);
        test.push(ActivityMatrix::new(&id, "sim", x.select_columns(test_idx))?);
    }
    Ok(GeneratedRun {
        alignment,
        test,
        ground_truth,
    })
}

/// Scalar metrics of one evaluated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Averaged shared-space inter-RSM vs averaged native within-RSM.
    pub shared_pearson: f64,
    pub shared_spearman: f64,
    /// Averaged native-space inter-RSM vs the same within-RSM (baseline).
    pub native_pearson: f64,
    pub native_spearman: f64,
    /// Reconstruction quality of the fitted model on the test split.
    pub variance_explained: f64,
}

/// The RSM matrices behind a run's metrics, for export.
#[derive(Debug, Clone)]
pub struct RunRsms {
    /// Averaged within-RSM of the native test data (the reference geometry).
    pub average_wrsm: Rsm,
    /// Averaged inter-RSM of the shared-space projections.
    pub shared_irsm: Rsm,
    /// Averaged inter-RSM of the native test data.
    pub native_irsm: Rsm,
}

/// Fit on the alignment split, evaluate on the test split.
pub fn evaluate_run(
    alignment: &[ActivityMatrix],
    test: &[ActivityMatrix],
    k: usize,
) -> Result<RunMetrics> {
    evaluate_run_detailed(alignment, test, k).map(|(m, _, _)| m)
}

/// [`evaluate_run`] also returning the fitted model and the RSMs behind the
/// metrics.
pub fn evaluate_run_detailed(
    alignment: &[ActivityMatrix],
    test: &[ActivityMatrix],
    k: usize,
) -> Result<(RunMetrics, SrmModel, RunRsms)> {
    let model = fit_srm(
        alignment,
        k,
        consts::DEFAULT_MAX_ITERS,
        consts::DEFAULT_FIT_TOL,
        0,
    )?;
    let projected = transform(&model, test)?;

    let test_data: Vec<Matrix> = test.iter().map(|a| a.data().clone()).collect();
    let average_wrsm = average_within_rsm(&test_data)?;
    let shared_irsm = average_inter_rsm(&projected)?;
    let native_irsm = average_inter_rsm(&test_data)?;

    let metrics = RunMetrics {
        shared_pearson: rsm_correlation(&shared_irsm, &average_wrsm, CorrMethod::Pearson)?,
        shared_spearman: rsm_correlation(&shared_irsm, &average_wrsm, CorrMethod::Spearman)?,
        native_pearson: rsm_correlation(&native_irsm, &average_wrsm, CorrMethod::Pearson)?,
        native_spearman: rsm_correlation(&native_irsm, &average_wrsm, CorrMethod::Spearman)?,
        variance_explained: variance_explained(&model, test)?,
    };
    Ok((
        metrics,
        model,
        RunRsms {
            average_wrsm,
            shared_irsm,
            native_irsm,
        },
    ))
}

/// Aggregated outcome of a full simulation.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// Spec the simulation actually ran (supplied-source dims resolved).
    pub spec: SimulationSpec,
    /// Resolved units and examples (differ from `spec` only in
    /// supplied-source mode).
    pub units: usize,
    pub examples: usize,
    /// Shared dimension used by every fit.
    pub k: usize,
    /// Per-run metrics ordered by run index.
    pub runs: Vec<RunRecord>,
    pub shared_pearson: BootstrapCi,
    pub shared_spearman: BootstrapCi,
    pub native_pearson: BootstrapCi,
    pub native_spearman: BootstrapCi,
    pub variance_explained: BootstrapCi,
}

impl SimulationResult {
    /// Absolute gap between the aggregate linear and rank correlations in
    /// the shared space.
    pub fn pearson_spearman_gap(&self) -> f64 {
        (self.shared_pearson.mean - self.shared_spearman.mean).abs()
    }
}

/// Execute every run of `spec` and aggregate. Runs execute sequentially;
/// see [`run_simulation_threaded`] for the parallel variant (identical
/// output for any thread count).
pub fn run_simulation(spec: &SimulationSpec) -> Result<SimulationResult> {
    run_simulation_threaded(spec, 1)
}

/// [`run_simulation`] on a rayon pool of `threads` workers. Each run's data
/// depends only on its derived seed and results are aggregated in run
/// order, so the output is identical for every thread count.
pub fn run_simulation_threaded(spec: &SimulationSpec, threads: usize) -> Result<SimulationResult> {
    spec.validate()?;
    let one_run = |run: usize| -> Result<(usize, usize, RunMetrics)> {
        let generated = generate_run(spec, run).map_err(|e| Error::RunFailed {
            run,
            source: Box::new(e),
        })?;
        let n = generated.alignment[0].units();
        let m = generated.alignment[0].examples() + generated.test[0].examples();
        let k = spec.resolved_k(n);
        let metrics = evaluate_run(&generated.alignment, &generated.test, k)
            .map_err(|e| Error::RunFailed {
                run,
                source: Box::new(e),
            })?;
        Ok((n, m, metrics))
    };

    let outcomes: Vec<(usize, usize, RunMetrics)> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot build thread pool: {e}")))?;
        pool.install(|| {
            (0..spec.runs)
                .into_par_iter()
                .map(one_run)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..spec.runs).map(one_run).collect::<Result<Vec<_>>>()?
    };

    let (units, examples) = (outcomes[0].0, outcomes[0].1);
    let runs: Vec<RunRecord> = outcomes
        .iter()
        .enumerate()
        .map(|(i, (_, _, m))| RunRecord {
            run: i,
            shared_pearson: m.shared_pearson,
            shared_spearman: m.shared_spearman,
            native_pearson: m.native_pearson,
            native_spearman: m.native_spearman,
            variance_explained: m.variance_explained,
        })
        .collect();

    // bootstrap seeds live on a stream separate from run seeds
    let boot_base = derive_seed(spec.seed, u64::MAX);
    let ci = |values: Vec<f64>, idx: u64| -> Result<BootstrapCi> {
        bootstrap_ci(
            &values,
            consts::DEFAULT_CI_LEVEL,
            consts::DEFAULT_BOOTSTRAP_RESAMPLES,
            derive_seed(boot_base, idx),
        )
    };

    Ok(SimulationResult {
        spec: spec.clone(),
        units,
        examples,
        k: spec.resolved_k(units),
        shared_pearson: ci(runs.iter().map(|r| r.shared_pearson).collect(), 0)?,
        shared_spearman: ci(runs.iter().map(|r| r.shared_spearman).collect(), 1)?,
        native_pearson: ci(runs.iter().map(|r| r.native_pearson).collect(), 2)?,
        native_spearman: ci(runs.iter().map(|r| r.native_spearman).collect(), 3)?,
        variance_explained: ci(runs.iter().map(|r| r.variance_explained).collect(), 4)?,
        runs,
    })
}

/// Parse a `key = value` configuration document into a spec, starting from
/// the defaults. Lines beginning with `#` and blank lines are ignored;
/// keys: units, examples, networks, family, source, noise, split, runs,
/// seed, k. Unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<SimulationSpec> {
    let mut spec = SimulationSpec::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: lineno,
            msg: format!("expected `key = value`, got {trimmed:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(Error::ConfigParse {
                line: lineno,
                msg: format!("duplicate key {key:?}"),
            });
        }
        seen.push(key.to_string());
        let bad = |what: &str| Error::ConfigParse {
            line: lineno,
            msg: format!("invalid {what}: {value:?}"),
        };
        match key {
            "units" => spec.units = value.parse().map_err(|_| bad("units"))?,
            "examples" => spec.examples = value.parse().map_err(|_| bad("examples"))?,
            "networks" => spec.networks = value.parse().map_err(|_| bad("networks"))?,
            "family" => {
                spec.transform_family =
                    TransformFamily::parse(value).map_err(|_| bad("family"))?
            }
            "source" => spec.source = SourceSpec::parse(value).map_err(|_| bad("source"))?,
            "noise" => spec.noise_sigma = value.parse().map_err(|_| bad("noise"))?,
            "split" => spec.split_fraction = value.parse().map_err(|_| bad("split"))?,
            "runs" => spec.runs = value.parse().map_err(|_| bad("runs"))?,
            "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
            "k" => spec.k = Some(value.parse().map_err(|_| bad("k"))?),
            other => {
                return Err(Error::ConfigParse {
                    line: lineno,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    Ok(spec)
}
