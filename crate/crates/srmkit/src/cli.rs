//! Command-line front end: simulate, fit, transform, evaluate, rsm.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags, malformed
//! files, shape mismatches), 2 on numerical failures discovered
//! mid-computation (degenerate columns, zero variance, non-unique
//! factorizations). Every subcommand is deterministic given its flags and
//! seed, and reports echo every resolved value so published numbers can be
//! replayed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::consts;
use crate::error::{Error, Result};
use crate::io::{
    self, ingest_activations, load_model, save_model, write_matrix, MatrixFormat, PairRecord,
    Report,
};
use crate::mat::Matrix;
use crate::rsm::{
    average_inter_rsm, average_rsm, average_within_rsm, inter_rsm, pairwise_wrsm_consistency,
    rsm_correlation, within_rsm, CorrMethod, Rsm,
};
use crate::sim::{
    self, derive_seed, evaluate_run_detailed, generate_run, run_simulation_threaded,
    SimulationSpec, SourceSpec, TransformFamily,
};
use crate::srm::{fit_srm, transform, variance_explained, ActivityMatrix};
use crate::stats::{bootstrap_ci, BootstrapCi};

#[derive(Parser)]
#[command(
    name = "srmkit",
    version,
    about = "Fit, evaluate, and simulate shared response models over multi-network activity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the synthetic-recovery simulation and write a report
    Simulate(SimulateArgs),
    /// Fit a shared response model to one layer of a manifest
    Fit(FitArgs),
    /// Project manifest data into a fitted model's shared space
    Transform(TransformArgs),
    /// Score a fitted model on manifest data and write a report
    Evaluate(EvaluateArgs),
    /// Export within- or inter-network RSMs for manifest data
    Rsm(RsmArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Config file of `key = value` lines; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Units per network [default: 64]
    #[arg(long)]
    units: Option<usize>,
    /// Total examples, split into alignment and test sets [default: 1024]
    #[arg(long)]
    examples: Option<usize>,
    /// Number of networks [default: 10]
    #[arg(long)]
    networks: Option<usize>,
    /// Mixing transform family: orthogonal or permutation [default: orthogonal]
    #[arg(long)]
    family: Option<String>,
    /// Shared source: `gaussian` or `file:<path>` [default: gaussian]
    #[arg(long)]
    source: Option<String>,
    /// Additive Gaussian noise scale [default: 0]
    #[arg(long)]
    noise: Option<f64>,
    /// Fraction of examples in the alignment set [default: 0.5]
    #[arg(long)]
    split: Option<f64>,
    /// Independent replicates [default: 50]
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; per-run seeds derive from it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Shared dimension for the fit [default: units]
    #[arg(long)]
    k: Option<usize>,
    /// Output directory for the report (and RSMs with --emit-rsms)
    #[arg(long)]
    out: PathBuf,
    /// Also write run 0's averaged within-RSM, shared-space inter-RSM, and
    /// native-space inter-RSM as matrix files
    #[arg(long)]
    emit_rsms: bool,
    /// Worker threads; results are identical for any value
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct FitArgs {
    /// Manifest of `network_id, layer_id, path` lines
    #[arg(long)]
    manifest: PathBuf,
    /// Layer to fit (manifests may hold several)
    #[arg(long)]
    layer: String,
    /// Shared dimension
    #[arg(long)]
    k: usize,
    /// Iteration cap for the alternating solver
    #[arg(long, default_value_t = consts::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Relative objective-change convergence threshold
    #[arg(long, default_value_t = consts::DEFAULT_FIT_TOL)]
    tol: f64,
    /// Output model directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Fitted model directory
    #[arg(long)]
    model: PathBuf,
    /// Manifest of data to project; only the model's layer is used
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for per-network k x m shared-space matrices
    #[arg(long)]
    out: PathBuf,
    /// Matrix file format
    #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
    format: FileFormat,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Fitted model directory
    #[arg(long)]
    model: PathBuf,
    /// Manifest of evaluation data; only the model's layer is used
    #[arg(long)]
    manifest: PathBuf,
    /// Report output path (JSON)
    #[arg(long)]
    report: PathBuf,
    /// Seed for the pairwise bootstrap intervals
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RsmArgs {
    /// Manifest of activity matrices; all layers are processed
    #[arg(long)]
    manifest: PathBuf,
    /// Which RSMs to export
    #[arg(long, value_enum)]
    kind: RsmKindArg,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Matrix file format
    #[arg(long, value_enum, default_value_t = FileFormat::Binary)]
    format: FileFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Binary,
    Csv,
}

impl From<FileFormat> for MatrixFormat {
    fn from(f: FileFormat) -> MatrixFormat {
        match f {
            FileFormat::Binary => MatrixFormat::Binary,
            FileFormat::Csv => MatrixFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RsmKindArg {
    /// Per-network within-RSMs plus their per-layer average
    Within,
    /// Per-layer averaged inter-network RSM
    Inter,
}

/// Parse `std::env::args` and dispatch; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// [`run`] over explicit arguments, for tests.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests print to stdout and succeed
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Rsm(args) => cmd_rsm(args),
    }
}

/// Apply config-file values (when given) then explicit flag overrides.
fn resolve_spec(args: &SimulateArgs) -> Result<SimulationSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::from(e).context(format!("config {}", path.display())))?;
            sim::parse_config(&text)?
        }
        None => SimulationSpec::default(),
    };
    if let Some(v) = args.units {
        spec.units = v;
    }
    if let Some(v) = args.examples {
        spec.examples = v;
    }
    if let Some(v) = args.networks {
        spec.networks = v;
    }
    if let Some(v) = &args.family {
        spec.transform_family = TransformFamily::parse(v)?;
    }
    if let Some(v) = &args.source {
        spec.source = SourceSpec::parse(v)?;
    }
    if let Some(v) = args.noise {
        spec.noise_sigma = v;
    }
    if let Some(v) = args.split {
        spec.split_fraction = v;
    }
    if let Some(v) = args.runs {
        spec.runs = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(v) = args.k {
        spec.k = Some(v);
    }
    spec.validate()?;
    Ok(spec)
}

fn base_conventions(report: &mut Report, normalization: &str, k: usize, bootstrap_axis: &str) {
    report
        .convention("column_normalization", normalization)
        .convention("rsm_vectorization", crate::rsm::VECTORIZATION_POLICY)
        .convention(
            "bootstrap",
            format!(
                "percentile over {bootstrap_axis}, {} resamples, level {}",
                consts::DEFAULT_BOOTSTRAP_RESAMPLES,
                consts::DEFAULT_CI_LEVEL
            ),
        )
        .convention("k", k.to_string());
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    if args.threads == 0 {
        return Err(Error::InvalidSpec("threads must be at least 1".into()));
    }
    let spec = resolve_spec(&args)?;
    let result = run_simulation_threaded(&spec, args.threads)?;

    std::fs::create_dir_all(&args.out)?;
    let mut report = Report::new("simulate", spec.seed);
    report
        .echo("units", result.units)
        .echo("examples", result.examples)
        .echo("networks", spec.networks)
        .echo("family", spec.transform_family.name())
        .echo("source", spec.source.describe())
        .echo("noise", spec.noise_sigma)
        .echo("split", spec.split_fraction)
        .echo("runs", spec.runs)
        .echo("seed", spec.seed)
        .echo("k", result.k)
        .echo("threads", args.threads)
        .echo("fit_max_iters", consts::DEFAULT_MAX_ITERS)
        .echo("fit_tol", consts::DEFAULT_FIT_TOL);
    base_conventions(
        &mut report,
        crate::srm::NORMALIZATION_POLICY,
        result.k,
        "runs",
    );
    report
        .metric_with_ci("shared_pearson", result.shared_pearson.clone())
        .metric_with_ci("shared_spearman", result.shared_spearman.clone())
        .metric_with_ci("native_pearson", result.native_pearson.clone())
        .metric_with_ci("native_spearman", result.native_spearman.clone())
        .metric_with_ci("variance_explained", result.variance_explained.clone())
        .metric("pearson_spearman_gap", result.pearson_spearman_gap());
    report.runs = Some(result.runs.clone());

    let report_path = args.out.join("report.json");
    report.save(&report_path)?;

    if args.emit_rsms {
        let k = result.k;
        let run0 = generate_run(&spec, 0)?;
        let (_, _, rsms) = evaluate_run_detailed(&run0.alignment, &run0.test, k)?;
        let write = |rsm: &Rsm, name: &str| -> Result<()> {
            write_matrix(rsm.values(), &args.out.join(name), MatrixFormat::Binary)
        };
        write(&rsms.average_wrsm, "average_wrsm.amat")?;
        write(&rsms.shared_irsm, "shared_irsm.amat")?;
        write(&rsms.native_irsm, "native_irsm.amat")?;
    }

    println!(
        "simulate: runs={} shared_pearson={:.6} [{:.6}, {:.6}] variance_explained={:.6}",
        spec.runs,
        result.shared_pearson.mean,
        result.shared_pearson.lo,
        result.shared_pearson.hi,
        result.variance_explained.mean,
    );
    println!("report: {}", report_path.display());
    Ok(())
}

/// Ingest a manifest and keep only `layer`, erroring when nothing matches.
fn ingest_layer(manifest: &Path, layer: &str) -> Result<Vec<ActivityMatrix>> {
    let all = ingest_activations(manifest)?;
    let layers: Vec<String> = {
        let mut seen: Vec<String> = Vec::new();
        for a in &all {
            if !seen.contains(&a.layer_id) {
                seen.push(a.layer_id.clone());
            }
        }
        seen
    };
    let mats: Vec<ActivityMatrix> = all.into_iter().filter(|a| a.layer_id == layer).collect();
    if mats.is_empty() {
        return Err(Error::InvalidSpec(format!(
            "manifest has no entries for layer {layer:?} (layers present: {layers:?})"
        )));
    }
    Ok(mats)
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let mats = ingest_layer(&args.manifest, &args.layer)?;
    let model = fit_srm(&mats, args.k, args.max_iters, args.tol, 0)?;
    save_model(&model, &args.out)?;
    println!(
        "fit: networks={} layer={} k={} iterations={} converged={} objective={:.6e}",
        model.network_ids.len(),
        model.layer_id,
        model.k,
        model.iterations,
        model.converged,
        model.final_objective(),
    );
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
    println!("model: {}", args.out.display());
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let mats = ingest_layer(&args.manifest, &model.layer_id)?;
    let projected = transform(&model, &mats)?;
    std::fs::create_dir_all(&args.out)?;
    let format = MatrixFormat::from(args.format);
    for (a, z) in mats.iter().zip(&projected) {
        let name = format!(
            "shared_{}.{}",
            io::sanitize(&a.network_id),
            format.extension()
        );
        write_matrix(z, &args.out.join(name), format)?;
    }
    println!(
        "transform: wrote {} matrices ({} x {}) to {}",
        projected.len(),
        model.k,
        mats[0].examples(),
        args.out.display(),
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let mats = ingest_layer(&args.manifest, &model.layer_id)?;
    let projected = transform(&model, &mats)?;
    let native: Vec<Matrix> = mats.iter().map(|a| a.data().clone()).collect();

    let average_wrsm = average_within_rsm(&native)?;
    let shared_irsm = average_inter_rsm(&projected)?;
    let native_irsm = average_inter_rsm(&native)?;
    let consistency = pairwise_wrsm_consistency(&native)?;
    let ve = variance_explained(&model, &mats)?;

    // per-pair analogs of the aggregate correlations; the bootstrap
    // resamples these pair values
    let mut pairs: Vec<PairRecord> = Vec::new();
    for pv in &consistency.pairs {
        let (i, j) = (pv.left, pv.right);
        let shared_pair = inter_rsm(&projected[i], &projected[j])?;
        let native_pair = inter_rsm(&native[i], &native[j])?;
        pairs.push(PairRecord {
            left: mats[i].network_id.clone(),
            right: mats[j].network_id.clone(),
            wrsm_consistency: pv.value,
            shared_pearson: rsm_correlation(&shared_pair, &average_wrsm, CorrMethod::Pearson)?,
            shared_spearman: rsm_correlation(&shared_pair, &average_wrsm, CorrMethod::Spearman)?,
            native_pearson: rsm_correlation(&native_pair, &average_wrsm, CorrMethod::Pearson)?,
            native_spearman: rsm_correlation(&native_pair, &average_wrsm, CorrMethod::Spearman)?,
        });
    }

    let boot_base = derive_seed(args.seed, u64::MAX);
    let ci = |values: Vec<f64>, idx: u64| -> Result<BootstrapCi> {
        bootstrap_ci(
            &values,
            consts::DEFAULT_CI_LEVEL,
            consts::DEFAULT_BOOTSTRAP_RESAMPLES,
            derive_seed(boot_base, idx),
        )
    };

    let mut report = Report::new("evaluate", args.seed);
    report
        .echo("model", args.model.display())
        .echo("manifest", args.manifest.display())
        .echo("layer", &model.layer_id)
        .echo("networks", mats.len())
        .echo("examples", mats[0].examples())
        .echo("k", model.k)
        .echo("seed", args.seed)
        .echo("model_converged", model.converged)
        .echo("model_iterations", model.iterations);
    base_conventions(&mut report, &model.normalization, model.k, "network pairs");

    // point estimates come from the averaged RSMs; intervals from
    // resampling the per-pair values around them
    let mut aggregate = |name: &str,
                         rsm: &Rsm,
                         method: CorrMethod,
                         values: Vec<f64>,
                         idx: u64|
     -> Result<()> {
        let value = rsm_correlation(rsm, &average_wrsm, method)?;
        let mut entry_ci = ci(values, idx)?;
        entry_ci.mean = value;
        report.metrics.push(io::MetricEntry {
            name: name.into(),
            value,
            ci: Some(entry_ci),
        });
        Ok(())
    };
    aggregate(
        "shared_pearson",
        &shared_irsm,
        CorrMethod::Pearson,
        pairs.iter().map(|p| p.shared_pearson).collect(),
        0,
    )?;
    aggregate(
        "shared_spearman",
        &shared_irsm,
        CorrMethod::Spearman,
        pairs.iter().map(|p| p.shared_spearman).collect(),
        1,
    )?;
    aggregate(
        "native_pearson",
        &native_irsm,
        CorrMethod::Pearson,
        pairs.iter().map(|p| p.native_pearson).collect(),
        2,
    )?;
    aggregate(
        "native_spearman",
        &native_irsm,
        CorrMethod::Spearman,
        pairs.iter().map(|p| p.native_spearman).collect(),
        3,
    )?;
    report
        .metric("variance_explained", ve)
        .metric_with_ci(
            "wrsm_consistency",
            ci(consistency.pairs.iter().map(|p| p.value).collect(), 4)?,
        );
    report.pairs = Some(pairs);
    report.save(&args.report)?;

    let sp = report.find_metric("shared_pearson").expect("just added");
    println!(
        "evaluate: networks={} shared_pearson={:.6} variance_explained={:.6}",
        mats.len(),
        sp.value,
        ve,
    );
    println!("report: {}", args.report.display());
    Ok(())
}

fn cmd_rsm(args: RsmArgs) -> Result<()> {
    let all = ingest_activations(&args.manifest)?;
    std::fs::create_dir_all(&args.out)?;
    let format = MatrixFormat::from(args.format);
    let ext = format.extension();

    // ingest order is (layer, network), so consecutive chunks share a layer
    let mut by_layer: BTreeMap<String, Vec<&ActivityMatrix>> = BTreeMap::new();
    for a in &all {
        by_layer.entry(a.layer_id.clone()).or_default().push(a);
    }

    let mut files = 0usize;
    for (layer, group) in &by_layer {
        let layer_stem = io::sanitize(layer);
        let write = |m: &Matrix, name: String, files: &mut usize| -> Result<()> {
            write_matrix(m, &args.out.join(name), format)?;
            *files += 1;
            Ok(())
        };
        match args.kind {
            RsmKindArg::Within => {
                let mut rsms = Vec::with_capacity(group.len());
                for a in group {
                    let rsm = within_rsm(a.data()).map_err(|e| {
                        e.context(format!("network {:?}, layer {layer:?}", a.network_id))
                    })?;
                    let name = format!(
                        "wrsm_{layer_stem}_{}.{ext}",
                        io::sanitize(&a.network_id)
                    );
                    write(rsm.values(), name, &mut files)?;
                    rsms.push(rsm);
                }
                let avg = average_rsm(&rsms)?;
                write(
                    avg.values(),
                    format!("wrsm_{layer_stem}_average.{ext}"),
                    &mut files,
                )?;
            }
            RsmKindArg::Inter => {
                let data: Vec<Matrix> = group.iter().map(|a| a.data().clone()).collect();
                let avg = average_inter_rsm(&data)
                    .map_err(|e| e.context(format!("layer {layer:?}")))?;
                write(
                    avg.values(),
                    format!("irsm_{layer_stem}_average.{ext}"),
                    &mut files,
                )?;
            }
        }
    }
    println!(
        "rsm: wrote {files} files for {} layer(s) to {}",
        by_layer.len(),
        args.out.display(),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_overrides_beat_config_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sim.cfg");
        std::fs::write(&path, "units = 16\nruns = 9\nseed = 4\n").unwrap();
        let args = SimulateArgs {
            config: Some(path),
            units: Some(32),
            examples: None,
            networks: None,
            family: Some("permutation".into()),
            source: None,
            noise: None,
            split: None,
            runs: None,
            seed: None,
            k: None,
            out: PathBuf::from("unused"),
            emit_rsms: false,
            threads: 1,
        };
        let spec = resolve_spec(&args).unwrap();
        assert_eq!(spec.units, 32); // flag wins
        assert_eq!(spec.runs, 9); // config survives
        assert_eq!(spec.seed, 4);
        assert_eq!(spec.transform_family, TransformFamily::Permutation);
    }

    #[test]
    fn resolve_spec_validates_merged_result() {
        let args = SimulateArgs {
            config: None,
            units: None,
            examples: None,
            networks: Some(1),
            family: None,
            source: None,
            noise: None,
            split: None,
            runs: None,
            seed: None,
            k: None,
            out: PathBuf::from("unused"),
            emit_rsms: false,
            threads: 1,
        };
        assert!(matches!(
            resolve_spec(&args),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn parse_errors_classify_help_apart_from_mistakes() {
        // help renders on stdout and must map to exit 0; real mistakes
        // render on stderr and map to exit 1
        let parse_err = |args: &[&str]| match Cli::try_parse_from(args) {
            Err(e) => e,
            Ok(_) => panic!("expected a parse error for {args:?}"),
        };
        assert!(!parse_err(&["srmkit", "--help"]).use_stderr());
        assert!(!parse_err(&["srmkit", "simulate", "--help"]).use_stderr());
        assert!(parse_err(&["srmkit", "simulate", "--bogus-flag"]).use_stderr());
        assert!(parse_err(&["srmkit", "no-such-command"]).use_stderr());
    }
}
