//! The four subcommands. Each returns its report; nothing is written
//! outside the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use gcae::baseline::run_baseline;
use gcae::binclust::indicator_matrix;
use gcae::data::{load_labels, load_manifest, remap_labels, save_labels, save_matrix, synth_multiview, write_text};
use gcae::metrics::evaluate;
use gcae::{run_gcae, DenseMatrix, MultiViewDataset};

use crate::config::{RunConfig, SynthConfig};
use crate::report::{write_json, BenchmarkReport, EvalReport, MethodResult, Metrics, RunReport, TrajectoryPoint};
use crate::{CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn score(ds: &MultiViewDataset, predicted: &[usize]) -> CliResult<Option<(Metrics, Vec<String>)>> {
    match ds.labels() {
        Some(truth) => Ok(Some(Metrics::from_scores(&evaluate(truth, predicted)?))),
        None => Ok(None),
    }
}

fn as_i64(labels: &[usize]) -> Vec<i64> {
    labels.iter().map(|&l| l as i64).collect()
}

/// Runs GCAE and writes `codes.csv` (`b x N`), `labels.csv`, `q.csv`,
/// `h.csv` (`c x N` indicator), `w{v}.csv`, `weights.csv`,
/// `trajectory.csv` and `report.json`.
pub fn fit(config: &Path) -> CliResult<RunReport> {
    fit_with(&RunConfig::load(config)?)
}

pub fn fit_with(cfg: &RunConfig) -> CliResult<RunReport> {
    let ds = load_manifest(&cfg.manifest)?;
    cfg.hyper.validate_for(ds.n_samples())?;
    let fit = run_gcae(&ds, &cfg.hyper)?;
    let (metrics, warnings) = match score(&ds, fit.labels())? {
        Some((m, w)) => (Some(m), w),
        None => (None, vec!["dataset has no labels; metrics skipped".to_string()]),
    };

    let out = &cfg.output;
    create_dir(out)?;
    save_matrix(&fit.state.b, &out.join("codes.csv"))?;
    save_labels(&as_i64(fit.labels()), &out.join("labels.csv"))?;
    save_matrix(&fit.model.q, &out.join("q.csv"))?;
    save_matrix(&indicator_matrix(fit.labels(), cfg.hyper.clusters), &out.join("h.csv"))?;
    for (v, w) in fit.state.w.iter().enumerate() {
        save_matrix(w, &out.join(format!("w{v}.csv")))?;
    }
    save_matrix(&DenseMatrix::from_column_slice(fit.state.p.len(), 1, &fit.state.p), &out.join("weights.csv"))?;

    let trajectory = TrajectoryPoint::from_losses(&fit.trajectory);
    let mut csv = String::from("iteration,total,graph,autoencoder,cluster\n");
    for t in &trajectory {
        csv.push_str(&format!("{},{},{},{},{}\n", t.iteration, t.total, t.graph, t.autoencoder, t.cluster));
    }
    write_text(&out.join("trajectory.csv"), &csv)?;

    let report = RunReport {
        metrics,
        trajectory,
        weights: fit.state.p.clone(),
        seconds: fit.seconds,
        config: cfg.echo.clone(),
        decorrelation_residual: fit.state.decorrelation_residual(),
        bits: cfg.hyper.bits,
        seed: cfg.hyper.seed,
        n_samples: ds.n_samples(),
        clusters: cfg.hyper.clusters,
        eta: fit.eta.clone(),
        label_values: ds.label_values().to_vec(),
        warnings,
    };
    write_json(&report, &out.join("report.json"))?;
    Ok(report)
}

/// Scores `pred` against `truth` and writes `eval_report.json` into
/// `output` (default: the directory holding `pred`). Nothing is written
/// when the inputs are unusable.
pub fn eval(pred: &Path, truth: &Path, output: Option<&Path>) -> CliResult<EvalReport> {
    let (p, _) = remap_labels(&load_labels(pred)?);
    let (t, _) = remap_labels(&load_labels(truth)?);
    let (metrics, warnings) = Metrics::from_scores(&evaluate(&t, &p)?);
    let report = EvalReport {
        metrics,
        n_samples: t.len(),
        warnings,
    };
    let dir = match output {
        Some(dir) => dir.to_path_buf(),
        None => pred.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    create_dir(&dir)?;
    write_json(&report, &dir.join("eval_report.json"))?;
    Ok(report)
}

/// Writes a synthetic dataset and returns its manifest path.
pub fn synth(config: &Path) -> CliResult<PathBuf> {
    let cfg = SynthConfig::load(config)?;
    let ds = synth_multiview(&cfg.params)?;
    Ok(ds.save(&cfg.output)?)
}

/// GCAE and the random-projection baseline on the same data and seed;
/// writes `benchmark.json`.
pub fn benchmark(config: &Path) -> CliResult<BenchmarkReport> {
    benchmark_with(&RunConfig::load(config)?)
}

pub fn benchmark_with(cfg: &RunConfig) -> CliResult<BenchmarkReport> {
    let ds = load_manifest(&cfg.manifest)?;
    if ds.labels().is_none() {
        return Err(CliError::Validation("benchmark needs a labeled dataset".into()));
    }
    cfg.hyper.validate_for(ds.n_samples())?;
    let result = |labels: &[usize], seconds: f64| -> CliResult<MethodResult> {
        let (metrics, warnings) = score(&ds, labels)?.expect("labels checked above");
        Ok(MethodResult {
            metrics,
            seconds,
            warnings,
        })
    };
    let baseline_fit = run_baseline(&ds, &cfg.hyper)?;
    let baseline = result(&baseline_fit.model.assignments, baseline_fit.seconds)?;
    let gcae = if cfg.baseline_only {
        None
    } else {
        let fit = run_gcae(&ds, &cfg.hyper)?;
        Some(result(fit.labels(), fit.seconds)?)
    };
    let report = BenchmarkReport {
        gcae,
        baseline,
        config: cfg.echo.clone(),
        bits: cfg.hyper.bits,
        seed: cfg.hyper.seed,
    };
    create_dir(&cfg.output)?;
    write_json(&report, &cfg.output.join("benchmark.json"))?;
    Ok(report)
}
