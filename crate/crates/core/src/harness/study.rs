use rayon::prelude::*;

use crate::baselines::{ols_direction, phd_fit, save_fit, sir_fit};
use crate::error::{Error, Result};
use crate::gcr::{gcr_fit, gcr_g_matrix};
use crate::harness::config::{MethodConfig, StudyConfig};
use crate::harness::report::{EigenRow, ResultRow, StudyReport, SCHEMA_VERSION};
use crate::linalg::{basis_distance, sym_eigen, Dataset, Method, SubspaceEstimate};
use crate::scr::{scr_fit, scr_test_matrix};
use crate::simgen::{derive_seed, generate, LabeledDataset, ModelSpec};

/// Fits one configured method.
pub fn fit_method(method: &MethodConfig, data: &Dataset, q: usize) -> Result<SubspaceEstimate> {
    let n = data.n();
    match method {
        MethodConfig::Scr { .. } => scr_fit(data, q, method.threshold(n, q).expect("scr threshold")),
        MethodConfig::Gcr { .. } => gcr_fit(data, q, &method.tube(n, q).expect("gcr tube")),
        MethodConfig::Ols => {
            if q != 1 {
                return Err(Error::InvalidArgument(format!("OLS estimates one direction, q = {q}")));
            }
            ols_direction(data)
        }
        MethodConfig::Sir { .. } => sir_fit(data, q, method.slices().expect("slices")),
        MethodConfig::Save { .. } => save_fit(data, q, method.slices().expect("slices")),
        MethodConfig::Phd => phd_fit(data, q),
    }
}

/// Replicate `r` uses the same dataset seed at every grid value, so a noise
/// sweep reuses one set of predictor and noise draws.
pub fn replicate_data(cfg: &StudyConfig, grid_value: f64, replicate: usize) -> Result<LabeledDataset> {
    generate(&ModelSpec {
        id: cfg.model,
        sigma_or_a: grid_value,
        n: cfg.n,
        seed: derive_seed(cfg.master_seed, replicate as u64),
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `job` for every (grid index, replicate), in parallel, returning the
/// outputs in (grid, replicate) order.
fn run_jobs<T, F>(cfg: &StudyConfig, job: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|g| (0..cfg.replicates).map(move |r| (g, r)))
        .collect();
    let flat: Vec<T> = pool(cfg.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(g, r)| job(g, r))
            .collect::<Result<Vec<T>>>()
    })?;
    let mut out: Vec<Vec<T>> = Vec::with_capacity(cfg.grid.len());
    let mut it = flat.into_iter();
    for _ in 0..cfg.grid.len() {
        out.push(it.by_ref().take(cfg.replicates).collect());
    }
    Ok(out)
}

/// Mean and sample standard deviation (divisor m − 1; zero for a single value).
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

fn summarize_failures(notes: &mut Vec<String>, label: &str, grid_value: f64, errors: &[String]) {
    if let Some(first) = errors.first() {
        notes.push(format!(
            "{label} at {grid_value}: {} replicate(s) failed and were excluded (first error: {first})",
            errors.len()
        ));
    }
}

fn single_replicate_note(cfg: &StudyConfig, notes: &mut Vec<String>) {
    if cfg.replicates == 1 {
        notes.push("only one replicate: SE reported as 0".into());
    }
}

/// Distance between each method's estimate and the true subspace, averaged
/// over replicates. The SE column is the replicate standard deviation.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let per_job = run_jobs(cfg, |g, r| {
        let lab = replicate_data(cfg, cfg.grid[g], r)?;
        Ok(cfg
            .methods
            .iter()
            .map(|m| {
                fit_method(m, &lab.data, cfg.q)
                    .and_then(|est| basis_distance(&est.basis, &lab.true_basis, cfg.norm))
                    .map_err(|e| e.to_string())
            })
            .collect::<Vec<_>>())
    })?;

    let mut results = Vec::new();
    let mut notes = Vec::new();
    single_replicate_note(cfg, &mut notes);
    for (mi, method) in cfg.methods.iter().enumerate() {
        for (g, reps) in per_job.iter().enumerate() {
            let mut ok = Vec::new();
            let mut failed = Vec::new();
            for rep in reps {
                match &rep[mi] {
                    Ok(d) => ok.push(*d),
                    Err(e) => failed.push(e.clone()),
                }
            }
            summarize_failures(&mut notes, &method.to_string(), cfg.grid[g], &failed);
            let (mean, sd) = if ok.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_and_sd(&ok);
                (Some(m), Some(s))
            };
            results.push(ResultRow {
                method: method.method(),
                params: method.to_string(),
                grid_value: cfg.grid[g],
                mean_dist: mean,
                se_dist: sd,
                n_ok: ok.len(),
                n_failed: failed.len(),
            });
        }
    }
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        results,
        eigen: None,
        notes,
    })
}

/// Eigenvalues, ascending, of the diagnostic matrix `2I − K̂` (SCR) or `2I − Ĝ` (GCR).
pub fn diagnostic_eigenvalues(method: &MethodConfig, data: &Dataset, q: usize) -> Result<Vec<f64>> {
    let n = data.n();
    let m = match method {
        MethodConfig::Scr { .. } => scr_test_matrix(data, method.threshold(n, q).expect("threshold"))?,
        MethodConfig::Gcr { .. } => gcr_g_matrix(data, &method.tube(n, q).expect("tube"))?,
        other => {
            return Err(Error::Config(format!(
                "eigenvalue studies support SCR and GCR only, got {}",
                other.method()
            )))
        }
    };
    let mut values: Vec<f64> = sym_eigen(&m)?.values.iter().copied().collect();
    values.reverse();
    Ok(values)
}

/// Replicate-averaged eigenvalues of the SCR/GCR diagnostic matrices.
pub fn run_eigen_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    if let Some(bad) = cfg.methods.iter().find(|m| !matches!(m.method(), Method::Scr | Method::Gcr)) {
        return Err(Error::Config(format!(
            "eigenvalue studies support SCR and GCR only, got {}",
            bad.method()
        )));
    }
    let per_job = run_jobs(cfg, |g, r| {
        let lab = replicate_data(cfg, cfg.grid[g], r)?;
        Ok(cfg
            .methods
            .iter()
            .map(|m| diagnostic_eigenvalues(m, &lab.data, cfg.q).map_err(|e| e.to_string()))
            .collect::<Vec<_>>())
    })?;

    let p = cfg.model.dim();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    single_replicate_note(cfg, &mut notes);
    for (mi, method) in cfg.methods.iter().enumerate() {
        for (g, reps) in per_job.iter().enumerate() {
            let mut ok: Vec<&Vec<f64>> = Vec::new();
            let mut failed = Vec::new();
            for rep in reps {
                match &rep[mi] {
                    Ok(v) => ok.push(v),
                    Err(e) => failed.push(e.clone()),
                }
            }
            summarize_failures(&mut notes, &method.to_string(), cfg.grid[g], &failed);
            let (mut means, mut ses) = (Vec::with_capacity(p), Vec::with_capacity(p));
            if !ok.is_empty() {
                for j in 0..p {
                    let col: Vec<f64> = ok.iter().map(|v| v[j]).collect();
                    let (m, s) = mean_and_sd(&col);
                    means.push(m);
                    ses.push(s);
                }
            }
            rows.push(EigenRow {
                method: method.method(),
                params: method.to_string(),
                grid_value: cfg.grid[g],
                eigenvalues: means,
                se: ses,
                n_ok: ok.len(),
                n_failed: failed.len(),
            });
        }
    }
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        results: Vec::new(),
        eigen: Some(rows),
        notes,
    })
}
