use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::StudyConfig;
use crate::linalg::Method;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    AlignedText,
    Tsv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "text" | "aligned" | "alignedtext" => Ok(ReportFormat::AlignedText),
            "tsv" => Ok(ReportFormat::Tsv),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    /// Method string with parameters, e.g. `gcr:r=2qn:rho=1`.
    pub params: String,
    pub grid_value: f64,
    /// `None` when every replicate failed.
    pub mean_dist: Option<f64>,
    pub se_dist: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

/// Replicate-averaged diagnostic eigenvalues, ascending (`λ̂.1 … λ̂.p`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub method: Method,
    pub params: String,
    pub grid_value: f64,
    pub eigenvalues: Vec<f64>,
    pub se: Vec<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub config: StudyConfig,
    pub results: Vec<ResultRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<Vec<EigenRow>>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl StudyReport {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column().to_string(),
            message: e.to_string(),
        })
    }

    /// Looks up a result row by method tag and grid value.
    pub fn result(&self, method: Method, grid_value: f64) -> Option<&ResultRow> {
        self.results
            .iter()
            .find(|r| r.method == method && r.grid_value == grid_value)
    }
}

pub fn emit_report(report: &StudyReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::AlignedText => aligned_text(report).into_bytes(),
        ReportFormat::Tsv => tsv(report).into_bytes(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2}"))
}

fn grid_label(report: &StudyReport) -> &'static str {
    if report.config.model.grid_is_location() {
        "a"
    } else {
        "σ"
    }
}

fn header_line(report: &StudyReport) -> String {
    let c = &report.config;
    format!(
        "{}  n = {}  q = {}  replicates = {}  norm = {}  seed = {}\n",
        c.model, c.n, c.q, c.replicates, c.norm, c.master_seed
    )
}

fn aligned_text(report: &StudyReport) -> String {
    let mut out = header_line(report);
    let methods: Vec<&str> = report.config.methods.iter().map(|m| m.method().label()).collect();
    let grid = &report.config.grid;

    if !report.results.is_empty() || report.eigen.is_none() {
        const W: usize = 14;
        let _ = write!(out, "{:<6}", "");
        for m in &methods {
            let _ = write!(out, "{m:^W$}");
        }
        out.push('\n');
        let _ = write!(out, "{:<6}", grid_label(report));
        for _ in &methods {
            let _ = write!(out, "{:>7}{:>7}", "DIST", "SE");
        }
        out.push('\n');
        for &g in grid {
            let _ = write!(out, "{g:<6}");
            for (mi, m) in report.config.methods.iter().enumerate() {
                let row = report
                    .results
                    .iter()
                    .filter(|r| r.params == m.to_string() && r.grid_value == g)
                    .nth(report.config.methods[..mi].iter().filter(|x| *x == m).count());
                let (d, s) = row.map_or((None, None), |r| (r.mean_dist, r.se_dist));
                let _ = write!(out, "{:>7}{:>7}", fmt_opt(d), fmt_opt(s));
            }
            out.push('\n');
        }
    }

    if let Some(eigen) = &report.eigen {
        const W: usize = 16;
        let _ = write!(out, "{:<12}", "EVAL(SE)");
        for row in eigen {
            let label = format!("{} {}={}", row.method, grid_label(report), row.grid_value);
            let _ = write!(out, "{label:>W$}");
        }
        out.push('\n');
        let p = eigen.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
        for j in 0..p {
            let _ = write!(out, "{:<12}", format!("λ.{}", j + 1));
            for row in eigen {
                let cell = match (row.eigenvalues.get(j), row.se.get(j)) {
                    (Some(m), Some(s)) => format!("{m:.2} ({s:.2})"),
                    _ => "-".into(),
                };
                let _ = write!(out, "{cell:>W$}");
            }
            out.push('\n');
        }
    }

    for (k, note) in report.notes.iter().enumerate() {
        let _ = writeln!(out, "[{}] {note}", k + 1);
    }
    out
}

fn tsv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn tsv(report: &StudyReport) -> String {
    let mut out = String::new();
    if report.eigen.is_none() || !report.results.is_empty() {
        out.push_str("method\tparams\tgrid_value\tmean_dist\tse_dist\tn_ok\tn_failed\n");
        for r in &report.results {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.method,
                r.params,
                r.grid_value,
                tsv_opt(r.mean_dist),
                tsv_opt(r.se_dist),
                r.n_ok,
                r.n_failed
            );
        }
    }
    if let Some(eigen) = &report.eigen {
        out.push_str("method\tparams\tgrid_value\tindex\teigenvalue\tse\tn_ok\tn_failed\n");
        for r in eigen {
            for (j, (m, s)) in r.eigenvalues.iter().zip(&r.se).enumerate() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{m}\t{s}\t{}\t{}",
                    r.method,
                    r.params,
                    r.grid_value,
                    j + 1,
                    r.n_ok,
                    r.n_failed
                );
            }
        }
    }
    out
}
