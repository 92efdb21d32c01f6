//! Analysis of a user-supplied CSV: header row, comma separated, numeric cells.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcr::gcr_fit_with_selection;
use crate::harness::config::MethodConfig;
use crate::harness::report::{ReportFormat, SCHEMA_VERSION};
use crate::harness::study::fit_method;
use crate::linalg::{standardize, Dataset, SubspaceEstimate};
use crate::scr::select_pairs_scr;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub predictor_names: Vec<String>,
    pub response_name: String,
    pub dataset: Dataset,
}

pub fn read_csv<R: Read>(reader: R, response_column: &str) -> Result<CsvData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let parse_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        Error::Parse {
            line,
            column: String::new(),
            message: e.to_string(),
        }
    };
    let headers: Vec<String> = rdr.headers().map_err(parse_err)?.iter().map(str::to_owned).collect();
    let response_idx = headers.iter().position(|h| h == response_column).ok_or_else(|| Error::Parse {
        line: 1,
        column: response_column.to_owned(),
        message: format!("response column '{response_column}' not found in header"),
    })?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut response = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(parse_err)?;
        let line = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    line,
                    column: headers[col].clone(),
                    value: cell.to_owned(),
                })?;
            if col == response_idx {
                response.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }

    let p = headers.len() - 1;
    if p == 0 {
        return Err(Error::InsufficientData("no predictor columns".into()));
    }
    if rows.len() <= p {
        return Err(Error::InsufficientData(format!(
            "{} rows for {p} predictors; need n > p",
            rows.len()
        )));
    }
    let predictor_names = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != response_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(CsvData {
        predictor_names,
        response_name: response_column.to_owned(),
        dataset: Dataset::from_rows(&rows, &response)?,
    })
}

pub fn read_csv_path(path: &Path, response_column: &str) -> Result<CsvData> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(file), response_column)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRow {
    pub predictor: String,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub method: String,
    pub response: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Orthonormal basis of the estimate, one row per predictor.
    pub basis: Vec<BasisRow>,
    /// Kernel spectrum, descending.
    pub spectrum: Vec<f64>,
    pub selected_pairs: Option<usize>,
    pub skipped_pairs: Option<usize>,
    /// Per-observation coordinates along the estimated directions on the whitened scale.
    pub scores: Vec<Vec<f64>>,
    pub response_values: Vec<f64>,
}

fn report_from(data: &CsvData, method: &MethodConfig, est: &SubspaceEstimate) -> Result<AnalysisReport> {
    let std = standardize(&data.dataset)?;
    let scores = &std.z * &est.z_directions;
    let q = est.q();
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        method: method.to_string(),
        response: data.response_name.clone(),
        n: data.dataset.n(),
        p: data.dataset.p(),
        q,
        basis: data
            .predictor_names
            .iter()
            .enumerate()
            .map(|(i, name)| BasisRow {
                predictor: name.clone(),
                weights: est.basis.row(i).iter().copied().collect(),
            })
            .collect(),
        spectrum: est.eigenvalues.iter().copied().collect(),
        selected_pairs: None,
        skipped_pairs: None,
        scores: (0..scores.nrows()).map(|k| scores.row(k).iter().copied().collect()).collect(),
        response_values: data.dataset.response().iter().copied().collect(),
    })
}

pub fn analyze(data: &CsvData, method: &MethodConfig, q: usize) -> Result<AnalysisReport> {
    let d = &data.dataset;
    let n = d.n();
    match method {
        MethodConfig::Gcr { .. } => {
            let (est, sel) = gcr_fit_with_selection(d, q, &method.tube(n, q).expect("tube"))?;
            let mut r = report_from(data, method, &est)?;
            r.selected_pairs = Some(sel.pairs.len());
            r.skipped_pairs = Some(sel.skipped);
            Ok(r)
        }
        MethodConfig::Scr { .. } => {
            let est = fit_method(method, d, q)?;
            let sel = select_pairs_scr(d.response(), method.threshold(n, q).expect("threshold"))?;
            let mut r = report_from(data, method, &est)?;
            r.selected_pairs = Some(sel.pairs.len());
            Ok(r)
        }
        _ => report_from(data, method, &fit_method(method, d, q)?),
    }
}

pub fn analyze_csv(path: &Path, response_column: &str, method: &MethodConfig, q: usize) -> Result<AnalysisReport> {
    analyze(&read_csv_path(path, response_column)?, method, q)
}

/// `obs_index, dir1..dirq, response`, one row per observation.
pub fn scores_csv(report: &AnalysisReport) -> String {
    let mut out = String::from("obs_index");
    for k in 1..=report.q {
        let _ = write!(out, ",dir{k}");
    }
    out.push_str(",response\n");
    for (i, (s, y)) in report.scores.iter().zip(&report.response_values).enumerate() {
        let _ = write!(out, "{i}");
        for v in s {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{y}");
    }
    out
}

pub fn emit_analysis(report: &AnalysisReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Tsv => {
            let mut out = String::from("predictor");
            for k in 1..=report.q {
                let _ = write!(out, "\tdir{k}");
            }
            out.push('\n');
            for row in &report.basis {
                out.push_str(&row.predictor);
                for w in &row.weights {
                    let _ = write!(out, "\t{w}");
                }
                out.push('\n');
            }
            out.into_bytes()
        }
        ReportFormat::AlignedText => {
            let mut out = format!(
                "{}  response = {}  n = {}  p = {}  q = {}\n",
                report.method, report.response, report.n, report.p, report.q
            );
            if let Some(sel) = report.selected_pairs {
                let _ = writeln!(out, "selected pairs: {sel}");
            }
            if let Some(sk) = report.skipped_pairs.filter(|&s| s > 0) {
                let _ = writeln!(out, "pairs skipped (duplicate predictor rows): {sk}");
            }
            let width = report.basis.iter().map(|r| r.predictor.len()).max().unwrap_or(0).max(9);
            let _ = write!(out, "{:<width$}", "predictor");
            for k in 1..=report.q {
                let _ = write!(out, "{:>11}", format!("dir{k}"));
            }
            out.push('\n');
            for row in &report.basis {
                let _ = write!(out, "{:<width$}", row.predictor);
                for w in &row.weights {
                    let _ = write!(out, "{w:>11.4}");
                }
                out.push('\n');
            }
            out.push_str("spectrum:");
            for v in &report.spectrum {
                let _ = write!(out, " {v:.4}");
            }
            out.push('\n');
            out.into_bytes()
        }
    }
}
