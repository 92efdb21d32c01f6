//! General contour regression.
//!
//! Each pair of whitened observations defines a line; the sample points within
//! distance `rho` of that line form a tube, and the response variance inside
//! the tube measures how flat the regression surface is along the pair's
//! direction. Low-variance pairs feed the same kernel/eigen machinery as SCR.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, back_transform, check_q, sym_eigen, Dataset, Method, SubspaceEstimate};
use crate::scr::{cutoff, finish_selection, h_matrix, pair_count, PairSelection, ThresholdSpec};

const DEGENERATE_SQ_LEN: f64 = 1e-24;

/// Uniform random subset of pairs to score, for very large `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSubsample {
    pub fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeConfig {
    /// Tube radius on the whitened scale.
    pub rho: f64,
    /// Applied to the tube variances.
    pub threshold: ThresholdSpec,
    /// Off unless set; simulation studies score every pair.
    pub subsample: Option<PairSubsample>,
}

impl TubeConfig {
    pub fn new(rho: f64, threshold: ThresholdSpec) -> Self {
        Self {
            rho,
            threshold,
            subsample: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.is_nan() || self.rho <= 0.0 {
            return Err(Error::InvalidArgument(format!("tube radius must be positive, got {}", self.rho)));
        }
        if let Some(s) = self.subsample {
            if !(s.fraction > 0.0 && s.fraction <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "pair subsample fraction must lie in (0, 1], got {}",
                    s.fraction
                )));
            }
        }
        self.threshold.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeStats {
    pub member_count: usize,
    pub mean_y: f64,
    /// Population (1/n_ij) variance of the responses in the tube.
    pub variance_y: f64,
}

/// Distance from `xk` to the line through `xi` and `xj`.
pub fn point_line_distance(xk: &[f64], xi: &[f64], xj: &[f64]) -> Result<f64> {
    if xk.len() != xi.len() || xj.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.len(),
            found: if xk.len() != xi.len() { xk.len() } else { xj.len() },
        });
    }
    let mut along = 0.0;
    let mut len2 = 0.0;
    let mut off2 = 0.0;
    for ((&k, &i), &j) in xk.iter().zip(xi).zip(xj) {
        let w = k - i;
        let u = j - i;
        along += w * u;
        len2 += u * u;
        off2 += w * w;
    }
    if len2.sqrt() <= 1e-12 {
        return Err(Error::DegeneratePair { i: 0, j: 1 });
    }
    Ok((off2 - along * along / len2).max(0.0).sqrt())
}

fn row(z: &DMatrix<f64>, k: usize) -> Vec<f64> {
    z.row(k).iter().copied().collect()
}

/// Indices of the observations in the tube of radius `rho` around the line
/// through rows `i` and `j`. Both endpoints are always members.
pub fn tube_members(z: &DMatrix<f64>, i: usize, j: usize, rho: f64) -> Result<Vec<usize>> {
    let n = z.nrows();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("bad pair ({i}, {j}) for n = {n}")));
    }
    let (zi, zj) = (row(z, i), row(z, j));
    let mut members = Vec::new();
    for k in 0..n {
        let inside = k == i
            || k == j
            || point_line_distance(&row(z, k), &zi, &zj).map_err(|_| Error::DegeneratePair { i, j })? <= rho;
        if inside {
            members.push(k);
        }
    }
    Ok(members)
}

/// Response mean and variance inside one tube.
pub fn tube_stats(z: &DMatrix<f64>, y: &DVector<f64>, i: usize, j: usize, cfg: &TubeConfig) -> Result<TubeStats> {
    cfg.validate()?;
    if y.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            expected: z.nrows(),
            found: y.len(),
        });
    }
    let members = tube_members(z, i, j, cfg.rho)?;
    let m = members.len() as f64;
    let mean_y = members.iter().map(|&k| y[k]).sum::<f64>() / m;
    let variance_y = members.iter().map(|&k| (y[k] - mean_y).powi(2)).sum::<f64>() / m;
    Ok(TubeStats {
        member_count: members.len(),
        mean_y,
        variance_y,
    })
}

fn subsample_keeps(s: &PairSubsample, i: usize, j: usize) -> bool {
    // splitmix64 of (seed, pair index): independent of evaluation order
    let mut x = s
        .seed
        .wrapping_add((pair_count(i) + j) as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    ((x >> 11) as f64 / (1u64 << 53) as f64) < s.fraction
}

/// Tube variance for every pair, in index-set order. Pairs with coincident
/// rows (and pairs dropped by subsampling) are NaN. Returns the scores and
/// the number of coincident pairs.
///
/// Distances come from the Gram matrix of `z`, so each (pair, point) costs O(1).
fn tube_variances(z: &DMatrix<f64>, y: &DVector<f64>, cfg: &TubeConfig) -> (Vec<f64>, usize) {
    let (n, p) = z.shape();
    let zt = z.transpose();
    let gram = z * &zt;
    // row-major copy for contiguous row access (the Gram matrix is symmetric)
    let g: Vec<f64> = gram.as_slice().to_vec();
    let diag: Vec<f64> = (0..n).map(|k| g[k * n + k]).collect();
    let rho2 = cfg.rho * cfg.rho;
    // Centering on a pair-independent value makes the variance a function of the
    // member set alone, so pairs with identical tubes tie exactly.
    let y_bar = y.mean();
    let yc: Vec<f64> = y.iter().map(|v| v - y_bar).collect();

    let rows: Vec<(Vec<f64>, usize)> = (1..n)
        .into_par_iter()
        .map(|i| {
            let gi = &g[i * n..(i + 1) * n];
            let mut out = Vec::with_capacity(i);
            let mut skipped = 0;
            for j in 0..i {
                if let Some(s) = &cfg.subsample {
                    if !subsample_keeps(s, i, j) {
                        out.push(f64::NAN);
                        continue;
                    }
                }
                let len2: f64 = (0..p).map(|a| (zt[(a, j)] - zt[(a, i)]).powi(2)).sum();
                if len2 <= DEGENERATE_SQ_LEN {
                    skipped += 1;
                    out.push(f64::NAN);
                    continue;
                }
                let gj = &g[j * n..(j + 1) * n];
                let gii = diag[i];
                let gij = gi[j];
                let inv_len2 = 1.0 / len2;
                let (mut count, mut s1, mut s2) = (0usize, 0.0_f64, 0.0_f64);
                for k in 0..n {
                    let off2 = diag[k] - 2.0 * gi[k] + gii;
                    let along = gj[k] - gi[k] - gij + gii;
                    let d2 = off2 - along * along * inv_len2;
                    if d2 <= rho2 || k == i || k == j {
                        let dy = yc[k];
                        count += 1;
                        s1 += dy;
                        s2 += dy * dy;
                    }
                }
                let c = count as f64;
                let mean = s1 / c;
                out.push((s2 / c - mean * mean).max(0.0));
            }
            (out, skipped)
        })
        .collect();

    let mut scores = Vec::with_capacity(pair_count(n));
    let mut skipped = 0;
    for (r, s) in rows {
        scores.extend(r);
        skipped += s;
    }
    (scores, skipped)
}

/// Selects pairs whose tube variance is small.
pub fn select_pairs_gcr(z: &DMatrix<f64>, y: &DVector<f64>, cfg: &TubeConfig) -> Result<PairSelection> {
    cfg.validate()?;
    let n = z.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two observations".into()));
    }
    let total = pair_count(n);
    let (scores, skipped) = tube_variances(z, y, cfg);
    let mut valid: Vec<f64> = scores.iter().copied().filter(|v| !v.is_nan()).collect();
    let effective_c = cutoff(cfg.threshold, &mut valid, total)?;
    drop(valid);

    let mut pairs = Vec::new();
    let mut idx = 0;
    for i in 1..n {
        for j in 0..i {
            // NaN never compares <=
            if scores[idx] <= effective_c {
                pairs.push((i, j));
            }
            idx += 1;
        }
    }
    finish_selection(pairs, effective_c, total, skipped)
}

struct GcrKernel {
    std: linalg::StandardizedData,
    kernel: DMatrix<f64>,
    selection: PairSelection,
}

fn gcr_kernel(d: &Dataset, cfg: &TubeConfig) -> Result<GcrKernel> {
    cfg.validate()?;
    let std = linalg::standardize(d)?;
    let selection = select_pairs_gcr(&std.z, d.response(), cfg)?;
    let kernel = h_matrix(&std.z, &selection)?;
    Ok(GcrKernel { std, kernel, selection })
}

/// Fits the central subspace by general contour regression. Tubes, variances
/// and difference vectors all live on the whitened scale.
pub fn gcr_fit(d: &Dataset, q: usize, cfg: &TubeConfig) -> Result<SubspaceEstimate> {
    check_q(q, d.p())?;
    let k = gcr_kernel(d, cfg)?;
    let p = d.p();
    let eig = sym_eigen(&k.kernel)?;
    let smallest: Vec<usize> = (p - q..p).collect();
    back_transform(&k.std, eig, &smallest, Method::Gcr)
}

/// Same as [`gcr_fit`] but also returns the pair selection (for diagnostics).
pub fn gcr_fit_with_selection(d: &Dataset, q: usize, cfg: &TubeConfig) -> Result<(SubspaceEstimate, PairSelection)> {
    check_q(q, d.p())?;
    let k = gcr_kernel(d, cfg)?;
    let p = d.p();
    let eig = sym_eigen(&k.kernel)?;
    let smallest: Vec<usize> = (p - q..p).collect();
    let est = back_transform(&k.std, eig, &smallest, Method::Gcr)?;
    Ok((est, k.selection))
}

/// `2I − Ĝ(c)`, where `Ĝ(c)` averages the selected whitened outer products
/// over the number of selected pairs.
pub fn gcr_g_matrix(d: &Dataset, cfg: &TubeConfig) -> Result<DMatrix<f64>> {
    if d.p() < 2 {
        return Err(Error::InvalidArgument("need p >= 2 for a contour space".into()));
    }
    let k = gcr_kernel(d, cfg)?;
    let p = d.p();
    Ok(DMatrix::identity(p, p) * 2.0 - k.kernel / k.selection.fraction)
}

const CAPTURE_CHUNK: usize = 8192;

/// Monte-Carlo probability that a third `N(0, I_p)` point lies within `rho`
/// of the line through two others. Deterministic in `seed` for any thread count.
pub fn tube_capture_probability(p: usize, rho: f64, samples: usize, seed: u64) -> Result<f64> {
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!("need at least 10000 samples, got {samples}")));
    }
    if p < 1 || rho.is_nan() || rho <= 0.0 {
        return Err(Error::InvalidArgument(format!("invalid p = {p} or rho = {rho}")));
    }
    let chunks = samples.div_ceil(CAPTURE_CHUNK);
    let rho2 = rho * rho;
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let m = CAPTURE_CHUNK.min(samples - c * CAPTURE_CHUNK);
            let mut buf = vec![0.0_f64; 3 * p];
            let mut hits = 0;
            for _ in 0..m {
                for v in buf.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let (x1, rest) = buf.split_at(p);
                let (x2, x3) = rest.split_at(p);
                let (mut along, mut len2, mut off2) = (0.0, 0.0, 0.0);
                for a in 0..p {
                    let u = x2[a] - x1[a];
                    let w = x3[a] - x1[a];
                    along += w * u;
                    len2 += u * u;
                    off2 += w * w;
                }
                if off2 - along * along / len2 <= rho2 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / samples as f64)
}
