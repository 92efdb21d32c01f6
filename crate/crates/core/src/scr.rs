//! Simple contour regression.
//!
//! Pairs of observations whose responses differ by little are taken as
//! empirical contour directions. The second-moment matrix of their predictor
//! differences is whitened, and the eigenvectors with the smallest eigenvalues
//! (mapped back to the predictor scale) span the estimated central subspace.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, back_transform, check_q, sym_eigen, Dataset, Method, SubspaceEstimate};

/// How the pair threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdSpec {
    /// Keep pairs whose score is at most `c`.
    FixedC(f64),
    /// Keep the `⌈r·C(n,2)⌉` lowest-scoring pairs, plus anything tied with the last.
    Proportion(f64),
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdSpec::FixedC(c) if c > 0.0 && c.is_finite() => Ok(()),
            ThresholdSpec::Proportion(r) if r > 0.0 && r <= 1.0 => Ok(()),
            other => Err(Error::InvalidArgument(format!("invalid threshold {other:?}"))),
        }
    }
}

/// Selected index pairs `(i, j)` with `i > j`, in the order of the index set
/// `{(i, j): i = 1..n, j = 0..i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSelection {
    pub pairs: Vec<(usize, usize)>,
    /// Cutoff actually applied.
    pub effective_c: f64,
    /// `pairs.len() / C(n,2)`.
    pub fraction: f64,
    /// Pairs that could not be scored (duplicate predictor rows under GCR).
    pub skipped: usize,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Cutoff for a threshold spec given the valid (non-NaN) scores. Reorders `scores`.
pub(crate) fn cutoff(spec: ThresholdSpec, scores: &mut [f64], total_pairs: usize) -> Result<f64> {
    spec.validate()?;
    match spec {
        ThresholdSpec::FixedC(c) => Ok(c),
        ThresholdSpec::Proportion(r) => {
            if scores.is_empty() {
                return Err(Error::EmptySelection);
            }
            let target = r * total_pairs as f64;
            // r is often given as k/C(n,2); guard against 240.00000000001 → 241.
            let k = (target - 1e-9 * target.max(1.0)).ceil().max(1.0) as usize;
            let k = k.min(scores.len());
            let (_, kth, _) = scores.select_nth_unstable_by(k - 1, f64::total_cmp);
            Ok(*kth)
        }
    }
}

pub(crate) fn finish_selection(
    pairs: Vec<(usize, usize)>,
    effective_c: f64,
    total_pairs: usize,
    skipped: usize,
) -> Result<PairSelection> {
    if pairs.is_empty() {
        return Err(Error::EmptySelection);
    }
    let fraction = pairs.len() as f64 / total_pairs as f64;
    Ok(PairSelection {
        pairs,
        effective_c,
        fraction,
        skipped,
    })
}

/// Selects pairs by absolute response difference `|y_i − y_j|`.
pub fn select_pairs_scr(y: &DVector<f64>, spec: ThresholdSpec) -> Result<PairSelection> {
    let n = y.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two observations".into()));
    }
    let total = pair_count(n);
    let effective_c = match spec {
        ThresholdSpec::FixedC(_) => cutoff(spec, &mut [], total)?,
        ThresholdSpec::Proportion(_) => {
            let mut diffs = Vec::with_capacity(total);
            for i in 1..n {
                for j in 0..i {
                    diffs.push((y[i] - y[j]).abs());
                }
            }
            cutoff(spec, &mut diffs, total)?
        }
    };
    let mut pairs = Vec::new();
    for i in 1..n {
        for j in 0..i {
            if (y[i] - y[j]).abs() <= effective_c {
                pairs.push((i, j));
            }
        }
    }
    finish_selection(pairs, effective_c, total, 0)
}

/// `C(n,2)⁻¹ Σ (x_j − x_i)(x_j − x_i)ᵀ` over the selected pairs.
///
/// Accumulation runs over the pairs in selection order; the divisor is the
/// full pair count, not the number selected.
pub fn h_matrix(x: &DMatrix<f64>, selection: &PairSelection) -> Result<DMatrix<f64>> {
    let (n, p) = x.shape();
    let mut acc = vec![0.0_f64; p * p];
    let mut diff = vec![0.0_f64; p];
    for &(i, j) in &selection.pairs {
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!("pair ({i}, {j}) out of range for n = {n}")));
        }
        for (a, d) in diff.iter_mut().enumerate() {
            *d = x[(i, a)] - x[(j, a)];
        }
        for a in 0..p {
            let row = &mut acc[a * p..(a + 1) * p];
            for (b, cell) in row.iter_mut().enumerate() {
                *cell += diff[a] * diff[b];
            }
        }
    }
    let total = pair_count(n) as f64;
    Ok(DMatrix::from_row_slice(p, p, &acc) / total)
}

/// Whitened kernel `Σ̂^{-1/2} Ĥ(c) Σ̂^{-1/2}` and the pieces needed downstream.
struct ScrKernel {
    std: linalg::StandardizedData,
    kernel: DMatrix<f64>,
    selection: PairSelection,
}

fn scr_kernel(d: &Dataset, spec: ThresholdSpec) -> Result<ScrKernel> {
    let std = linalg::standardize(d)?;
    let selection = select_pairs_scr(d.response(), spec)?;
    let h = h_matrix(d.predictors(), &selection)?;
    let kernel = linalg::symmetrize(&(&std.inv_sqrt_cov * h * &std.inv_sqrt_cov));
    Ok(ScrKernel {
        std,
        kernel,
        selection,
    })
}

/// Fits the central subspace by simple contour regression.
pub fn scr_fit(d: &Dataset, q: usize, spec: ThresholdSpec) -> Result<SubspaceEstimate> {
    check_q(q, d.p())?;
    let k = scr_kernel(d, spec)?;
    let p = d.p();
    let eig = sym_eigen(&k.kernel)?;
    let smallest: Vec<usize> = (p - q..p).collect();
    back_transform(&k.std, eig, &smallest, Method::Scr)
}

/// `2I − Σ̂^{-1/2} K̂(c) Σ̂^{-1/2}` with `K̂ = Ĥ / fraction`, the conditional
/// second moment of the selected differences. Contour directions map to
/// eigenvalues near zero, central-subspace directions to positive ones.
pub fn scr_test_matrix(d: &Dataset, spec: ThresholdSpec) -> Result<DMatrix<f64>> {
    if d.p() < 2 {
        return Err(Error::InvalidArgument("need p >= 2 for a contour space".into()));
    }
    let k = scr_kernel(d, spec)?;
    let p = d.p();
    Ok(DMatrix::identity(p, p) * 2.0 - k.kernel / k.selection.fraction)
}
