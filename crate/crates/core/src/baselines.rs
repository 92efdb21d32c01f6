//! Reference estimators: OLS, SIR, SAVE and (response-based) PHD.
//!
//! All work on the whitened predictors and map their kernel eigenvectors back
//! through `Σ̂^{-1/2}`, like the contour methods.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{back_transform, check_q, standardize, sym_eigen, symmetrize, Dataset, Method, SubspaceEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SliceScheme {
    /// Consecutive response order statistics, slice sizes differing by at most one.
    #[default]
    EqualCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub n_slices: usize,
    pub scheme: SliceScheme,
}

impl SliceSpec {
    pub fn equal_count(n_slices: usize) -> Self {
        Self {
            n_slices,
            scheme: SliceScheme::EqualCount,
        }
    }
}

/// Partitions observation indices into slices by response value. Ties keep
/// their original order (stable sort).
pub fn slices(y: &DVector<f64>, spec: SliceSpec) -> Result<Vec<Vec<usize>>> {
    let n = y.len();
    if spec.n_slices < 2 {
        return Err(Error::TooFewSlices {
            needed: 2,
            got: spec.n_slices,
        });
    }
    if n < spec.n_slices {
        return Err(Error::InvalidArgument(format!(
            "{} slices requested for {n} observations",
            spec.n_slices
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let h = spec.n_slices;
    Ok((0..h)
        .map(|s| order[s * n / h..(s + 1) * n / h].to_vec())
        .collect())
}

fn check_sliced(q: usize, p: usize, spec: SliceSpec) -> Result<()> {
    check_q(q, p)?;
    if q >= spec.n_slices {
        return Err(Error::TooFewSlices {
            needed: q + 1,
            got: spec.n_slices,
        });
    }
    Ok(())
}

fn slice_mean(z: &DMatrix<f64>, idx: &[usize]) -> DVector<f64> {
    let mut m = DVector::zeros(z.ncols());
    for &k in idx {
        m += z.row(k).transpose();
    }
    m / idx.len() as f64
}

fn top_columns(values: &DVector<f64>, q: usize, by_magnitude: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if by_magnitude {
        idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    }
    idx.truncate(q);
    idx
}

/// Direction of `Σ̂⁻¹ cov̂(X, Y)`.
pub fn ols_direction(d: &Dataset) -> Result<SubspaceEstimate> {
    let std = standardize(d)?;
    let y = d.response();
    let ybar = y.mean();
    let n = d.n() as f64;
    let cov_zy = std.z.transpose() * y.map(|v| v - ybar) / n;
    if cov_zy.amax() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    // The kernel cov(Z,Y)cov(Z,Y)ᵀ is rank one; its leading eigenvector is cov(Z,Y) itself.
    let eig = sym_eigen(&(&cov_zy * cov_zy.transpose()))?;
    let gamma = cov_zy.normalize();
    let beta = &std.inv_sqrt_cov * &gamma;
    Ok(SubspaceEstimate {
        basis: DMatrix::from_column_slice(d.p(), 1, beta.normalize().as_slice()),
        eigenvalues: eig.values,
        method: Method::Ols,
        z_directions: DMatrix::from_column_slice(d.p(), 1, gamma.as_slice()),
    })
}

/// Sliced inverse regression: between-slice covariance of whitened slice means.
pub fn sir_fit(d: &Dataset, q: usize, spec: SliceSpec) -> Result<SubspaceEstimate> {
    check_sliced(q, d.p(), spec)?;
    let std = standardize(d)?;
    let n = d.n() as f64;
    let p = d.p();
    let mut kernel = DMatrix::zeros(p, p);
    for idx in slices(d.response(), spec)? {
        let m = slice_mean(&std.z, &idx);
        kernel += &m * m.transpose() * (idx.len() as f64 / n);
    }
    let eig = sym_eigen(&symmetrize(&kernel))?;
    let cols = top_columns(&eig.values, q, false);
    back_transform(&std, eig, &cols, Method::Sir)
}

/// Sliced average variance estimation: mean over slices of `(I − var̂(Z | slice))²`.
pub fn save_fit(d: &Dataset, q: usize, spec: SliceSpec) -> Result<SubspaceEstimate> {
    check_sliced(q, d.p(), spec)?;
    let std = standardize(d)?;
    let n = d.n() as f64;
    let p = d.p();
    let eye = DMatrix::<f64>::identity(p, p);
    let mut kernel = DMatrix::zeros(p, p);
    for idx in slices(d.response(), spec)? {
        let m = slice_mean(&std.z, &idx);
        let mut var = DMatrix::zeros(p, p);
        for &k in &idx {
            let c = std.z.row(k).transpose() - &m;
            var += &c * c.transpose();
        }
        var /= idx.len() as f64;
        let a = &eye - var;
        kernel += &a * &a * (idx.len() as f64 / n);
    }
    let eig = sym_eigen(&symmetrize(&kernel))?;
    let cols = top_columns(&eig.values, q, false);
    back_transform(&std, eig, &cols, Method::Save)
}

/// Response-based principal Hessian directions: `Ê[(Y − Ȳ) Z Zᵀ]`, ranked by
/// absolute eigenvalue.
pub fn phd_fit(d: &Dataset, q: usize) -> Result<SubspaceEstimate> {
    check_q(q, d.p())?;
    let std = standardize(d)?;
    let y = d.response();
    let ybar = y.mean();
    let p = d.p();
    let mut kernel = DMatrix::zeros(p, p);
    for k in 0..d.n() {
        let z = std.z.row(k).transpose();
        kernel += &z * z.transpose() * (y[k] - ybar);
    }
    kernel /= d.n() as f64;
    let eig = sym_eigen(&symmetrize(&kernel))?;
    let cols = top_columns(&eig.values, q, true);
    back_transform(&std, eig, &cols, Method::Phd)
}
