//! Dense symmetric linear algebra shared by every estimator: eigendecomposition,
//! whitening, orthogonal projections and subspace distances.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative guard on the covariance spectrum used by [`inv_sqrt`] and [`standardize`].
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Observed predictors (rows are observations) and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    predictors: DMatrix<f64>,
    response: DVector<f64>,
}

impl Dataset {
    pub fn new(predictors: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        let (n, p) = predictors.shape();
        if response.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: response.len(),
            });
        }
        if n < 2 || p < 1 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs n >= 2 and p >= 1, got n = {n}, p = {p}"
            )));
        }
        if predictors.iter().chain(response.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            predictors,
            response,
        })
    }

    /// Builds a dataset from row-major predictor values.
    pub fn from_rows(rows: &[Vec<f64>], response: &[f64]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: bad.len(),
            });
        }
        let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(x, DVector::from_column_slice(response))
    }

    pub fn predictors(&self) -> &DMatrix<f64> {
        &self.predictors
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn n(&self) -> usize {
        self.predictors.nrows()
    }

    pub fn p(&self) -> usize {
        self.predictors.ncols()
    }
}

/// Whitened predictors `z_i = Σ̂^{-1/2}(x_i − μ̂)` together with the moments used.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedData {
    pub z: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub inv_sqrt_cov: DMatrix<f64>,
}

/// Eigenvalues in descending order; column `i` of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Scr,
    Gcr,
    Ols,
    Sir,
    Save,
    Phd,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Scr,
        Method::Gcr,
        Method::Ols,
        Method::Sir,
        Method::Save,
        Method::Phd,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Scr => "SCR",
            Method::Gcr => "GCR",
            Method::Ols => "OLS",
            Method::Sir => "SIR",
            Method::Save => "SAVE",
            Method::Phd => "PHD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// An estimated central subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceEstimate {
    /// p×q, orthonormal columns, on the original predictor scale.
    pub basis: DMatrix<f64>,
    /// Full spectrum of the method's kernel matrix, descending.
    pub eigenvalues: DVector<f64>,
    pub method: Method,
    /// The selected kernel eigenvectors on the whitened scale (p×q). Projecting
    /// the whitened predictors on these gives the per-observation scores.
    pub z_directions: DMatrix<f64>,
}

impl SubspaceEstimate {
    pub fn q(&self) -> usize {
        self.basis.ncols()
    }

    pub fn p(&self) -> usize {
        self.basis.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Largest singular value.
    Spectral,
    #[default]
    Frobenius,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spectral" => Ok(Norm::Spectral),
            "frobenius" => Ok(Norm::Frobenius),
            other => Err(Error::InvalidArgument(format!("unknown norm '{other}'"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Spectral => "spectral",
            Norm::Frobenius => "frobenius",
        })
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        })
    }
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix, values sorted descending.
///
/// The input is symmetrized first. Each eigenvector is signed so that its first
/// entry with magnitude above 1e-12 is positive.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_square(m)?;
    check_finite(m)?;
    let p = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(p, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(lead) = col.iter().copied().find(|v| v.abs() > 1e-12) {
            if lead < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Symmetric inverse square root of a positive-definite matrix.
///
/// Fails with [`Error::SingularCovariance`] unless the smallest eigenvalue
/// exceeds `rel_tol` times the largest.
pub fn inv_sqrt(m: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m)?;
    let p = eig.values.len();
    let max = eig.values[0];
    let min = eig.values[p - 1];
    if !(max > 0.0 && min > rel_tol * max) {
        return Err(Error::SingularCovariance { min, max });
    }
    let scale = DMatrix::from_diagonal(&eig.values.map(|v| 1.0 / v.sqrt()));
    let r = &eig.vectors * scale * eig.vectors.transpose();
    Ok(symmetrize(&r))
}

/// Sample mean and covariance (divisor `n`) of the rows of `x`.
pub fn moments(x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.nrows() as f64;
    let mean = x.row_mean().transpose();
    let centered = center_rows(x, &mean);
    let cov = symmetrize(&(centered.transpose() * &centered / n));
    (mean, cov)
}

fn center_rows(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for (j, mut col) in c.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    c
}

/// Whitens the predictors of `d` with the 1/n sample covariance.
pub fn standardize(d: &Dataset) -> Result<StandardizedData> {
    let (mean, cov) = moments(d.predictors());
    let inv_sqrt_cov = inv_sqrt(&cov, DEFAULT_REL_TOL)?;
    let z = center_rows(d.predictors(), &mean) * &inv_sqrt_cov;
    Ok(StandardizedData {
        z,
        mean,
        cov,
        inv_sqrt_cov,
    })
}

fn is_orthonormal(b: &DMatrix<f64>, tol: f64) -> bool {
    let g = b.transpose() * b;
    let q = g.nrows();
    (&g - DMatrix::<f64>::identity(q, q)).amax() <= tol
}

/// Orthonormal basis for the column span of `m` (thin QR).
pub fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(m)?;
    let q = m.ncols();
    if q == 0 || q > m.nrows() {
        return Err(Error::InvalidArgument(format!(
            "cannot orthonormalize a {}x{} matrix",
            m.nrows(),
            q
        )));
    }
    let qr = m.clone().qr();
    if qr.r().diagonal().iter().any(|v| v.abs() < 1e-300) {
        return Err(Error::ZeroDirection);
    }
    Ok(qr.q().columns(0, q).into_owned())
}

/// Orthogonal projection onto the span of `basis`.
pub fn projection_matrix(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite(basis)?;
    let b = if is_orthonormal(basis, 1e-8) {
        basis.clone()
    } else {
        orthonormalize(basis)?
    };
    Ok(symmetrize(&(&b * b.transpose())))
}

/// `‖P₁ − P₂‖` in the chosen norm.
pub fn basis_distance(b1: &DMatrix<f64>, b2: &DMatrix<f64>, norm: Norm) -> Result<f64> {
    if b1.nrows() != b2.nrows() {
        return Err(Error::DimensionMismatch {
            expected: b1.nrows(),
            found: b2.nrows(),
        });
    }
    let diff = projection_matrix(b1)? - projection_matrix(b2)?;
    Ok(match norm {
        Norm::Frobenius => diff.norm(),
        Norm::Spectral => {
            // P₁ − P₂ is symmetric: singular values are |eigenvalues|.
            let eig = sym_eigen(&diff)?;
            eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
        }
    })
}

pub fn subspace_distance(s1: &SubspaceEstimate, s2: &SubspaceEstimate, norm: Norm) -> Result<f64> {
    basis_distance(&s1.basis, &s2.basis, norm)
}

/// Columns of the identity selected by `indices` (0-based), e.g. span{e1, e2}.
pub fn coordinate_basis(p: usize, indices: &[usize]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(p, indices.len());
    for (col, &i) in indices.iter().enumerate() {
        b[(i, col)] = 1.0;
    }
    b
}

/// Shared tail of every estimator: take kernel eigenvectors at `columns`,
/// map them back through `Σ̂^{-1/2}` and re-orthonormalize.
pub(crate) fn back_transform(
    std: &StandardizedData,
    eig: EigenDecomposition,
    columns: &[usize],
    method: Method,
) -> Result<SubspaceEstimate> {
    let p = eig.vectors.nrows();
    let mut gamma = DMatrix::zeros(p, columns.len());
    for (dst, &src) in columns.iter().enumerate() {
        gamma.set_column(dst, &eig.vectors.column(src));
    }
    let basis = orthonormalize(&(&std.inv_sqrt_cov * &gamma))?;
    Ok(SubspaceEstimate {
        basis,
        eigenvalues: eig.values,
        method,
        z_directions: gamma,
    })
}

pub(crate) fn check_q(q: usize, p: usize) -> Result<()> {
    if q >= 1 && q < p {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "structural dimension q = {q} must satisfy 1 <= q < p = {p}"
        )))
    }
}
