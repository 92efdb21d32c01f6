//! Seeded generators for the simulation designs, plus Monte-Carlo oracles for
//! the population kernels of the two-dimensional examples.
//!
//! All randomness comes from ChaCha8. A dataset seed drives two independent
//! streams of the same key: stream 0 for predictors, stream 1 for noise (and
//! for the binary response of `Ex2_3`). Sweeping the noise level with a fixed
//! seed therefore reuses the same predictor draws.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{coordinate_basis, Dataset};

const PREDICTOR_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelId {
    /// `Y = X₁² + X₂ + σε`, `X ~ N(0, I₄)`.
    #[serde(rename = "Ex6_1")]
    Ex6_1,
    /// `Y = X₁/(0.5 + (X₂ + 1.5)²) + (1 + X₂)² + σε`, `X ~ N(0, I₄)`.
    #[serde(rename = "Ex6_2")]
    Ex6_2,
    /// `Y = sin²(πX₂ + 1) + σε`, `X` uniform on the unit 4-cube minus the corner `[0, 0.7]⁴`.
    #[serde(rename = "Ex6_3")]
    Ex6_3,
    /// `Y = cos(3X₁/2) + X₂³/2 + σε`, `X ~ N(0, I₁₀)`.
    #[serde(rename = "Ex6_4_cos_cube")]
    Ex6_4CosCube,
    /// `Y = X₁² + X₂ + σε`, `X ~ N(0, I₁₀)`.
    #[serde(rename = "Ex6_4_quad_p10")]
    Ex6_4QuadP10,
    /// `Y = ½(X₁ − a)² ε`, `X ~ N(0, I₁₀)`.
    #[serde(rename = "Ex6_5")]
    Ex6_5,
    /// `Y = X₂² + σε`, `X ~ N(0, I₂)`.
    #[serde(rename = "Ex2_1")]
    Ex2_1,
    /// `Y = (X₂ − 1)³ + σε`, `X ~ N(0, I₂)`.
    #[serde(rename = "Ex2_2")]
    Ex2_2,
    /// `Y ~ Bernoulli(½)`, `X | Y = y ~ N(μ_y, I₂)`, `μ₀ = (0, −1)`, `μ₁ = (0, 1)`.
    #[serde(rename = "Ex2_3")]
    Ex2_3,
}

impl ModelId {
    pub const ALL: [ModelId; 9] = [
        ModelId::Ex6_1,
        ModelId::Ex6_2,
        ModelId::Ex6_3,
        ModelId::Ex6_4CosCube,
        ModelId::Ex6_4QuadP10,
        ModelId::Ex6_5,
        ModelId::Ex2_1,
        ModelId::Ex2_2,
        ModelId::Ex2_3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Ex6_1 => "Ex6_1",
            ModelId::Ex6_2 => "Ex6_2",
            ModelId::Ex6_3 => "Ex6_3",
            ModelId::Ex6_4CosCube => "Ex6_4_cos_cube",
            ModelId::Ex6_4QuadP10 => "Ex6_4_quad_p10",
            ModelId::Ex6_5 => "Ex6_5",
            ModelId::Ex2_1 => "Ex2_1",
            ModelId::Ex2_2 => "Ex2_2",
            ModelId::Ex2_3 => "Ex2_3",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ModelId::Ex6_1 | ModelId::Ex6_2 | ModelId::Ex6_3 => 4,
            ModelId::Ex6_4CosCube | ModelId::Ex6_4QuadP10 | ModelId::Ex6_5 => 10,
            ModelId::Ex2_1 | ModelId::Ex2_2 | ModelId::Ex2_3 => 2,
        }
    }

    /// 0-based coordinates spanning the true central subspace.
    pub fn true_coordinates(self) -> &'static [usize] {
        match self {
            ModelId::Ex6_1 | ModelId::Ex6_2 | ModelId::Ex6_4CosCube | ModelId::Ex6_4QuadP10 => &[0, 1],
            ModelId::Ex6_5 => &[0],
            ModelId::Ex6_3 | ModelId::Ex2_1 | ModelId::Ex2_2 | ModelId::Ex2_3 => &[1],
        }
    }

    pub fn structural_dim(self) -> usize {
        self.true_coordinates().len()
    }

    /// Whether the grid parameter is the location `a` of `Ex6_5` rather than a noise level.
    pub fn grid_is_location(self) -> bool {
        self == ModelId::Ex6_5
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('.', "_");
        ModelId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(&key))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: ModelId,
    /// Noise level σ, or the location `a` for `Ex6_5`. Unused by `Ex2_3`.
    pub sigma_or_a: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    /// Orthonormal basis of the true central subspace, raw predictor scale.
    pub true_basis: DMatrix<f64>,
    pub q: usize,
}

/// splitmix64 finalizer over `(master, index)`; used to derive per-replicate seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut x = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = normal(rng);
        }
    }
    x
}

fn cornerless_cube_rows(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, 4);
    let mut draw = [0.0_f64; 4];
    for i in 0..n {
        loop {
            for v in draw.iter_mut() {
                *v = rng.random::<f64>();
            }
            if draw.iter().any(|&v| v > 0.7) {
                break;
            }
        }
        for (j, v) in draw.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    x
}

/// Noise-free part of the regression function, if the model is additive.
fn mean_function(id: ModelId, x: &[f64]) -> f64 {
    match id {
        ModelId::Ex6_1 | ModelId::Ex6_4QuadP10 => x[0] * x[0] + x[1],
        ModelId::Ex6_2 => x[0] / (0.5 + (x[1] + 1.5).powi(2)) + (1.0 + x[1]).powi(2),
        ModelId::Ex6_3 => (PI * x[1] + 1.0).sin().powi(2),
        ModelId::Ex6_4CosCube => (1.5 * x[0]).cos() + x[1].powi(3) / 2.0,
        ModelId::Ex2_1 => x[1] * x[1],
        ModelId::Ex2_2 => (x[1] - 1.0).powi(3),
        ModelId::Ex6_5 | ModelId::Ex2_3 => 0.0,
    }
}

/// Draws one dataset. Deterministic in `spec`.
pub fn generate(spec: &ModelSpec) -> Result<LabeledDataset> {
    let id = spec.id;
    if !spec.sigma_or_a.is_finite() || spec.sigma_or_a < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise level / location must be finite and >= 0, got {}",
            spec.sigma_or_a
        )));
    }
    if spec.n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {}", spec.n)));
    }
    let n = spec.n;
    let p = id.dim();
    let mut xs = stream(spec.seed, PREDICTOR_STREAM);
    let mut es = stream(spec.seed, NOISE_STREAM);

    let (x, y) = match id {
        ModelId::Ex2_3 => {
            let labels: Vec<bool> = (0..n).map(|_| es.random_bool(0.5)).collect();
            let mut x = gaussian_rows(&mut xs, n, 2);
            for (i, &one) in labels.iter().enumerate() {
                x[(i, 1)] += if one { 1.0 } else { -1.0 };
            }
            let y = DVector::from_iterator(n, labels.iter().map(|&b| if b { 1.0 } else { 0.0 }));
            (x, y)
        }
        _ => {
            let x = if id == ModelId::Ex6_3 {
                cornerless_cube_rows(&mut xs, n)
            } else {
                gaussian_rows(&mut xs, n, p)
            };
            let y = DVector::from_iterator(
                n,
                (0..n).map(|i| {
                    let row: Vec<f64> = x.row(i).iter().copied().collect();
                    let eps = normal(&mut es);
                    if id == ModelId::Ex6_5 {
                        0.5 * (row[0] - spec.sigma_or_a).powi(2) * eps
                    } else {
                        mean_function(id, &row) + spec.sigma_or_a * eps
                    }
                }),
            );
            (x, y)
        }
    };

    Ok(LabeledDataset {
        data: Dataset::new(x, y)?,
        true_basis: coordinate_basis(p, id.true_coordinates()),
        q: id.structural_dim(),
    })
}

const ORACLE_CHUNK: usize = 16_384;
const MIN_ACCEPTED: f64 = 1000.0;

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(|m + s·N(0,1)| ≤ c)`.
fn band_probability(m: f64, s: f64, c: f64) -> f64 {
    if s == 0.0 {
        return if m.abs() <= c { 1.0 } else { 0.0 };
    }
    (std_normal_cdf((c - m) / s) - std_normal_cdf((-c - m) / s)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleModel {
    Ex2_1,
    Ex2_2,
}

/// Monte-Carlo estimates of `λ₁ = E[(X̃₁ − X₁)² | |Ỹ − Y| ≤ c]` and
/// `λ₂ = E[(X̃₂ − X₂)² | |Ỹ − Y| ≤ c]`.
///
/// Predictor pairs are simulated; the Gaussian noise is integrated out exactly,
/// so each pair contributes with weight `P(|Ỹ − Y| ≤ c | X, X̃)`.
pub fn oracle_lambda(model: OracleModel, c: f64, sigma: f64, pairs: usize, seed: u64) -> Result<(f64, f64)> {
    if pairs < 100_000 {
        return Err(Error::InvalidArgument(format!("need at least 100000 pairs, got {pairs}")));
    }
    if c.is_nan() || c < 0.0 || sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid c = {c} or sigma = {sigma}")));
    }
    let id = match model {
        OracleModel::Ex2_1 => ModelId::Ex2_1,
        OracleModel::Ex2_2 => ModelId::Ex2_2,
    };
    let noise_sd = sigma * std::f64::consts::SQRT_2;
    let chunks = pairs.div_ceil(ORACLE_CHUNK);
    let partial: Vec<[f64; 3]> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let m = ORACLE_CHUNK.min(pairs - k * ORACLE_CHUNK);
            let mut acc = [0.0_f64; 3];
            for _ in 0..m {
                let a = [normal(&mut rng), normal(&mut rng)];
                let b = [normal(&mut rng), normal(&mut rng)];
                let gap = mean_function(id, &b) - mean_function(id, &a);
                let w = band_probability(gap, noise_sd, c);
                acc[0] += w;
                acc[1] += w * (b[0] - a[0]).powi(2);
                acc[2] += w * (b[1] - a[1]).powi(2);
            }
            acc
        })
        .collect();
    let total = partial.iter().fold([0.0; 3], |s, a| [s[0] + a[0], s[1] + a[1], s[2] + a[2]]);
    if total[0] < MIN_ACCEPTED {
        return Err(Error::DegenerateConditioning {
            accepted: total[0] as usize,
        });
    }
    Ok((total[1] / total[0], total[2] / total[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelScale {
    Raw,
    /// `Z = Σ^{-1/2} X` with the population `Σ = diag(1, 2)`.
    Standardized,
}

/// Monte-Carlo estimate of `E[(X̃ − X)(X̃ − X)ᵀ | |Ỹ − Y| ≤ c]` for the binary
/// response design, on the raw or standardized predictor scale.
pub fn oracle_binary_k(c: f64, pairs: usize, seed: u64, scale: KernelScale) -> Result<Matrix2<f64>> {
    if pairs < 100_000 {
        return Err(Error::InvalidArgument(format!("need at least 100000 pairs, got {pairs}")));
    }
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid c = {c}")));
    }
    let s2 = match scale {
        KernelScale::Raw => 1.0,
        KernelScale::Standardized => 1.0 / 2.0_f64.sqrt(),
    };
    let chunks = pairs.div_ceil(ORACLE_CHUNK);
    let partial: Vec<(usize, Matrix2<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let m = ORACLE_CHUNK.min(pairs - k * ORACLE_CHUNK);
            let mut acc = Matrix2::zeros();
            let mut accepted = 0;
            for _ in 0..m {
                let y0 = rng.random_bool(0.5);
                let y1 = rng.random_bool(0.5);
                let shift = |b: bool| if b { 1.0 } else { -1.0 };
                let x0 = [normal(&mut rng), normal(&mut rng) + shift(y0)];
                let x1 = [normal(&mut rng), normal(&mut rng) + shift(y1)];
                let dy = (y1 as u8 as f64 - y0 as u8 as f64).abs();
                if dy <= c {
                    let d = nalgebra::Vector2::new(x1[0] - x0[0], (x1[1] - x0[1]) * s2);
                    acc += d * d.transpose();
                    accepted += 1;
                }
            }
            (accepted, acc)
        })
        .collect();
    let (accepted, sum) = partial
        .into_iter()
        .fold((0, Matrix2::zeros()), |(n, s), (m, a)| (n + m, s + a));
    if (accepted as f64) < MIN_ACCEPTED {
        return Err(Error::DegenerateConditioning { accepted });
    }
    Ok(sum / accepted as f64)
}
