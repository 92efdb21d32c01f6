//! Independent reference implementations and randomized invariant checks
//! shared by the integration tests and the acceptance suite.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use contour::baselines::{ols_direction, phd_fit, save_fit, sir_fit, slices, SliceSpec};
use contour::gcr::{gcr_fit, point_line_distance, tube_members, tube_stats, TubeConfig};
use contour::linalg::{
    basis_distance, inv_sqrt, projection_matrix, standardize, sym_eigen, Dataset, Norm, DEFAULT_REL_TOL,
};
use contour::scr::{h_matrix, scr_fit, select_pairs_scr, ThresholdSpec};
use contour::simgen::{generate, ModelId, ModelSpec};

pub type Check = std::result::Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| normal(rng))
}

/// Random dataset with a nonlinear two-index response and a little noise.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let x = gaussian_matrix(rng, n, p);
    let y = DVector::from_fn(n, |i, _| {
        x[(i, 0)].powi(2) + x[(i, 1 % p)] + 0.3 * normal(rng)
    });
    Dataset::new(x, y).expect("random data is valid")
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, k, k).qr().q()
}

pub fn random_invertible(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    loop {
        let a = gaussian_matrix(rng, p, p);
        let s = a.clone().svd(false, false).singular_values;
        if s.min() > 0.2 * s.max() {
            return a;
        }
    }
}

pub fn random_basis(rng: &mut ChaCha8Rng, p: usize, q: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, p, q).qr().q()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Brute-force reference pipeline
// ---------------------------------------------------------------------------

/// Naive `Σ (x_j − x_i)(x_j − x_i)ᵀ / C(n,2)` over the index set, entry by entry,
/// including a pair when `selected(i, j)` holds.
pub fn naive_h(x: &DMatrix<f64>, selected: impl Fn(usize, usize) -> bool) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let mut h = DMatrix::<f64>::zeros(p, p);
    for i in 1..n {
        for j in 0..i {
            if !selected(i, j) {
                continue;
            }
            for a in 0..p {
                for b in 0..p {
                    h[(a, b)] += (x[(j, a)] - x[(i, a)]) * (x[(j, b)] - x[(i, b)]);
                }
            }
        }
    }
    h / ((n * (n - 1) / 2) as f64)
}

struct RefStandardized {
    z: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

fn ref_standardize(x: &DMatrix<f64>) -> RefStandardized {
    let (n, p) = x.shape();
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            mean[a] += x[(i, a)] / n as f64;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for i in 0..n {
        for a in 0..p {
            for b in 0..p {
                cov[(a, b)] += (x[(i, a)] - mean[a]) * (x[(i, b)] - mean[b]) / n as f64;
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    let inv_sqrt = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    let mut centered = x.clone();
    for i in 0..n {
        for a in 0..p {
            centered[(i, a)] -= mean[a];
        }
    }
    RefStandardized {
        z: centered * &inv_sqrt,
        inv_sqrt,
    }
}

/// The `k`-th smallest score (1-based) among all of them.
fn kth_smallest(scores: &[f64], k: usize) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    s[k - 1]
}

fn proportion_count(r: f64, total: usize) -> usize {
    ((r * total as f64) - 1e-9 * (r * total as f64).max(1.0)).ceil().max(1.0) as usize
}

fn smallest_eigvecs_back_transformed(kernel: DMatrix<f64>, inv_sqrt: &DMatrix<f64>, q: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(kernel);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let gamma = DMatrix::from_columns(&order[..q].iter().map(|&k| eig.eigenvectors.column(k)).collect::<Vec<_>>());
    (inv_sqrt * gamma).qr().q()
}

/// From-scratch simple contour regression with a proportion threshold.
pub fn brute_scr(x: &DMatrix<f64>, y: &DVector<f64>, q: usize, r: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let total = n * (n - 1) / 2;
    let mut gaps = Vec::new();
    for i in 1..n {
        for j in 0..i {
            gaps.push((y[i] - y[j]).abs());
        }
    }
    let c = kth_smallest(&gaps, proportion_count(r, total));
    let h = naive_h(x, |i, j| (y[i] - y[j]).abs() <= c);
    let s = ref_standardize(x);
    let kernel = &s.inv_sqrt * h * &s.inv_sqrt;
    smallest_eigvecs_back_transformed(kernel, &s.inv_sqrt, q)
}

/// Distance from `zk` to the line through `zi` and `zj` by explicit projection.
pub fn ref_line_distance(zk: &[f64], zi: &[f64], zj: &[f64]) -> f64 {
    let u: Vec<f64> = zj.iter().zip(zi).map(|(a, b)| a - b).collect();
    let uu: f64 = u.iter().map(|v| v * v).sum();
    let t: f64 = zk.iter().zip(zi).zip(&u).map(|((k, i), u)| (k - i) * u).sum::<f64>() / uu;
    zk.iter()
        .zip(zi)
        .zip(&u)
        .map(|((k, i), u)| (k - i - t * u).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Tube members and two-pass population variance of `y` over them.
pub fn ref_tube(z: &DMatrix<f64>, y: &DVector<f64>, i: usize, j: usize, rho: f64) -> (Vec<usize>, f64) {
    let (zi, zj) = (row(z, i), row(z, j));
    let members: Vec<usize> = (0..z.nrows())
        .filter(|&k| k == i || k == j || ref_line_distance(&row(z, k), &zi, &zj) <= rho)
        .collect();
    let m = members.len() as f64;
    let mean = members.iter().map(|&k| y[k]).sum::<f64>() / m;
    let var = members.iter().map(|&k| (y[k] - mean).powi(2)).sum::<f64>() / m;
    (members, var)
}

/// Pairs `(i, j)`, `i > j`, whose tube variance is among the smallest `r` share.
pub fn brute_gcr_pairs(z: &DMatrix<f64>, y: &DVector<f64>, rho: f64, r: f64) -> Vec<(usize, usize)> {
    let n = z.nrows();
    let total = n * (n - 1) / 2;
    let mut scored = Vec::new();
    for i in 1..n {
        for j in 0..i {
            scored.push(((i, j), ref_tube(z, y, i, j, rho).1));
        }
    }
    let vars: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let c = kth_smallest(&vars, proportion_count(r, total));
    scored.into_iter().filter(|s| s.1 <= c).map(|s| s.0).collect()
}

/// From-scratch general contour regression with a proportion threshold.
pub fn brute_gcr(x: &DMatrix<f64>, y: &DVector<f64>, q: usize, rho: f64, r: f64) -> DMatrix<f64> {
    let s = ref_standardize(x);
    let pairs = brute_gcr_pairs(&s.z, y, rho, r);
    let f = naive_h(&s.z, |i, j| pairs.contains(&(i, j)));
    smallest_eigvecs_back_transformed(f, &s.inv_sqrt, q)
}

/// Largest principal-angle sine between two subspaces, via the SVD of `B₁ᵀB₂`.
pub fn principal_sine(b1: &DMatrix<f64>, b2: &DMatrix<f64>) -> f64 {
    let q1 = b1.clone().qr().q();
    let q2 = b2.clone().qr().q();
    let cosines = (q1.transpose() * q2).svd(false, false).singular_values;
    let min_cos = cosines.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    (1.0 - min_cos * min_cos).max(0.0).sqrt()
}

/// Frobenius distance between the projections, computed directly.
pub fn projection_gap(b1: &DMatrix<f64>, b2: &DMatrix<f64>) -> f64 {
    let q1 = b1.clone().qr().q();
    let q2 = b2.clone().qr().q();
    (&q1 * q1.transpose() - &q2 * q2.transpose()).norm()
}

// ---------------------------------------------------------------------------
// Oracle-equivalence checks
// ---------------------------------------------------------------------------

pub fn h_matrix_matches_naive_bitwise(seeds: u64) -> Check {
    for seed in 0..seeds {
        let mut g = rng(0xA11CE + seed);
        let n = 2 + (seed as usize % 11);
        let p = 1 + (seed as usize % 5);
        let d = random_dataset(&mut g, n, p);
        let r = [0.1, 0.3, 0.6, 1.0][seed as usize % 4];
        let sel = select_pairs_scr(d.response(), ThresholdSpec::Proportion(r)).map_err(|e| e.to_string())?;
        let fast = h_matrix(d.predictors(), &sel).map_err(|e| e.to_string())?;
        let naive = naive_h(d.predictors(), |i, j| sel.pairs.contains(&(i, j)));
        if fast.as_slice().iter().zip(naive.as_slice()).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("seed {seed}: h_matrix differs from naive loop\n{fast}\n{naive}"));
        }
    }
    Ok(())
}

/// Returns the worst distance seen.
pub fn scr_matches_brute_force(seeds: u64) -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let mut g = rng(0x5C0 + seed);
        let p = 2 + (seed as usize % 3);
        let n = (p + 3).max(6) + (seed as usize % (13 - (p + 3).max(6)));
        let q = 1 + (seed as usize % (p - 1));
        let r = [0.2, 0.35, 0.5][seed as usize % 3];
        let d = random_dataset(&mut g, n, p);
        let fit = scr_fit(&d, q, ThresholdSpec::Proportion(r)).map_err(|e| format!("seed {seed}: {e}"))?;
        let brute = brute_scr(d.predictors(), d.response(), q, r);
        let dist = basis_distance(&fit.basis, &brute, Norm::Frobenius).map_err(|e| e.to_string())?;
        worst = worst.max(dist);
        if dist > 1e-8 {
            return Err(format!("seed {seed} (n={n}, p={p}, q={q}): distance {dist:e}"));
        }
    }
    Ok(worst)
}

pub fn gcr_matches_brute_force(seeds: u64) -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let mut g = rng(0x6C0 + seed);
        let p = 2 + (seed as usize % 3);
        let n = (p + 3).max(6) + (seed as usize % (13 - (p + 3).max(6)));
        let q = 1 + (seed as usize % (p - 1));
        let r = [0.2, 0.35, 0.5][seed as usize % 3];
        let rho = [0.5, 1.0, 1.5][(seed as usize / 3) % 3];
        let d = random_dataset(&mut g, n, p);
        let cfg = TubeConfig::new(rho, ThresholdSpec::Proportion(r));
        let fit = gcr_fit(&d, q, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        let brute = brute_gcr(d.predictors(), d.response(), q, rho, r);
        let dist = basis_distance(&fit.basis, &brute, Norm::Frobenius).map_err(|e| e.to_string())?;
        worst = worst.max(dist);
        if dist > 1e-8 {
            return Err(format!("seed {seed} (n={n}, p={p}, q={q}, rho={rho}): distance {dist:e}"));
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Randomized invariants
// ---------------------------------------------------------------------------

pub const CASES: u64 = 200;

pub fn eigen_of_psd_is_nonnegative(cases: u64) -> Check {
    let mut g = rng(101);
    for case in 0..cases {
        let p = 1 + case as usize % 8;
        let a = gaussian_matrix(&mut g, p, 1 + case as usize % 4);
        let m = &a * a.transpose();
        let e = sym_eigen(&m).map_err(|e| e.to_string())?;
        check(e.values.iter().all(|&v| v >= -1e-9), || format!("case {case}: {}", e.values))?;
    }
    Ok(())
}

pub fn eigen_decomposition_contract(cases: u64) -> Check {
    let mut g = rng(102);
    for case in 0..cases {
        let p = 1 + case as usize % 7;
        let a = gaussian_matrix(&mut g, p, p);
        let m = (&a + a.transpose()) * 0.5;
        let e = sym_eigen(&m).map_err(|e| e.to_string())?;
        let v = &e.vectors;
        check((v.transpose() * v - DMatrix::<f64>::identity(p, p)).amax() < 1e-8, || format!("case {case}: not orthonormal"))?;
        let recon = v * DMatrix::from_diagonal(&e.values) * v.transpose();
        check((recon - &m).amax() < 1e-8, || format!("case {case}: reconstruction"))?;
        check(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]), || format!("case {case}: not descending"))?;
        let scale = m.norm().max(1.0);
        for k in 0..p {
            let col = v.column(k);
            check((&m * col - col * e.values[k]).amax() < 1e-7 * scale, || format!("case {case}: Mv != λv"))?;
            let first = col.iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
            check(first > 0.0, || format!("case {case}: sign convention"))?;
        }
    }
    Ok(())
}

pub fn inv_sqrt_whitens(cases: u64) -> Check {
    let mut g = rng(103);
    for case in 0..cases {
        let p = 1 + case as usize % 6;
        let a = random_invertible(&mut g, p);
        let m = &a * a.transpose();
        let r = inv_sqrt(&m, DEFAULT_REL_TOL).map_err(|e| e.to_string())?;
        check((&r - r.transpose()).amax() < 1e-12, || format!("case {case}: not symmetric"))?;
        check((&r * &m * &r - DMatrix::<f64>::identity(p, p)).amax() < 1e-8, || format!("case {case}: RMR != I"))?;
    }
    Ok(())
}

fn whitened_moments_ok(z: &DMatrix<f64>) -> bool {
    let (n, p) = z.shape();
    let means = z.row_sum() / n as f64;
    let cov = z.transpose() * z / n as f64;
    means.amax() < 1e-10 && (cov - DMatrix::<f64>::identity(p, p)).amax() < 1e-8
}

pub fn standardize_moments_and_affine_equivariance(cases: u64) -> Check {
    let mut g = rng(104);
    for case in 0..cases {
        let p = 1 + case as usize % 5;
        let n = p + 2 + case as usize % 40;
        let d = random_dataset(&mut g, n, p);
        let s = standardize(&d).map_err(|e| e.to_string())?;
        check(whitened_moments_ok(&s.z), || format!("case {case}: moments"))?;
        check(
            (&s.inv_sqrt_cov * &s.cov * &s.inv_sqrt_cov - DMatrix::<f64>::identity(p, p)).amax() < 1e-8,
            || format!("case {case}: inv_sqrt_cov"),
        )?;
        let a = random_invertible(&mut g, p);
        let b = DVector::from_fn(p, |_, _| 3.0 * normal(&mut g));
        let mut ax = d.predictors() * a.transpose();
        for mut r in ax.row_iter_mut() {
            r += b.transpose();
        }
        let moved = Dataset::new(ax, d.response().clone()).map_err(|e| e.to_string())?;
        let s2 = standardize(&moved).map_err(|e| e.to_string())?;
        check(whitened_moments_ok(&s2.z), || format!("case {case}: moments after affine map"))?;
    }
    Ok(())
}

pub fn projection_contract(cases: u64) -> Check {
    let mut g = rng(105);
    for case in 0..cases {
        let p = 1 + case as usize % 7;
        let q = 1 + case as usize % p;
        // deliberately non-orthonormal input
        let b = gaussian_matrix(&mut g, p, q);
        let pm = projection_matrix(&b).map_err(|e| e.to_string())?;
        check((&pm * &pm - &pm).amax() < 1e-8, || format!("case {case}: P² != P"))?;
        check((&pm - pm.transpose()).amax() < 1e-8, || format!("case {case}: Pᵀ != P"))?;
        check((pm.trace() - q as f64).abs() < 1e-8, || format!("case {case}: trace"))?;
    }
    Ok(())
}

pub fn distance_is_a_metric(cases: u64) -> Check {
    let mut g = rng(106);
    for case in 0..cases {
        let p = 2 + case as usize % 6;
        let q = 1 + case as usize % (p - 1);
        let (b1, b2, b3) = (random_basis(&mut g, p, q), random_basis(&mut g, p, q), random_basis(&mut g, p, q));
        for norm in [Norm::Frobenius, Norm::Spectral] {
            let d = |a: &DMatrix<f64>, b: &DMatrix<f64>| basis_distance(a, b, norm).unwrap();
            let (d12, d23, d13) = (d(&b1, &b2), d(&b2, &b3), d(&b1, &b3));
            check(d13 <= d12 + d23 + 1e-9, || format!("case {case} {norm}: triangle"))?;
            check((d12 - d(&b2, &b1)).abs() < 1e-12, || format!("case {case} {norm}: symmetry"))?;
            check(d(&b1, &b1) < 1e-10, || format!("case {case} {norm}: d(S,S)"))?;
            if norm == Norm::Spectral {
                check(d12 <= 1.0 + 1e-12, || format!("case {case}: spectral > 1"))?;
                check((d12 - principal_sine(&b1, &b2)).abs() < 1e-8, || format!("case {case}: principal angle"))?;
            } else {
                check((d12 - projection_gap(&b1, &b2)).abs() < 1e-10, || format!("case {case}: frobenius"))?;
            }
        }
    }
    Ok(())
}

pub fn distance_ignores_basis_choice(cases: u64) -> Check {
    let mut g = rng(107);
    for case in 0..cases {
        let p = 2 + case as usize % 6;
        let q = 1 + case as usize % (p - 1);
        let (b1, b2) = (random_basis(&mut g, p, q), random_basis(&mut g, p, q));
        let o = random_orthogonal(&mut g, q);
        for norm in [Norm::Frobenius, Norm::Spectral] {
            let base = basis_distance(&b1, &b2, norm).unwrap();
            let rotated = basis_distance(&(&b1 * &o), &b2, norm).unwrap();
            let rotated2 = basis_distance(&b1, &(&b2 * &o), norm).unwrap();
            check((base - rotated).abs() < 1e-10 && (base - rotated2).abs() < 1e-10, || {
                format!("case {case} {norm}: {base} vs {rotated} / {rotated2}")
            })?;
        }
    }
    Ok(())
}

pub fn h_matrix_is_psd(cases: u64) -> Check {
    let mut g = rng(108);
    for case in 0..cases {
        let p = 1 + case as usize % 6;
        let n = 2 + case as usize % 30;
        let x = gaussian_matrix(&mut g, n, p) * 5.0;
        let y = DVector::from_fn(n, |_, _| normal(&mut g));
        let sel = select_pairs_scr(&y, ThresholdSpec::Proportion(0.05 + (case % 19) as f64 * 0.05)).unwrap();
        let h = h_matrix(&x, &sel).unwrap();
        let min = sym_eigen(&h).unwrap().values.min();
        check(min >= -1e-9 * h.amax().max(1.0), || format!("case {case}: min eigenvalue {min:e}"))?;
    }
    Ok(())
}

pub fn selection_contract(cases: u64) -> Check {
    let mut g = rng(109);
    for case in 0..cases {
        let n = 2 + case as usize % 40;
        // coarse values produce ties
        let y = DVector::from_fn(n, |_, _| (normal(&mut g) * 3.0).round());
        let total = n * (n - 1) / 2;
        let r = 0.02 + (case % 17) as f64 * 0.05;
        let sel = select_pairs_scr(&y, ThresholdSpec::Proportion(r)).unwrap();
        check(sel.fraction > 0.0 && sel.fraction <= 1.0, || format!("case {case}: fraction"))?;
        check(sel.pairs.len() >= proportion_count(r, total).min(total), || format!("case {case}: fewer than r"))?;
        let chosen: std::collections::HashSet<_> = sel.pairs.iter().copied().collect();
        for i in 1..n {
            for j in 0..i {
                let inside = (y[i] - y[j]).abs() <= sel.effective_c;
                check(inside == chosen.contains(&(i, j)), || format!("case {case}: pair ({i},{j})"))?;
            }
        }
    }
    Ok(())
}

type Fitter = fn(&Dataset, usize) -> contour::Result<contour::SubspaceEstimate>;

fn fitters() -> Vec<(&'static str, Fitter)> {
    vec![
        ("scr", |d, q| scr_fit(d, q, ThresholdSpec::Proportion(0.2))),
        ("gcr", |d, q| gcr_fit(d, q, &TubeConfig::new(1.0, ThresholdSpec::Proportion(0.2)))),
        ("ols", |d, _| ols_direction(d)),
        ("sir", |d, q| sir_fit(d, q, SliceSpec::equal_count(6))),
        ("save", |d, q| save_fit(d, q, SliceSpec::equal_count(6))),
        ("phd", |d, q| phd_fit(d, q)),
    ]
}

pub fn estimates_are_orthonormal(cases: u64) -> Check {
    let mut g = rng(110);
    for case in 0..cases {
        let p = 2 + case as usize % 4;
        let q = 1 + case as usize % (p - 1);
        let d = random_dataset(&mut g, 20 + case as usize % 15, p);
        for (name, fit) in fitters() {
            let est = fit(&d, q).map_err(|e| format!("case {case} {name}: {e}"))?;
            let k = est.q();
            check((est.basis.transpose() * &est.basis - DMatrix::<f64>::identity(k, k)).amax() < 1e-8, || {
                format!("case {case} {name}: basis not orthonormal")
            })?;
            check(est.eigenvalues.len() == p, || format!("case {case} {name}: spectrum length"))?;
            check(est.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1] - 1e-12), || {
                format!("case {case} {name}: spectrum not descending")
            })?;
        }
    }
    Ok(())
}

pub fn fits_are_permutation_invariant(cases: u64) -> Check {
    let mut g = rng(111);
    for case in 0..cases {
        let p = 2 + case as usize % 4;
        let q = 1 + case as usize % (p - 1);
        let n = 20 + case as usize % 15;
        let d = random_dataset(&mut g, n, p);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            perm.swap(k, g.random_range(0..=k));
        }
        let x = DMatrix::from_fn(n, p, |i, a| d.predictors()[(perm[i], a)]);
        let y = DVector::from_fn(n, |i, _| d.response()[perm[i]]);
        let shuffled = Dataset::new(x, y).unwrap();
        for (name, fit) in fitters() {
            let a = fit(&d, q).unwrap();
            let b = fit(&shuffled, q).unwrap();
            let dist = basis_distance(&a.basis, &b.basis, Norm::Frobenius).unwrap();
            check(dist < 1e-10, || format!("case {case} {name}: moved by {dist:e}"))?;
        }
    }
    Ok(())
}

pub fn fits_are_affine_equivariant(cases: u64) -> Check {
    let mut g = rng(112);
    for case in 0..cases {
        let p = 2 + case as usize % 4;
        let q = 1 + case as usize % (p - 1);
        let n = 25 + case as usize % 15;
        let d = random_dataset(&mut g, n, p);
        let a = random_invertible(&mut g, p);
        let b = DVector::from_fn(p, |_, _| normal(&mut g));
        let mut ax = d.predictors() * a.transpose();
        for mut r in ax.row_iter_mut() {
            r += b.transpose();
        }
        let moved = Dataset::new(ax, d.response().clone()).unwrap();
        let a_inv_t = a.clone().try_inverse().unwrap().transpose();
        for (name, fit) in fitters() {
            let base = fit(&d, q).unwrap();
            let mapped = fit(&moved, q).unwrap();
            let expect = &a_inv_t * &base.basis;
            let dist = basis_distance(&mapped.basis, &expect, Norm::Frobenius).unwrap();
            check(dist < 1e-6, || format!("case {case} {name}: {dist:e}"))?;
        }
    }
    Ok(())
}

pub fn scr_ignores_affine_response_maps(cases: u64) -> Check {
    let mut g = rng(113);
    for case in 0..cases {
        let p = 2 + case as usize % 4;
        let q = 1 + case as usize % (p - 1);
        let d = random_dataset(&mut g, 20 + case as usize % 20, p);
        // power-of-two scale and an exactly representable shift keep every gap ordering exact
        let scale = [0.5, 2.0, 4.0, -2.0][case as usize % 4];
        let shift = (case % 7) as f64 - 3.0;
        let y2 = d.response().map(|v| scale * v + shift);
        let d2 = Dataset::new(d.predictors().clone(), y2).unwrap();
        let spec = ThresholdSpec::Proportion(0.1 + (case % 5) as f64 * 0.1);
        let a = scr_fit(&d, q, spec).unwrap();
        let b = scr_fit(&d2, q, spec).unwrap();
        let dist = basis_distance(&a.basis, &b.basis, Norm::Frobenius).unwrap();
        check(dist < 1e-12, || format!("case {case}: {dist:e}"))?;
    }
    Ok(())
}

pub fn line_distance_symmetry_and_rigid_motion(cases: u64) -> Check {
    let mut g = rng(114);
    for case in 0..cases {
        let p = 2 + case as usize % 6;
        let pts: Vec<Vec<f64>> = (0..3).map(|_| (0..p).map(|_| 2.0 * normal(&mut g)).collect()).collect();
        let (k, i, j) = (&pts[0], &pts[1], &pts[2]);
        let d = point_line_distance(k, i, j).unwrap();
        let swapped = point_line_distance(k, j, i).unwrap();
        check((d - swapped).abs() <= 1e-12, || format!("case {case}: asymmetric {d} vs {swapped}"))?;
        check((d - ref_line_distance(k, i, j)).abs() < 1e-9, || format!("case {case}: reference"))?;
        let o = random_orthogonal(&mut g, p);
        let t = DVector::from_fn(p, |_, _| 5.0 * normal(&mut g));
        let mv = |v: &Vec<f64>| -> Vec<f64> { (&o * DVector::from_column_slice(v) + &t).iter().copied().collect() };
        let moved = point_line_distance(&mv(k), &mv(i), &mv(j)).unwrap();
        check((d - moved).abs() < 1e-9, || format!("case {case}: rigid motion {d} vs {moved}"))?;
    }
    Ok(())
}

pub fn tubes_nest_and_stats_are_valid(cases: u64) -> Check {
    let mut g = rng(115);
    for case in 0..cases {
        let p = 2 + case as usize % 4;
        let n = 4 + case as usize % 30;
        let z = gaussian_matrix(&mut g, n, p);
        let y = DVector::from_fn(n, |_, _| normal(&mut g));
        let i = 1 + g.random_range(0..n - 1);
        let j = g.random_range(0..i);
        let (r1, r2) = (0.2 + 0.1 * (case % 10) as f64, 0.7 + 0.2 * (case % 7) as f64);
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let small = tube_members(&z, i, j, lo).unwrap();
        let large = tube_members(&z, i, j, hi).unwrap();
        check(small.iter().all(|k| large.contains(k)), || format!("case {case}: tube at {lo} not inside tube at {hi}"))?;
        let stats = tube_stats(&z, &y, i, j, &TubeConfig::new(hi, ThresholdSpec::Proportion(0.1))).unwrap();
        check(stats.member_count >= 2 && stats.member_count == large.len(), || format!("case {case}: member count"))?;
        check(stats.variance_y >= 0.0, || format!("case {case}: negative variance"))?;
        let (members, var) = ref_tube(&z, &y, i, j, hi);
        check(members == large && (var - stats.variance_y).abs() < 1e-12, || format!("case {case}: reference tube"))?;
    }
    Ok(())
}

pub fn equal_count_slicing(cases: u64) -> Check {
    let mut g = rng(116);
    for case in 0..cases {
        let h = 2 + case as usize % 9;
        let n = h + case as usize % 60;
        let y = DVector::from_fn(n, |_, _| (normal(&mut g) * 2.0).round());
        let parts = slices(&y, SliceSpec::equal_count(h)).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        check(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, || format!("case {case}: sizes {sizes:?}"))?;
        if n >= 2 * h {
            check(sizes.iter().all(|&s| s >= 2), || format!("case {case}: slice below 2"))?;
        }
        let flat: Vec<usize> = parts.concat();
        let mut expected: Vec<usize> = (0..n).collect();
        expected.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
        check(flat == expected, || format!("case {case}: not a stable order-statistic split"))?;
    }
    Ok(())
}

const ADDITIVE: [ModelId; 6] = [
    ModelId::Ex6_1,
    ModelId::Ex6_2,
    ModelId::Ex6_3,
    ModelId::Ex6_4CosCube,
    ModelId::Ex6_4QuadP10,
    ModelId::Ex2_1,
];

pub fn generation_is_reproducible_with_split_streams(cases: u64) -> Check {
    for case in 0..cases {
        let id = ADDITIVE[case as usize % ADDITIVE.len()];
        let seed = 1000 + case;
        let n = 5 + case as usize % 20;
        let spec = |s: f64| ModelSpec {
            id,
            sigma_or_a: s,
            n,
            seed,
        };
        let a = generate(&spec(0.4)).unwrap();
        let b = generate(&spec(0.4)).unwrap();
        let bits = |m: &[f64]| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        check(
            bits(a.data.predictors().as_slice()) == bits(b.data.predictors().as_slice())
                && bits(a.data.response().as_slice()) == bits(b.data.response().as_slice()),
            || format!("case {case}: not reproducible"),
        )?;
        let clean = generate(&spec(0.0)).unwrap();
        let clean2 = generate(&spec(0.0)).unwrap();
        let other = generate(&spec(0.8)).unwrap();
        check(clean.data.predictors() == other.data.predictors(), || format!("case {case}: X depends on sigma"))?;
        check(clean.data.response() == clean2.data.response(), || format!("case {case}: sigma = 0 not fixed"))?;
        for k in 0..n {
            let e1 = (a.data.response()[k] - clean.data.response()[k]) / 0.4;
            let e2 = (other.data.response()[k] - clean.data.response()[k]) / 0.8;
            check((e1 - e2).abs() < 1e-9, || format!("case {case}: noise draws differ across sigma"))?;
        }
        let q = a.q;
        check(
            (a.true_basis.transpose() * &a.true_basis - DMatrix::<f64>::identity(q, q)).amax() < 1e-12
                && q == id.structural_dim(),
            || format!("case {case}: true basis"),
        )?;
    }
    Ok(())
}
