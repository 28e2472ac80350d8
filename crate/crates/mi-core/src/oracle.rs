//! Independent brute-force verifiers used by tests. The eigensolvers here
//! are deliberately different algorithms from the production Jacobi sweep
//! (closed-form quadratic, characteristic-polynomial bisection) so the two
//! paths share no numerical code beyond elementary arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{vdot, C64, CMat};
use crate::measure::Decomposition;

/// Eigenvalues of a 2×2 Hermitian matrix via the stable quadratic formula,
/// descending.
pub fn eig2x2_closed_form(a: &CMat) -> Result<(f64, f64)> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected 2x2, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian(crate::linalg::HERMITIAN_TOL) {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    let tr = a[(0, 0)].re + a[(1, 1)].re;
    let det = a[(0, 0)].re * a[(1, 1)].re - a[(0, 1)].norm_sqr();
    // λ² − tr·λ + det; discriminant is nonnegative for Hermitian input
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let big = 0.5 * (tr + disc);
    // stable small root: det / big when big ≠ 0
    let small = if big.abs() > 0.0 { det / big } else { 0.5 * (tr - disc) };
    Ok((big.max(small), big.min(small)))
}

/// Coefficients c_0..c_n of the monic characteristic polynomial
/// det(λI − A) = λ^n + c_{n-1}λ^{n-1} + … + c_0, via Faddeev-LeVerrier.
/// Real for Hermitian A.
fn charpoly(a: &CMat) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    // M_1 = A; c_{n-k} = −tr(M_k)/k; M_{k+1} = A·(M_k + c_{n-k}·I)
    let mut m = a.clone();
    for k in 1..=n {
        let tr: C64 = (0..n).map(|i| m[(i, i)]).sum();
        coeffs[n - k] = -tr.re / k as f64;
        if k < n {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += C64::new(coeffs[n - k], 0.0);
            }
            m = a.mul(&shifted).expect("square");
        }
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = poly_eval(coeffs, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = poly_eval(coeffs, mid);
        if fmid == 0.0 || (hi - lo) < 1e-16 * (1.0 + mid.abs()) {
            return mid;
        }
        if (flo < 0.0) == (fmid < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of a polynomial with real coefficients (highest degree
/// last), found recursively: the critical points of p partition the line
/// into monotone intervals, each bisected if it brackets a sign change.
/// Assumes all roots are real, which holds for Hermitian characteristic
/// polynomials.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let lead = coeffs[deg];
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let mut breaks = real_roots(&poly_derivative(coeffs));
    breaks.retain(|b| b.is_finite());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut pts = vec![-bound];
    pts.extend(breaks.iter().copied());
    pts.push(bound);

    let scale = coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let flo = poly_eval(coeffs, lo);
        let fhi = poly_eval(coeffs, hi);
        if (flo < 0.0) != (fhi < 0.0) {
            roots.push(bisect_root(coeffs, lo, hi));
        }
    }
    // A multiple root sits at a critical point where p itself vanishes, and
    // there the bisection above may stop anywhere inside the round-off noise
    // band (p barely changes sign near an even-order root). The critical
    // point is a lower-order root of p', found accurately by the recursion,
    // so snap nearby bracket roots to it and add it if it was missed.
    let vanishing: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| poly_eval(coeffs, b).abs() <= 1e-11 * scale)
        .collect();
    // The sign-noise band of a root of multiplicity k has width on the order
    // of (eps·scale)^(1/k), up to ~1e-3 for k = 4; snap generously.
    for r in roots.iter_mut() {
        for &b in &vanishing {
            if (*r - b).abs() <= 1e-3 * (1.0 + b.abs()) {
                *r = b;
            }
        }
    }
    for &b in &vanishing {
        if roots.iter().all(|r| (r - b).abs() > 1e-9 * (1.0 + b.abs())) {
            roots.push(b);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    roots
}

/// Nullity of (A − rI) by Gaussian elimination with partial pivoting.
fn nullity(a: &CMat, r: f64, tol: f64) -> usize {
    let n = a.rows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= C64::new(r, 0.0);
    }
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        let mut pivot = row;
        for i in row..n {
            if m[(i, col)].norm() > m[(pivot, col)].norm() {
                pivot = i;
            }
        }
        if m[(pivot, col)].norm() <= tol {
            continue;
        }
        if pivot != row {
            for j in 0..n {
                let tmp = m[(row, j)];
                m[(row, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
        }
        for i in row + 1..n {
            let f = m[(i, col)] / m[(row, col)];
            for j in col..n {
                let sub = f * m[(row, j)];
                m[(i, j)] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    n - rank
}

/// Eigenvalues (descending, with multiplicity) of a Hermitian matrix of
/// size at most 4: closed form for n ≤ 2, characteristic-polynomial
/// bisection for n ∈ {3, 4}. Multiplicities come from the nullity of
/// (A − rI).
pub fn oracle_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let n = a.rows();
    if n != a.cols() || n == 0 || n > 4 {
        return Err(Error::DimensionMismatch(format!(
            "oracle eigensolver handles sizes 1..=4, got {}x{}",
            n,
            a.cols()
        )));
    }
    if !a.is_hermitian(crate::linalg::HERMITIAN_TOL) {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    if n == 1 {
        return Ok(vec![a[(0, 0)].re]);
    }
    if n == 2 {
        let (hi, lo) = eig2x2_closed_form(a)?;
        return Ok(vec![hi, lo]);
    }
    let coeffs = charpoly(a);
    // a root sitting exactly on a bracket endpoint can be reported from both
    // adjacent intervals; merge near-duplicates before counting
    let mut distinct: Vec<f64> = Vec::new();
    for r in real_roots(&coeffs) {
        match distinct.last() {
            Some(&last) if (r - last).abs() <= 1e-7 * (1.0 + r.abs()) => {}
            _ => distinct.push(r),
        }
    }
    // verify every candidate against the matrix: spurious roots born from
    // round-off sign noise have nullity zero and are discarded
    let scale = a.max_abs().max(1.0);
    let mut out = Vec::with_capacity(n);
    for &r in &distinct {
        let mult = nullity(a, r, 1e-8 * scale);
        for _ in 0..mult {
            out.push(r);
        }
    }
    if out.len() != n {
        return Err(Error::NumericalFailure(format!(
            "root multiplicities sum to {}, expected {n}",
            out.len()
        )));
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(out)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on (0,1] uniforms
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit_frame(rng: &mut ChaCha8Rng, n: usize, ell: usize) -> Vec<Vec<C64>> {
    // iterated projection-subtraction orthonormalization of Gaussian draws
    let mut frame: Vec<Vec<C64>> = Vec::with_capacity(ell.min(n));
    while frame.len() < ell.min(n) {
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
            .collect();
        for _ in 0..2 {
            for b in &frame {
                let c = vdot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in &mut v {
                *vi /= norm;
            }
            frame.push(v);
        }
    }
    frame
}

/// Minimum of Σ_j‖x_j − P_S x_j‖² over `samples` random ℓ-dimensional
/// subspaces S. Deterministic under `seed`; an upper bound on the true
/// optimum that approaches it from above.
pub fn best_subspace_sampler(x: &[Vec<C64>], ell: usize, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let n = x
        .first()
        .ok_or_else(|| Error::InvalidInput("no vectors given".into()))?
        .len();
    if x.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("vectors have mixed lengths".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let frame = random_unit_frame(&mut rng, n, ell);
        let mut err = 0.0;
        for v in x {
            let mut res: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            for b in &frame {
                res -= vdot(v, b).norm_sqr();
            }
            err += res.max(0.0);
        }
        if err < best {
            best = err;
        }
    }
    Ok(best)
}

/// Descending eigenvalues of the block-restricted covariance
/// Σ_k (P_i x_k)(P_i x_k)^* of one decomposition summand, computed with the
/// oracle eigensolver. Block dimension must be at most 4.
fn component_covariance_eigs(
    x: &[Vec<C64>],
    d: &Decomposition,
    block: usize,
) -> Result<Vec<f64>> {
    let idx = &d.blocks()[block];
    let dim = idx.len();
    if dim > 4 {
        return Err(Error::InvalidInput(format!(
            "oracle handles component dimension <= 4, block has {dim}"
        )));
    }
    let mut cov = CMat::zeros(dim, dim);
    for v in x {
        // coordinates of P_i v inside the block, in the decomposition basis
        let coords: Vec<C64> = match d.basis() {
            None => idx.iter().map(|&i| v[i]).collect(),
            Some(u) => idx
                .iter()
                .map(|&col| (0..d.dim()).map(|i| u[(i, col)].conj() * v[i]).sum())
                .collect(),
        };
        for a in 0..dim {
            for b in 0..dim {
                cov[(a, b)] += coords[a] * coords[b].conj();
            }
        }
    }
    // symmetrize round-off so the Hermitian check cannot trip
    for a in 0..dim {
        for b in a + 1..dim {
            let avg = (cov[(a, b)] + cov[(b, a)].conj()) * 0.5;
            cov[(a, b)] = avg;
            cov[(b, a)] = avg.conj();
        }
        cov[(a, a)] = C64::new(cov[(a, a)].re, 0.0);
    }
    oracle_eigenvalues(&cov)
}

/// Brute-force solution of the decomposed Hilbert problem: enumerate every
/// allocation α ∈ Q = {α ≥ 0 : Σα_i ≤ ℓ} and return the minimal error with
/// its minimizer. Guard: |Q| may not exceed 10⁴.
pub fn exhaustive_allocation(
    x: &[Vec<C64>],
    d: &Decomposition,
    ell: usize,
) -> Result<(f64, Vec<usize>)> {
    if ell == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
    let kappa = d.kappa();
    let count = ((ell + 1) as u64).checked_pow(kappa as u32);
    if count.map_or(true, |c| c > 10_000) {
        return Err(Error::InvalidInput(format!(
            "allocation space too large: (ℓ+1)^κ = ({}+1)^{kappa} exceeds 10^4",
            ell
        )));
    }
    let eigs: Vec<Vec<f64>> = (0..kappa)
        .map(|i| component_covariance_eigs(x, d, i))
        .collect::<Result<Vec<_>>>()?;

    let mut alpha = vec![0usize; kappa];
    let mut best = f64::INFINITY;
    let mut best_alpha = alpha.clone();
    loop {
        if alpha.iter().sum::<usize>() <= ell {
            let err: f64 = eigs
                .iter()
                .zip(&alpha)
                .map(|(ev, &a)| ev[a.min(ev.len())..].iter().sum::<f64>())
                .sum();
            if err < best {
                best = err;
                best_alpha = alpha.clone();
            }
        }
        // odometer over {0..ℓ}^κ
        let mut i = 0;
        loop {
            if i == kappa {
                return Ok((best.max(0.0), best_alpha));
            }
            alpha[i] += 1;
            if alpha[i] <= ell {
                break;
            }
            alpha[i] = 0;
            i += 1;
        }
    }
}
