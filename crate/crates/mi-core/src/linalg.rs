//! Dense complex linear algebra: small matrices, inner products, a cyclic
//! Jacobi eigensolver for Hermitian matrices, and Gram-Schmidt.
//!
//! Matrix sizes here are tiny (the number of data functions, or a fiber
//! dimension), so everything is direct and allocation-friendly rather than
//! blocked or in-place clever.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(CMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> Result<CMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = 1.0 + self.max_abs();
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let p = self.adjoint().mul(self).expect("square");
        let id = CMat::identity(self.rows);
        (0..self.rows * self.rows).all(|k| (p.data[k] - id.data[k]).norm() <= tol)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// ⟨a, b⟩ = Σ a_i conj(b_i); conjugate-linear in the second argument.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn vnorm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Tolerance below which a matrix passed to [`hermitian_eig`] is rejected as
/// non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and a unitary matrix whose columns
/// are the matching right eigenvectors. The first entry of each eigenvector
/// with modulus above 1e-12 is made real and positive, which pins the phase
/// and makes the output deterministic.
pub fn hermitian_eig(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::InvalidInput(
            "matrix is not Hermitian within tolerance".into(),
        ));
    }
    // Symmetrize so that round-off asymmetry inside the tolerance cannot
    // leak into the sweep.
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = CMat::identity(n);

    let fro = h.frobenius();
    let threshold = 1e-14 * fro;

    let mut converged = fro == 0.0 || n == 1;
    if !converged {
        for _sweep in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| h[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= threshold {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = h[(p, q)];
                    let abs = apq.norm();
                    if abs == 0.0 {
                        continue;
                    }
                    let phase = apq / abs;
                    let app = h[(p, p)].re;
                    let aqq = h[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * abs);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    // Plane rotation G with G_pp = c·phase, G_pq = s·phase,
                    // G_qp = -s, G_qq = c; apply H <- G* H G, V <- V G.
                    let cp = phase * c;
                    let sp = phase * s;
                    for k in 0..n {
                        let hpk = h[(p, k)];
                        let hqk = h[(q, k)];
                        h[(p, k)] = cp.conj() * hpk - s * hqk;
                        h[(q, k)] = sp.conj() * hpk + c * hqk;
                    }
                    for k in 0..n {
                        let hkp = h[(k, p)];
                        let hkq = h[(k, q)];
                        h[(k, p)] = cp * hkp - s * hkq;
                        h[(k, q)] = sp * hkp + c * hkq;
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = cp * vkp - s * vkq;
                        v[(k, q)] = sp * vkp + c * vkq;
                    }
                    h[(p, q)] = C64::new(0.0, 0.0);
                    h[(q, p)] = C64::new(0.0, 0.0);
                    h[(p, p)] = C64::new(h[(p, p)].re, 0.0);
                    h[(q, q)] = C64::new(h[(q, q)].re, 0.0);
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > threshold {
            return Err(Error::NumericalFailure(format!(
                "Jacobi sweep did not converge after {MAX_SWEEPS} sweeps (off-diagonal {off:e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the sweep order inside numerically tied eigenvalues.
    order.sort_by(|&i, &j| h[(j, j)].re.partial_cmp(&h[(i, i)].re).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&k| h[(k, k)].re).collect();
    let mut u = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let mut column = v.col(old_col);
        if let Some(lead) = column.iter().find(|z| z.norm() > 1e-12) {
            let rot = lead.conj() / lead.norm();
            for z in column.iter_mut() {
                *z *= rot;
            }
        }
        for i in 0..n {
            u[(i, new_col)] = column[i];
        }
    }
    Ok((eigenvalues, u))
}

/// Orthonormalize `vectors` by modified Gram-Schmidt with one
/// re-orthogonalization pass, dropping vectors whose residual falls below
/// `drop_tol` relative to their original norm (plus one, so exact zero
/// vectors are dropped too).
pub fn orthonormalize(vectors: &[Vec<C64>], drop_tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let orig = vnorm_sqr(v).sqrt();
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = vdot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let norm = vnorm_sqr(&w).sqrt();
        if norm > drop_tol * (1.0 + orig) {
            for z in w.iter_mut() {
                *z /= norm;
            }
            basis.push(w);
        }
    }
    basis
}
