//! Gramian field of a data family and its fiberwise spectral decomposition.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, vdot, C64, CMat};
use crate::measure::{VectorField, WeightedGrid};
use crate::par;

/// Default relative rank threshold ε.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Per-fiber m×m matrix of pairwise fiber inner products of the data.
#[derive(Clone, Debug)]
pub struct GramianField {
    grid: Arc<WeightedGrid>,
    matrices: Vec<CMat>,
    m: usize,
}

impl GramianField {
    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn matrix(&self, fiber: usize) -> &CMat {
        &self.matrices[fiber]
    }
}

/// (G(ω))_{ij} = ⟨F_i(ω), F_j(ω)⟩. Weights play no role here; they enter
/// only when integrating over the grid.
pub fn gramian(data: &[VectorField]) -> Result<GramianField> {
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidInput("data list is empty".into()))?;
    for f in data {
        if !first.same_grid(f) || first.dim() != f.dim() {
            return Err(Error::DimensionMismatch(
                "all data fields must share grid and fiber space".into(),
            ));
        }
    }
    let m = data.len();
    let grid = first.grid().clone();
    let matrices = par::map_indices(grid.len(), |fiber| {
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = vdot(data[i].value(fiber), data[j].value(fiber));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    });
    Ok(GramianField { grid, matrices, m })
}

/// Fiberwise eigendata of a Gramian field: eigenvalues descending and
/// clamped at zero, together with the unitary of right eigenvectors per
/// fiber. The left eigenvector y_j(ω) is the conjugate of column j.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<WeightedGrid>,
    eigenvalues: Vec<Vec<f64>>,
    eigenvectors: Vec<CMat>,
    rank_threshold: f64,
    m: usize,
}

impl SpectralField {
    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn eigenvalues(&self, fiber: usize) -> &[f64] {
        &self.eigenvalues[fiber]
    }

    /// Right-eigenvector unitary U(ω); columns pair with the eigenvalues.
    pub fn eigenvectors(&self, fiber: usize) -> &CMat {
        &self.eigenvectors[fiber]
    }

    /// Left eigenvector y_j(ω) = conj(U_j(ω)).
    pub fn left_eigenvector(&self, fiber: usize, j: usize) -> Vec<C64> {
        self.eigenvectors[fiber]
            .col(j)
            .into_iter()
            .map(|z| z.conj())
            .collect()
    }

    pub fn rank_threshold(&self) -> f64 {
        self.rank_threshold
    }

    /// λ_j(ω) counts as nonzero only above ε·λ_1(ω); a fiber with
    /// λ_1(ω) = 0 has rank 0.
    pub fn is_nonzero(&self, fiber: usize, j: usize) -> bool {
        let ev = &self.eigenvalues[fiber];
        let top = ev[0];
        top > 0.0 && ev[j] > self.rank_threshold * top
    }

    pub fn rank(&self, fiber: usize) -> usize {
        (0..self.m).filter(|&j| self.is_nonzero(fiber, j)).count()
    }
}

/// Eigendecompose every fiber of the Gramian field. Eigenvalues below the
/// relative threshold ε·λ_1(ω) are treated as exactly zero downstream;
/// negative round-off eigenvalues are clamped to 0 after a PSD sanity check.
pub fn spectral(g: &GramianField, epsilon: f64) -> Result<SpectralField> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidInput(format!(
            "rank threshold must lie in [0, 1), got {epsilon}"
        )));
    }
    let pairs = par::try_map_indices(g.grid.len(), |fiber| {
        let (vals, vecs) = hermitian_eig(g.matrix(fiber))?;
        let max = vals.first().copied().unwrap_or(0.0).max(0.0);
        if let Some(&min) = vals.last() {
            if min < -1e-10 * max.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "Gramian at fiber {fiber} is not positive semidefinite (min eigenvalue {min:e})"
                )));
            }
        }
        let clamped: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
        Ok((clamped, vecs))
    })?;
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(SpectralField {
        grid: g.grid.clone(),
        eigenvalues,
        eigenvectors,
        rank_threshold: epsilon,
        m: g.m,
    })
}
