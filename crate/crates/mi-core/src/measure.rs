//! Finite measure grids, vector-valued fields over them, orthogonal
//! decompositions of the fiber space, and range-basis projections.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{vdot, vnorm_sqr, C64, CMat};
use crate::par;

/// Finite atomic measure space: an ordered list of fiber identifiers with
/// strictly positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGrid {
    fibers: Vec<String>,
    weights: Vec<f64>,
}

impl WeightedGrid {
    pub fn new(fibers: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if fibers.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} fibers but {} weights",
                fibers.len(),
                weights.len()
            )));
        }
        if fibers.is_empty() {
            return Err(Error::InvalidInput("grid must have at least one fiber".into()));
        }
        for (id, &w) in fibers.iter().zip(&weights) {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "fiber {id:?} has non-positive weight {w}"
                )));
            }
        }
        let mut seen = fibers.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("fiber identifiers must be distinct".into()));
        }
        Ok(WeightedGrid { fibers, weights })
    }

    /// Grid with fibers "0".."n-1", all of weight one.
    pub fn indexed(n: usize) -> Result<Self> {
        WeightedGrid::new((0..n).map(|i| i.to_string()).collect(), vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn fibers(&self) -> &[String] {
        &self.fibers
    }

    pub fn weight(&self, fiber: usize) -> f64 {
        self.weights[fiber]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The fiber Hilbert space: its dimension and an optional orthogonal
/// decomposition into coordinate blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSpace {
    dim: usize,
    decomposition: Option<Decomposition>,
}

impl FiberSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("fiber dimension must be at least 1".into()));
        }
        Ok(FiberSpace {
            dim,
            decomposition: None,
        })
    }

    pub fn with_decomposition(dim: usize, decomposition: Decomposition) -> Result<Self> {
        if decomposition.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "decomposition covers {} coordinates, fiber space has {}",
                decomposition.dim(),
                dim
            )));
        }
        Ok(FiberSpace {
            dim,
            decomposition: Some(decomposition),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        self.decomposition.as_ref()
    }
}

/// Orthogonal decomposition of the fiber space into κ summands, given as a
/// partition of coordinate indices plus an optional unitary change of basis
/// whose column groups span the summands.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    blocks: Vec<Vec<usize>>,
    basis: Option<CMat>,
    dim: usize,
}

impl Decomposition {
    pub fn new(blocks: Vec<Vec<usize>>, basis: Option<CMat>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidInput(
                "decomposition blocks must be nonempty".into(),
            ));
        }
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        let dim = all.len();
        all.sort_unstable();
        if all != (0..dim).collect::<Vec<_>>() {
            return Err(Error::InvalidInput(
                "blocks must partition the coordinate indices 0..n-1".into(),
            ));
        }
        if let Some(u) = &basis {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "basis is {}x{} but decomposition has dimension {dim}",
                    u.rows(),
                    u.cols()
                )));
            }
            if !u.is_unitary(1e-12) {
                return Err(Error::InvalidInput(
                    "decomposition basis is not unitary within 1e-12".into(),
                ));
            }
        }
        Ok(Decomposition { blocks, basis, dim })
    }

    /// Trivial decomposition with a single block (κ = 1).
    pub fn whole(dim: usize) -> Self {
        Decomposition {
            blocks: vec![(0..dim).collect()],
            basis: None,
            dim,
        }
    }

    /// Totally decomposed: every coordinate line is its own summand.
    pub fn singletons(dim: usize) -> Self {
        Decomposition {
            blocks: (0..dim).map(|i| vec![i]).collect(),
            basis: None,
            dim,
        }
    }

    pub fn kappa(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn basis(&self) -> Option<&CMat> {
        self.basis.as_ref()
    }

    /// Orthogonal projection of `v` onto summand `j`.
    pub fn project(&self, v: &[C64], j: usize) -> Result<Vec<C64>> {
        if j >= self.kappa() {
            return Err(Error::InvalidInput(format!(
                "block index {j} out of range (κ = {})",
                self.kappa()
            )));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, decomposition has dimension {}",
                v.len(),
                self.dim
            )));
        }
        match &self.basis {
            None => {
                let mut out = vec![C64::new(0.0, 0.0); self.dim];
                for &i in &self.blocks[j] {
                    out[i] = v[i];
                }
                Ok(out)
            }
            Some(u) => {
                // Coefficients in the decomposition basis are U* v; mask the
                // block and conjugate back.
                let mut out = vec![C64::new(0.0, 0.0); self.dim];
                for &col in &self.blocks[j] {
                    let coeff: C64 = (0..self.dim).map(|i| u[(i, col)].conj() * v[i]).sum();
                    for i in 0..self.dim {
                        out[i] += coeff * u[(i, col)];
                    }
                }
                Ok(out)
            }
        }
    }
}

/// One element of L²(Ω, H): a complex vector of fixed length per grid fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Arc<WeightedGrid>,
    values: Vec<Vec<C64>>,
    dim: usize,
}

impl VectorField {
    pub fn new(grid: Arc<WeightedGrid>, values: Vec<Vec<C64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} fibers",
                values.len(),
                grid.len()
            )));
        }
        let dim = values.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(
                "every fiber value must have the same positive length".into(),
            ));
        }
        Ok(VectorField { grid, values, dim })
    }

    pub fn zero(grid: Arc<WeightedGrid>, dim: usize) -> Result<Self> {
        let n = grid.len();
        VectorField::new(grid, vec![vec![C64::new(0.0, 0.0); dim]; n])
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, fiber: usize) -> &[C64] {
        &self.values[fiber]
    }

    pub fn values(&self) -> &[Vec<C64>] {
        &self.values
    }

    /// Weighted squared norm Σ_ω weight(ω)·‖F(ω)‖².
    pub fn norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, &w)| w * vnorm_sqr(v))
            .sum()
    }

    pub fn same_grid(&self, other: &VectorField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }
}

fn check_compatible(f: &VectorField, g: &VectorField) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::DimensionMismatch("fields live on different grids".into()));
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fiber dimensions differ: {} vs {}",
            f.dim(),
            g.dim()
        )));
    }
    Ok(())
}

/// ⟨F, G⟩ = Σ_ω weight(ω)·⟨F(ω), G(ω)⟩, conjugate-linear in G.
pub fn inner_product(f: &VectorField, g: &VectorField) -> Result<C64> {
    check_compatible(f, g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(f.grid().weights())
        .map(|((a, b), &w)| vdot(a, b) * w)
        .sum())
}

/// Per-fiber orthonormal spanning set for a range function J(ω). The fiber
/// basis may be empty where J(ω) = {0}.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeBasis {
    grid: Arc<WeightedGrid>,
    dim: usize,
    basis: Vec<Vec<Vec<C64>>>,
}

impl RangeBasis {
    /// Orthonormality tolerance enforced at construction.
    pub const ORTHO_TOL: f64 = 1e-10;

    pub fn new(grid: Arc<WeightedGrid>, dim: usize, basis: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if basis.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} fiber bases for {} fibers",
                basis.len(),
                grid.len()
            )));
        }
        for (fiber, vecs) in basis.iter().enumerate() {
            if vecs.len() > dim {
                return Err(Error::InvalidInput(format!(
                    "fiber {fiber} has {} basis vectors in dimension {dim}",
                    vecs.len()
                )));
            }
            for (i, a) in vecs.iter().enumerate() {
                if a.len() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "basis vector at fiber {fiber} has length {}, expected {dim}",
                        a.len()
                    )));
                }
                for (j, b) in vecs.iter().enumerate() {
                    let g = vdot(a, b);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    if (g - expected).norm() > Self::ORTHO_TOL {
                        return Err(Error::InvalidInput(format!(
                            "fiber {fiber} basis is not orthonormal within {:e}",
                            Self::ORTHO_TOL
                        )));
                    }
                }
            }
        }
        Ok(RangeBasis { grid, dim, basis })
    }

    /// The zero range function J ≡ {0}.
    pub fn empty(grid: Arc<WeightedGrid>, dim: usize) -> Self {
        let n = grid.len();
        RangeBasis {
            grid,
            dim,
            basis: vec![Vec::new(); n],
        }
    }

    /// Orthonormalize the fiberwise span of the given fields. This is how MI
    /// candidate spaces of prescribed length are materialized.
    pub fn from_fields(fields: &[VectorField], drop_tol: f64) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidInput("no fields given".into()))?;
        for f in fields {
            check_compatible(first, f)?;
        }
        let grid = first.grid().clone();
        let dim = first.dim();
        let basis = par::map_indices(grid.len(), |fiber| {
            let vecs: Vec<Vec<C64>> = fields.iter().map(|f| f.value(fiber).to_vec()).collect();
            crate::linalg::orthonormalize(&vecs, drop_tol)
        });
        Ok(RangeBasis { grid, dim, basis })
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fiber_basis(&self, fiber: usize) -> &[Vec<C64>] {
        &self.basis[fiber]
    }

    pub fn fiber_dim(&self, fiber: usize) -> usize {
        self.basis[fiber].len()
    }

    pub fn max_fiber_dim(&self) -> usize {
        self.basis.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    /// Orthogonal projection of a single vector onto J(ω).
    pub fn project_vector(&self, fiber: usize, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for b in &self.basis[fiber] {
            let c = vdot(v, b);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }
}

/// (P_M F)(ω) = P_{J(ω)}(F(ω)) computed fiber by fiber.
pub fn project_fiberwise(range: &RangeBasis, f: &VectorField) -> Result<VectorField> {
    if !(Arc::ptr_eq(range.grid(), f.grid()) || **range.grid() == **f.grid()) {
        return Err(Error::DimensionMismatch("range basis and field grids differ".into()));
    }
    if range.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "range basis dimension {} vs field dimension {}",
            range.dim(),
            f.dim()
        )));
    }
    let values = par::map_indices(f.grid().len(), |fiber| {
        range.project_vector(fiber, f.value(fiber))
    });
    VectorField::new(f.grid().clone(), values)
}

/// 𝒫_j F: zero every coordinate of F outside summand j of the decomposition.
pub fn project_component(f: &VectorField, d: &Decomposition, j: usize) -> Result<VectorField> {
    if d.dim() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "decomposition dimension {} vs field dimension {}",
            d.dim(),
            f.dim()
        )));
    }
    let values = f
        .values()
        .iter()
        .map(|v| d.project(v, j))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(f.grid().clone(), values)
}
