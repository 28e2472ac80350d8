//! The decomposed Hilbert-space allocation problem and Problem 2: the
//! optimal decomposable MI space, plus the decomposability check and the
//! split-data reduction.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, vdot, C64, CMat};
use crate::measure::{project_component, Decomposition, RangeBasis, VectorField};
use crate::mi::{MiSolution, PooledPick};
use crate::par;

/// A nonnegative allocation α with Σ α_i ≤ ℓ (membership in 𝒬).
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn new(alpha: Vec<usize>, ell: usize) -> Result<Self> {
        if alpha.iter().sum::<usize>() > ell {
            return Err(Error::InvalidInput(format!(
                "allocation {:?} exceeds the length budget {ell}",
                alpha
            )));
        }
        Ok(Allocation(alpha))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }
}

/// Solution of the decomposed problem in a single Hilbert space C^n.
#[derive(Clone, Debug)]
pub struct HilbertSolution {
    /// The ℓ Parseval generators h_1, …, h_ℓ (zero where the pooled
    /// eigenvalue fell below threshold).
    pub vectors: Vec<Vec<C64>>,
    /// How many picks landed in each component.
    pub allocation: Allocation,
    /// Σ of all non-picked eigenvalues.
    pub error: f64,
    /// The ℓ pooled picks, sorted by value descending with ties broken by
    /// (component, index).
    pub picks: Vec<PooledPick>,
    /// All κ·m pooled eigenvalues, descending.
    pub pooled: Vec<f64>,
}

fn component_gramian(projected: &[Vec<C64>]) -> CMat {
    let m = projected.len();
    let mut g = CMat::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = vdot(&projected[i], &projected[j]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

/// Solve the decomposed approximation problem for vectors in C^n: per
/// component, eigendecompose the Gramian of the projected data; pool all
/// eigenvalues, keep the ℓ largest, and build the Parseval generators from
/// the selected component eigenvectors.
pub fn solve_hilbert_decomposed(
    data: &[Vec<C64>],
    decomposition: &Decomposition,
    ell: usize,
    epsilon: f64,
) -> Result<HilbertSolution> {
    if ell == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
    let m = data.len();
    if m == 0 {
        return Err(Error::InvalidInput("data list is empty".into()));
    }
    let n = decomposition.dim();
    if data.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "data vectors must have length {n}"
        )));
    }
    let kappa = decomposition.kappa();

    // Per component: projected data, eigenvalues, right-eigenvector unitary.
    let mut projected: Vec<Vec<Vec<C64>>> = Vec::with_capacity(kappa);
    let mut eigs: Vec<(Vec<f64>, CMat)> = Vec::with_capacity(kappa);
    for i in 0..kappa {
        let proj: Vec<Vec<C64>> = data
            .iter()
            .map(|x| decomposition.project(x, i))
            .collect::<Result<Vec<_>>>()?;
        let (vals, vecs) = hermitian_eig(&component_gramian(&proj))?;
        let vals: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
        projected.push(proj);
        eigs.push((vals, vecs));
    }

    let mut pool: Vec<PooledPick> = Vec::with_capacity(kappa * m);
    for (i, (vals, _)) in eigs.iter().enumerate() {
        for (j, &v) in vals.iter().enumerate() {
            pool.push(PooledPick {
                value: v,
                component: i,
                index: j,
            });
        }
    }
    pool.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap()
            .then(a.component.cmp(&b.component))
            .then(a.index.cmp(&b.index))
    });

    let total: f64 = pool.iter().map(|p| p.value).sum();
    let take = ell.min(pool.len());
    let picks: Vec<PooledPick> = pool[..take].to_vec();
    let picked_sum: f64 = picks.iter().map(|p| p.value).sum();
    let error = (total - picked_sum).max(0.0);
    let pooled: Vec<f64> = pool.iter().map(|p| p.value).collect();

    let max_pooled = pooled.first().copied().unwrap_or(0.0);
    let threshold = epsilon * max_pooled;

    // h_s = λ^{-1/2} Σ_k y_{j_s}(k) P_{H_{i_s}} x_k with y the left
    // eigenvector of the component Gramian, i.e. the entrywise conjugate of
    // the right-eigenvector column; this is what makes the h_s orthonormal.
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(ell);
    let mut counts = vec![0usize; kappa];
    for pick in &picks {
        if max_pooled > 0.0 && pick.value > threshold {
            counts[pick.component] += 1;
            let (vals, u) = &eigs[pick.component];
            let beta = vals[pick.index].powf(-0.5);
            let mut h = vec![C64::new(0.0, 0.0); n];
            for k in 0..m {
                let coeff = u[(k, pick.index)].conj() * beta;
                for (hv, pv) in h.iter_mut().zip(&projected[pick.component][k]) {
                    *hv += coeff * pv;
                }
            }
            vectors.push(h);
        } else {
            vectors.push(vec![C64::new(0.0, 0.0); n]);
        }
    }
    for _ in take..ell {
        vectors.push(vec![C64::new(0.0, 0.0); n]);
    }

    Ok(HilbertSolution {
        vectors,
        allocation: Allocation::new(counts, ell)?,
        error,
        picks,
        pooled,
    })
}

/// Solve Problem 2: the optimal MI space of length ≤ ℓ that is decomposable
/// with respect to the given orthogonal decomposition of the fiber space.
pub fn solve_problem2(
    data: &[VectorField],
    decomposition: &Decomposition,
    ell: usize,
    epsilon: f64,
) -> Result<MiSolution> {
    if ell == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
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
    let n = first.dim();
    if decomposition.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "decomposition dimension {} vs fiber dimension {n}",
            decomposition.dim()
        )));
    }
    let grid = first.grid().clone();

    let fiber_solutions: Vec<HilbertSolution> = par::try_map_indices(grid.len(), |fiber| {
        let vectors: Vec<Vec<C64>> = data.iter().map(|f| f.value(fiber).to_vec()).collect();
        solve_hilbert_decomposed(&vectors, decomposition, ell, epsilon)
    })?;

    let mut gen_values: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(grid.len()); ell];
    let mut basis: Vec<Vec<Vec<C64>>> = Vec::with_capacity(grid.len());
    let mut spectrum: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut selections: Vec<Vec<PooledPick>> = Vec::with_capacity(grid.len());
    let mut error = 0.0;
    for (fiber, sol) in fiber_solutions.into_iter().enumerate() {
        error += grid.weight(fiber) * sol.error;
        let fiber_basis: Vec<Vec<C64>> = sol
            .vectors
            .iter()
            .filter(|h| crate::linalg::vnorm_sqr(h) > 0.0)
            .cloned()
            .collect();
        for (s, h) in sol.vectors.into_iter().enumerate() {
            gen_values[s].push(h);
        }
        basis.push(fiber_basis);
        spectrum.push(sol.pooled);
        selections.push(sol.picks);
    }

    let generators = gen_values
        .into_iter()
        .map(|vals| VectorField::new(grid.clone(), vals))
        .collect::<Result<Vec<_>>>()?;
    let range = RangeBasis::new(grid.clone(), n, basis)?;
    let achieved_length = range.max_fiber_dim();
    Ok(MiSolution {
        generators,
        range,
        spectrum,
        error,
        requested_length: ell,
        achieved_length,
        selections: Some(selections),
    })
}

/// True iff every projected basis vector P_{H_j} b stays inside J(ω), fiber
/// by fiber, block by block.
pub fn decomposable_check(
    range: &RangeBasis,
    decomposition: &Decomposition,
    tol: f64,
) -> Result<bool> {
    if decomposition.dim() != range.dim() {
        return Err(Error::DimensionMismatch(format!(
            "decomposition dimension {} vs range dimension {}",
            decomposition.dim(),
            range.dim()
        )));
    }
    for fiber in 0..range.grid().len() {
        for b in range.fiber_basis(fiber) {
            for j in 0..decomposition.kappa() {
                let p = decomposition.project(b, j)?;
                let back = range.project_vector(fiber, &p);
                let dist: f64 = p
                    .iter()
                    .zip(&back)
                    .map(|(a, c)| (a - c).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dist > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// {𝒫_j F_i : 1 ≤ j ≤ κ, 1 ≤ i ≤ m} in component-major order.
pub fn split_data(data: &[VectorField], decomposition: &Decomposition) -> Result<Vec<VectorField>> {
    let mut out = Vec::with_capacity(decomposition.kappa() * data.len());
    for j in 0..decomposition.kappa() {
        for f in data {
            out.push(project_component(f, decomposition, j)?);
        }
    }
    Ok(out)
}
