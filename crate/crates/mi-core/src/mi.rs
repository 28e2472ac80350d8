//! Optimal multiplicatively invariant space of bounded length for a finite
//! data family, with Parseval generators and the exact least-squares error.

use crate::error::{Error, Result};
use crate::gramian::{gramian, spectral, SpectralField};
use crate::linalg::C64;
use crate::measure::{project_fiberwise, RangeBasis, VectorField};
use crate::par;

/// One pooled eigenvalue pick: which component and which eigenvalue index
/// within it was selected. For the undecomposed problem the component is
/// always 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PooledPick {
    pub value: f64,
    pub component: usize,
    pub index: usize,
}

/// Solution of an optimal-subspace problem over a weighted grid.
///
/// `spectrum` holds, per fiber, the descending nonnegative values whose tail
/// sums give the error: the Gramian eigenvalues for the plain problem, the
/// pooled component eigenvalues for the decomposed one. `selections` records
/// the per-fiber (component, index) picks when a decomposition was involved.
#[derive(Clone, Debug)]
pub struct MiSolution {
    pub generators: Vec<VectorField>,
    pub range: RangeBasis,
    pub spectrum: Vec<Vec<f64>>,
    pub error: f64,
    pub requested_length: usize,
    pub achieved_length: usize,
    pub selections: Option<Vec<Vec<PooledPick>>>,
}

/// Σ_{j>ℓ} Σ_ω weight(ω)·λ_j(ω): the exact error of the optimal length-ℓ
/// MI space.
pub fn error_formula(spectral: &SpectralField, ell: usize) -> f64 {
    let grid = spectral.grid();
    (0..grid.len())
        .map(|fiber| {
            let w = grid.weight(fiber);
            spectral.eigenvalues(fiber)[ell.min(spectral.size())..]
                .iter()
                .sum::<f64>()
                * w
        })
        .sum()
}

/// Σ_j ‖F_j − P_R F_j‖² with weighted norms.
pub fn residual(data: &[VectorField], range: &RangeBasis) -> Result<f64> {
    let mut total = 0.0;
    for f in data {
        let p = project_fiberwise(range, f)?;
        let mut diff = 0.0;
        for (fiber, (v, pv)) in f.values().iter().zip(p.values()).enumerate() {
            let d: f64 = v
                .iter()
                .zip(pv)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            diff += f.grid().weight(fiber) * d;
        }
        total += diff;
    }
    Ok(total)
}

/// True iff F lies in the MI space represented by `range`, up to
/// tol·(1 + ‖F‖).
pub fn contains(range: &RangeBasis, f: &VectorField, tol: f64) -> Result<bool> {
    let dist_sqr = residual(std::slice::from_ref(f), range)?;
    let norm = f.norm_sqr().sqrt();
    Ok(dist_sqr.sqrt() <= tol * (1.0 + norm))
}

/// Solve Problem 1: the optimal MI space of length at most ℓ for the data.
///
/// Per fiber, the generators are Φ_s(ω) = λ_s(ω)^{-1/2} Σ_i y_s(ω)_i F_i(ω)
/// with y_s the left eigenvector, over eigenvalues above the relative rank
/// threshold, zero elsewhere; the nonzero generator values are orthonormal
/// and span J*(ω).
pub fn solve_problem1(data: &[VectorField], ell: usize, epsilon: f64) -> Result<MiSolution> {
    if ell == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
    let g = gramian(data)?;
    let spec = spectral(&g, epsilon)?;
    let grid = spec.grid().clone();
    let n = data[0].dim();
    let m = data.len();
    let take = ell.min(m);

    // The combination coefficient is the left-eigenvector entry
    // y_{si} = conj(U_{is}); with the inner product conjugate-linear in its
    // second slot this is what makes ⟨Φ_s, Φ_t⟩ = δ_{st}.
    let per_fiber: Vec<(Vec<Vec<C64>>, Vec<Vec<C64>>)> = par::map_indices(grid.len(), |fiber| {
        let u = spec.eigenvectors(fiber);
        let mut gens: Vec<Vec<C64>> = Vec::with_capacity(ell);
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for s in 0..take {
            if spec.is_nonzero(fiber, s) {
                let beta = spec.eigenvalues(fiber)[s].powf(-0.5);
                let mut v = vec![C64::new(0.0, 0.0); n];
                for i in 0..m {
                    let coeff = u[(i, s)].conj() * beta;
                    for (vk, fk) in v.iter_mut().zip(data[i].value(fiber)) {
                        *vk += coeff * fk;
                    }
                }
                basis.push(v.clone());
                gens.push(v);
            } else {
                gens.push(vec![C64::new(0.0, 0.0); n]);
            }
        }
        for _ in take..ell {
            gens.push(vec![C64::new(0.0, 0.0); n]);
        }
        (gens, basis)
    });

    let mut gen_values: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(grid.len()); ell];
    let mut basis = Vec::with_capacity(grid.len());
    for (gens, b) in per_fiber {
        for (s, v) in gens.into_iter().enumerate() {
            gen_values[s].push(v);
        }
        basis.push(b);
    }
    let generators = gen_values
        .into_iter()
        .map(|vals| VectorField::new(grid.clone(), vals))
        .collect::<Result<Vec<_>>>()?;
    let range = RangeBasis::new(grid.clone(), n, basis)?;
    let achieved_length = range.max_fiber_dim();
    let spectrum: Vec<Vec<f64>> = (0..grid.len())
        .map(|fiber| spec.eigenvalues(fiber).to_vec())
        .collect();
    let error = error_formula(&spec, ell);
    Ok(MiSolution {
        generators,
        range,
        spectrum,
        error,
        requested_length: ell,
        achieved_length,
        selections: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gramian::DEFAULT_EPSILON;
    use crate::measure::WeightedGrid;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn full_length_gives_zero_error() {
        let g = Arc::new(WeightedGrid::indexed(2).unwrap());
        let f1 = VectorField::new(
            g.clone(),
            vec![vec![c(1.0, 0.5), c(0.0, 0.0)], vec![c(0.3, 0.0), c(2.0, 0.0)]],
        )
        .unwrap();
        let f2 = VectorField::new(
            g,
            vec![vec![c(0.0, 1.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        let data = vec![f1, f2];
        let sol = solve_problem1(&data, 2, DEFAULT_EPSILON).unwrap();
        assert!(sol.error.abs() < 1e-9);
        assert!(residual(&data, &sol.range).unwrap() < 1e-9);
    }

    #[test]
    fn disjoint_supports_fit_with_one_generator() {
        // F_1 lives on fiber 0, F_2 on fiber 1; per-fiber rank is 1, so
        // ℓ = 1 already reaches error 0.
        let g = Arc::new(WeightedGrid::indexed(2).unwrap());
        let f1 = VectorField::new(
            g.clone(),
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        let f2 = VectorField::new(
            g,
            vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        )
        .unwrap();
        let sol = solve_problem1(&[f1, f2], 1, DEFAULT_EPSILON).unwrap();
        assert!(sol.error.abs() < 1e-10);
        let phi = &sol.generators[0];
        assert!((phi.value(0)[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(phi.value(0)[1].norm() < 1e-10);
        assert!(phi.value(1)[0].norm() < 1e-10);
        assert!((phi.value(1)[1] - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(sol.achieved_length, 1);
    }

    #[test]
    fn orthonormal_data_single_fiber_drops_one_eigenvalue() {
        let g = Arc::new(WeightedGrid::indexed(1).unwrap());
        let f1 = VectorField::new(g.clone(), vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let f2 = VectorField::new(g, vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let data = vec![f1, f2];
        let sol = solve_problem1(&data, 1, DEFAULT_EPSILON).unwrap();
        assert!((sol.error - 1.0).abs() < 1e-10);
        assert!((residual(&data, &sol.range).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn error_formula_examples() {
        let g = Arc::new(WeightedGrid::indexed(1).unwrap());
        let f1 = VectorField::new(g.clone(), vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let f2 = VectorField::new(g, vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let spec = spectral(&gramian(&[f1, f2]).unwrap(), DEFAULT_EPSILON).unwrap();
        assert_eq!(error_formula(&spec, 2), 0.0);
        assert_eq!(error_formula(&spec, 5), 0.0);
        assert!((error_formula(&spec, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_formula_weighted_two_fibers() {
        // weights (1,2), λ = (5,3) and (4,1), ℓ=1 → 3 + 2·1 = 5
        let g = Arc::new(
            WeightedGrid::new(vec!["0".into(), "1".into()], vec![1.0, 2.0]).unwrap(),
        );
        // Orthogonal data scaled to hit the prescribed eigenvalues exactly.
        let f1 = VectorField::new(
            g.clone(),
            vec![vec![c(5f64.sqrt(), 0.0), c(0.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        let f2 = VectorField::new(
            g,
            vec![vec![c(0.0, 0.0), c(3f64.sqrt(), 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        )
        .unwrap();
        let spec = spectral(&gramian(&[f1, f2]).unwrap(), DEFAULT_EPSILON).unwrap();
        assert!((error_formula(&spec, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn residual_extremes() {
        let g = Arc::new(WeightedGrid::indexed(1).unwrap());
        let f = VectorField::new(g.clone(), vec![vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let full = RangeBasis::from_fields(
            &[
                VectorField::new(g.clone(), vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap(),
                VectorField::new(g.clone(), vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap(),
            ],
            1e-10,
        )
        .unwrap();
        assert!(residual(std::slice::from_ref(&f), &full).unwrap() < 1e-12);
        let empty = RangeBasis::empty(g, 2);
        assert!((residual(std::slice::from_ref(&f), &empty).unwrap() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn contains_self_consistency() {
        let g = Arc::new(WeightedGrid::indexed(2).unwrap());
        let f1 = VectorField::new(
            g.clone(),
            vec![vec![c(1.0, 0.2), c(0.5, 0.0)], vec![c(0.0, 1.0), c(1.0, 0.0)]],
        )
        .unwrap();
        let f2 = VectorField::new(
            g.clone(),
            vec![vec![c(0.2, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.5)]],
        )
        .unwrap();
        let sol = solve_problem1(&[f1, f2], 1, DEFAULT_EPSILON).unwrap();
        assert!(contains(&sol.range, &sol.generators[0], 1e-9).unwrap());

        // a field orthogonal to the range at a positive-weight fiber
        let ortho = VectorField::new(
            g,
            vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        // build one orthogonal to basis at fiber 0 explicitly
        let b = sol.range.fiber_basis(0)[0].clone();
        let perp = vec![b[1].conj() * -1.0, b[0].conj()];
        let mut vals = ortho.values().to_vec();
        vals[0] = perp;
        let perp_field = VectorField::new(sol.range.grid().clone(), vals).unwrap();
        assert!(!contains(&sol.range, &perp_field, 1e-9).unwrap());
    }

    #[test]
    fn rejects_zero_length() {
        let g = Arc::new(WeightedGrid::indexed(1).unwrap());
        let f = VectorField::new(g, vec![vec![c(1.0, 0.0)]]).unwrap();
        assert!(matches!(
            solve_problem1(&[f], 0, DEFAULT_EPSILON),
            Err(Error::InvalidInput(_))
        ));
    }
}
