//! Optimal multiplicatively invariant subspaces of bounded length for
//! vector-valued data, their decomposable variant, and shift-invariant
//! spaces over finite abelian groups via exact fiberization.

pub mod error;
pub mod par;
pub mod linalg;
pub mod measure;
pub mod gramian;
pub mod mi;
pub mod deco;
pub mod lca;
pub mod oracle;

pub use error::{Error, Result};
pub use gramian::{gramian, spectral, GramianField, SpectralField, DEFAULT_EPSILON};
pub use linalg::{hermitian_eig, orthonormalize, C64, CMat};
pub use measure::{
    inner_product, project_component, project_fiberwise, Decomposition, FiberSpace, RangeBasis,
    VectorField, WeightedGrid,
};
pub use mi::{contains, error_formula, residual, solve_problem1, MiSolution, PooledPick};
pub use deco::{
    decomposable_check, solve_hilbert_decomposed, solve_problem2, split_data, Allocation,
    HilbertSolution,
};
pub use lca::{
    annihilator, b_sigma, defiberize, dft, extra_invariance_blocks, fiberize, idft,
    is_translation_invariant, section, si_range, solve_si, solve_si_extra,
    totally_decomposable_check, wiener_set, FiberizationData, FiniteAbelianGroup, GroupElement,
    Lattice, Signal, SiSolution,
};
pub use oracle::{best_subspace_sampler, eig2x2_closed_form, exhaustive_allocation, oracle_eigenvalues};
