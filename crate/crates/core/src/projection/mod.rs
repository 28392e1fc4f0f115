//! Subspaces of skew-Hermitian matrices, conditional expectations and p-norm best approximation.

pub mod approximant;
pub mod subspace;

pub use approximant::{
    best_approximant, minimal_lifting, orthogonal_projection, quotient_norm, ProjectionResult, QuotientNorm,
    DEFAULT_TOL, MAX_ITERATIONS,
};
pub use subspace::{conditional_expectation, SkewSubspace, SubalgebraKind, DEFAULT_GRAM_TOL};
