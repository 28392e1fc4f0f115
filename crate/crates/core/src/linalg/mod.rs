//! Dense complex linear algebra over finite tracial algebras.

pub mod algebra;
pub mod analytic;
pub mod matrix;
pub mod spectral;

pub use algebra::{even_exponent, TracialAlgebra};
pub use analytic::{apply_analytic_ad, exp_and_differential, exp_differential, h_form, inverse_symbol_bound, qf, AdSymbol};
pub use matrix::{default_tol, ComplexMatrix, C64, I};
pub use spectral::{
    eigh_raw, fold_symbol, hermitian_calculus, principal_log, s_numbers, sawtooth, spectral_scale, unitary_exp,
    SpectralDecomposition, StepFunction,
};
