//! Analytic functions of `ad a` and the bilinear forms built from traces of powers.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::algebra::TracialAlgebra;
use super::matrix::{ComplexMatrix, C64, I};
use super::spectral::skew_eigen;
use crate::error::{Error, Result};

/// Which symbol of `ad a` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdSymbol {
    /// `(e^w - 1) / w`
    F,
    /// `(1 - e^{-w}) / w`
    G,
    FInv,
    GInv,
}

impl AdSymbol {
    fn is_inverse(self) -> bool {
        matches!(self, AdSymbol::FInv | AdSymbol::GInv)
    }

    /// Value at `w = i delta`.
    pub fn eval(self, delta: f64) -> C64 {
        let f = f_symbol(delta);
        match self {
            AdSymbol::F => f,
            AdSymbol::G => f.conj(),
            AdSymbol::FInv => 1.0 / f,
            AdSymbol::GInv => 1.0 / f.conj(),
        }
    }
}

/// `(e^{i delta} - 1) / (i delta)`, with the removable singularity filled in.
fn f_symbol(delta: f64) -> C64 {
    if delta == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let w = I * delta;
    if delta.abs() < 1e-3 {
        // 1 + w/2 + w^2/6 + w^3/24 + w^4/120 + w^5/720
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=7 {
            term = term * w / k as f64;
            sum += term;
        }
        return sum;
    }
    (C64::new(delta.cos(), delta.sin()) - 1.0) / w
}

/// Eigenframe of a skew-Hermitian matrix, reusable across several symbol applications.
pub(crate) struct AdFrame {
    theta: Vec<f64>,
    frame: ComplexMatrix,
    cluster_tol: f64,
}

impl AdFrame {
    pub(crate) fn new(a: &ComplexMatrix) -> Self {
        let (theta, frame) = skew_eigen(a);
        let norm = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        Self { theta, frame, cluster_tol: 1e-10 * norm }
    }

    pub(crate) fn norm(&self) -> f64 {
        self.theta.iter().fold(0.0f64, |m, t| m.max(t.abs()))
    }

    /// Applies `phi(ad a)` to `b`, where `ad a` multiplies entry `(k, l)` by `i(theta_l - theta_k)`.
    pub(crate) fn apply(&self, symbol: AdSymbol, b: &ComplexMatrix) -> ComplexMatrix {
        let n = b.dim();
        let mut conj = &(&self.frame.adjoint() * b) * &self.frame;
        for k in 0..n {
            for l in 0..n {
                let delta = self.theta[l] - self.theta[k];
                if delta.abs() > self.cluster_tol {
                    conj[(k, l)] *= symbol.eval(delta);
                }
            }
        }
        &(&self.frame * &conj) * &self.frame.adjoint()
    }

    /// `e^a`.
    pub(crate) fn exp(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.theta.iter().map(|&t| C64::new(t.cos(), t.sin())).collect();
        &(&self.frame * &ComplexMatrix::from_diagonal(&d)) * &self.frame.adjoint()
    }
}

/// Applies `F`, `G` or their inverses of `ad a = R_a - L_a` to `b`.
pub fn apply_analytic_ad(a: &ComplexMatrix, symbol: AdSymbol, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_skew()?;
    b.require_dim(a.dim())?;
    let frame = AdFrame::new(a);
    if symbol.is_inverse() && frame.norm() >= FRAC_PI_2 {
        return Err(Error::OutsideInversionRadius { norm: frame.norm() });
    }
    Ok(frame.apply(symbol, b))
}

/// Differential of the exponential at `a` in direction `b`: `e^a F(ad a) b`.
pub fn exp_differential(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_skew()?;
    b.require_dim(a.dim())?;
    let (ea, d) = exp_and_differential(a, b);
    Ok(&ea * &d)
}

/// `(e^h, F(ad h) hdot)`: the exponential and the left-trivialized velocity `e^{-h} d/dt e^h`.
pub fn exp_and_differential(h: &ComplexMatrix, hdot: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let frame = AdFrame::new(h);
    (frame.exp(), frame.apply(AdSymbol::F, hdot))
}

/// `g(r) = r / sin(r)`, the bound on `||F(ad a)^{-1}||` for `||a|| = r < pi/2`.
pub fn inverse_symbol_bound(r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        r / r.sin()
    }
}

fn require_even(p: u32) -> Result<()> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidExponent(p as f64, "an even integer is required"));
    }
    Ok(())
}

pub(crate) fn sign_half(p: u32) -> f64 {
    if (p / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `H_a(b, c) = (-1)^{p/2} p sum_{k=0}^{p-2} tau(a^{p-2-k} b a^k c)`.
pub fn h_form(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    p: u32,
    alg: &TracialAlgebra,
) -> Result<f64> {
    require_even(p)?;
    for x in [a, b, c] {
        x.require_dim(alg.dim())?;
        x.require_skew()?;
    }
    let powers = a.powers(p as usize - 2);
    Ok(h_form_with_powers(&powers, b, c, p, alg))
}

pub(crate) fn h_form_with_powers(
    powers: &[ComplexMatrix],
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    p: u32,
    alg: &TracialAlgebra,
) -> f64 {
    let top = p as usize - 2;
    let mut sum = ComplexMatrix::zeros(b.dim());
    for k in 0..=top {
        sum += &(&(&powers[top - k] * b) * &powers[k]);
    }
    sign_half(p) * p as f64 * alg.trace_product(&sum, c).re
}

/// The quadratic form `Q_a(b) = H_a(b, b)`.
pub fn qf(a: &ComplexMatrix, b: &ComplexMatrix, p: u32, alg: &TracialAlgebra) -> Result<f64> {
    h_form(a, b, b, p, alg)
}
