//! Best approximation in the p-norm from a subspace of skew-Hermitian matrices.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::subspace::SkewSubspace;
use crate::error::{Error, Result};
use crate::linalg::algebra::{check_exponent, even_exponent};
use crate::linalg::analytic::sign_half;
use crate::linalg::{ComplexMatrix, TracialAlgebra};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;

/// Outcome of a best-approximant solve.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult {
    /// `Q(z)`.
    pub projection: ComplexMatrix,
    /// The minimal lifting `z - Q(z)`.
    pub residual: ComplexMatrix,
    /// Coefficients of `Q(z)` in the orthonormalized basis.
    pub coefficients: Vec<f64>,
    /// `max_k |tau(residual^{p-1} b_k)|`.
    pub optimality_residual: f64,
    pub iterations: usize,
    pub p: u32,
}

struct State {
    coefficients: Vec<f64>,
    residual: ComplexMatrix,
    powers: Vec<ComplexMatrix>,
    objective: f64,
    gradient: Vec<f64>,
    optimality: f64,
}

struct Solver<'a> {
    z: &'a ComplexMatrix,
    space: &'a SkewSubspace,
    alg: &'a TracialAlgebra,
    p: u32,
    sign: f64,
}

impl Solver<'_> {
    fn state(&self, coefficients: Vec<f64>) -> State {
        let residual = self.z - &self.space.combine(&coefficients);
        let powers = residual.powers(self.p as usize - 1);
        let top = &powers[self.p as usize - 1];
        let objective = self.sign * self.alg.trace_product(top, &residual).re;
        let traces: Vec<f64> = self.space.basis().iter().map(|b| self.alg.trace_product(top, b).re).collect();
        let scale = self.sign * self.p as f64;
        let gradient = traces.iter().map(|t| -scale * t).collect();
        let optimality = traces.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        State { coefficients, residual, powers, objective, gradient, optimality }
    }

    fn hessian(&self, state: &State) -> DMatrix<f64> {
        let k = self.space.dim();
        let p = self.p as usize;
        let basis = self.space.basis();
        let mut h = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut s = ComplexMatrix::zeros(self.alg.dim());
            for i in 0..=(p - 2) {
                s += &(&(&state.powers[p - 2 - i] * &basis[j]) * &state.powers[i]);
            }
            for l in j..k {
                let v = self.sign * p as f64 * self.alg.trace_product(&s, &basis[l]).re;
                h[(j, l)] = v;
                h[(l, j)] = v;
            }
        }
        h
    }

    fn newton_direction(&self, state: &State) -> Vec<f64> {
        let k = self.space.dim();
        let h = self.hessian(state);
        let g = DVector::from_column_slice(&state.gradient);
        let diag_max = (0..k).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
        let mut mu = 0.0;
        for _ in 0..30 {
            let mut hm = h.clone();
            for i in 0..k {
                hm[(i, i)] += mu;
            }
            if let Some(ch) = hm.cholesky() {
                let d = ch.solve(&(-&g));
                if d.iter().all(|x| x.is_finite()) {
                    return d.iter().cloned().collect();
                }
            }
            mu = if mu == 0.0 { 1e-12 * diag_max.max(1e-300) } else { mu * 10.0 };
        }
        state.gradient.iter().map(|x| -x).collect()
    }

    /// One damped Newton step; `None` when no step decreases the objective.
    fn step(&self, state: &State) -> Option<State> {
        let mut dir = self.newton_direction(state);
        let mut slope: f64 = dir.iter().zip(&state.gradient).map(|(d, g)| d * g).sum();
        if !(slope < 0.0) {
            dir = state.gradient.iter().map(|x| -x).collect();
            slope = -state.gradient.iter().map(|x| x * x).sum::<f64>();
        }
        let slack = 1e-14 * state.objective.abs();
        let mut t = 1.0;
        for _ in 0..60 {
            let c: Vec<f64> = state.coefficients.iter().zip(&dir).map(|(c, d)| c + t * d).collect();
            let next = self.state(c);
            let armijo = next.objective <= state.objective + 1e-4 * t * slope;
            let roundoff = next.objective <= state.objective + slack && next.optimality < state.optimality;
            if armijo || roundoff {
                return Some(next);
            }
            t *= 0.5;
        }
        None
    }

    fn solve(&self, tol: f64, max_iterations: usize) -> (State, usize, bool) {
        let init = self.space.coefficients(self.z);
        let mut state = self.state(init);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iterations {
            if state.optimality <= tol {
                converged = true;
                break;
            }
            match self.step(&state) {
                Some(next) => state = next,
                None => break,
            }
            iterations += 1;
        }
        if !converged && state.optimality <= tol {
            converged = true;
        }
        if converged {
            // Polish: extra Newton steps kept only while they improve the certificate.
            for _ in 0..3 {
                if state.optimality == 0.0 {
                    break;
                }
                match self.step(&state) {
                    Some(next) if next.optimality < state.optimality => state = next,
                    _ => break,
                }
            }
        }
        (state, iterations, converged)
    }
}

fn ensure_orthonormal(g: &SkewSubspace) -> Result<Cow<'_, SkewSubspace>> {
    if g.is_orthonormal() {
        Ok(Cow::Borrowed(g))
    } else {
        Ok(Cow::Owned(g.orthonormal_basis()?))
    }
}

fn validate(z: &ComplexMatrix, g: &SkewSubspace) -> Result<()> {
    g.ambient().require_member(z)?;
    z.require_skew()
}

/// Minimizes `||z - y||_p` over `y` in the span of `g` by damped Newton iteration.
pub fn best_approximant(z: &ComplexMatrix, g: &SkewSubspace, p: u32, tol: f64) -> Result<ProjectionResult> {
    even_exponent(p as f64)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    validate(z, g)?;
    let g = ensure_orthonormal(g)?;
    best_approximant_unchecked(z, &g, p, tol, MAX_ITERATIONS)
}

pub(crate) fn best_approximant_unchecked(
    z: &ComplexMatrix,
    g: &SkewSubspace,
    p: u32,
    tol: f64,
    max_iterations: usize,
) -> Result<ProjectionResult> {
    let (state, iterations, converged) = run_solver(z, g, p, tol, max_iterations);
    if !converged {
        return Err(Error::NonConvergence { iterations, residual: state.optimality });
    }
    Ok(into_result(g, state, iterations, p))
}

fn run_solver(z: &ComplexMatrix, g: &SkewSubspace, p: u32, tol: f64, max_iterations: usize) -> (State, usize, bool) {
    let solver = Solver { z, space: g, alg: g.ambient(), p, sign: sign_half(p) };
    solver.solve(tol, max_iterations)
}

fn into_result(g: &SkewSubspace, state: State, iterations: usize, p: u32) -> ProjectionResult {
    ProjectionResult {
        projection: g.combine(&state.coefficients),
        residual: state.residual,
        coefficients: state.coefficients,
        optimality_residual: state.optimality,
        iterations,
        p,
    }
}

/// The minimal lifting `z - Q(z)`.
pub fn minimal_lifting(z: &ComplexMatrix, g: &SkewSubspace, p: u32) -> Result<ComplexMatrix> {
    Ok(best_approximant(z, g, p, DEFAULT_TOL)?.residual)
}

/// The p = 2 best approximant: the trace-orthogonal projection.
pub fn orthogonal_projection(z: &ComplexMatrix, g: &SkewSubspace) -> Result<ComplexMatrix> {
    validate(z, g)?;
    Ok(ensure_orthonormal(g)?.project_orthogonal(z))
}

/// Value of the quotient norm `inf_y ||z - y||_p` with the approximant achieving it.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientNorm {
    pub value: f64,
    /// True when the value carries a first-order optimality certificate (even p).
    /// Otherwise it is an achieved value, hence an upper bound.
    pub certified: bool,
    pub approximant: ComplexMatrix,
}

/// `inf_{y in span g} ||z - y||_p` for any `p >= 1`, including `p = infinity`.
pub fn quotient_norm(z: &ComplexMatrix, g: &SkewSubspace, p: f64) -> Result<QuotientNorm> {
    check_exponent(p)?;
    validate(z, g)?;
    let g = ensure_orthonormal(g)?;
    if let Ok(pe) = even_exponent(p) {
        let r = best_approximant_unchecked(z, &g, pe, DEFAULT_TOL, MAX_ITERATIONS)?;
        let value = g.ambient().p_norm_unchecked(&r.residual, p);
        return Ok(QuotientNorm { value, certified: true, approximant: r.projection });
    }
    Ok(pattern_search_norm(z, &g, p))
}

/// Derivative-free minimization of `||z - y||_p` for exponents without a smooth certificate.
fn pattern_search_norm(z: &ComplexMatrix, g: &SkewSubspace, p: f64) -> QuotientNorm {
    let alg = g.ambient();
    let objective = |c: &[f64]| alg.p_norm_unchecked(&(z - &g.combine(c)), p);
    let k = g.dim();
    let scale = z.op_norm();
    if k == 0 || scale == 0.0 {
        return QuotientNorm { value: objective(&vec![0.0; k]), certified: false, approximant: ComplexMatrix::zeros(alg.dim()) };
    }
    // Warm starts from smooth surrogates: even exponents bracketing p, solved on the rescaled problem.
    let surrogates: Vec<u32> = if p.is_infinite() {
        vec![2, 4, 8, 16, 32]
    } else {
        let lo = ((p / 2.0).floor() as u32 * 2).max(2);
        vec![2, lo, lo + 2]
    };
    let unit = z.scale(1.0 / scale);
    let mut best_c = vec![0.0; k];
    let mut best = objective(&best_c);
    for q in surrogates {
        let (state, _, _) = run_solver(&unit, g, q, 1e-12, 200);
        let c: Vec<f64> = state.coefficients.iter().map(|x| x * scale).collect();
        let v = objective(&c);
        if v < best {
            best = v;
            best_c = c;
        }
    }
    let mut step = 0.25 * scale;
    let floor = 1e-10 * scale;
    let mut evaluations = 0usize;
    while step > floor && evaluations < 20_000 {
        let mut improved = false;
        for j in 0..k {
            for sgn in [1.0, -1.0] {
                let mut c = best_c.clone();
                c[j] += sgn * step;
                let v = objective(&c);
                evaluations += 1;
                if v < best {
                    best = v;
                    best_c = c;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    QuotientNorm { value: best, certified: false, approximant: g.combine(&best_c) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::subspace::{SubalgebraKind, DEFAULT_GRAM_TOL};
    use crate::random::{self, trial_rng};

    #[test]
    fn zero_subspace_returns_input() {
        let alg = TracialAlgebra::full(3);
        let mut rng = trial_rng(1, 0);
        let z = random::skew(&alg, &mut rng);
        let r = best_approximant(&z, &SkewSubspace::zero(alg), 4, DEFAULT_TOL).unwrap();
        assert_eq!(r.projection, ComplexMatrix::zeros(3));
        assert_eq!(r.residual, z);
    }

    #[test]
    fn member_of_span_is_fixed() {
        let alg = TracialAlgebra::tensor_m2(&[2]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::DiagM2).unwrap();
        let mut rng = trial_rng(2, 0);
        let z = random::combination(g.basis(), 4, &mut rng);
        for p in [2, 4, 6] {
            let r = best_approximant(&z, &g, p, DEFAULT_TOL).unwrap();
            assert!((&r.projection - &z).max_abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_truncation_in_tensor_model() {
        let alg = TracialAlgebra::tensor_m2(&[2]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::DiagM2).unwrap();
        let mut rng = trial_rng(3, 0);
        for p in [4, 6] {
            let z = random::skew(&alg, &mut rng);
            let r = best_approximant(&z, &g, p, DEFAULT_TOL).unwrap();
            let e = g.conditional_expectation(&z).unwrap();
            assert!(alg.p_norm(&(&r.projection - &e), p as f64).unwrap() < 1e-8);
            assert!(r.optimality_residual <= DEFAULT_TOL);
        }
    }

    #[test]
    fn p_two_is_orthogonal_projection() {
        let alg = TracialAlgebra::full(3);
        let mut rng = trial_rng(4, 0);
        let basis = (0..3).map(|_| random::skew(&alg, &mut rng)).collect();
        let g = SkewSubspace::new(alg.clone(), basis, DEFAULT_GRAM_TOL).unwrap();
        let z = random::skew(&alg, &mut rng);
        let r = best_approximant(&z, &g, 2, DEFAULT_TOL).unwrap();
        let lin = orthogonal_projection(&z, &g).unwrap();
        assert!((&r.projection - &lin).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_odd_exponent_and_bad_tolerance() {
        let alg = TracialAlgebra::full(2);
        let g = SkewSubspace::zero(alg);
        let z = ComplexMatrix::zeros(2);
        assert!(best_approximant(&z, &g, 3, DEFAULT_TOL).is_err());
        assert!(best_approximant(&z, &g, 4, 0.0).is_err());
    }

    #[test]
    fn quotient_norm_of_orthogonal_element_for_p_two() {
        let alg = TracialAlgebra::full(2);
        let b = ComplexMatrix::from_diagonal(&[crate::linalg::I, crate::linalg::I]);
        let g = SkewSubspace::new(alg.clone(), vec![b], DEFAULT_GRAM_TOL).unwrap();
        let z = ComplexMatrix::from_diagonal(&[crate::linalg::I, -crate::linalg::I]).scale(0.7);
        let q = quotient_norm(&z, &g, 2.0).unwrap();
        assert!(q.certified);
        assert!((q.value - alg.norm2(&z)).abs() < 1e-14);
    }

    #[test]
    fn uniform_quotient_norm_is_an_upper_bound_below_the_norm() {
        let alg = TracialAlgebra::full(3);
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CenterBlocks).unwrap();
        let mut rng = trial_rng(5, 0);
        let z = random::skew(&alg, &mut rng);
        let q = quotient_norm(&z, &g, f64::INFINITY).unwrap();
        assert!(!q.certified);
        assert!(q.value <= z.op_norm() + 1e-12);
        // For scalar isotropy the exact value is half the spread of the eigen-angles.
        let (theta, _) = crate::linalg::eigh_raw(&z.scale_c(-crate::linalg::I));
        let exact = 0.5 * (theta[2] - theta[0]);
        assert!(q.value >= exact - 1e-12);
        assert!(q.value - exact < 1e-7, "{} vs {}", q.value, exact);
    }
}
