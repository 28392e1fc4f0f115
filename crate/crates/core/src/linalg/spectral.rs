//! Eigen-decompositions, functional calculus, exponential and logarithm, spectral scales.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::algebra::TracialAlgebra;
use super::matrix::{ComplexMatrix, C64, I};
use crate::error::Result;

/// Eigen-decomposition of a normal matrix together with trace weights.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub frame: ComplexMatrix,
    pub weights: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn hermitian(x: &ComplexMatrix, alg: &TracialAlgebra) -> Result<Self> {
        x.require_dim(alg.dim())?;
        x.require_hermitian()?;
        let (vals, frame) = eigh_raw(x);
        let weights = alg.eigen_weights(&frame);
        Ok(Self { eigenvalues: vals.into_iter().map(|v| C64::new(v, 0.0)).collect(), frame, weights })
    }

    pub fn unitary(u: &ComplexMatrix, alg: &TracialAlgebra) -> Result<Self> {
        u.require_dim(alg.dim())?;
        u.require_unitary()?;
        let (vals, frame) = unitary_eigen(u);
        let weights = alg.eigen_weights(&frame);
        Ok(Self { eigenvalues: vals, frame, weights })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &(&self.frame * &ComplexMatrix::from_diagonal(&self.eigenvalues)) * &self.frame.adjoint()
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Returns ascending eigenvalues and the unitary frame whose columns are eigenvectors.
/// Only the Hermitian part of the input is used.
pub fn eigh_raw(x: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = x.dim();
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
        }
    }
    let mut v: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..60 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    let mag = apq.norm();
                    if mag <= 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    let phase = apq / mag;
                    let theta = (aqq - app) / (2.0 * mag);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // Rotation R with R_pp = c, R_pq = s, R_qp = -s conj(phase), R_qq = c conj(phase).
                    let rqp = -phase.conj() * s;
                    let rqq = phase.conj() * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = akp * c + akq * rqp;
                        a[k * n + q] = akp * s + akq * rqq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = apk * c + aqk * rqp.conj();
                        a[q * n + k] = apk * s + aqk * rqq.conj();
                    }
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c + vkq * rqp;
                        v[k * n + q] = vkp * s + vkq * rqq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let vals = order.iter().map(|&i| a[i * n + i].re).collect();
    let frame = ComplexMatrix::from_fn(n, |i, k| v[i * n + order[k]]);
    (vals, frame)
}

/// Eigenvalues and an eigenframe of a unitary matrix.
///
/// The eigen-angles lie among `+-acos` of the eigenvalues of the Hermitian part, which locates a
/// gap `phi` on the circle. After rotating `e^{i phi}` to `-1` the Cayley transform
/// `i (1 - u)(1 + u)^{-1}` is a well-conditioned Hermitian matrix whose Jacobi eigenframe also
/// diagonalizes `u`, including clustered spectra where shifted QR stalls.
pub(crate) fn unitary_eigen(u: &ComplexMatrix) -> (Vec<C64>, ComplexMatrix) {
    let n = u.dim();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0));
    }
    let (cosines, _) = eigh_raw(&u.hermitian_part());
    let mut angles: Vec<f64> = cosines
        .iter()
        .flat_map(|&c| {
            let a = c.clamp(-1.0, 1.0).acos();
            [a, -a]
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut phi = angles[angles.len() - 1] + (angles[0] + 2.0 * PI - angles[angles.len() - 1]) / 2.0;
    let mut widest = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        if w[1] - w[0] > widest {
            widest = w[1] - w[0];
            phi = (w[0] + w[1]) / 2.0;
        }
    }
    let rotated = u.scale_c(-C64::from_polar(1.0, -phi));
    let one = ComplexMatrix::identity(n);
    let denominator = (&one + &rotated).into_inner().try_inverse().expect("rotated spectrum avoids -1");
    let denominator = ComplexMatrix::from_inner(denominator).expect("square");
    let cayley = (&(&one - &rotated) * &denominator).scale_c(I).hermitian_part();
    let (_, frame) = eigh_raw(&cayley);
    let diagonal = &(&frame.adjoint() * u) * &frame;
    (diagonal.diagonal(), frame)
}

/// Applies a real function to a Hermitian matrix through its spectral decomposition.
pub fn hermitian_calculus(x: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let (vals, frame) = eigh_raw(x);
    let d: Vec<C64> = vals.iter().map(|&l| f(l)).collect();
    &(&frame * &ComplexMatrix::from_diagonal(&d)) * &frame.adjoint()
}

/// Angles `theta_k` and frame with `a = V diag(i theta) V*` for skew-Hermitian `a`.
pub(crate) fn skew_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    eigh_raw(&a.scale_c(-I))
}

/// The unitary `e^z` of a skew-Hermitian matrix.
pub fn unitary_exp(z: &ComplexMatrix) -> Result<ComplexMatrix> {
    z.require_skew()?;
    Ok(exp_skew(z))
}

pub(crate) fn exp_skew(z: &ComplexMatrix) -> ComplexMatrix {
    let (theta, frame) = skew_eigen(z);
    let d: Vec<C64> = theta.iter().map(|&t| C64::new(t.cos(), t.sin())).collect();
    &(&frame * &ComplexMatrix::from_diagonal(&d)) * &frame.adjoint()
}

/// Eigenvalues within this distance of -1 are assigned the angle `+pi`.
const BRANCH_CUT_TOL: f64 = 1e-12;

/// Principal angle of a unit-modulus eigenvalue, in `(-pi, pi]`.
pub(crate) fn principal_angle(lambda: C64) -> f64 {
    if (lambda + 1.0).norm() <= BRANCH_CUT_TOL {
        return PI;
    }
    let t = lambda.im.atan2(lambda.re);
    if t <= -PI {
        PI
    } else {
        t
    }
}

/// The skew-Hermitian logarithm of a unitary with eigen-angles in `(-pi, pi]`.
pub fn principal_log(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    u.require_unitary()?;
    Ok(log_unitary(u))
}

pub(crate) fn log_unitary(u: &ComplexMatrix) -> ComplexMatrix {
    let (vals, frame) = unitary_eigen(u);
    let d: Vec<C64> = vals.iter().map(|&l| I * principal_angle(l)).collect();
    (&(&frame * &ComplexMatrix::from_diagonal(&d)) * &frame.adjoint()).skew_part()
}

/// A right-continuous step function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    /// `0 = c_0 < c_1 < ... < c_m = 1`.
    pub breakpoints: Vec<f64>,
    /// Value on `[c_k, c_{k+1})`.
    pub values: Vec<f64>,
}

const SLIVER: f64 = 1e-9;

impl StepFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let m = self.values.len();
        for k in 0..m {
            if t < self.breakpoints[k + 1] {
                return self.values[k];
            }
        }
        self.values[m - 1]
    }

    /// `int_0^1 f(step(t)) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.breakpoints[k + 1] - self.breakpoints[k]) * f(v))
            .sum()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// `sup_t (self(t) - other(t))`, evaluated on the common refinement. Pieces shorter than
    /// `SLIVER` come from roundoff in accumulated trace weights and are skipped.
    pub fn max_excess_over(&self, other: &StepFunction) -> f64 {
        let mut cuts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut worst = f64::NEG_INFINITY;
        for w in cuts.windows(2) {
            if w[1] - w[0] <= SLIVER {
                continue;
            }
            let t = 0.5 * (w[0] + w[1]);
            worst = worst.max(self.eval(t) - other.eval(t));
        }
        worst
    }
}

fn step_from_weighted(mut pairs: Vec<(f64, f64)>) -> StepFunction {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    let mut acc = 0.0;
    for (v, w) in pairs {
        if w <= 1e-15 {
            continue;
        }
        acc += w;
        values.push(v);
        breakpoints.push(acc);
    }
    let last = breakpoints.len() - 1;
    breakpoints[last] = 1.0;
    StepFunction { breakpoints, values }
}

/// The spectral scale `lambda_t(x)` of a Hermitian matrix.
pub fn spectral_scale(x: &ComplexMatrix, alg: &TracialAlgebra) -> Result<StepFunction> {
    let sd = SpectralDecomposition::hermitian(x, alg)?;
    Ok(step_from_weighted(sd.eigenvalues.iter().map(|l| l.re).zip(sd.weights).collect()))
}

/// Generalized s-numbers `mu_t(z) = lambda_t(|z|)`.
pub fn s_numbers(z: &ComplexMatrix, alg: &TracialAlgebra) -> Result<StepFunction> {
    z.require_dim(alg.dim())?;
    let (vals, frame) = eigh_raw(&(z.adjoint() * z));
    let weights = alg.eigen_weights(&frame);
    Ok(step_from_weighted(vals.iter().map(|&l| l.max(0.0).sqrt()).zip(weights).collect()))
}

/// Reduces a real number into `[-pi, pi]` modulo `2 pi`; the identity on `[-pi, pi]`.
pub fn sawtooth(t: f64) -> f64 {
    let two_pi = 2.0 * PI;
    if t > PI {
        t - two_pi * ((t - PI) / two_pi).ceil()
    } else if t < -PI {
        t + two_pi * ((-PI - t) / two_pi).ceil()
    } else {
        t
    }
}

/// Folds the spectrum of a Hermitian matrix into `[-pi, pi]`, preserving `e^{iz}`.
pub fn fold_symbol(z: &ComplexMatrix) -> Result<ComplexMatrix> {
    z.require_hermitian()?;
    let (vals, _) = eigh_raw(z);
    if vals.iter().all(|l| l.abs() <= PI) {
        return Ok(z.clone());
    }
    Ok(hermitian_calculus(z, |l| C64::new(sawtooth(l), 0.0)).hermitian_part())
}
