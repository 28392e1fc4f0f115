//! The distance `d_p` on the unitary group and the quotient distance on orbits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::algebra::check_exponent;
use crate::linalg::analytic::{sign_half, AdFrame};
use crate::linalg::spectral::{exp_skew, log_unitary};
use crate::linalg::{even_exponent, AdSymbol, ComplexMatrix, TracialAlgebra};
use crate::projection::approximant::{best_approximant_unchecked, DEFAULT_TOL, MAX_ITERATIONS};
use crate::random::{self, trial_rng};

use super::space::HomSpace;

/// `d_p(u, v) = ||log(u* v)||_p`.
pub fn unitary_distance(u: &ComplexMatrix, v: &ComplexMatrix, p: f64, alg: &TracialAlgebra) -> Result<f64> {
    check_exponent(p)?;
    for w in [u, v] {
        alg.require_member(w)?;
        w.require_unitary()?;
    }
    Ok(alg.p_norm_unchecked(&log_unitary(&(u.adjoint() * v)), p))
}

/// Distance from `1` below which a unitary counts as sitting on the cut locus.
const CUT_MARGIN: f64 = 1e-6;

fn on_cut_locus(w: &ComplexMatrix) -> bool {
    (&ComplexMatrix::identity(w.dim()) - w).op_norm() >= 2.0 - CUT_MARGIN
}

#[derive(Debug, Clone, Copy)]
pub struct QuotientDistanceOptions {
    /// Number of starting points; the first is the identity, the second a projected warm start.
    pub multistarts: usize,
    pub seed: u64,
    /// Target for the stationarity residual `max_k |tau(w^{p-1} b_k)|`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for QuotientDistanceOptions {
    fn default() -> Self {
        Self { multistarts: 4, seed: 0, tol: 1e-12, max_iterations: 200 }
    }
}

/// `min_{g in G_x} d_p(u, v g)` with its minimizer.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientDistance {
    pub value: f64,
    /// `max_k |tau(w^{p-1} b_k)|` at the returned minimizer (zero at a critical point).
    pub stationarity_residual: f64,
    /// True for even p, where the residual is a first-order certificate.
    pub certified: bool,
    /// Minimizing isotropy element `g`.
    pub group_element: ComplexMatrix,
    /// `w = log(u* v g)`.
    pub symbol: ComplexMatrix,
    pub starts: usize,
    pub cut_locus_rejections: usize,
}

struct GroupObjective<'a> {
    a: &'a ComplexMatrix,
    space: &'a HomSpace,
    p: f64,
}

struct GroupState {
    g: ComplexMatrix,
    w: ComplexMatrix,
    value: f64,
}

impl GroupObjective<'_> {
    fn alg(&self) -> &TracialAlgebra {
        self.space.ambient()
    }

    fn state(&self, g: ComplexMatrix) -> Option<GroupState> {
        let big_w = self.a * &g;
        if on_cut_locus(&big_w) {
            return None;
        }
        let w = log_unitary(&big_w);
        let value = self.alg().p_norm_unchecked(&w, self.p);
        Some(GroupState { g, w, value })
    }

    fn moved(&self, s: &GroupState, eta: &[f64]) -> Option<GroupState> {
        let step = self.space.isotropy().combine(eta);
        self.state(&s.g * &exp_skew(&step))
    }

    /// Traces `tau(w^{p-1} b_k)`; the gradient is `(-1)^{p/2} p` times these.
    fn traces(&self, w_powers: &[ComplexMatrix], p: u32) -> Vec<f64> {
        let top = &w_powers[p as usize - 1];
        self.space.isotropy().basis().iter().map(|b| self.alg().trace_product(top, b).re).collect()
    }

    fn residual(&self, s: &GroupState, p: u32) -> f64 {
        let powers = s.w.powers(p as usize - 1);
        self.traces(&powers, p).iter().fold(0.0f64, |m, t| m.max(t.abs()))
    }

    /// Newton iteration on the right-trivialized gradient field for an even exponent.
    fn newton(&self, mut s: GroupState, p: u32, tol: f64, max_iterations: usize) -> GroupState {
        let basis = self.space.isotropy().basis();
        let k = basis.len();
        let sign = sign_half(p);
        let scale = sign * p as f64;
        for _ in 0..max_iterations {
            let powers = s.w.powers(p as usize - 1);
            let traces = self.traces(&powers, p);
            let residual = traces.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            if residual <= tol {
                break;
            }
            let grad: Vec<f64> = traces.iter().map(|t| scale * t).collect();
            let frame = AdFrame::new(&s.w);
            let mut dir: Option<Vec<f64>> = None;
            if frame.norm() < 0.95 * std::f64::consts::PI {
                let mut jac = DMatrix::<f64>::zeros(k, k);
                let pp = p as usize;
                for j in 0..k {
                    let d = frame.apply(AdSymbol::FInv, &basis[j]);
                    let mut sum = ComplexMatrix::zeros(d.dim());
                    for i in 0..=(pp - 2) {
                        sum += &(&(&powers[pp - 2 - i] * &d) * &powers[i]);
                    }
                    for (l, b) in basis.iter().enumerate() {
                        jac[(j, l)] = scale * self.alg().trace_product(&sum, b).re;
                    }
                }
                let g = DVector::from_column_slice(&grad);
                // jac[(j, l)] is the derivative of gradient component l along b_j.
                let jt = jac.transpose();
                if let Some(d) = jt.clone().lu().solve(&(-&g)) {
                    if d.dot(&g) < 0.0 && d.iter().all(|x| x.is_finite()) {
                        dir = Some(d.iter().cloned().collect());
                    }
                }
                if dir.is_none() {
                    let sym = (&jt + &jac).scale(0.5);
                    if let Some(ch) = sym.cholesky() {
                        let d = ch.solve(&(-&g));
                        if d.dot(&g) < 0.0 {
                            dir = Some(d.iter().cloned().collect());
                        }
                    }
                }
            }
            let dir = dir.unwrap_or_else(|| grad.iter().map(|x| -x).collect());
            let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
            let objective = |st: &GroupState| st.value.powi(p as i32);
            let current = objective(&s);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..50 {
                let eta: Vec<f64> = dir.iter().map(|d| t * d).collect();
                if let Some(next) = self.moved(&s, &eta) {
                    let value = objective(&next);
                    let armijo = value <= current + 1e-4 * t * slope;
                    let roundoff = value <= current * (1.0 + 1e-14) && self.residual(&next, p) < residual;
                    if armijo || roundoff {
                        accepted = Some(next);
                        break;
                    }
                }
                t *= 0.5;
            }
            match accepted {
                Some(next) => s = next,
                None => break,
            }
        }
        s
    }

    /// Compass search in the isotropy algebra for exponents without a smooth certificate.
    fn pattern_search(&self, mut s: GroupState) -> GroupState {
        let k = self.space.isotropy().dim();
        let mut step = 0.25;
        let mut evaluations = 0;
        while step > 1e-10 && evaluations < 5000 {
            let mut improved = false;
            for j in 0..k {
                for sgn in [1.0, -1.0] {
                    let mut eta = vec![0.0; k];
                    eta[j] = sgn * step;
                    evaluations += 1;
                    if let Some(next) = self.moved(&s, &eta) {
                        if next.value < s.value {
                            s = next;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        s
    }
}

/// The quotient distance `min_{g in G_x} ||log(u* v g)||_p` between `u . x` and `v . x`.
pub fn quotient_distance(
    space: &HomSpace,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    p: f64,
    options: &QuotientDistanceOptions,
) -> Result<QuotientDistance> {
    check_exponent(p)?;
    let alg = space.ambient();
    for w in [u, v] {
        alg.require_member(w)?;
        w.require_unitary()?;
    }
    let a = u.adjoint() * v;
    let n = alg.dim();
    let even = even_exponent(p).ok();
    let iso = space.isotropy();
    if iso.dim() == 0 {
        let w = log_unitary(&a);
        let value = alg.p_norm_unchecked(&w, p);
        return Ok(QuotientDistance {
            value,
            stationarity_residual: 0.0,
            certified: even.is_some(),
            group_element: ComplexMatrix::identity(n),
            symbol: w,
            starts: 1,
            cut_locus_rejections: 0,
        });
    }
    let objective = GroupObjective { a: &a, space, p };
    let mut rng = trial_rng(options.seed, 0x9D);
    let mut best: Option<GroupState> = None;
    let mut rejections = 0;
    let starts = options.multistarts.max(1);
    for start in 0..starts {
        let g0 = match start {
            0 => ComplexMatrix::identity(n),
            1 => {
                let l = log_unitary(&a);
                exp_skew(&iso.project_orthogonal(&l).scale(-1.0))
            }
            _ => {
                let y = random::combination(iso.basis(), n, &mut rng);
                let s = y.op_norm();
                let radius = std::f64::consts::PI * rand::Rng::random::<f64>(&mut rng);
                exp_skew(&if s > 0.0 { y.scale(radius / s) } else { y })
            }
        };
        let Some(mut s) = objective.state(g0) else {
            rejections += 1;
            continue;
        };
        s = objective.newton(s, 2, options.tol, options.max_iterations);
        s = match even {
            Some(2) => s,
            Some(pe) => objective.newton(s, pe, options.tol, options.max_iterations),
            None => objective.pattern_search(s),
        };
        if best.as_ref().is_none_or(|b| s.value < b.value) {
            best = Some(s);
        }
    }
    let best = best.ok_or(Error::CutLocus)?;
    let residual = match even {
        Some(pe) => objective.residual(&best, pe),
        None => f64::NAN,
    };
    Ok(QuotientDistance {
        value: best.value,
        stationarity_residual: residual,
        certified: even.is_some(),
        group_element: best.g,
        symbol: best.w,
        starts,
        cut_locus_rejections: rejections,
    })
}

/// A geodesic `t -> e^{t z} . x` from the basepoint to a target point.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicResult {
    pub symbol: ComplexMatrix,
    /// `||z||_p`.
    pub length_p: f64,
    /// Uniform norm `||z||`.
    pub symbol_norm: f64,
    /// Mismatch between `e^z . x` and the target.
    pub endpoint_error: f64,
    /// Stationarity residual of the coset optimization.
    pub minimality_certificate: f64,
    /// `||Q(z)||_p`: zero for a minimal lifting.
    pub approximant_norm: f64,
    pub epsilon: f64,
    pub radius: f64,
    /// `||z|| < radius`.
    pub within_radius: bool,
    pub p: u32,
}

/// Minimal geodesic from `x` to `v . x`, certified through the minimal-lifting condition.
pub fn minimal_geodesic(
    space: &HomSpace,
    target: &ComplexMatrix,
    p: u32,
    options: &QuotientDistanceOptions,
) -> Result<GeodesicResult> {
    even_exponent(p as f64)?;
    let n = space.ambient().dim();
    let qd = quotient_distance(space, &ComplexMatrix::identity(n), target, p as f64, options)?;
    let z = qd.symbol;
    let q = best_approximant_unchecked(&z, space.isotropy(), p, DEFAULT_TOL, MAX_ITERATIONS)?;
    let approximant_norm = space.ambient().p_norm_unchecked(&q.projection, p as f64);
    let endpoint_error = space.point_mismatch(&exp_skew(&z), target);
    let symbol_norm = z.op_norm();
    let (epsilon, radius) = match space.approximant_constant(p) {
        Some(_) => (space.epsilon(p)?, space.geodesic_radius(p)?),
        None => (f64::NAN, f64::NAN),
    };
    Ok(GeodesicResult {
        length_p: qd.value,
        symbol_norm,
        endpoint_error,
        minimality_certificate: qd.stationarity_residual,
        approximant_norm,
        epsilon,
        radius,
        within_radius: symbol_norm < radius,
        symbol: z,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::space::{ActionKind, KnownConstants};
    use crate::linalg::{C64, I};
    use crate::projection::{SkewSubspace, SubalgebraKind};

    #[test]
    fn antipodal_distance_is_pi() {
        let alg = TracialAlgebra::full(3);
        let one = ComplexMatrix::identity(3);
        for p in [1.0, 2.0, 4.0, 3.5, f64::INFINITY] {
            let d = unitary_distance(&one, &one.scale(-1.0), p, &alg).unwrap();
            assert!((d - std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_isotropy_reduces_to_group_distance() {
        let alg = TracialAlgebra::full(3);
        let space = HomSpace::unitary_group(alg.clone()).unwrap();
        let mut rng = trial_rng(1, 0);
        let u = random::unitary(&alg, &mut rng);
        let v = random::unitary(&alg, &mut rng);
        let qd = quotient_distance(&space, &u, &v, 4.0, &QuotientDistanceOptions::default()).unwrap();
        assert!((qd.value - unitary_distance(&u, &v, 4.0, &alg).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn same_point_has_zero_distance() {
        let alg = TracialAlgebra::direct_sum(&[2, 1]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CenterBlocks).unwrap();
        let space = HomSpace::new(ActionKind::Coset, ComplexMatrix::identity(3), g, KnownConstants::default(), &[], 0).unwrap();
        let mut rng = trial_rng(2, 0);
        let u = random::unitary(&alg, &mut rng);
        let phase = ComplexMatrix::from_diagonal(&[C64::new(0.6, 0.8), C64::new(0.6, 0.8), I]);
        let qd = quotient_distance(&space, &u, &(&u * &phase), 4.0, &QuotientDistanceOptions::default()).unwrap();
        assert!(qd.value < 1e-10);
    }

    #[test]
    fn geodesic_to_basepoint_is_trivial() {
        let alg = TracialAlgebra::tensor_m2(&[1]).unwrap();
        let g = SkewSubspace::from_kind(alg, SubalgebraKind::DiagM2).unwrap();
        let known = KnownConstants { supplement_projection: Some(2.0), approximant_bound: Some(1.0) };
        let space = HomSpace::new(ActionKind::Coset, ComplexMatrix::identity(2), g, known, &[4], 0).unwrap();
        let r = minimal_geodesic(&space, &ComplexMatrix::identity(2), 4, &QuotientDistanceOptions::default()).unwrap();
        assert!(r.symbol.max_abs() < 1e-14);
        assert!(r.within_radius);
    }

    #[test]
    fn geodesic_with_trivial_isotropy_is_the_logarithm() {
        let alg = TracialAlgebra::full(2);
        let space = HomSpace::unitary_group(alg.clone()).unwrap();
        let mut rng = trial_rng(3, 0);
        let v = random::unitary(&alg, &mut rng);
        let r = minimal_geodesic(&space, &v, 2, &QuotientDistanceOptions::default()).unwrap();
        assert!((&r.symbol - &log_unitary(&v)).max_abs() < 1e-14);
    }
}
