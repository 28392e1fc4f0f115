//! The lifting equation `G(ad z) z' = w` in the isotropy algebra and epsilon-isometric lifts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::analytic::AdFrame;
use crate::linalg::spectral::exp_skew;
use crate::linalg::{AdSymbol, ComplexMatrix};
use crate::projection::approximant::{best_approximant_unchecked, DEFAULT_TOL, MAX_ITERATIONS};
use crate::projection::SkewSubspace;

use super::curve::{curve_length_p, finite_differences, simpson_weights, CurveTarget, SampledCurve};
use super::space::HomSpace;

/// A continuous piecewise-linear field on the uniform grid `t_k = k / N`.
#[derive(Debug, Clone)]
pub struct PolygonalField {
    values: Vec<ComplexMatrix>,
}

impl PolygonalField {
    pub fn new(values: Vec<ComplexMatrix>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidCurve("a polygonal field needs at least two nodes".into()));
        }
        let n = values[0].dim();
        for v in &values {
            v.require_dim(n)?;
            v.require_skew()?;
        }
        Ok(Self { values })
    }

    pub fn grid_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[ComplexMatrix] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let n = self.grid_n();
        let x = (t * n as f64).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let s = x - k as f64;
        let mut out = self.values[k].scale(1.0 - s);
        out.add_scaled(s, &self.values[k + 1]);
        out
    }

    fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.op_norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftOptions {
    /// Required uniform bound on `||u' u* - w||`.
    pub defect_tol: f64,
    pub max_substeps: usize,
    /// `||z||` at which the accumulated rotation is absorbed into the base unitary and `z` reset.
    pub restart_radius: f64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { defect_tol: 1e-6, max_substeps: 1024, restart_radius: 1.0 }
    }
}

/// Solution of the lifting equation at the field's grid nodes.
#[derive(Debug, Clone, Serialize)]
pub struct LiftSolution {
    pub times: Vec<f64>,
    /// Logarithm coordinate, relative to the last restart.
    pub z: Vec<ComplexMatrix>,
    /// `u(t)`, with `u' u* = w` and `u(0) = 1`.
    pub u: Vec<ComplexMatrix>,
    pub restarts: usize,
    /// Runge-Kutta steps per grid interval.
    pub substeps: usize,
    pub max_defect: f64,
    /// Largest correction applied when projecting `z` back onto the isotropy algebra.
    pub max_projection_displacement: f64,
}

struct Sweep {
    z: Vec<ComplexMatrix>,
    u: Vec<ComplexMatrix>,
    restarts: usize,
    max_defect: f64,
    displacement: f64,
}

fn rhs(z: &ComplexMatrix, w: &ComplexMatrix) -> ComplexMatrix {
    AdFrame::new(z).apply(AdSymbol::GInv, w)
}

fn sweep(field: &PolygonalField, isotropy: &SkewSubspace, m: usize, restart_radius: f64) -> Sweep {
    let n = field.values[0].dim();
    let pieces = field.grid_n();
    let h = 1.0 / (pieces * m) as f64;
    let mut z = ComplexMatrix::zeros(n);
    let mut base = ComplexMatrix::identity(n);
    let mut out_z = vec![z.clone()];
    let mut out_u = vec![base.clone()];
    let mut restarts = 0;
    let mut max_defect: f64 = 0.0;
    let mut displacement: f64 = 0.0;
    for piece in 0..pieces {
        let mut local_u = vec![&exp_skew(&z) * &base];
        let mut local_w = vec![field.eval(piece as f64 / pieces as f64)];
        for step in 0..m {
            let t = (piece * m + step) as f64 * h;
            let w0 = field.eval(t);
            let wh = field.eval(t + 0.5 * h);
            let w1 = field.eval(t + h);
            let k1 = rhs(&z, &w0);
            let k2 = rhs(&(&z + &k1.scale(0.5 * h)), &wh);
            let k3 = rhs(&(&z + &k2.scale(0.5 * h)), &wh);
            let k4 = rhs(&(&z + &k3.scale(h)), &w1);
            let mut incr = &k1 + &k4;
            incr.add_scaled(2.0, &k2);
            incr.add_scaled(2.0, &k3);
            z.add_scaled(h / 6.0, &incr);
            let zs = z.skew_part();
            let projected = isotropy.project_orthogonal(&zs);
            displacement = displacement.max((&projected - &zs).max_abs());
            z = projected;
            local_u.push(&exp_skew(&z) * &base);
            local_w.push(w1);
            if z.op_norm() >= restart_radius {
                base = local_u[local_u.len() - 1].clone();
                z = ComplexMatrix::zeros(n);
                restarts += 1;
            }
        }
        if local_u.len() >= 5 {
            let derivs = finite_differences(&local_u, h);
            for ((u, d), w) in local_u.iter().zip(&derivs).zip(&local_w) {
                max_defect = max_defect.max((&(d * &u.adjoint()) - w).op_norm());
            }
        }
        out_z.push(z.clone());
        out_u.push(local_u[local_u.len() - 1].clone());
    }
    Sweep { z: out_z, u: out_u, restarts, max_defect, displacement }
}

/// Solves `u' u* = w`, `u(0) = 1`, for a field `w` in the isotropy algebra through the
/// logarithmic coordinate `z' = G(ad z)^{-1} w`, doubling the number of Runge-Kutta steps until
/// the finite-difference defect meets the tolerance.
pub fn lift_ode_solve(field: &PolygonalField, isotropy: &SkewSubspace, options: &LiftOptions) -> Result<LiftSolution> {
    if !(options.restart_radius > 0.0 && options.restart_radius < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidConfig("restart radius must lie in (0, pi/2)".into()));
    }
    field.values[0].require_dim(isotropy.ambient().dim())?;
    for v in &field.values {
        if isotropy.distance_to_span(v) > 1e-9 * (1.0 + v.max_abs()) {
            return Err(Error::Precondition("field values in the isotropy algebra"));
        }
    }
    let pieces = field.grid_n();
    // Enough steps that one step moves z by well under the restart radius.
    let mut m = 4usize.max((8.0 * field.max_norm() / pieces as f64).ceil() as usize);
    loop {
        let s = sweep(field, isotropy, m, options.restart_radius);
        if s.max_defect < options.defect_tol || m >= options.max_substeps {
            if s.max_defect >= options.defect_tol {
                return Err(Error::NonConvergence { iterations: m, residual: s.max_defect });
            }
            return Ok(LiftSolution {
                times: (0..=pieces).map(|k| k as f64 / pieces as f64).collect(),
                z: s.z,
                u: s.u,
                restarts: s.restarts,
                substeps: m,
                max_defect: s.max_defect,
                max_projection_displacement: s.displacement,
            });
        }
        m *= 2;
    }
}

/// An epsilon-isometric lift `beta = Gamma u` of an orbit curve.
#[derive(Debug, Clone)]
pub struct EpsilonLift {
    pub beta: SampledCurve,
    /// Grid indices where the polygonal approximation of `-Q(Gamma* Gamma')` has its vertices.
    pub vertices: Vec<usize>,
    /// `max_k ||w(t_k) + Q(Gamma* Gamma'(t_k))||_p`.
    pub max_interpolation_error: f64,
    pub length_beta: f64,
    pub quotient_length: f64,
    /// Largest mismatch between `beta(t_k) . x` and `Gamma(t_k) . x`.
    pub max_point_mismatch: f64,
    pub ode: LiftSolution,
}

impl EpsilonLift {
    pub fn excess(&self) -> f64 {
        self.length_beta - self.quotient_length
    }
}

fn chord_error(alpha: &[ComplexMatrix], i: usize, j: usize, p: f64, space: &HomSpace) -> f64 {
    let alg = space.ambient();
    let mut worst: f64 = 0.0;
    for k in (i + 1)..j {
        let s = (k - i) as f64 / (j - i) as f64;
        let mut interp = alpha[i].scale(1.0 - s);
        interp.add_scaled(s, &alpha[j]);
        worst = worst.max(alg.p_norm_unchecked(&(&interp - &alpha[k]), p));
    }
    worst
}

/// Builds a unitary lift of the orbit curve `Gamma . x` whose `p`-length exceeds the quotient
/// length by less than `eps`.
pub fn epsilon_isometric_lift(curve: &SampledCurve, space: &HomSpace, p: u32, eps: f64) -> Result<EpsilonLift> {
    crate::linalg::even_exponent(p as f64)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition("eps > 0"));
    }
    curve.node(0).require_dim(space.ambient().dim())?;
    let pf = p as f64;
    let alg = space.ambient();
    let velocities = curve.velocities();
    let mut alpha = Vec::with_capacity(velocities.len());
    let mut residual_norms = Vec::with_capacity(velocities.len());
    for v in velocities.iter() {
        let q = best_approximant_unchecked(v, space.isotropy(), p, DEFAULT_TOL, MAX_ITERATIONS)?;
        residual_norms.push(alg.p_norm_unchecked(&q.residual, pf));
        alpha.push(q.projection.scale(-1.0));
    }
    let last = alpha.len() - 1;
    let mut vertices = vec![0];
    let mut i = 0;
    while i < last {
        let mut j = i + 1;
        while j < last && chord_error(&alpha, i, j + 1, pf, space) < eps / 3.0 {
            j += 1;
        }
        vertices.push(j);
        i = j;
    }
    let mut w = alpha.clone();
    for pair in vertices.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for k in (a + 1)..b {
            let s = (k - a) as f64 / (b - a) as f64;
            let mut interp = alpha[a].scale(1.0 - s);
            interp.add_scaled(s, &alpha[b]);
            w[k] = space.isotropy().project_orthogonal(&interp);
        }
    }
    for wk in w.iter_mut() {
        *wk = space.isotropy().project_orthogonal(wk);
    }
    let max_interpolation_error =
        w.iter().zip(&alpha).map(|(a, b)| alg.p_norm_unchecked(&(a - b), pf)).fold(0.0, f64::max);
    let field = PolygonalField::new(w.clone())?;
    let ode = lift_ode_solve(&field, space.isotropy(), &LiftOptions::default())?;
    let mut nodes = Vec::with_capacity(w.len());
    let mut beta_velocities = Vec::with_capacity(w.len());
    let mut max_point_mismatch: f64 = 0.0;
    for (k, u) in ode.u.iter().enumerate() {
        let b = curve.node(k) * u;
        max_point_mismatch = max_point_mismatch.max(space.point_mismatch(&b, curve.node(k)));
        nodes.push(b);
        beta_velocities.push((&(&u.adjoint() * &(&velocities[k] + &w[k])) * u).skew_part());
    }
    let beta = SampledCurve::with_velocities(nodes, beta_velocities, CurveTarget::Unitary)?;
    let length_beta = curve_length_p(&beta, pf, alg)?;
    let weights = simpson_weights(curve.grid_n());
    let quotient_length = residual_norms.iter().zip(&weights).map(|(r, w)| r * w).sum();
    Ok(EpsilonLift { beta, vertices, max_interpolation_error, length_beta, quotient_length, max_point_mismatch, ode })
}
