//! Numerical probes of length minimality, convexity and the rectifiable distance.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::algebra::check_exponent;
use crate::linalg::spectral::{exp_skew, log_unitary};
use crate::linalg::{ComplexMatrix, TracialAlgebra};
use crate::projection::approximant::{best_approximant_unchecked, DEFAULT_TOL, MAX_ITERATIONS};
use crate::random::{self, trial_rng};

use super::curve::{quotient_length, simpson_weights, CurveTarget, SampledCurve};
use super::distance::{quotient_distance, QuotientDistanceOptions};
use super::space::HomSpace;

/// Partition sums of the quotient distance along a sampled orbit curve.
#[derive(Debug, Clone, Serialize)]
pub struct RectifiableLength {
    pub value: f64,
    /// `(intervals, sum)` for each dyadic level visited.
    pub levels: Vec<(usize, f64)>,
    pub monotone: bool,
}

/// `sup` over partitions of `sum d(gamma(t_i), gamma(t_{i+1}))`, estimated on dyadic
/// partitions of the curve's own grid.
pub fn rectifiable_path_length(curve: &SampledCurve, space: &HomSpace, p: f64) -> Result<RectifiableLength> {
    check_exponent(p)?;
    let n = curve.grid_n();
    let options = QuotientDistanceOptions { multistarts: 2, ..Default::default() };
    let mut levels: Vec<(usize, f64)> = Vec::new();
    let mut intervals = 1;
    loop {
        let m = intervals.min(n);
        let index = |i: usize| ((i * n) as f64 / m as f64).round() as usize;
        let mut sum = 0.0;
        for i in 0..m {
            sum += quotient_distance(space, curve.node(index(i)), curve.node(index(i + 1)), p, &options)?.value;
        }
        let increase = levels.last().map(|(_, s)| sum - s);
        levels.push((m, sum));
        if m == n || increase.is_some_and(|d| d.abs() < 1e-6) {
            break;
        }
        intervals *= 2;
    }
    let monotone = levels.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
    Ok(RectifiableLength { value: levels.last().map(|l| l.1).unwrap_or(0.0), levels, monotone })
}

/// Samples of `f(s) = d_p(u, v e^{s z})^p`, `z = log(v* w)`, and their second differences.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityProfile {
    pub values: Vec<f64>,
    pub second_differences: Vec<f64>,
    pub min_second_difference: f64,
    pub mean_second_difference: f64,
    /// `u` lies on the prolongation of the geodesic from `v` to `w`.
    pub collinear: bool,
    pub convex: bool,
}

pub const CONVEXITY_NODES: usize = 65;

pub fn convexity_probe(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    p: f64,
    alg: &TracialAlgebra,
) -> Result<ConvexityProfile> {
    check_exponent(p)?;
    for x in [u, v, w] {
        alg.require_member(x)?;
        x.require_unitary()?;
    }
    let uv = (u - v).op_norm();
    let wv = (w - v).op_norm();
    let root2 = std::f64::consts::SQRT_2;
    if uv >= root2 {
        return Err(Error::Radius(format!("||u - v|| = {uv} is not below sqrt 2")));
    }
    if wv >= root2 - uv {
        return Err(Error::Radius(format!("||w - v|| = {wv} is not below sqrt 2 - ||u - v||")));
    }
    let z = log_unitary(&(v.adjoint() * w));
    let a = log_unitary(&(v.adjoint() * u));
    let (na, nz) = (alg.norm2(&a), alg.norm2(&z));
    let collinear = na < 1e-14 || nz < 1e-14 || alg.inner(&a, &z).abs() >= (1.0 - 1e-8) * na * nz;
    let ua = u.adjoint();
    let values: Vec<f64> = (0..CONVEXITY_NODES)
        .map(|k| {
            let s = k as f64 / (CONVEXITY_NODES - 1) as f64;
            let x = log_unitary(&(&(&ua * v) * &exp_skew(&z.scale(s))));
            alg.p_norm_unchecked(&x, p).powf(p)
        })
        .collect();
    let second_differences: Vec<f64> = values.windows(3).map(|t| t[0] - 2.0 * t[1] + t[2]).collect();
    let min_second_difference = second_differences.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_second_difference = second_differences.iter().sum::<f64>() / second_differences.len() as f64;
    let convex = min_second_difference >= -1e-8 && (collinear || mean_second_difference > 0.0);
    Ok(ConvexityProfile { values, second_differences, min_second_difference, mean_second_difference, collinear, convex })
}

/// How a competitor curve perturbs the geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompetitorKind {
    /// Loop direction drawn from the whole skew part.
    General,
    /// Loop inside the isotropy algebra: the orbit curve is the geodesic itself.
    Vertical,
    /// Loop in the supplement.
    Horizontal,
    /// Monotone reparametrization of the geodesic.
    Reparametrization,
}

const KINDS: [CompetitorKind; 4] =
    [CompetitorKind::General, CompetitorKind::Vertical, CompetitorKind::Horizontal, CompetitorKind::Reparametrization];

#[derive(Debug, Clone, Copy)]
pub struct MinimalityOptions {
    pub trials: usize,
    pub seed: u64,
    pub grid_n: usize,
    pub length_tol: f64,
    pub equality_tol: f64,
    pub uniqueness_tol: f64,
}

impl Default for MinimalityOptions {
    fn default() -> Self {
        Self { trials: 200, seed: 0, grid_n: 64, length_tol: 1e-6, equality_tol: 1e-7, uniqueness_tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimalityReport {
    pub p: u32,
    pub geodesic_length: f64,
    pub epsilon: f64,
    pub radius: f64,
    pub supplement_constant: f64,
    pub approximant_constant: f64,
    pub trials: usize,
    /// Competitors whose uniform quotient length bound could not be brought below epsilon.
    pub vacuous: usize,
    pub violations: usize,
    /// `min (L(gamma) - ||z||_p)` over admissible competitors.
    pub worst_margin: f64,
    /// Competitors whose length matched `||z||_p` within the equality tolerance.
    pub equal_length: usize,
    pub uniqueness_violations: usize,
    /// Largest distance from a node of an equal-length competitor to the geodesic's trace.
    pub max_trace_deviation: f64,
}

/// Upper bound for `int inf_y ||Gamma* Gamma' - y|| dt`.
fn uniform_quotient_length_bound(curve: &SampledCurve, space: &HomSpace, p: u32) -> Result<f64> {
    let weights = simpson_weights(curve.grid_n());
    let mut total = 0.0;
    for (v, w) in curve.velocities().iter().zip(&weights) {
        let p2 = space.isotropy().project_orthogonal(v);
        let q = best_approximant_unchecked(v, space.isotropy(), p, DEFAULT_TOL, MAX_ITERATIONS)?;
        let bound = v.op_norm().min((v - &p2).op_norm()).min(q.residual.op_norm());
        total += w * bound;
    }
    Ok(total)
}

fn trace_deviation(space: &HomSpace, z: &ComplexMatrix, point: &ComplexMatrix) -> f64 {
    let f = |s: f64| space.point_mismatch(&exp_skew(&z.scale(s)), point);
    let grid = 64;
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for k in 0..=grid {
        let val = f(k as f64 / grid as f64);
        if val < best {
            best = val;
            best_k = k;
        }
    }
    let mut lo = (best_k.max(1) - 1) as f64 / grid as f64;
    let mut hi = (best_k + 1).min(grid) as f64 / grid as f64;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(f(0.5 * (lo + hi)))
}

fn competitor(
    space: &HomSpace,
    z: &ComplexMatrix,
    kind: CompetitorKind,
    amplitude: f64,
    dirs: &(ComplexMatrix, ComplexMatrix),
    grid_n: usize,
) -> Result<SampledCurve> {
    let n = space.ambient().dim();
    let one = ComplexMatrix::identity(n);
    match kind {
        CompetitorKind::Reparametrization => {
            // phi(t) = t + a t (1 - t), monotone for |a| < 1
            let a = amplitude.clamp(-0.9, 0.9);
            let g = |t: f64| (z.scale(t + a * t * (1.0 - t)), z.scale(1.0 + a * (1.0 - 2.0 * t)));
            SampledCurve::product_of_exponentials(&one, &[&g], grid_n, CurveTarget::Orbit)
        }
        _ => {
            let (x0, x1) = dirs;
            let geodesic = |t: f64| (z.scale(t), z.clone());
            let loop_gen = |t: f64| {
                let bump = amplitude * t * (1.0 - t);
                let dbump = amplitude * (1.0 - 2.0 * t);
                let mut xi = x0.clone();
                xi.add_scaled(2.0 * t - 1.0, x1);
                let mut dh = xi.scale(dbump);
                dh.add_scaled(2.0 * bump, x1);
                (xi.scale(bump), dh)
            };
            SampledCurve::product_of_exponentials(&one, &[&geodesic, &loop_gen], grid_n, CurveTarget::Orbit)
        }
    }
}

/// Compares the geodesic `t -> e^{t z} . x` against random competitor curves with the same
/// endpoints whose uniform quotient length stays below epsilon.
pub fn minimality_probe(space: &HomSpace, z: &ComplexMatrix, p: u32, options: &MinimalityOptions) -> Result<MinimalityReport> {
    crate::linalg::even_exponent(p as f64)?;
    let alg = space.ambient();
    alg.require_member(z)?;
    z.require_skew()?;
    let k = space
        .approximant_constant(p)
        .ok_or_else(|| Error::InvalidConfig(format!("space has no approximant constant for p = {p}")))?;
    let pf = p as f64;
    let length = alg.p_norm_unchecked(z, pf);
    let q = best_approximant_unchecked(z, space.isotropy(), p, DEFAULT_TOL, MAX_ITERATIONS)?;
    if alg.p_norm_unchecked(&q.projection, pf) > 1e-8 * (1.0 + length) {
        return Err(Error::Precondition("Q(z) = 0"));
    }
    if z.op_norm() >= std::f64::consts::FRAC_PI_3 {
        return Err(Error::Precondition("||z|| < pi/3"));
    }
    let epsilon = space.epsilon(p)?;
    let mut report = MinimalityReport {
        p,
        geodesic_length: length,
        epsilon,
        radius: space.geodesic_radius(p)?,
        supplement_constant: space.supplement_constant().value,
        approximant_constant: k.value,
        trials: options.trials,
        vacuous: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        equal_length: 0,
        uniqueness_violations: 0,
        max_trace_deviation: 0.0,
    };
    let n = alg.dim();
    for trial in 0..options.trials {
        let mut rng = trial_rng(options.seed, trial as u64);
        let kind = KINDS[trial % KINDS.len()];
        let draw = |rng: &mut crate::random::TrialRng| match kind {
            CompetitorKind::Vertical => random::combination(space.isotropy().basis(), n, rng),
            CompetitorKind::Horizontal => random::combination(space.supplement().basis(), n, rng),
            _ => random::skew(alg, rng),
        };
        let mut x0 = draw(&mut rng);
        let mut x1 = draw(&mut rng);
        for x in [&mut x0, &mut x1] {
            let s = x.op_norm();
            if s > 0.0 {
                *x = x.scale(1.0 / s);
            }
        }
        let mut amplitude = if kind == CompetitorKind::Reparametrization {
            rng.random_range(-0.9..0.9)
        } else {
            rng.random_range(0.5..4.0)
        };
        let dirs = (x0, x1);
        let mut admissible = None;
        for _ in 0..=20 {
            let curve = competitor(space, z, kind, amplitude, &dirs, options.grid_n)?;
            if uniform_quotient_length_bound(&curve, space, p)? < epsilon {
                admissible = Some(curve);
                break;
            }
            amplitude *= 0.5;
        }
        let Some(curve) = admissible else {
            report.vacuous += 1;
            continue;
        };
        let l = quotient_length(&curve, space, pf)?;
        let margin = l - length;
        report.worst_margin = report.worst_margin.min(margin);
        if margin < -options.length_tol {
            report.violations += 1;
        }
        if margin.abs() <= options.equality_tol {
            report.equal_length += 1;
            let dev = curve.nodes().iter().map(|u| trace_deviation(space, z, u)).fold(0.0, f64::max);
            report.max_trace_deviation = report.max_trace_deviation.max(dev);
            if dev > options.uniqueness_tol {
                report.uniqueness_violations += 1;
            }
        }
    }
    Ok(report)
}
