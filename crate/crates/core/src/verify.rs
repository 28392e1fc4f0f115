//! Seeded verification suites over the whole toolkit and the report they produce.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{run_check, CheckRecord};
use crate::error::{Error, Result};
use crate::geometry::{
    convexity_probe, curve_length_p, epsilon_isometric_lift, lift_ode_solve, minimality_probe, unitary_distance, CurveTarget,
    HomSpace, LiftOptions, MinimalityOptions, PolygonalField, SampledCurve,
};
use crate::linalg::analytic::AdFrame;
use crate::linalg::spectral::{exp_skew, log_unitary};
use crate::linalg::{
    even_exponent, exp_differential, fold_symbol, hermitian_calculus, inverse_symbol_bound, qf, s_numbers, spectral_scale,
    AdSymbol, ComplexMatrix, TracialAlgebra, C64, I,
};
use crate::models::{build_model_space, model_checks, ModelKind, ModelSpec};
use crate::projection::approximant::{best_approximant_unchecked, MAX_ITERATIONS};
use crate::projection::SkewSubspace;
use crate::random::{self, TrialRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Projection,
    Geometry,
    Models,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Core, Suite::Projection, Suite::Geometry, Suite::Models];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Projection => "projection",
            Suite::Geometry => "geometry",
            Suite::Models => "models",
        }
    }
}

/// Named tolerances and their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 13] = [
    ("approximant", 1e-10),
    ("clarkson", 1e-10),
    ("convexity", 1e-8),
    ("criterion", 1e-8),
    ("invariance", 1e-10),
    ("lift-defect", 1e-6),
    ("lift-excess", 1e-5),
    ("metric", 1e-9),
    ("minimality", 1e-6),
    ("model", 1e-8),
    ("quadrature", 1e-8),
    ("roundtrip", 1e-9),
    ("spectral", 1e-10),
];

fn default_seed() -> u64 {
    20_240_601
}
fn default_dims() -> Vec<usize> {
    vec![2, 4]
}
fn default_p_list() -> Vec<f64> {
    vec![2.0, 4.0]
}
fn default_trials() -> usize {
    100
}
fn default_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Overrides of the default tolerances; after validation this holds every named tolerance.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            dims: default_dims(),
            p_list: default_p_list(),
            trials: default_trials(),
            tolerances: BTreeMap::new(),
            suites: default_suites(),
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text)?;
        cfg.validated()
    }

    /// Checks the config and fills in default tolerances.
    pub fn validated(mut self) -> Result<Self> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&n| n == 0 || n > 8) {
            return Err(Error::InvalidConfig("dims must be between 1 and 8".into()));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| !(p >= 1.0) || p.is_infinite()) {
            return Err(Error::InvalidConfig("p_list entries must be finite and at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::InvalidConfig("no suites selected".into()));
        }
        for (name, value) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidConfig(format!("unknown tolerance `{name}`")));
            }
            if !(*value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidConfig(format!("tolerance `{name}` must be positive")));
            }
        }
        for (name, value) in DEFAULT_TOLERANCES {
            self.tolerances.entry(name.to_string()).or_insert(value);
        }
        self.suites.sort();
        self.suites.dedup();
        Ok(self)
    }

    fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRecord {
    pub suite: String,
    /// Name of the mathematical statement the check exercises.
    pub anchor: String,
    pub check: String,
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub tolerance: f64,
    pub violations: usize,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub rng: String,
    pub float: String,
}

impl Environment {
    fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: "ChaCha8 keyed by seed_from_u64(derived seed), stream = trial index".into(),
            float: "IEEE-754 binary64".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: SuiteConfig,
    pub environment: Environment,
    pub records: Vec<SuiteRecord>,
    pub violations: usize,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table with one row per record.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<11} {:<58} {:>2} {:>5} {:>6} {:>5} {:>12}  status",
            "suite", "check", "n", "p", "trials", "viol", "worst margin"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:<11} {:<58} {:>2} {:>5} {:>6} {:>5} {:>12.3e}  {}",
                r.suite,
                r.check,
                r.n,
                exponent_label(r.p),
                r.trials,
                r.violations,
                r.worst_margin,
                if r.violations == 0 { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "{} records, {} violations: {}", self.records.len(), self.violations, if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

/// `p = 0` marks checks that do not depend on an exponent.
fn exponent_label(p: f64) -> String {
    if p == 0.0 {
        "-".into()
    } else if p.is_infinite() {
        "inf".into()
    } else if p.fract() == 0.0 {
        format!("{p}")
    } else {
        format!("{p:.3}")
    }
}

/// Size of the worker pool: `NCGEO_THREADS` when set, otherwise the rayon default.
pub fn thread_count() -> Option<usize> {
    std::env::var("NCGEO_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Runs every selected suite. Reports depend only on the config.
pub fn run_verification_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let config = config.clone().validated()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let records = pool.install(|| -> Result<Vec<SuiteRecord>> {
        let mut records = Vec::new();
        for suite in &config.suites {
            match suite {
                Suite::Core => core_suite(&config, &mut records)?,
                Suite::Projection => projection_suite(&config, &mut records)?,
                Suite::Geometry => geometry_suite(&config, &mut records)?,
                Suite::Models => models_suite(&config, &mut records)?,
            }
        }
        Ok(records)
    })?;
    let violations = records.iter().map(|r| r.violations).sum();
    Ok(VerificationReport { config, environment: Environment::current(), records, violations, passed: violations == 0 })
}

struct Recorder<'a> {
    config: &'a SuiteConfig,
    records: &'a mut Vec<SuiteRecord>,
    suite: Suite,
}

impl Recorder<'_> {
    fn push(&mut self, anchor: &str, n: usize, p: f64, record: CheckRecord) {
        self.records.push(SuiteRecord {
            suite: self.suite.name().into(),
            anchor: anchor.into(),
            check: record.check,
            n,
            p,
            trials: record.trials,
            tolerance: record.tolerance,
            violations: record.violations,
            worst_margin: record.worst_margin,
        });
    }

    fn seed(&self, n: usize, p: f64) -> u64 {
        random::derive_seed(self.config.seed, &format!("{}/{n}/{p}", self.suite.name()))
    }

    fn run<F>(&mut self, anchor: &str, check: &str, n: usize, p: f64, trials: usize, tol: &str, f: F) -> Result<()>
    where
        F: Fn(&mut TrialRng) -> Result<f64> + Sync,
    {
        let record = run_check(check, self.seed(n, p), trials, self.config.tol(tol), f)?;
        self.push(anchor, n, p, record);
        Ok(())
    }
}

/// `p`-conjugate exponent used for the lower Clarkson regime.
fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Margin of the Clarkson inequality for `p >= 2` (upper regime) or `1 < p <= 2`.
pub fn clarkson_margin(a: &ComplexMatrix, b: &ComplexMatrix, p: f64, alg: &TracialAlgebra) -> f64 {
    let q = conjugate(p);
    let na = alg.p_norm_unchecked(a, p);
    let nb = alg.p_norm_unchecked(b, p);
    let ns = alg.p_norm_unchecked(&(a + b), p);
    let nd = alg.p_norm_unchecked(&(a - b), p);
    let rhs = 2f64.powf(1.0 / q) * (na.powf(p) + nb.powf(p)).powf(1.0 / p);
    let lhs = if p >= 2.0 { (ns.powf(p) + nd.powf(p)).powf(1.0 / p) } else { (ns.powf(q) + nd.powf(q)).powf(1.0 / q) };
    rhs - lhs
}

/// Composite Simpson approximation of `int_0^1 e^{(1-t) a} b e^{t a} dt` on 256 panels.
pub fn exp_differential_quadrature(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let panels = 256;
    let weights = crate::geometry::simpson_weights(panels);
    let mut out = ComplexMatrix::zeros(a.dim());
    for (k, w) in weights.iter().enumerate() {
        let t = k as f64 / panels as f64;
        let term = &(&exp_skew(&a.scale(1.0 - t)) * b) * &exp_skew(&a.scale(t));
        out.add_scaled(*w, &term);
    }
    out
}

fn core_suite(config: &SuiteConfig, records: &mut Vec<SuiteRecord>) -> Result<()> {
    let trials = config.trials;
    let mut rec = Recorder { config, records, suite: Suite::Core };
    for &n in &config.dims {
        let alg = TracialAlgebra::full(n);
        let alg = &alg;
        for &p in &config.p_list {
            let upper = p.max(2.0);
            let lower = if p > 1.0 { conjugate(upper).min(2.0) } else { 2.0 };
            rec.run("clarkson-inequalities", "clarkson-upper-regime", n, upper, trials, "clarkson", |rng| {
                Ok(clarkson_margin(&random::gaussian(alg, rng), &random::gaussian(alg, rng), upper, alg))
            })?;
            rec.run("clarkson-inequalities", "clarkson-lower-regime", n, lower, trials, "clarkson", |rng| {
                Ok(clarkson_margin(&random::gaussian(alg, rng), &random::gaussian(alg, rng), lower, alg))
            })?;
            rec.run("unitary-invariance", "p-norm-unitary-invariance", n, p, trials, "invariance", |rng| {
                let x = random::gaussian(alg, rng);
                let u = random::unitary(alg, rng);
                let v = random::unitary(alg, rng);
                let nx = alg.p_norm_unchecked(&x, p);
                Ok(-(alg.p_norm_unchecked(&(&(&u * &x) * &v), p) - nx).abs() / (1.0 + nx))
            })?;
            rec.run("exponential-differential", "differential-contraction", n, p, trials, "quadrature", |rng| {
                let a = random::skew_up_to(alg, rng, 2.0);
                let b = random::skew(alg, rng);
                Ok(alg.p_norm_unchecked(&b, p) - alg.p_norm_unchecked(&exp_differential(&a, &b)?, p))
            })?;
            rec.run("spectral-scale", "trace-power-integral", n, p, trials, "spectral", |rng| {
                let x = random::hermitian(alg, rng);
                let scale = spectral_scale(&x, alg)?;
                let direct = alg.trace(&hermitian_calculus(&x, |t| C64::new(t.abs().powf(p), 0.0)))?.re;
                Ok(-(scale.integrate(|t| t.abs().powf(p)) - direct).abs() / (1.0 + direct))
            })?;
            rec.run("symbol-folding", "fold-shortens-p-norm", n, p, trials, "spectral", |rng| {
                let z = random::hermitian_between(alg, rng, 1.0, 9.0);
                let f = fold_symbol(&z)?;
                let (nf, nz) = (alg.p_norm_unchecked(&f, p), alg.p_norm_unchecked(&z, p));
                Ok(if z.op_norm() > std::f64::consts::PI { if nf < nz { nz - nf } else { -1.0 } } else { nz - nf })
            })?;
            if let Ok(pe) = even_exponent(p) {
                rec.run("bilinear-form", "quadratic-form-positive", n, p, trials, "spectral", |rng| {
                    let a = random::skew(alg, rng);
                    let b = random::skew(alg, rng);
                    Ok(qf(&a, &b, pe, alg)?)
                })?;
                rec.run("bilinear-form", "commutator-bound", n, p, trials, "spectral", |rng| {
                    let a = random::skew(alg, rng);
                    let b = random::skew(alg, rng);
                    let c = ComplexMatrix::commutator(&b, &a);
                    let bound = 4.0 * a.op_norm().powi(2) * qf(&a, &b, pe, alg)?;
                    Ok((bound - qf(&a, &c, pe, alg)?) / (1.0 + bound))
                })?;
            }
        }
        rec.run("exponential-logarithm", "log-exp-roundtrip", n, 0.0, trials, "roundtrip", |rng| {
            let z = random::skew_up_to(alg, rng, 3.1);
            Ok(-(&log_unitary(&exp_skew(&z)) - &z).max_abs())
        })?;
        rec.run("exponential-logarithm", "exp-log-roundtrip", n, 0.0, trials, "roundtrip", |rng| {
            let u = random::unitary(alg, rng);
            Ok(-(&exp_skew(&log_unitary(&u)) - &u).max_abs())
        })?;
        rec.run("exponential-differential", "differential-quadrature", n, 0.0, trials, "quadrature", |rng| {
            let a = random::skew_up_to(alg, rng, 2.0);
            let b = random::skew_up_to(alg, rng, 2.0);
            Ok(-(&exp_differential(&a, &b)? - &exp_differential_quadrature(&a, &b)).max_abs())
        })?;
        rec.run("exponential-differential", "inverse-symbol-bound", n, f64::INFINITY, trials, "spectral", |rng| {
            let r = 1.55 * rng.random::<f64>();
            let a = random::skew_with_norm(alg, rng, r);
            let frame = AdFrame::new(&a);
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let b = random::skew_with_norm(alg, rng, 1.0);
                worst = worst.max(frame.apply(AdSymbol::FInv, &b).op_norm());
            }
            Ok(inverse_symbol_bound(r) - worst)
        })?;
        rec.run("symbol-folding", "fold-preserves-exponential", n, 0.0, trials, "spectral", |rng| {
            let z = random::hermitian_between(alg, rng, 1.0, 9.0);
            let f = fold_symbol(&z)?;
            Ok(-(&exp_skew(&f.scale_c(I)) - &exp_skew(&z.scale_c(I))).max_abs())
        })?;
        rec.run("symbol-folding", "s-numbers-decrease", n, 0.0, trials, "spectral", |rng| {
            let z = random::hermitian_between(alg, rng, 1.0, 9.0);
            let mu_f = s_numbers(&fold_symbol(&z)?, alg)?;
            let mu_z = s_numbers(&z, alg)?;
            Ok(-mu_f.max_excess_over(&mu_z))
        })?;
    }
    Ok(())
}

/// Whether `z` is a minimal lifting according to `max_k |tau(z^{p-1} b_k)|` and according to
/// small perturbations along the basis and the gradient.
pub fn minimality_criteria(z: &ComplexMatrix, g: &SkewSubspace, p: u32, tol: f64) -> (bool, bool) {
    let alg = g.ambient();
    let pf = p as f64;
    let top = z.pow(p as usize - 1);
    let traces: Vec<f64> = g.basis().iter().map(|b| alg.trace_product(&top, b).re).collect();
    let by_residual = traces.iter().all(|t| t.abs() <= tol);
    let base = alg.p_norm_unchecked(z, pf).powf(pf);
    let mut directions: Vec<ComplexMatrix> = g.basis().to_vec();
    directions.push(g.combine(&traces));
    let step = 1e-4;
    let mut by_perturbation = true;
    for d in &directions {
        let scale = d.op_norm().max(1e-300);
        for s in [step, -step] {
            let moved = alg.p_norm_unchecked(&(z + &d.scale(s / scale)), pf).powf(pf);
            if moved < base - 1e-13 * (1.0 + base) {
                by_perturbation = false;
            }
        }
    }
    (by_residual, by_perturbation)
}

fn projection_suite(config: &SuiteConfig, records: &mut Vec<SuiteRecord>) -> Result<()> {
    let trials = config.trials;
    let tol = config.tol("approximant");
    let mut rec = Recorder { config, records, suite: Suite::Projection };
    for &n in &config.dims {
        let alg = TracialAlgebra::full(n);
        let alg = &alg;
        let g = if n >= 2 {
            let m = n / 2;
            // Block-diagonal skew elements of M_n.
            let basis: Vec<ComplexMatrix> = alg
                .skew_basis()
                .into_iter()
                .filter(|b| (0..n).all(|i| (0..n).all(|j| (i < m) == (j < m) || b[(i, j)] == C64::new(0.0, 0.0))))
                .collect();
            SkewSubspace::new(alg.clone(), basis, crate::projection::DEFAULT_GRAM_TOL)?.orthonormal_basis()?
        } else {
            SkewSubspace::zero(alg.clone())
        };
        let g = &g;
        for &p in &config.p_list {
            let Ok(pe) = even_exponent(p) else { continue };
            let q = |z: &ComplexMatrix| best_approximant_unchecked(z, g, pe, tol, MAX_ITERATIONS);
            rec.run("best-approximant", "optimality-residual", n, p, trials, "approximant", |rng| {
                Ok(-q(&random::skew(alg, rng))?.optimality_residual)
            })?;
            rec.run("best-approximant", "idempotence", n, p, trials, "criterion", |rng| {
                let qz = q(&random::skew(alg, rng))?.projection;
                Ok(-(&q(&qz)?.projection - &qz).max_abs())
            })?;
            rec.run("best-approximant", "complement-annihilated", n, p, trials, "criterion", |rng| {
                let r = q(&random::skew(alg, rng))?.residual;
                Ok(-q(&r)?.projection.max_abs())
            })?;
            rec.run("best-approximant", "homogeneity", n, p, trials, "criterion", |rng| {
                let z = random::skew(alg, rng);
                let qz = q(&z)?.projection;
                let mut worst: f64 = 0.0;
                for lambda in [-2.0, 0.5] {
                    worst = worst.max((&q(&z.scale(lambda))?.projection - &qz.scale(lambda)).max_abs());
                }
                Ok(-worst)
            })?;
            rec.run("best-approximant", "factor-two-bound", n, p, trials, "criterion", |rng| {
                let z = random::skew(alg, rng);
                Ok(2.0 * alg.p_norm_unchecked(&z, p) - alg.p_norm_unchecked(&q(&z)?.projection, p))
            })?;
            rec.run("best-approximant", "beats-sampled-competitors", n, p, trials, "criterion", |rng| {
                let r = q(&random::skew(alg, rng))?;
                let base = alg.p_norm_unchecked(&r.residual, p);
                let y = random::combination(g.basis(), n, rng).scale(rng.random::<f64>());
                Ok(alg.p_norm_unchecked(&(&r.residual - &y), p) - base)
            })?;
            rec.run("minimal-lifting-criterion", "residual-and-perturbation-agree", n, p, trials, "criterion", |rng| {
                let z = random::skew(alg, rng);
                let lifted = q(&z)?.residual;
                let candidate = if rng.random::<bool>() { lifted } else { &lifted + &random::combination(g.basis(), n, rng).scale(0.3) };
                let (a, b) = minimality_criteria(&candidate, g, pe, 1e-8);
                Ok(if a == b { 0.0 } else { -1.0 })
            })?;
        }
    }
    Ok(())
}

/// Length of `t -> e^{t z} e^{t (1 - t) s (x0 + (2t - 1) x1)}` minus `||z||_p`.
pub fn unitary_competitor_margin(alg: &TracialAlgebra, z: &ComplexMatrix, p: f64, rng: &mut TrialRng) -> Result<f64> {
    let x0 = random::skew_with_norm(alg, rng, 1.0);
    let x1 = random::skew_with_norm(alg, rng, 1.0);
    let s = 3.0 * rng.random::<f64>();
    let geodesic = |t: f64| (z.scale(t), z.clone());
    let bump = |t: f64| {
        let mut xi = x0.clone();
        xi.add_scaled(2.0 * t - 1.0, &x1);
        let mut d = xi.scale(s * (1.0 - 2.0 * t));
        d.add_scaled(2.0 * s * t * (1.0 - t), &x1);
        (xi.scale(s * t * (1.0 - t)), d)
    };
    let one = ComplexMatrix::identity(alg.dim());
    let curve = SampledCurve::product_of_exponentials(&one, &[&geodesic, &bump], 64, CurveTarget::Unitary)?;
    Ok(curve_length_p(&curve, p, alg)? - alg.p_norm_unchecked(z, p))
}

/// Draws `u, v, w` meeting the convexity radii, returned as `(u, v, w)`.
pub fn convexity_triple(alg: &TracialAlgebra, rng: &mut TrialRng) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let v = random::unitary(alg, rng);
    let ra = 1.5 * rng.random::<f64>();
    let a = random::skew_with_norm(alg, rng, ra);
    let uv = 2.0 * (ra / 2.0).sin();
    let room = std::f64::consts::SQRT_2 - uv;
    let rb = 0.95 * 2.0 * (room / 2.0).min(1.0).asin() * rng.random::<f64>();
    let b = random::skew_with_norm(alg, rng, rb);
    (&v * &exp_skew(&a), v.clone(), &v * &exp_skew(&b))
}

fn geometry_suite(config: &SuiteConfig, records: &mut Vec<SuiteRecord>) -> Result<()> {
    let trials = config.trials;
    let mut rec = Recorder { config, records, suite: Suite::Geometry };
    let lower = (1.0 - std::f64::consts::PI.powi(2) / 12.0).sqrt();
    for &n in &config.dims {
        let alg = TracialAlgebra::full(n);
        let alg = &alg;
        for &p in &config.p_list {
            rec.run("unitary-distance", "chord-sandwich", n, p, trials, "metric", |rng| {
                let u = random::unitary(alg, rng);
                let v = random::unitary(alg, rng);
                let d = unitary_distance(&u, &v, p, alg)?;
                let chord = alg.p_norm_unchecked(&(&u - &v), p);
                Ok((chord - lower * d).min(d - chord))
            })?;
            rec.run("unitary-distance", "diameter", n, p, trials, "metric", |rng| {
                let u = random::unitary(alg, rng);
                let v = random::unitary(alg, rng);
                Ok(std::f64::consts::PI - unitary_distance(&u, &v, p, alg)?)
            })?;
            rec.run("unitary-distance", "metric-axioms", n, p, trials, "metric", |rng| {
                let u = random::unitary(alg, rng);
                let v = random::unitary(alg, rng);
                let w = random::unitary(alg, rng);
                let duv = unitary_distance(&u, &v, p, alg)?;
                let dvu = unitary_distance(&v, &u, p, alg)?;
                let dvw = unitary_distance(&v, &w, p, alg)?;
                let duw = unitary_distance(&u, &w, p, alg)?;
                Ok((duv + dvw - duw).min(-(duv - dvu).abs()))
            })?;
            rec.run("unitary-distance", "left-invariance", n, p, trials, "invariance", |rng| {
                let u = random::unitary(alg, rng);
                let v = random::unitary(alg, rng);
                let w = random::unitary(alg, rng);
                Ok(-(unitary_distance(&(&w * &u), &(&w * &v), p, alg)? - unitary_distance(&u, &v, p, alg)?).abs())
            })?;
            rec.run("one-parameter-groups-minimal", "competitor-lengths", n, p, trials, "minimality", |rng| {
                let z = random::skew_up_to(alg, rng, std::f64::consts::PI);
                unitary_competitor_margin(alg, &z, p, rng)
            })?;
            rec.run("distance-convexity", "second-differences", n, p, trials, "convexity", |rng| {
                let (u, v, w) = convexity_triple(alg, rng);
                let prof = convexity_probe(&u, &v, &w, p, alg)?;
                Ok(if prof.collinear || prof.mean_second_difference > 0.0 { prof.min_second_difference } else { -1.0 })
            })?;
        }
        let full = SkewSubspace::full(alg.clone());
        let full = &full;
        rec.run("lifting-equation", "polygonal-field-defect", n, 0.0, trials.div_ceil(10), "lift-defect", |rng| {
            let values: Vec<ComplexMatrix> = (0..6).map(|_| random::skew_up_to(alg, rng, 2.0)).collect();
            let field = PolygonalField::new(values)?;
            Ok(-lift_ode_solve(&field, full, &LiftOptions::default())?.max_defect)
        })?;
    }
    Ok(())
}

fn model_blocks(kind: ModelKind, n: usize) -> Option<Vec<usize>> {
    match kind {
        ModelKind::CenterQuotient => (n >= 2).then(|| vec![1, n - 1]),
        ModelKind::PartialIsometryOrbit => (n >= 2).then(|| vec![n]),
        _ => (n >= 2 && n % 2 == 0).then(|| vec![n / 2]),
    }
}

/// `t -> e^{t z} e^{t^2 y}` for random skew `z`, `y` of norm at most one.
pub fn random_orbit_curve(alg: &TracialAlgebra, rng: &mut TrialRng, grid_n: usize) -> Result<SampledCurve> {
    let z = random::skew_up_to(alg, rng, 1.0);
    let y = random::skew_up_to(alg, rng, 1.0);
    let f1 = |t: f64| (z.scale(t), z.clone());
    let f2 = |t: f64| (y.scale(t * t), y.scale(2.0 * t));
    SampledCurve::product_of_exponentials(&ComplexMatrix::identity(alg.dim()), &[&f1, &f2], grid_n, CurveTarget::Orbit)
}

/// A minimal lifting with operator norm `fraction` of the geodesic radius.
pub fn horizontal_symbol(space: &HomSpace, p: u32, fraction: f64, rng: &mut TrialRng) -> Result<ComplexMatrix> {
    let n = space.ambient().dim();
    let f = random::combination(space.supplement().basis(), n, rng);
    let z = best_approximant_unchecked(&f, space.isotropy(), p, 1e-12, MAX_ITERATIONS)?.residual;
    let r = space.geodesic_radius(p)?;
    Ok(z.scale(fraction * r / z.op_norm().max(1e-300)))
}

fn models_suite(config: &SuiteConfig, records: &mut Vec<SuiteRecord>) -> Result<()> {
    let trials = config.trials;
    let small = trials.div_ceil(20);
    let mut rec = Recorder { config, records, suite: Suite::Models };
    let p_even: Vec<u32> = config.p_list.iter().filter_map(|&p| even_exponent(p).ok()).collect();
    for &n in &config.dims {
        for kind in ModelKind::ALL {
            let Some(blocks) = model_blocks(kind, n) else { continue };
            let mut spec = ModelSpec::new(kind, &blocks).with_p_list(&p_even);
            spec.seed = Some(random::derive_seed(config.seed, kind.name()));
            let space = build_model_space(&spec)?;
            let space = &space;
            for &p in &p_even {
                let pf = p as f64;
                let seed = rec.seed(n, pf);
                let report = model_checks(kind, space, p, trials, random::derive_seed(seed, kind.name()))?;
                for mut c in report.checks {
                    c.check = format!("{}/{}", kind.name(), c.check);
                    rec.push(&format!("{}-approximation", kind.name()), n, pf, c);
                }
                let alg = space.ambient();
                let excess_tol = config.tol("lift-excess");
                rec.run("epsilon-isometric-lift", &format!("{}/lift-excess", kind.name()), n, pf, small, "lift-excess", |rng| {
                    let curve = random_orbit_curve(alg, rng, 64)?;
                    let mut worst = f64::INFINITY;
                    for eps in [1e-2, 1e-3] {
                        let lift = epsilon_isometric_lift(&curve, space, p, eps)?;
                        worst = worst.min(eps - lift.excess());
                        if lift.max_point_mismatch > 1e-8 {
                            worst = worst.min(-2.0 * excess_tol);
                        }
                    }
                    Ok(worst)
                })?;
                rec.run("local-geodesic-minimality", &format!("{}/competitors", kind.name()), n, pf, small, "minimality", |rng| {
                    let z = horizontal_symbol(space, p, 0.5, rng)?;
                    let options = MinimalityOptions { trials: 8, seed: rng.random(), ..Default::default() };
                    let r = minimality_probe(space, &z, p, &options)?;
                    if r.uniqueness_violations > 0 {
                        return Ok(f64::NEG_INFINITY);
                    }
                    Ok(r.worst_margin)
                })?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_rejected() {
        let cfg = SuiteConfig { trials: 0, ..Default::default() };
        assert!(matches!(run_verification_suite(&cfg), Err(Error::InvalidConfig(_))));
        assert!(SuiteConfig::from_json(r#"{"tolerances": {"bogus": 1.0}}"#).is_err());
        assert!(SuiteConfig::from_json(r#"{"p_list": [0.5]}"#).is_err());
    }

    #[test]
    fn small_run_is_clean_and_deterministic() {
        let cfg = SuiteConfig { trials: 4, dims: vec![2], ..Default::default() };
        let a = run_verification_suite(&cfg).unwrap();
        assert!(a.passed, "{}", a.summary_table());
        let b = run_verification_suite(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
