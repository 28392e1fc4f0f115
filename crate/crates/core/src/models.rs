//! The example homogeneous spaces and their kind-specific approximation checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::checks::{run_check, CheckRecord};
use crate::error::{Error, Result};
use crate::geometry::{ActionKind, HomSpace, KnownConstants};
use crate::linalg::spectral::eigh_raw;
use crate::linalg::{even_exponent, ComplexMatrix, TracialAlgebra, I};
use crate::projection::approximant::{best_approximant_unchecked, DEFAULT_TOL, MAX_ITERATIONS};
use crate::projection::{SkewSubspace, SubalgebraKind};
use crate::random::{self, TrialRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `U_M / U_N` with `N` the span of the block units.
    CenterQuotient,
    /// `U_{M (x) M_2} / U_N` with `N` the block-diagonal matrices.
    DiagM2,
    /// `U_{M (x) M_2} / U_N` with `N = {diag(x, x)}`.
    SpecialDiagM2,
    /// Partial isometries with a fixed initial projection, acted on from the left.
    PartialIsometryOrbit,
    /// Unitary orbit of a projection in `M (x) M_2`.
    ProjectionOrbit,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::CenterQuotient,
        ModelKind::DiagM2,
        ModelKind::SpecialDiagM2,
        ModelKind::PartialIsometryOrbit,
        ModelKind::ProjectionOrbit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::CenterQuotient => "center-quotient",
            ModelKind::DiagM2 => "diag-m2",
            ModelKind::SpecialDiagM2 => "special-diag-m2",
            ModelKind::PartialIsometryOrbit => "partial-isometry-orbit",
            ModelKind::ProjectionOrbit => "projection-orbit",
        }
    }
}

fn default_p_list() -> Vec<u32> {
    vec![2, 4]
}

/// Parameters of a model space, as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Block dimensions of `M` (for the `M (x) M_2` kinds, of the base algebra).
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<ComplexMatrix>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, blocks: &[usize]) -> Self {
        Self { kind, blocks: blocks.to_vec(), weights: None, e: None, v0: None, p_list: default_p_list(), seed: None }
    }

    pub fn with_p_list(mut self, p_list: &[u32]) -> Self {
        self.p_list = p_list.to_vec();
        self
    }

    fn ambient(&self) -> Result<TracialAlgebra> {
        let tensor = matches!(self.kind, ModelKind::DiagM2 | ModelKind::SpecialDiagM2 | ModelKind::ProjectionOrbit);
        match &self.weights {
            Some(w) => TracialAlgebra::new(self.blocks.clone(), w.clone(), tensor),
            None if tensor => TracialAlgebra::tensor_m2(&self.blocks),
            None => TracialAlgebra::direct_sum(&self.blocks),
        }
    }
}

/// Builds the homogeneous space described by a spec, with exact constants where they are known.
pub fn build_model_space(spec: &ModelSpec) -> Result<HomSpace> {
    for &p in &spec.p_list {
        even_exponent(p as f64)?;
    }
    let ambient = spec.ambient()?;
    let n = ambient.dim();
    let seed = spec.seed.unwrap_or(0);
    let exact = |c: f64, k: Option<f64>| KnownConstants { supplement_projection: Some(c), approximant_bound: k };
    if spec.e.is_some() && spec.kind != ModelKind::ProjectionOrbit {
        return Err(Error::InvalidSpec("`e` only applies to projection-orbit".into()));
    }
    if spec.v0.is_some() && spec.kind != ModelKind::PartialIsometryOrbit {
        return Err(Error::InvalidSpec("`v0` only applies to partial-isometry-orbit".into()));
    }
    let (action, basepoint, kind, known) = match spec.kind {
        ModelKind::CenterQuotient => {
            (ActionKind::Coset, ComplexMatrix::identity(n), SubalgebraKind::CenterBlocks, exact(2.0, Some(3.0)))
        }
        ModelKind::DiagM2 => (ActionKind::Coset, ComplexMatrix::identity(n), SubalgebraKind::DiagM2, exact(2.0, Some(1.0))),
        ModelKind::SpecialDiagM2 => (ActionKind::Coset, ComplexMatrix::identity(n), SubalgebraKind::SpecialDiagM2, exact(2.0, None)),
        ModelKind::PartialIsometryOrbit => {
            let v0 = match &spec.v0 {
                Some(v) => v.clone(),
                None => {
                    let d: Vec<f64> = (0..n).map(|i| if i + 1 < n { 1.0 } else { 0.0 }).collect();
                    ComplexMatrix::from_real_diagonal(&d)
                }
            };
            v0.require_dim(n)?;
            let fin = &v0 * &v0.adjoint();
            let corank = 1.0 - ambient.trace(&fin)?.re;
            if corank < 1e-9 {
                return Err(Error::InvalidSpec("v0 must have co-rank at least one".into()));
            }
            (ActionKind::PartialIsometry, v0.clone(), SubalgebraKind::AnnihilatorOfPartialIsometry(v0), KnownConstants::default())
        }
        ModelKind::ProjectionOrbit => {
            let e = match &spec.e {
                Some(e) => e.clone(),
                None => {
                    let m = n / 2;
                    ComplexMatrix::from_real_diagonal(&(0..n).map(|i| if i < m { 1.0 } else { 0.0 }).collect::<Vec<_>>())
                }
            };
            e.require_dim(n)?;
            (ActionKind::Conjugation, e.clone(), SubalgebraKind::CommutantOfProjection(e), exact(2.0, Some(1.0)))
        }
    };
    let isotropy = SkewSubspace::from_kind(ambient, kind)?;
    HomSpace::new(action, basepoint, isotropy, known, &spec.p_list, seed)
}

/// Results of the kind-specific checks on one space.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub kind: String,
    pub p: u32,
    pub checks: Vec<CheckRecord>,
    /// Measured quantities that are reported without being asserted.
    pub observations: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

pub const CHECK_TOL: f64 = 1e-8;

fn approximant(z: &ComplexMatrix, space: &HomSpace, p: u32) -> Result<ComplexMatrix> {
    Ok(best_approximant_unchecked(z, space.isotropy(), p, DEFAULT_TOL, MAX_ITERATIONS)?.projection)
}

/// `Q` on Hermitian elements, `x -> -i Q(i x)`.
fn hermitian_approximant(x: &ComplexMatrix, space: &HomSpace, p: u32) -> Result<ComplexMatrix> {
    Ok(approximant(&x.scale_c(I), space, p)?.scale_c(-I))
}

fn spectrum(x: &ComplexMatrix) -> Vec<f64> {
    eigh_raw(&x.hermitian_part()).0
}

fn require_kind(ok: bool, what: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what))
    }
}

fn random_positive(alg: &TracialAlgebra, rng: &mut TrialRng) -> ComplexMatrix {
    let g = random::gaussian(alg, rng);
    let x = &g * &g.adjoint();
    x.scale(1.0 / x.op_norm())
}

/// Positivity, the factor-3 bound and the Jordan-decomposition inequality for the center quotient.
pub fn center_q_checks(space: &HomSpace, p: u32, trials: usize, seed: u64) -> Result<CheckReport> {
    require_kind(matches!(space.isotropy().kind(), SubalgebraKind::CenterBlocks), "center-quotient space")?;
    even_exponent(p as f64)?;
    let alg = space.ambient();
    let pf = p as f64;
    let n = alg.dim();
    let mut checks = Vec::new();
    checks.push(run_check("unit-fixed", seed, 1, CHECK_TOL, |_| {
        let one = ComplexMatrix::identity(n);
        Ok(-(&hermitian_approximant(&one, space, p)? - &one).max_abs())
    })?);
    checks.push(run_check("positivity-preserved", seed, trials, CHECK_TOL, |rng| {
        let x = random_positive(alg, rng);
        Ok(spectrum(&hermitian_approximant(&x, space, p)?)[0])
    })?);
    checks.push(run_check("bounded-by-norm", seed, trials, CHECK_TOL, |rng| {
        let x = random_positive(alg, rng);
        let q = spectrum(&hermitian_approximant(&x, space, p)?);
        Ok(x.op_norm() - q[q.len() - 1])
    })?);
    checks.push(run_check("factor-3-bound", seed, trials, CHECK_TOL, |rng| {
        let z = random::skew(alg, rng);
        Ok(3.0 * z.op_norm() - approximant(&z, space, p)?.op_norm())
    })?);
    checks.push(run_check("jordan-inequality", seed, trials, CHECK_TOL, |rng| {
        let u = random::unitary(alg, rng);
        let xs: Vec<f64> = (0..n).map(|_| random::normal(rng).abs()).collect();
        let ys: Vec<f64> = (0..n).map(|_| random::normal(rng)).collect();
        let conj = |d: &[f64]| &(&u * &ComplexMatrix::from_real_diagonal(d)) * &u.adjoint();
        let x = conj(&xs);
        let y = conj(&ys);
        let y_plus = conj(&ys.iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
        Ok(alg.p_norm_unchecked(&(&x - &y), pf) - alg.p_norm_unchecked(&(&x - &y_plus), pf))
    })?);
    Ok(CheckReport { kind: "center-quotient".into(), p, checks, observations: BTreeMap::new() })
}

/// `Q` equals the block-diagonal truncation, and the off-diagonal inequality.
pub fn diag_m2_checks(space: &HomSpace, p: u32, trials: usize, seed: u64) -> Result<CheckReport> {
    require_kind(
        matches!(space.isotropy().kind(), SubalgebraKind::DiagM2 | SubalgebraKind::CommutantOfProjection(_)),
        "diag-m2 or projection-orbit space",
    )?;
    even_exponent(p as f64)?;
    let alg = space.ambient();
    let pf = p as f64;
    let e = |x: &ComplexMatrix| space.isotropy().conditional_expectation(x);
    let mut checks = Vec::new();
    checks.push(run_check("approximant-is-truncation", seed, trials, CHECK_TOL, |rng| {
        let z = random::skew(alg, rng);
        Ok(-alg.p_norm_unchecked(&(&approximant(&z, space, p)? - &e(&z)?), pf))
    })?);
    checks.push(run_check("block-diagonal-fixed", seed, trials, CHECK_TOL, |rng| {
        let z = e(&random::skew(alg, rng))?;
        Ok(-alg.p_norm_unchecked(&(&approximant(&z, space, p)? - &z), pf))
    })?);
    checks.push(run_check("off-diagonal-annihilated", seed, trials, CHECK_TOL, |rng| {
        let z = random::skew(alg, rng);
        let off = &z - &e(&z)?;
        Ok(-alg.p_norm_unchecked(&approximant(&off, space, p)?, pf))
    })?);
    checks.push(run_check("off-diagonal-inequality", seed, trials, CHECK_TOL, |rng| {
        let m = random::hermitian(alg, rng);
        let off = &m - &e(&m)?;
        Ok(alg.p_norm_unchecked(&m, pf) - alg.p_norm_unchecked(&off, pf))
    })?);
    let kind = match space.isotropy().kind() {
        SubalgebraKind::DiagM2 => "diag-m2",
        _ => "projection-orbit",
    };
    Ok(CheckReport { kind: kind.into(), p, checks, observations: BTreeMap::new() })
}

/// The shifted-block inequality and the behaviour of `E` on the symmetric and off-diagonal patterns.
pub fn special_diag_checks(space: &HomSpace, p: u32, trials: usize, seed: u64) -> Result<CheckReport> {
    require_kind(matches!(space.isotropy().kind(), SubalgebraKind::SpecialDiagM2), "special-diag-m2 space")?;
    even_exponent(p as f64)?;
    let alg = space.ambient();
    let base = alg.base()?;
    let pf = p as f64;
    let e = |x: &ComplexMatrix| space.isotropy().conditional_expectation(x);
    let block = |a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix| ComplexMatrix::from_quadrants(a, b, c, d);
    let symmetric = |rng: &mut TrialRng| {
        let a = random::hermitian(&base, rng);
        let b = random::hermitian(&base, rng);
        let c = random::hermitian(&base, rng);
        block(&a, &b, &b, &c)
    };
    let off_diagonal = |rng: &mut TrialRng| {
        let b = random::gaussian(&base, rng);
        let zero = ComplexMatrix::zeros(base.dim());
        block(&zero, &b, &b.adjoint(), &zero)
    };
    let shifted = |rng: &mut TrialRng, hermitian_shift: bool| {
        let a = random::hermitian(&base, rng);
        let b = random::hermitian(&base, rng);
        let c = random::hermitian(&base, rng);
        let d = if hermitian_shift { random::hermitian(&base, rng) } else { random::gaussian(&base, rng) };
        let lhs = block(&(&a - &c).scale(0.5), &b, &b, &(&c - &a).scale(0.5));
        let rhs = block(&(&a + &d), &b, &b, &(&c + &d));
        (a, b, c, lhs, rhs)
    };
    let mut checks = Vec::new();
    checks.push(run_check("shifted-block-inequality", seed, trials, CHECK_TOL, |rng| {
        let (_, _, _, lhs, rhs) = shifted(rng, true);
        Ok(alg.p_norm_unchecked(&rhs, pf) - alg.p_norm_unchecked(&lhs, pf))
    })?);
    checks.push(run_check("shifted-block-inequality-general-shift", seed, trials, CHECK_TOL, |rng| {
        let (_, _, _, lhs, rhs) = shifted(rng, false);
        Ok(alg.p_norm_unchecked(&rhs, pf) - alg.p_norm_unchecked(&lhs, pf))
    })?);
    checks.push(run_check("shifted-block-equality", seed, trials, CHECK_TOL, |rng| {
        let (a, b, c, lhs, _) = shifted(rng, true);
        let d = (&a + &c).scale(-0.5);
        let rhs = block(&(&a + &d), &b, &b, &(&c + &d));
        Ok(-(alg.p_norm_unchecked(&rhs, pf) - alg.p_norm_unchecked(&lhs, pf)).abs())
    })?);
    checks.push(run_check("expectation-contractive-symmetric", seed, trials, CHECK_TOL, |rng| {
        let x = symmetric(rng);
        Ok(alg.p_norm_unchecked(&x, pf) - alg.p_norm_unchecked(&e(&x)?, pf))
    })?);
    checks.push(run_check("expectation-contractive-off-diagonal", seed, trials, CHECK_TOL, |rng| {
        let x = off_diagonal(rng);
        Ok(alg.p_norm_unchecked(&x, pf) - alg.p_norm_unchecked(&e(&x)?, pf))
    })?);
    checks.push(run_check("approximant-is-expectation-symmetric", seed, trials, CHECK_TOL, |rng| {
        let z = symmetric(rng).scale_c(I);
        Ok(-alg.p_norm_unchecked(&(&approximant(&z, space, p)? - &e(&z)?), pf))
    })?);
    checks.push(run_check("approximant-is-expectation-off-diagonal", seed, trials, CHECK_TOL, |rng| {
        let z = off_diagonal(rng).scale_c(I);
        Ok(-alg.p_norm_unchecked(&(&approximant(&z, space, p)? - &e(&z)?), pf))
    })?);
    let ratio = run_check("uniform-ratio", seed, trials, f64::INFINITY, |rng| {
        let z = random::skew(alg, rng);
        Ok(-approximant(&z, space, p)?.op_norm() / z.op_norm())
    })?;
    let mut observations = BTreeMap::new();
    observations.insert("max-uniform-ratio".to_string(), -ratio.worst_margin);
    Ok(CheckReport { kind: "special-diag-m2".into(), p, checks, observations })
}

/// `c_p ||z|| <= ||z||_p <= ||z||` on the isotropy algebra, with `c_p` the `p`-th root of the
/// smallest diagonal trace weight.
pub fn norm_equivalence_checks(space: &HomSpace, p: u32, trials: usize, seed: u64) -> Result<CheckReport> {
    even_exponent(p as f64)?;
    let alg = space.ambient();
    let pf = p as f64;
    let c_p = alg.diag_weights().iter().cloned().fold(f64::INFINITY, f64::min).powf(1.0 / pf);
    let n = alg.dim();
    let sample = |rng: &mut TrialRng| random::combination(space.isotropy().basis(), n, rng);
    let checks = vec![
        run_check("p-norm-below-uniform", seed, trials, CHECK_TOL, |rng| {
            let z = sample(rng);
            Ok(z.op_norm() - alg.p_norm_unchecked(&z, pf))
        })?,
        run_check("p-norm-above-scaled-uniform", seed, trials, CHECK_TOL, |rng| {
            let z = sample(rng);
            Ok(alg.p_norm_unchecked(&z, pf) - c_p * z.op_norm())
        })?,
    ];
    let mut observations = BTreeMap::new();
    observations.insert("c_p".to_string(), c_p);
    Ok(CheckReport { kind: "isotropy-norm-equivalence".into(), p, checks, observations })
}

/// The kind-specific checks for a model kind.
pub fn model_checks(kind: ModelKind, space: &HomSpace, p: u32, trials: usize, seed: u64) -> Result<CheckReport> {
    match kind {
        ModelKind::CenterQuotient => center_q_checks(space, p, trials, seed),
        ModelKind::DiagM2 | ModelKind::ProjectionOrbit => diag_m2_checks(space, p, trials, seed),
        ModelKind::SpecialDiagM2 => special_diag_checks(space, p, trials, seed),
        ModelKind::PartialIsometryOrbit => norm_equivalence_checks(space, p, trials, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn isotropy_dimensions() {
        let s = build_model_space(&ModelSpec::new(ModelKind::DiagM2, &[2])).unwrap();
        assert_eq!(s.isotropy().dim(), 8);
        let s = build_model_space(&ModelSpec::new(ModelKind::CenterQuotient, &[2, 3])).unwrap();
        assert_eq!(s.isotropy().dim(), 2);
        for b in s.isotropy().basis() {
            assert!(b.is_skew_hermitian(1e-14));
            assert!(ComplexMatrix::commutator(&s.ambient().block_unit(0), b).max_abs() < 1e-14);
        }
        let s = build_model_space(&ModelSpec::new(ModelKind::SpecialDiagM2, &[2])).unwrap();
        assert_eq!(s.isotropy().dim(), 4);
    }

    #[test]
    fn partial_isometry_isotropy_is_the_corner() {
        let mut spec = ModelSpec::new(ModelKind::PartialIsometryOrbit, &[3]);
        spec.v0 = Some(ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]));
        let s = build_model_space(&spec).unwrap();
        assert_eq!(s.isotropy().dim(), 4);
        for b in s.isotropy().basis() {
            for k in 0..3 {
                assert!(b[(0, k)].norm() < 1e-12 && b[(k, 0)].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn full_rank_partial_isometry_rejected() {
        let mut spec = ModelSpec::new(ModelKind::PartialIsometryOrbit, &[2]);
        spec.v0 = Some(ComplexMatrix::identity(2));
        assert!(matches!(build_model_space(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_json_roundtrip() {
        let text = r#"{"kind": "projection-orbit", "blocks": [1], "p_list": [2, 4]}"#;
        let spec: ModelSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.kind, ModelKind::ProjectionOrbit);
        let s = build_model_space(&spec).unwrap();
        assert_eq!(s.basepoint()[(0, 0)], C64::new(1.0, 0.0));
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind": "nope", "blocks": [1]}"#).is_err());
    }

    #[test]
    fn kind_checks_pass() {
        for kind in ModelKind::ALL {
            let blocks: &[usize] = if kind == ModelKind::CenterQuotient { &[1, 2] } else { &[2] };
            let s = build_model_space(&ModelSpec::new(kind, blocks)).unwrap();
            for p in [2, 4] {
                let r = model_checks(kind, &s, p, 20, 1).unwrap();
                for c in &r.checks {
                    assert!(c.passed(), "{} p={p}: {c:?}", kind.name());
                }
            }
        }
    }
}
