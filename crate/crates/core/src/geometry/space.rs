//! Homogeneous spaces `U_M . x` of the unitary group of a tracial algebra.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spectral::{exp_skew, log_unitary};
use crate::linalg::{ComplexMatrix, TracialAlgebra};
use crate::projection::approximant::{best_approximant_unchecked, DEFAULT_TOL, MAX_ITERATIONS};
use crate::projection::{SkewSubspace, SubalgebraKind};
use crate::random::{self, trial_rng};

/// How the unitary group acts on points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    /// Left multiplication on cosets `u U_N`; points are stored as unitary representatives.
    Coset,
    /// `u . e = u e u*`.
    Conjugation,
    /// `u . v = u v`.
    PartialIsometry,
}

/// An estimated or exact constant used in the geodesic neighbourhood bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constant {
    /// Value used in the bounds.
    pub value: f64,
    /// True when the value is a known closed-form bound rather than a measurement.
    pub exact: bool,
    /// Largest ratio observed on random samples (a lower bound on the true constant).
    pub observed: f64,
}

/// Sample counts for the empirical constants.
const SUPPLEMENT_SAMPLES: usize = 2000;
const APPROXIMANT_SAMPLES: usize = 200;
const INFLATION: f64 = 1.5;

/// A homogeneous space together with a splitting of the skew part into isotropy and supplement.
#[derive(Debug, Clone)]
pub struct HomSpace {
    ambient: TracialAlgebra,
    action: ActionKind,
    basepoint: ComplexMatrix,
    isotropy: SkewSubspace,
    supplement: SkewSubspace,
    c_o: Constant,
    k_o: BTreeMap<u32, Constant>,
    exponential_isotropy: bool,
}

/// Exact constants known for a space, if any.
#[derive(Debug, Clone, Copy, Default)]
pub struct KnownConstants {
    pub supplement_projection: Option<f64>,
    pub approximant_bound: Option<f64>,
}

impl HomSpace {
    /// Builds a space, checking the splitting and that the isotropy algebra fixes the basepoint.
    /// Missing constants are measured on samples drawn from `seed`.
    pub fn new(
        action: ActionKind,
        basepoint: ComplexMatrix,
        isotropy: SkewSubspace,
        known: KnownConstants,
        p_list: &[u32],
        seed: u64,
    ) -> Result<Self> {
        let ambient = isotropy.ambient().clone();
        ambient.require_member(&basepoint)?;
        if !isotropy.lie_closed() {
            return Err(Error::InvalidSpec("isotropy subspace is not closed under commutators".into()));
        }
        let isotropy = isotropy.orthonormal_basis()?;
        let supplement = isotropy.orthogonal_complement()?;
        if isotropy.dim() + supplement.dim() != ambient.skew_dim() {
            return Err(Error::InvalidSpec("isotropy and supplement do not span the skew part".into()));
        }
        let mut space = Self {
            ambient,
            action,
            basepoint,
            isotropy,
            supplement,
            c_o: Constant { value: f64::NAN, exact: false, observed: 0.0 },
            k_o: BTreeMap::new(),
            exponential_isotropy: true,
        };
        space.validate_basepoint()?;
        space.check_isotropy_fixes_basepoint(seed)?;
        space.c_o = space.estimate_supplement_constant(known.supplement_projection, seed);
        for &p in p_list {
            crate::linalg::even_exponent(p as f64)?;
            let k = space.estimate_approximant_constant(p, known.approximant_bound, seed)?;
            space.k_o.insert(p, k);
        }
        Ok(space)
    }

    /// `U_M` acting on itself: trivial isotropy.
    pub fn unitary_group(ambient: TracialAlgebra) -> Result<Self> {
        let n = ambient.dim();
        let known = KnownConstants { supplement_projection: Some(1.0), approximant_bound: Some(0.0) };
        Self::new(ActionKind::Coset, ComplexMatrix::identity(n), SkewSubspace::zero(ambient), known, &[], 0)
    }

    fn validate_basepoint(&self) -> Result<()> {
        let x = &self.basepoint;
        let n = self.ambient.dim();
        match self.action {
            ActionKind::Coset => {
                if (x - &ComplexMatrix::identity(n)).max_abs() > 1e-12 {
                    return Err(Error::InvalidSpec("coset spaces use the identity as basepoint".into()));
                }
            }
            ActionKind::Conjugation => {
                if !x.is_hermitian(1e-9) || (&(x * x) - x).max_abs() > 1e-9 {
                    return Err(Error::InvalidSpec("conjugation orbits need a projection basepoint".into()));
                }
            }
            ActionKind::PartialIsometry => {
                let init = x.adjoint() * x;
                if (&(&init * &init) - &init).max_abs() > 1e-9 {
                    return Err(Error::InvalidSpec("basepoint is not a partial isometry".into()));
                }
            }
        }
        Ok(())
    }

    fn check_isotropy_fixes_basepoint(&self, seed: u64) -> Result<()> {
        let mut rng = trial_rng(seed, 0x150);
        for _ in 0..5 {
            let y = random::combination(self.isotropy.basis(), self.ambient.dim(), &mut rng);
            let s = y.op_norm();
            let y = if s > 0.0 { y.scale(2.0 / s) } else { y };
            let g = exp_skew(&y);
            if self.point_mismatch(&g, &ComplexMatrix::identity(self.ambient.dim())) > 1e-9 {
                return Err(Error::InvalidSpec("isotropy algebra does not fix the basepoint".into()));
            }
        }
        Ok(())
    }

    fn estimate_supplement_constant(&self, exact: Option<f64>, seed: u64) -> Constant {
        let mut rng = trial_rng(seed, 0xC0);
        let mut observed: f64 = 0.0;
        if self.supplement.dim() > 0 {
            for _ in 0..SUPPLEMENT_SAMPLES {
                let z = random::skew_with_norm(&self.ambient, &mut rng, 1.0);
                observed = observed.max(self.project_supplement(&z).op_norm());
            }
        }
        match exact {
            Some(value) => Constant { value, exact: true, observed },
            None => Constant { value: INFLATION * observed.max(1.0), exact: false, observed },
        }
    }

    fn estimate_approximant_constant(&self, p: u32, exact: Option<f64>, seed: u64) -> Result<Constant> {
        let mut rng = trial_rng(seed, 0x4B00 + p as u64);
        let mut observed: f64 = 0.0;
        if self.isotropy.dim() > 0 {
            for _ in 0..APPROXIMANT_SAMPLES {
                let z = random::skew_with_norm(&self.ambient, &mut rng, 1.0);
                let q = best_approximant_unchecked(&z, &self.isotropy, p, DEFAULT_TOL, MAX_ITERATIONS)?;
                observed = observed.max(q.projection.op_norm());
            }
        }
        Ok(match exact {
            Some(value) => Constant { value, exact: true, observed },
            None => Constant { value: INFLATION * observed, exact: false, observed },
        })
    }

    pub fn ambient(&self) -> &TracialAlgebra {
        &self.ambient
    }

    pub fn action(&self) -> ActionKind {
        self.action
    }

    pub fn basepoint(&self) -> &ComplexMatrix {
        &self.basepoint
    }

    pub fn isotropy(&self) -> &SkewSubspace {
        &self.isotropy
    }

    pub fn supplement(&self) -> &SkewSubspace {
        &self.supplement
    }

    pub fn exponential_isotropy(&self) -> bool {
        self.exponential_isotropy
    }

    pub fn supplement_constant(&self) -> Constant {
        self.c_o
    }

    pub fn approximant_constant(&self, p: u32) -> Option<Constant> {
        self.k_o.get(&p).copied()
    }

    pub fn approximant_constants(&self) -> &BTreeMap<u32, Constant> {
        &self.k_o
    }

    /// Projection onto the supplement along the isotropy algebra.
    pub fn project_supplement(&self, z: &ComplexMatrix) -> ComplexMatrix {
        self.supplement.project_orthogonal(z)
    }

    /// `eps = (sqrt 2 - 1) / (C (1 + K))`.
    pub fn epsilon(&self, p: u32) -> Result<f64> {
        let k = self.approximant_constant(p).ok_or_else(|| Error::InvalidConfig(format!("no constant for p = {p}")))?;
        Ok((2f64.sqrt() - 1.0) / (self.c_o.value * (1.0 + k.value)))
    }

    /// Radius `min{R, eps / (2 (1 + K)), pi / 3}` of the neighbourhood where geodesics are minimal,
    /// with `R = pi / 3`.
    pub fn geodesic_radius(&self, p: u32) -> Result<f64> {
        let k = self.approximant_constant(p).ok_or_else(|| Error::InvalidConfig(format!("no constant for p = {p}")))?;
        let third = std::f64::consts::FRAC_PI_3;
        Ok(third.min(self.epsilon(p)? / (2.0 * (1.0 + k.value))))
    }

    /// The point `u . x` (no validation).
    pub fn point_of(&self, u: &ComplexMatrix) -> ComplexMatrix {
        match self.action {
            ActionKind::Coset => u.clone(),
            ActionKind::Conjugation => &(u * &self.basepoint) * &u.adjoint(),
            ActionKind::PartialIsometry => u * &self.basepoint,
        }
    }

    /// Whether a unitary lies in the isotropy group, measured as a residual.
    fn isotropy_defect(&self, w: &ComplexMatrix) -> f64 {
        match self.isotropy.kind() {
            SubalgebraKind::Basis => {
                if self.isotropy.dim() == 0 {
                    return (w - &ComplexMatrix::identity(w.dim())).max_abs();
                }
                let l = log_unitary(w);
                (&l - &self.isotropy.project_orthogonal(&l)).max_abs()
            }
            _ => match self.isotropy.conditional_expectation(w) {
                Ok(e) => (&e - w).max_abs(),
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Distance-like mismatch between the points `u . x` and `v . x`; zero iff they coincide.
    pub fn point_mismatch(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
        match self.action {
            ActionKind::Coset => self.isotropy_defect(&(u.adjoint() * v)),
            _ => (&self.point_of(u) - &self.point_of(v)).max_abs(),
        }
    }

    pub fn same_point(&self, u: &ComplexMatrix, v: &ComplexMatrix, tol: f64) -> bool {
        self.point_mismatch(u, v) <= tol
    }

    fn validate_point(&self, pt: &ComplexMatrix) -> Result<()> {
        self.ambient.require_member(pt)?;
        let x = &self.basepoint;
        let ok = match self.action {
            ActionKind::Coset => pt.is_unitary(1e-9),
            ActionKind::Conjugation => {
                pt.is_hermitian(1e-9)
                    && (&(pt * pt) - pt).max_abs() <= 1e-9
                    && (self.ambient.trace_unchecked(pt) - self.ambient.trace_unchecked(x)).norm() <= 1e-9
            }
            ActionKind::PartialIsometry => (&(pt.adjoint() * pt) - &(x.adjoint() * x)).max_abs() <= 1e-9,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition("a point of this orbit"))
        }
    }

    /// The action of a unitary on an orbit point.
    pub fn apply_action(&self, u: &ComplexMatrix, pt: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.ambient.require_member(u)?;
        u.require_unitary()?;
        self.validate_point(pt)?;
        Ok(match self.action {
            ActionKind::Coset => u * pt,
            ActionKind::Conjugation => &(u * pt) * &u.adjoint(),
            ActionKind::PartialIsometry => u * pt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn projection_orbit() -> HomSpace {
        let alg = TracialAlgebra::tensor_m2(&[1]).unwrap();
        let e = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let g = SkewSubspace::from_kind(alg, SubalgebraKind::CommutantOfProjection(e.clone())).unwrap();
        let known = KnownConstants { supplement_projection: Some(2.0), approximant_bound: Some(1.0) };
        HomSpace::new(ActionKind::Conjugation, e, g, known, &[2, 4], 1).unwrap()
    }

    #[test]
    fn identity_acts_trivially_and_action_composes() {
        let space = projection_orbit();
        let mut rng = trial_rng(2, 0);
        let u = random::unitary(space.ambient(), &mut rng);
        let v = random::unitary(space.ambient(), &mut rng);
        let x = space.basepoint().clone();
        let one = ComplexMatrix::identity(2);
        assert!((&space.apply_action(&one, &x).unwrap() - &x).max_abs() < 1e-15);
        let lhs = space.apply_action(&(&u * &v), &x).unwrap();
        let rhs = space.apply_action(&u, &space.apply_action(&v, &x).unwrap()).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn invalid_points_rejected() {
        let space = projection_orbit();
        let not_projection = ComplexMatrix::from_real_diagonal(&[0.5, 0.0]);
        let one = ComplexMatrix::identity(2);
        assert!(space.apply_action(&one, &not_projection).is_err());
        let wrong_rank = ComplexMatrix::identity(2);
        assert!(space.apply_action(&one, &wrong_rank).is_err());
    }

    #[test]
    fn constants_and_radius() {
        let space = projection_orbit();
        assert_eq!(space.supplement_constant().value, 2.0);
        assert!(space.supplement_constant().observed <= 2.0 + 1e-12);
        let eps = space.epsilon(4).unwrap();
        assert!((eps - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-15);
        assert!((space.geodesic_radius(4).unwrap() - eps / 4.0).abs() < 1e-15);
    }

    #[test]
    fn coset_membership_for_center() {
        let alg = TracialAlgebra::direct_sum(&[1, 2]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CenterBlocks).unwrap();
        let space = HomSpace::new(ActionKind::Coset, ComplexMatrix::identity(3), g, KnownConstants::default(), &[2], 3).unwrap();
        let phase = ComplexMatrix::from_diagonal(&[C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)]);
        let mut rng = trial_rng(4, 0);
        let u = random::unitary(&alg, &mut rng);
        assert!(space.same_point(&u, &(&u * &phase), 1e-12));
        assert!(!space.same_point(&u, &random::unitary(&alg, &mut rng), 1e-6));
        assert!(space.supplement_constant().value >= space.supplement_constant().observed);
    }

    #[test]
    fn non_lie_isotropy_rejected() {
        let alg = TracialAlgebra::full(2);
        let b1 = ComplexMatrix::from_fn(2, |i, j| if i != j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) });
        let b2 = ComplexMatrix::from_fn(2, |i, j| if i != j { C64::new(1.0 - 2.0 * i as f64, 0.0) } else { C64::new(0.0, 0.0) });
        let g = SkewSubspace::new(alg, vec![b1, b2], crate::projection::DEFAULT_GRAM_TOL).unwrap();
        assert!(!g.lie_closed());
        let r = HomSpace::new(ActionKind::Coset, ComplexMatrix::identity(2), g, KnownConstants::default(), &[], 0);
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }
}
