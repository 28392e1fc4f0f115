//! Real-linear subspaces of skew-Hermitian matrices and the subalgebras they come from.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, TracialAlgebra, C64, I};

/// Where a subspace came from. The non-`Basis` kinds are skew parts of *-subalgebras
/// and carry an exact trace-preserving conditional expectation.
#[derive(Debug, Clone, PartialEq)]
pub enum SubalgebraKind {
    Basis,
    /// Scalar multiples of the block units.
    CenterBlocks,
    /// `diag(x, y)` inside `M (x) M_2`.
    DiagM2,
    /// `diag(x, x)` inside `M (x) M_2`.
    SpecialDiagM2,
    /// Elements commuting with a projection.
    CommutantOfProjection(ComplexMatrix),
    /// Skew elements `x` with `x v0 = 0`; the subalgebra is `C f + (1 - f) M (1 - f)`, `f = v0 v0*`.
    AnnihilatorOfPartialIsometry(ComplexMatrix),
}

impl SubalgebraKind {
    pub fn name(&self) -> &'static str {
        match self {
            SubalgebraKind::Basis => "basis",
            SubalgebraKind::CenterBlocks => "center-blocks",
            SubalgebraKind::DiagM2 => "diag-m2",
            SubalgebraKind::SpecialDiagM2 => "special-diag-m2",
            SubalgebraKind::CommutantOfProjection(_) => "commutant-of-projection",
            SubalgebraKind::AnnihilatorOfPartialIsometry(_) => "annihilator-of-partial-isometry",
        }
    }
}

pub const DEFAULT_GRAM_TOL: f64 = 1e-16;

/// A real-linear subspace of the skew-Hermitian part of a tracial algebra.
#[derive(Debug, Clone)]
pub struct SkewSubspace {
    ambient: TracialAlgebra,
    kind: SubalgebraKind,
    basis: Vec<ComplexMatrix>,
    gram_tol: f64,
    orthonormal: bool,
    lie_closed: bool,
}

impl SkewSubspace {
    /// A subspace spanned by an explicit list of skew-Hermitian elements.
    pub fn new(ambient: TracialAlgebra, basis: Vec<ComplexMatrix>, gram_tol: f64) -> Result<Self> {
        for b in &basis {
            ambient.require_member(b)?;
            b.require_skew()?;
        }
        let mut s = Self { ambient, kind: SubalgebraKind::Basis, basis, gram_tol, orthonormal: false, lie_closed: false };
        // Rank deficiency is reported by `orthonormal_basis`, not here.
        s.lie_closed = s.span_is_lie_closed().unwrap_or(false);
        Ok(s)
    }

    pub fn zero(ambient: TracialAlgebra) -> Self {
        Self { ambient, kind: SubalgebraKind::Basis, basis: Vec::new(), gram_tol: DEFAULT_GRAM_TOL, orthonormal: true, lie_closed: true }
    }

    /// The whole skew-Hermitian part of the algebra.
    pub fn full(ambient: TracialAlgebra) -> Self {
        let basis = ambient.skew_basis();
        Self { ambient, kind: SubalgebraKind::Basis, basis, gram_tol: DEFAULT_GRAM_TOL, orthonormal: true, lie_closed: true }
    }

    /// The skew part of one of the enumerated subalgebras, with a trace-orthonormal basis.
    pub fn from_kind(ambient: TracialAlgebra, kind: SubalgebraKind) -> Result<Self> {
        let basis = match &kind {
            SubalgebraKind::Basis => return Err(Error::UnsupportedKind("basis kind needs explicit elements".into())),
            SubalgebraKind::CenterBlocks => (0..ambient.block_dims().len())
                .map(|b| ambient.block_unit(b).scale_c(I / ambient.trace_weights()[b].sqrt()))
                .collect(),
            SubalgebraKind::DiagM2 => {
                require_tensor(&ambient)?;
                let m = ambient.dim() / 2;
                ambient
                    .skew_basis()
                    .into_iter()
                    .filter(|b| (0..ambient.dim()).all(|i| (0..ambient.dim()).all(|j| (i < m) == (j < m) || b[(i, j)] == C64::new(0.0, 0.0))))
                    .collect()
            }
            SubalgebraKind::SpecialDiagM2 => {
                require_tensor(&ambient)?;
                let base = ambient.base()?;
                let zero = ComplexMatrix::zeros(base.dim());
                base.skew_basis().iter().map(|b| ComplexMatrix::from_quadrants(b, &zero, &zero, b)).collect()
            }
            SubalgebraKind::CommutantOfProjection(e) => {
                require_projection(&ambient, e, "e")?;
                null_space(&ambient, |x| ComplexMatrix::commutator(x, e))
            }
            SubalgebraKind::AnnihilatorOfPartialIsometry(v0) => {
                ambient.require_member(v0)?;
                let init = v0.adjoint() * v0;
                require_projection(&ambient, &init, "v0* v0")?;
                null_space(&ambient, |x| x * v0)
            }
        };
        let mut s = Self { ambient, kind, basis, gram_tol: DEFAULT_GRAM_TOL, orthonormal: true, lie_closed: false };
        s.lie_closed = s.span_is_lie_closed()?;
        Ok(s)
    }

    pub fn ambient(&self) -> &TracialAlgebra {
        &self.ambient
    }

    pub fn kind(&self) -> &SubalgebraKind {
        &self.kind
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gram_tol(&self) -> f64 {
        self.gram_tol
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Whether the span is closed under commutators.
    pub fn lie_closed(&self) -> bool {
        self.lie_closed
    }

    /// Gram-Schmidt (with one reorthogonalization pass) in the trace inner product.
    pub fn orthonormal_basis(&self) -> Result<Self> {
        if self.orthonormal {
            return Ok(self.clone());
        }
        let mut out: Vec<ComplexMatrix> = Vec::with_capacity(self.basis.len());
        for (index, b) in self.basis.iter().enumerate() {
            let before = self.ambient.inner(b, b);
            let mut v = b.clone();
            for _ in 0..2 {
                for q in &out {
                    let c = self.ambient.inner(&v, q);
                    v.add_scaled(-c, q);
                }
            }
            let after = self.ambient.inner(&v, &v);
            if !(after > self.gram_tol * before) || after <= 0.0 {
                return Err(Error::RankDeficient { index });
            }
            out.push(v.scale(1.0 / after.sqrt()));
        }
        Ok(Self { basis: out, orthonormal: true, ..self.clone() })
    }

    /// Coefficients of the trace-orthogonal projection onto the span. Requires an orthonormal basis.
    pub fn coefficients(&self, z: &ComplexMatrix) -> Vec<f64> {
        debug_assert!(self.orthonormal);
        self.basis.iter().map(|b| self.ambient.inner(z, b)).collect()
    }

    pub fn combine(&self, coefficients: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient.dim());
        for (c, b) in coefficients.iter().zip(&self.basis) {
            out.add_scaled(*c, b);
        }
        out
    }

    /// Trace-orthogonal projection onto the span. Requires an orthonormal basis.
    pub fn project_orthogonal(&self, z: &ComplexMatrix) -> ComplexMatrix {
        self.combine(&self.coefficients(z))
    }

    /// 2-norm distance from `z` to the span.
    pub fn distance_to_span(&self, z: &ComplexMatrix) -> f64 {
        self.ambient.norm2(&(z - &self.project_orthogonal(z)))
    }

    fn span_is_lie_closed(&self) -> Result<bool> {
        let on = self.orthonormal_basis()?;
        for j in 0..on.basis.len() {
            for k in (j + 1)..on.basis.len() {
                let c = ComplexMatrix::commutator(&on.basis[j], &on.basis[k]);
                if on.distance_to_span(&c) > 1e-9 * (1.0 + self.ambient.norm2(&c)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The trace-orthogonal complement inside the skew part of the ambient algebra.
    pub fn orthogonal_complement(&self) -> Result<Self> {
        let on = self.orthonormal_basis()?;
        let target = self.ambient.skew_dim() - on.dim();
        let mut out: Vec<ComplexMatrix> = Vec::with_capacity(target);
        for b in self.ambient.skew_basis() {
            if out.len() == target {
                break;
            }
            let mut v = b;
            for _ in 0..2 {
                for q in on.basis.iter().chain(out.iter()) {
                    let c = self.ambient.inner(&v, q);
                    v.add_scaled(-c, q);
                }
            }
            let norm = self.ambient.norm2(&v);
            if norm > 1e-6 {
                out.push(v.scale(1.0 / norm));
            }
        }
        if out.len() != target {
            return Err(Error::RankDeficient { index: out.len() });
        }
        let mut s = Self { ambient: self.ambient.clone(), kind: SubalgebraKind::Basis, basis: out, gram_tol: self.gram_tol, orthonormal: true, lie_closed: false };
        s.lie_closed = s.span_is_lie_closed()?;
        Ok(s)
    }

    /// Exact trace-preserving conditional expectation onto the subalgebra this subspace comes from.
    pub fn conditional_expectation(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        conditional_expectation(x, &self.kind, &self.ambient)
    }
}

fn require_tensor(ambient: &TracialAlgebra) -> Result<()> {
    if !ambient.is_tensor_m2() {
        return Err(Error::UnsupportedKind("kind requires an M (x) M2 presentation".into()));
    }
    Ok(())
}

fn require_projection(ambient: &TracialAlgebra, e: &ComplexMatrix, what: &'static str) -> Result<()> {
    ambient.require_member(e)?;
    let tol = 1e-9;
    if !e.is_hermitian(tol) || (&(e * e) - e).max_abs() > tol {
        return Err(Error::InvalidSpec(format!("{what} is not a projection")));
    }
    Ok(())
}

/// Trace-orthonormal basis of `{x skew in the ambient : constraint(x) = 0}` for a real-linear constraint.
fn null_space(ambient: &TracialAlgebra, constraint: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Vec<ComplexMatrix> {
    let ambient_basis = ambient.skew_basis();
    let d = ambient_basis.len();
    let n = ambient.dim();
    let rows = (2 * n * n).max(d);
    let mut a = DMatrix::<f64>::zeros(rows, d);
    for (k, b) in ambient_basis.iter().enumerate() {
        let image = constraint(b);
        for i in 0..n {
            for j in 0..n {
                a[(2 * (i * n + j), k)] = image[(i, j)].re;
                a[(2 * (i * n + j) + 1, k)] = image[(i, j)].im;
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s <= 1e-9 * top.max(1.0) {
            let mut x = ComplexMatrix::zeros(n);
            for (k, b) in ambient_basis.iter().enumerate() {
                x.add_scaled(v_t[(r, k)], b);
            }
            out.push(x.skew_part());
        }
    }
    out
}

/// Trace-preserving conditional expectation onto a subalgebra.
pub fn conditional_expectation(x: &ComplexMatrix, kind: &SubalgebraKind, ambient: &TracialAlgebra) -> Result<ComplexMatrix> {
    ambient.require_member(x)?;
    let n = ambient.dim();
    match kind {
        SubalgebraKind::Basis => Err(Error::UnsupportedKind("generic basis has no conditional expectation".into())),
        SubalgebraKind::CenterBlocks => {
            let mut out = ComplexMatrix::zeros(n);
            for b in 0..ambient.block_dims().len() {
                let unit = ambient.block_unit(b);
                let c = ambient.trace_product(&unit, x) / ambient.trace_weights()[b];
                out += &unit.scale_c(c);
            }
            Ok(out)
        }
        SubalgebraKind::DiagM2 => {
            require_tensor(ambient)?;
            let zero = ComplexMatrix::zeros(n / 2);
            Ok(ComplexMatrix::from_quadrants(&x.quadrant(0, 0), &zero, &zero, &x.quadrant(1, 1)))
        }
        SubalgebraKind::SpecialDiagM2 => {
            require_tensor(ambient)?;
            let zero = ComplexMatrix::zeros(n / 2);
            let avg = (&x.quadrant(0, 0) + &x.quadrant(1, 1)).scale(0.5);
            Ok(ComplexMatrix::from_quadrants(&avg, &zero, &zero, &avg))
        }
        SubalgebraKind::CommutantOfProjection(e) => {
            require_projection(ambient, e, "e")?;
            let perp = &ComplexMatrix::identity(n) - e;
            Ok(&(&(e * x) * e) + &(&(&perp * x) * &perp))
        }
        SubalgebraKind::AnnihilatorOfPartialIsometry(v0) => {
            let f = v0 * &v0.adjoint();
            require_projection(ambient, &f, "v0 v0*")?;
            let perp = &ComplexMatrix::identity(n) - &f;
            let tf = ambient.trace(&f)?.re;
            let scalar = if tf > 0.0 { ambient.trace_product(&f, x) / tf } else { C64::new(0.0, 0.0) };
            Ok(&f.scale_c(scalar) + &(&(&perp * x) * &perp))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, trial_rng};

    fn assert_orthonormal(s: &SkewSubspace) {
        for (j, a) in s.basis().iter().enumerate() {
            for (k, b) in s.basis().iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((s.ambient().inner(a, b) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_element_is_normalized() {
        let alg = TracialAlgebra::full(2);
        let b = ComplexMatrix::from_diagonal(&[I * 3.0, I]);
        let s = SkewSubspace::new(alg.clone(), vec![b.clone()], DEFAULT_GRAM_TOL).unwrap().orthonormal_basis().unwrap();
        assert!((&s.basis()[0] - &b.scale(1.0 / alg.norm2(&b))).max_abs() < 1e-15);
    }

    #[test]
    fn rank_deficiency_detected() {
        let alg = TracialAlgebra::full(2);
        let b = ComplexMatrix::from_diagonal(&[I, I * 2.0]);
        let s = SkewSubspace::new(alg, vec![b.clone(), b.scale(2.0)], DEFAULT_GRAM_TOL).unwrap();
        assert_eq!(s.orthonormal_basis().unwrap_err(), Error::RankDeficient { index: 1 });
    }

    #[test]
    fn random_basis_orthonormalizes() {
        let alg = TracialAlgebra::direct_sum(&[2, 2]).unwrap();
        let mut rng = trial_rng(3, 0);
        let basis: Vec<_> = (0..4).map(|_| random::skew(&alg, &mut rng)).collect();
        let s = SkewSubspace::new(alg, basis, DEFAULT_GRAM_TOL).unwrap().orthonormal_basis().unwrap();
        assert_orthonormal(&s);
    }

    #[test]
    fn center_of_direct_sum() {
        let alg = TracialAlgebra::direct_sum(&[2, 3]).unwrap();
        let s = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CenterBlocks).unwrap();
        assert_eq!(s.dim(), 2);
        assert_orthonormal(&s);
        assert!(s.lie_closed());
        let x = ComplexMatrix::from_diagonal(&[I, I, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(s.distance_to_span(&x) < 1e-14);
    }

    #[test]
    fn kinds_have_expected_dimensions() {
        let alg = TracialAlgebra::tensor_m2(&[2]).unwrap();
        let diag = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::DiagM2).unwrap();
        assert_eq!(diag.dim(), 8);
        assert_orthonormal(&diag);
        assert!(diag.lie_closed());
        let special = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::SpecialDiagM2).unwrap();
        assert_eq!(special.dim(), 4);
        assert_orthonormal(&special);
        let e = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0, 0.0]);
        let comm = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CommutantOfProjection(e)).unwrap();
        assert_eq!(comm.dim(), 8);
        assert_orthonormal(&comm);
        for b in diag.basis() {
            assert!(comm.distance_to_span(b) < 1e-10);
        }
        let full = TracialAlgebra::full(3);
        let v0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
        let ann = SkewSubspace::from_kind(full, SubalgebraKind::AnnihilatorOfPartialIsometry(v0)).unwrap();
        assert_eq!(ann.dim(), 4);
        assert!(ann.lie_closed());
        for b in ann.basis() {
            assert!(b[(0, 0)].norm() < 1e-12 && b[(1, 0)].norm() < 1e-12 && b[(0, 2)].norm() < 1e-12);
        }
    }

    #[test]
    fn complement_splits_the_skew_part() {
        let alg = TracialAlgebra::tensor_m2(&[1, 1]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::SpecialDiagM2).unwrap();
        let f = g.orthogonal_complement().unwrap();
        assert_eq!(g.dim() + f.dim(), alg.skew_dim());
        assert_orthonormal(&f);
        for a in g.basis() {
            for b in f.basis() {
                assert!(alg.inner(a, b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let alg = TracialAlgebra::tensor_m2(&[2]).unwrap();
        let mut rng = trial_rng(5, 0);
        let x = random::gaussian(&alg, &mut rng);
        let one = ComplexMatrix::identity(4);
        let zero = ComplexMatrix::zeros(2);
        let diag = conditional_expectation(&x, &SubalgebraKind::DiagM2, &alg).unwrap();
        assert_eq!(diag, ComplexMatrix::from_quadrants(&x.quadrant(0, 0), &zero, &zero, &x.quadrant(1, 1)));
        let avg = (&x.quadrant(0, 0) + &x.quadrant(1, 1)).scale(0.5);
        let special = conditional_expectation(&x, &SubalgebraKind::SpecialDiagM2, &alg).unwrap();
        assert!((&special - &ComplexMatrix::from_quadrants(&avg, &zero, &zero, &avg)).max_abs() < 1e-15);
        for kind in [SubalgebraKind::DiagM2, SubalgebraKind::SpecialDiagM2, SubalgebraKind::CenterBlocks] {
            let e = conditional_expectation(&x, &kind, &alg).unwrap();
            assert!((&conditional_expectation(&one, &kind, &alg).unwrap() - &one).max_abs() < 1e-15);
            assert!((alg.trace(&e).unwrap() - alg.trace(&x).unwrap()).norm() < 1e-13);
        }
        assert!(matches!(conditional_expectation(&x, &SubalgebraKind::Basis, &alg), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn annihilator_expectation_is_trace_preserving_projection() {
        let alg = TracialAlgebra::full(3);
        let v0 = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0]);
        let kind = SubalgebraKind::AnnihilatorOfPartialIsometry(v0);
        let mut rng = trial_rng(6, 0);
        let x = random::gaussian(&alg, &mut rng);
        let e = conditional_expectation(&x, &kind, &alg).unwrap();
        assert!((alg.trace(&e).unwrap() - alg.trace(&x).unwrap()).norm() < 1e-13);
        let ee = conditional_expectation(&e, &kind, &alg).unwrap();
        assert!((&ee - &e).max_abs() < 1e-14);
    }
}
