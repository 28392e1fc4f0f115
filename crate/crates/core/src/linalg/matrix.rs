//! Dense square complex matrices.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Default predicate tolerance for an `n`-dimensional matrix.
pub fn default_tol(n: usize) -> f64 {
    1e-12 * n.max(1) as f64
}

/// A dense `n x n` complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        let n = d.len();
        Self::from_fn(n, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: im.len() });
        }
        for row in re.iter().chain(im.iter()) {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
        }
        let m = Self::from_fn(n, |i, j| C64::new(re[i][j], im[i][j]));
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        Ok(Self(m))
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(&self.0 + other.0.map(|z| z * s))
    }

    /// Accumulates `s * other` in place.
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// `ab - ba`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        Self(&a.0 * &b.0 - &b.0 * &a.0)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let gram = self.adjoint() * self;
        let (vals, _) = crate::linalg::spectral::eigh_raw(&gram);
        vals.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs() <= tol
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        (self + &self.adjoint()).max_abs() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        (&(self.adjoint() * self) - &Self::identity(n)).max_abs() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(0.5)
    }

    pub fn skew_part(&self) -> Self {
        (self - &self.adjoint()).scale(0.5)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// All powers `self^0 ..= self^k`.
    pub fn powers(&self, k: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(Self::identity(self.dim()));
        for j in 1..=k {
            let next = &out[j - 1] * self;
            out.push(next);
        }
        out
    }

    /// The `(r, c)` quadrant of a matrix viewed as a 2x2 block matrix.
    pub fn quadrant(&self, r: usize, c: usize) -> Self {
        let m = self.dim() / 2;
        Self::from_fn(m, |i, j| self.0[(r * m + i, c * m + j)])
    }

    pub fn from_quadrants(q00: &Self, q01: &Self, q10: &Self, q11: &Self) -> Self {
        let m = q00.dim();
        Self::from_fn(2 * m, |i, j| {
            let (r, a) = (i / m, i % m);
            let (c, b) = (j / m, j % m);
            match (r, c) {
                (0, 0) => q00[(a, b)],
                (0, 1) => q01[(a, b)],
                (1, 0) => q10[(a, b)],
                _ => q11[(a, b)],
            }
        })
    }

    pub fn require_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.dim() });
        }
        Ok(())
    }

    pub fn require_skew(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if !self.is_skew_hermitian(default_tol(self.dim()) * (1.0 + self.max_abs())) {
            return Err(Error::Precondition("skew-Hermitian"));
        }
        Ok(())
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if !self.is_hermitian(default_tol(self.dim()) * (1.0 + self.max_abs())) {
            return Err(Error::Precondition("Hermitian"));
        }
        Ok(())
    }

    pub fn require_unitary(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        // Products of many unitaries drift; 1e-9 matches the curve-node tolerance.
        if !self.is_unitary(1e-9) {
            return Err(Error::Precondition("unitary"));
        }
        Ok(())
    }
}

/// Wire format: `{"n": int, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| self[(i, j)].im).collect()).collect();
        MatrixJson { n, re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        if raw.re.len() != raw.n {
            return Err(serde::de::Error::custom(format!("expected {} rows, found {}", raw.n, raw.re.len())));
        }
        ComplexMatrix::from_parts(&raw.re, &raw.im).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) [", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            write!(f, "\n  ")?;
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
        }
        write!(f, "\n]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $m(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $m(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op rhs.0)
            }
        }
        impl $tr<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $m(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(self.0 $op &rhs.0)
            }
        }
        impl $tr<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $m(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 -= &rhs.0;
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrant_roundtrip() {
        let m = ComplexMatrix::from_fn(4, |i, j| C64::new(i as f64, j as f64));
        let back = ComplexMatrix::from_quadrants(
            &m.quadrant(0, 0),
            &m.quadrant(0, 1),
            &m.quadrant(1, 0),
            &m.quadrant(1, 1),
        );
        assert_eq!(m, back);
        assert_eq!(m.quadrant(1, 0)[(0, 1)], C64::new(2.0, 1.0));
    }

    #[test]
    fn predicates() {
        let h = ComplexMatrix::from_fn(2, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0 - 2.0 * i as f64) });
        assert!(h.is_hermitian(1e-14));
        assert!(h.scale_c(I).is_skew_hermitian(1e-14));
        assert!(!h.is_skew_hermitian(1e-3));
        assert!(ComplexMatrix::identity(3).scale(-1.0).is_unitary(1e-14));
    }

    #[test]
    fn parts_reject_nan() {
        let re = vec![vec![f64::NAN]];
        let im = vec![vec![0.0]];
        assert_eq!(ComplexMatrix::from_parts(&re, &im), Err(Error::NonFinite));
    }

    #[test]
    fn json_roundtrip() {
        let m = ComplexMatrix::from_fn(2, |i, j| C64::new(i as f64 - 0.5, j as f64 * 0.25));
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"n":2,"re":[[-0.5,-0.5],[0.5,0.5]],"im":[[0.0,0.25],[0.0,0.25]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"n":2,"re":[[1.0]],"im":[[0.0]]}"#).is_err());
    }

    #[test]
    fn op_norm_of_diagonal() {
        let d = ComplexMatrix::from_diagonal(&[C64::new(0.0, 3.0), C64::new(-1.0, 0.0)]);
        assert!((d.op_norm() - 3.0).abs() < 1e-14);
    }
}
