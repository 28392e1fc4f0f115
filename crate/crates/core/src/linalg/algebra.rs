//! Block direct sums of matrix algebras with a normalized trace.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, C64, I};
use super::spectral::eigh_raw;
use crate::error::{Error, Result};

/// A finite-dimensional algebra `M_{n_1} (+) ... (+) M_{n_k}`, optionally presented as `M (x) M_2`.
///
/// Plain presentations store block `b` on the contiguous index range of length `n_b`.
/// The `M (x) M_2` presentation stores a matrix as a 2x2 block matrix over `M`; block
/// `b` of `M` then occupies the same index range inside both diagonal quadrants.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialAlgebra {
    block_dims: Vec<usize>,
    trace_weights: Vec<f64>,
    tensor_m2: bool,
    block_of: Vec<usize>,
    diag_weights: Vec<f64>,
}

impl TracialAlgebra {
    pub fn new(block_dims: Vec<usize>, trace_weights: Vec<f64>, tensor_m2: bool) -> Result<Self> {
        if block_dims.is_empty() || block_dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidSpec("block dimensions must be positive".into()));
        }
        if trace_weights.len() != block_dims.len() {
            return Err(Error::DimensionMismatch { expected: block_dims.len(), found: trace_weights.len() });
        }
        if trace_weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSpec("trace weights must be positive".into()));
        }
        let total: f64 = trace_weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("trace weights sum to {total}, not 1")));
        }
        let m: usize = block_dims.iter().sum();
        let copies = if tensor_m2 { 2 } else { 1 };
        let mut block_of = vec![0; copies * m];
        let mut diag_weights = vec![0.0; copies * m];
        let mut offset = 0;
        for (b, (&d, &w)) in block_dims.iter().zip(&trace_weights).enumerate() {
            for c in 0..copies {
                for i in 0..d {
                    block_of[c * m + offset + i] = b;
                    diag_weights[c * m + offset + i] = w / (copies * d) as f64;
                }
            }
            offset += d;
        }
        Ok(Self { block_dims, trace_weights, tensor_m2, block_of, diag_weights })
    }

    /// The full matrix algebra `M_n` with its normalized trace.
    pub fn full(n: usize) -> Self {
        Self::new(vec![n], vec![1.0], false).expect("valid full algebra")
    }

    /// A direct sum whose trace weights are proportional to block dimensions.
    pub fn direct_sum(block_dims: &[usize]) -> Result<Self> {
        let n: usize = block_dims.iter().sum();
        let weights = block_dims.iter().map(|&d| d as f64 / n.max(1) as f64).collect();
        Self::new(block_dims.to_vec(), weights, false)
    }

    /// `M (x) M_2` over a direct sum `M` with dimension-proportional weights.
    pub fn tensor_m2(block_dims: &[usize]) -> Result<Self> {
        let n: usize = block_dims.iter().sum();
        let weights = block_dims.iter().map(|&d| d as f64 / n.max(1) as f64).collect();
        Self::new(block_dims.to_vec(), weights, true)
    }

    pub fn dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    pub fn is_tensor_m2(&self) -> bool {
        self.tensor_m2
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    /// Trace weight carried by each standard basis index.
    pub fn diag_weights(&self) -> &[f64] {
        &self.diag_weights
    }

    /// The algebra `M` underlying an `M (x) M_2` presentation.
    pub fn base(&self) -> Result<Self> {
        if !self.tensor_m2 {
            return Err(Error::UnsupportedKind("base of a plain algebra".into()));
        }
        Self::new(self.block_dims.clone(), self.trace_weights.clone(), false)
    }

    /// Indicator of block `b`.
    pub fn block_unit(&self, b: usize) -> ComplexMatrix {
        let d: Vec<f64> = self.block_of.iter().map(|&c| if c == b { 1.0 } else { 0.0 }).collect();
        ComplexMatrix::from_real_diagonal(&d)
    }

    /// Normalized trace.
    pub fn trace(&self, x: &ComplexMatrix) -> Result<C64> {
        x.require_dim(self.dim())?;
        Ok(self.trace_unchecked(x))
    }

    pub(crate) fn trace_unchecked(&self, x: &ComplexMatrix) -> C64 {
        self.diag_weights.iter().enumerate().map(|(i, &w)| x[(i, i)] * w).sum()
    }

    /// `tau(a b)` without forming the product.
    pub fn trace_product(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..n {
                row += a[(i, k)] * b[(k, i)];
            }
            acc += row * self.diag_weights[i];
        }
        acc
    }

    /// Real trace inner product `Re tau(b* a)`.
    pub fn inner(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for k in 0..n {
                let z = b[(k, i)].conj() * a[(k, i)];
                row += z.re;
            }
            acc += row * self.diag_weights[i];
        }
        acc
    }

    /// The 2-norm `tau(x* x)^{1/2}`.
    pub fn norm2(&self, x: &ComplexMatrix) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Largest entry lying outside the block pattern.
    pub fn off_block_defect(&self, x: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if self.block_of[i] != self.block_of[j] {
                    worst = worst.max(x[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        x.dim() == self.dim() && self.off_block_defect(x) <= tol
    }

    pub fn require_member(&self, x: &ComplexMatrix) -> Result<()> {
        x.require_dim(self.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.off_block_defect(x) > 1e-9 * (1.0 + x.max_abs()) {
            return Err(Error::NotInAlgebra);
        }
        Ok(())
    }

    /// Noncommutative p-norm `tau(|x|^p)^{1/p}`; `p = f64::INFINITY` gives the operator norm.
    pub fn p_norm(&self, x: &ComplexMatrix, p: f64) -> Result<f64> {
        check_exponent(p)?;
        self.require_member(x)?;
        Ok(self.p_norm_unchecked(x, p))
    }

    pub(crate) fn p_norm_unchecked(&self, x: &ComplexMatrix, p: f64) -> f64 {
        if p.is_infinite() {
            return x.op_norm();
        }
        let gram = x.adjoint() * x;
        if p.fract() == 0.0 && (p as usize) % 2 == 0 && p <= 64.0 {
            let half = gram.pow(p as usize / 2);
            return self.trace_unchecked(&half).re.max(0.0).powf(1.0 / p);
        }
        let (vals, frame) = eigh_raw(&gram);
        let weights = self.eigen_weights(&frame);
        let sum: f64 = vals.iter().zip(&weights).map(|(&l, &w)| w * l.max(0.0).powf(p / 2.0)).sum();
        sum.powf(1.0 / p)
    }

    /// Trace weight of each eigenvector column of a frame: `sum_i d_i |v_i|^2`.
    pub fn eigen_weights(&self, frame: &ComplexMatrix) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| (0..n).map(|i| self.diag_weights[i] * frame[(i, k)].norm_sqr()).sum())
            .collect()
    }

    /// A trace-orthonormal basis of the skew-Hermitian part of the algebra.
    pub fn skew_basis(&self) -> Vec<ComplexMatrix> {
        let n = self.dim();
        let mut basis = Vec::new();
        for i in 0..n {
            let mut x = ComplexMatrix::zeros(n);
            x[(i, i)] = I / self.diag_weights[i].sqrt();
            basis.push(x);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.block_of[i] != self.block_of[j] {
                    continue;
                }
                let s = 1.0 / (self.diag_weights[i] + self.diag_weights[j]).sqrt();
                let mut x = ComplexMatrix::zeros(n);
                x[(i, j)] = C64::new(s, 0.0);
                x[(j, i)] = C64::new(-s, 0.0);
                basis.push(x);
                let mut y = ComplexMatrix::zeros(n);
                y[(i, j)] = I * s;
                y[(j, i)] = I * s;
                basis.push(y);
            }
        }
        basis
    }

    /// Real dimension of the skew-Hermitian part.
    pub fn skew_dim(&self) -> usize {
        let n = self.dim();
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                if self.block_of[i] == self.block_of[j] {
                    count += 1;
                }
            }
        }
        count
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p, "p must be at least 1"));
    }
    Ok(())
}

/// Converts a real exponent into an even integer, as required by the certified solvers.
pub fn even_exponent(p: f64) -> Result<u32> {
    check_exponent(p)?;
    if p.is_infinite() || p.fract() != 0.0 || (p as u64) % 2 != 0 || p > 64.0 {
        return Err(Error::InvalidExponent(p, "an even integer between 2 and 64 is required"));
    }
    Ok(p as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_is_normalized() {
        for alg in [
            TracialAlgebra::full(3),
            TracialAlgebra::direct_sum(&[2, 3]).unwrap(),
            TracialAlgebra::tensor_m2(&[1, 2]).unwrap(),
            TracialAlgebra::new(vec![1, 2], vec![0.3, 0.7], false).unwrap(),
        ] {
            let one = ComplexMatrix::identity(alg.dim());
            assert!((alg.trace(&one).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn trace_of_rank_one_projection() {
        let alg = TracialAlgebra::full(2);
        let e = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!((alg.trace(&e).unwrap().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn doubled_trace_averages_quadrants() {
        let alg = TracialAlgebra::tensor_m2(&[2]).unwrap();
        let base = TracialAlgebra::full(2);
        let x = ComplexMatrix::from_fn(4, |i, j| C64::new((i * 4 + j) as f64, (i + j) as f64 * 0.5));
        let expected = (base.trace(&x.quadrant(0, 0)).unwrap() + base.trace(&x.quadrant(1, 1)).unwrap()) * 0.5;
        assert!((alg.trace(&x).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn p_norm_of_diagonal_example() {
        let alg = TracialAlgebra::full(2);
        let x = ComplexMatrix::from_diagonal(&[C64::new(0.0, std::f64::consts::PI), C64::new(0.0, 0.0)]);
        let expected = std::f64::consts::PI * 0.5f64.powf(0.25);
        assert!((alg.p_norm(&x, 4.0).unwrap() - expected).abs() < 1e-14);
        assert!((alg.p_norm(&x, 3.0).unwrap() - std::f64::consts::PI * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-13);
        assert!((alg.p_norm(&x, f64::INFINITY).unwrap() - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn identity_has_unit_norm_for_every_p() {
        let alg = TracialAlgebra::direct_sum(&[1, 3]).unwrap();
        let one = ComplexMatrix::identity(4);
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, 7.5, f64::INFINITY] {
            assert!((alg.p_norm(&one, p).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_small_exponent_and_off_block_entries() {
        let alg = TracialAlgebra::direct_sum(&[1, 1]).unwrap();
        let mut x = ComplexMatrix::identity(2);
        assert!(matches!(alg.p_norm(&x, 0.5), Err(Error::InvalidExponent(..))));
        x[(0, 1)] = C64::new(1.0, 0.0);
        assert_eq!(alg.p_norm(&x, 2.0), Err(Error::NotInAlgebra));
    }

    #[test]
    fn skew_basis_is_orthonormal_with_expected_dimension() {
        let alg = TracialAlgebra::tensor_m2(&[1, 2]).unwrap();
        let basis = alg.skew_basis();
        assert_eq!(basis.len(), alg.skew_dim());
        assert_eq!(basis.len(), 2 * 2 + 4 * 4);
        for (j, a) in basis.iter().enumerate() {
            assert!(a.is_skew_hermitian(1e-15));
            assert!(alg.contains(a, 0.0));
            for (k, b) in basis.iter().enumerate() {
                let g = alg.inner(a, b);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-13, "gram[{j},{k}] = {g}");
            }
        }
    }

    #[test]
    fn even_exponent_validation() {
        assert_eq!(even_exponent(4.0), Ok(4));
        assert!(even_exponent(3.0).is_err());
        assert!(even_exponent(f64::INFINITY).is_err());
        assert!(even_exponent(2.5).is_err());
    }
}
