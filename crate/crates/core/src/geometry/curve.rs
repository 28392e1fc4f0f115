//! Curves sampled on a uniform grid of `[0, 1]`, their velocities and lengths.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{exp_and_differential, ComplexMatrix, TracialAlgebra};
use crate::projection::quotient_norm;

use super::space::HomSpace;

/// What a sampled curve lives in.
///
/// Orbit curves are stored through unitary lifts: node `k` represents the point `node_k . x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveTarget {
    Unitary,
    Orbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeRule {
    /// Velocities supplied in closed form by the curve's construction.
    ExactExponential,
    /// Fourth-order finite differences of the nodes.
    CentralDifference,
}

/// Node values of a unitary curve on `t_k = k / N`, `k = 0..=N`.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    nodes: Vec<ComplexMatrix>,
    /// Left-trivialized velocities `Gamma* Gamma'` at the nodes, when known exactly.
    velocities: Option<Vec<ComplexMatrix>>,
    target: CurveTarget,
}

/// Generator of one exponential factor: `t -> (h(t), h'(t))` with `h(t)` skew-Hermitian.
pub type Generator<'a> = dyn Fn(f64) -> (ComplexMatrix, ComplexMatrix) + 'a;

impl SampledCurve {
    /// A curve whose velocities are obtained by finite differences.
    pub fn from_nodes(nodes: Vec<ComplexMatrix>, target: CurveTarget) -> Result<Self> {
        let curve = Self { nodes, velocities: None, target };
        curve.validate()?;
        Ok(curve)
    }

    /// A curve with exact left-trivialized velocities.
    pub fn with_velocities(nodes: Vec<ComplexMatrix>, velocities: Vec<ComplexMatrix>, target: CurveTarget) -> Result<Self> {
        if velocities.len() != nodes.len() {
            return Err(Error::InvalidCurve(format!("{} nodes but {} velocities", nodes.len(), velocities.len())));
        }
        let curve = Self { nodes, velocities: Some(velocities), target };
        curve.validate()?;
        Ok(curve)
    }

    /// `left * e^{h_1(t)} ... e^{h_m(t)}` sampled with exact velocities.
    pub fn product_of_exponentials(
        left: &ComplexMatrix,
        factors: &[&Generator<'_>],
        grid_n: usize,
        target: CurveTarget,
    ) -> Result<Self> {
        let n = left.dim();
        let mut nodes = Vec::with_capacity(grid_n + 1);
        let mut velocities = Vec::with_capacity(grid_n + 1);
        for k in 0..=grid_n {
            let t = k as f64 / grid_n as f64;
            let mut right = ComplexMatrix::identity(n);
            let mut velocity = ComplexMatrix::zeros(n);
            for factor in factors.iter().rev() {
                let (h, hdot) = factor(t);
                let (e, d) = exp_and_differential(&h, &hdot);
                velocity = &(&(&right.adjoint() * &d) * &right) + &velocity;
                right = &e * &right;
            }
            nodes.push(left * &right);
            velocities.push(velocity.skew_part());
        }
        Self::with_velocities(nodes, velocities, target)
    }

    /// The one-parameter curve `u e^{t z}`.
    pub fn exponential(u: &ComplexMatrix, z: &ComplexMatrix, grid_n: usize, target: CurveTarget) -> Result<Self> {
        let generator = |t: f64| (z.scale(t), z.clone());
        Self::product_of_exponentials(u, &[&generator], grid_n, target)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidCurve("a curve needs at least two nodes".into()));
        }
        let n = self.nodes[0].dim();
        for u in &self.nodes {
            u.require_dim(n)?;
            u.require_unitary()?;
        }
        if self.velocities.is_none() && self.nodes.len() < 5 {
            return Err(Error::InvalidCurve("finite differences need at least five nodes".into()));
        }
        for (index, w) in self.nodes.windows(2).enumerate() {
            let chord = (&w[1] - &w[0]).op_norm();
            if chord >= 2.0 {
                return Err(Error::GridTooCoarse { index, chord });
            }
        }
        Ok(())
    }

    /// Number of grid intervals `N`.
    pub fn grid_n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 / self.grid_n() as f64
    }

    pub fn nodes(&self) -> &[ComplexMatrix] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &ComplexMatrix {
        &self.nodes[k]
    }

    pub fn target(&self) -> CurveTarget {
        self.target
    }

    pub fn derivative_rule(&self) -> DerivativeRule {
        if self.velocities.is_some() {
            DerivativeRule::ExactExponential
        } else {
            DerivativeRule::CentralDifference
        }
    }

    pub fn with_target(mut self, target: CurveTarget) -> Self {
        self.target = target;
        self
    }

    /// Left-trivialized velocities `Gamma(t_k)* Gamma'(t_k)`.
    pub fn velocities(&self) -> Cow<'_, [ComplexMatrix]> {
        match &self.velocities {
            Some(v) => Cow::Borrowed(v),
            None => {
                let h = 1.0 / self.grid_n() as f64;
                let derivs = finite_differences(&self.nodes, h);
                Cow::Owned(self.nodes.iter().zip(&derivs).map(|(u, d)| (u.adjoint() * d).skew_part()).collect())
            }
        }
    }
}

/// Fourth-order derivative estimates at every node (one-sided stencils near the ends).
pub fn finite_differences(nodes: &[ComplexMatrix], h: f64) -> Vec<ComplexMatrix> {
    let m = nodes.len();
    assert!(m >= 5, "finite differences need at least five nodes");
    let combo = |idx: [usize; 5], coef: [f64; 5]| {
        let mut out = ComplexMatrix::zeros(nodes[0].dim());
        for (i, c) in idx.iter().zip(coef) {
            if c != 0.0 {
                out.add_scaled(c / (12.0 * h), &nodes[*i]);
            }
        }
        out
    };
    (0..m)
        .map(|k| {
            if k >= 2 && k + 2 < m {
                combo([k - 2, k - 1, k, k + 1, k + 2], [1.0, -8.0, 0.0, 8.0, -1.0])
            } else if k == 0 {
                combo([0, 1, 2, 3, 4], [-25.0, 48.0, -36.0, 16.0, -3.0])
            } else if k == 1 {
                combo([0, 1, 2, 3, 4], [-3.0, -10.0, 18.0, -6.0, 1.0])
            } else if k == m - 1 {
                combo([m - 1, m - 2, m - 3, m - 4, m - 5], [25.0, -48.0, 36.0, -16.0, 3.0])
            } else {
                combo([m - 1, m - 2, m - 3, m - 4, m - 5], [3.0, 10.0, -18.0, 6.0, -1.0])
            }
        })
        .collect()
}

/// Composite quadrature weights on `N` uniform intervals of `[0, 1]`: Simpson, closed by a
/// three-eighths panel when `N` is odd.
pub fn simpson_weights(intervals: usize) -> Vec<f64> {
    let h = 1.0 / intervals as f64;
    let mut w = vec![0.0; intervals + 1];
    match intervals {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
            let mut k = 0;
            while k < simpson_end {
                w[k] += h / 3.0;
                w[k + 1] += 4.0 * h / 3.0;
                w[k + 2] += h / 3.0;
                k += 2;
            }
            if simpson_end < intervals {
                let s = simpson_end;
                for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[s + j] += 3.0 * h / 8.0 * c;
                }
            }
        }
    }
    w
}

/// `int_0^1 ||Gamma* Gamma'||_p dt`.
pub fn curve_length_p(curve: &SampledCurve, p: f64, alg: &TracialAlgebra) -> Result<f64> {
    crate::linalg::algebra::check_exponent(p)?;
    curve.node(0).require_dim(alg.dim())?;
    let weights = simpson_weights(curve.grid_n());
    let v = curve.velocities();
    Ok(v.iter().zip(&weights).map(|(x, w)| w * alg.p_norm_unchecked(x, p)).sum())
}

/// `int_0^1 inf_{y in isotropy} ||Gamma* Gamma' - y||_p dt`: the quotient length of the orbit curve.
pub fn quotient_length(curve: &SampledCurve, space: &HomSpace, p: f64) -> Result<f64> {
    let weights = simpson_weights(curve.grid_n());
    let v = curve.velocities();
    let mut total = 0.0;
    for (x, w) in v.iter().zip(&weights) {
        total += w * quotient_norm(x, space.isotropy(), p)?.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, trial_rng};

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for n in [2, 3, 5, 8, 9] {
            let w = simpson_weights(n);
            let integral: f64 = w.iter().enumerate().map(|(k, wk)| wk * (k as f64 / n as f64).powi(3)).sum();
            assert!((integral - 0.25).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn finite_differences_are_fourth_order() {
        let f = |t: f64| ComplexMatrix::identity(1).scale(t.powi(4));
        let nodes: Vec<_> = (0..=8).map(|k| f(k as f64 / 8.0)).collect();
        let d = finite_differences(&nodes, 1.0 / 8.0);
        for (k, dk) in d.iter().enumerate() {
            let t = k as f64 / 8.0;
            assert!((dk[(0, 0)].re - 4.0 * t.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_curve_has_zero_length() {
        let alg = TracialAlgebra::full(2);
        let nodes = vec![ComplexMatrix::identity(2); 9];
        let c = SampledCurve::from_nodes(nodes, CurveTarget::Unitary).unwrap();
        assert!(curve_length_p(&c, 4.0, &alg).unwrap().abs() < 1e-15);
    }

    #[test]
    fn exponential_curve_length_is_norm_of_generator() {
        let alg = TracialAlgebra::full(3);
        let mut rng = trial_rng(11, 0);
        let z = random::skew_with_norm(&alg, &mut rng, 2.0);
        let u = random::unitary(&alg, &mut rng);
        let c = SampledCurve::exponential(&u, &z, 16, CurveTarget::Unitary).unwrap();
        for p in [2.0, 4.0, 3.0] {
            let want = alg.p_norm(&z, p).unwrap();
            assert!((curve_length_p(&c, p, &alg).unwrap() - want).abs() < 1e-12);
        }
        let fd = SampledCurve::from_nodes(c.nodes().to_vec(), CurveTarget::Unitary).unwrap();
        assert!((curve_length_p(&fd, 2.0, &alg).unwrap() - alg.p_norm(&z, 2.0).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn coarse_grid_rejected() {
        let n = 1;
        let nodes = vec![ComplexMatrix::identity(n), ComplexMatrix::identity(n).scale(-1.0)];
        assert!(matches!(SampledCurve::from_nodes(nodes.clone(), CurveTarget::Unitary), Err(Error::InvalidCurve(_))));
        let v = vec![ComplexMatrix::zeros(1); 2];
        assert!(matches!(SampledCurve::with_velocities(nodes, v, CurveTarget::Unitary), Err(Error::GridTooCoarse { .. })));
    }
}
