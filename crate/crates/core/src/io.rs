//! JSON input records for algebras, subspaces and curves.
//!
//! Matrices use the `{"n", "re", "im"}` layout of [`ComplexMatrix`]. Model spaces are read
//! directly as [`crate::models::ModelSpec`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurveTarget, SampledCurve};
use crate::linalg::{ComplexMatrix, TracialAlgebra};
use crate::projection::{SkewSubspace, SubalgebraKind};

/// `{"blocks": [..], "weights": [..]?, "tensor_m2": bool?}`. Weights default to `n_b / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub tensor_m2: bool,
}

impl AlgebraSpec {
    pub fn full(n: usize) -> Self {
        Self { blocks: vec![n], weights: None, tensor_m2: false }
    }

    pub fn build(&self) -> Result<TracialAlgebra> {
        match &self.weights {
            Some(w) => TracialAlgebra::new(self.blocks.clone(), w.clone(), self.tensor_m2),
            None if self.tensor_m2 => TracialAlgebra::tensor_m2(&self.blocks),
            None => TracialAlgebra::direct_sum(&self.blocks),
        }
    }
}

impl From<&TracialAlgebra> for AlgebraSpec {
    fn from(alg: &TracialAlgebra) -> Self {
        Self { blocks: alg.block_dims().to_vec(), weights: Some(alg.trace_weights().to_vec()), tensor_m2: alg.is_tensor_m2() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceKind {
    Zero,
    Full,
    Basis,
    CenterBlocks,
    DiagM2,
    SpecialDiagM2,
    CommutantOfProjection,
    AnnihilatorOfPartialIsometry,
}

/// A subspace of skew-Hermitian elements: `{"algebra", "kind", "basis"?, "e"?, "v0"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    pub algebra: AlgebraSpec,
    pub kind: SubspaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<ComplexMatrix>,
}

impl SubspaceSpec {
    pub fn build(&self) -> Result<SkewSubspace> {
        let alg = self.algebra.build()?;
        let missing = |field: &str| Error::InvalidSpec(format!("subspace kind requires \"{field}\""));
        let kind = match self.kind {
            SubspaceKind::Zero => return Ok(SkewSubspace::zero(alg)),
            SubspaceKind::Full => return Ok(SkewSubspace::full(alg)),
            SubspaceKind::Basis => {
                let basis = self.basis.clone().ok_or_else(|| missing("basis"))?;
                return SkewSubspace::new(alg, basis, crate::projection::DEFAULT_GRAM_TOL)?.orthonormal_basis();
            }
            SubspaceKind::CenterBlocks => SubalgebraKind::CenterBlocks,
            SubspaceKind::DiagM2 => SubalgebraKind::DiagM2,
            SubspaceKind::SpecialDiagM2 => SubalgebraKind::SpecialDiagM2,
            SubspaceKind::CommutantOfProjection => {
                SubalgebraKind::CommutantOfProjection(self.e.clone().ok_or_else(|| missing("e"))?)
            }
            SubspaceKind::AnnihilatorOfPartialIsometry => {
                SubalgebraKind::AnnihilatorOfPartialIsometry(self.v0.clone().ok_or_else(|| missing("v0"))?)
            }
        };
        SkewSubspace::from_kind(alg, kind)
    }
}

/// A sampled curve `{"grid_n", "target": "unitary" | "orbit", "nodes": [..]}` on `t_k = k / grid_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub grid_n: usize,
    pub target: CurveTarget,
    pub nodes: Vec<ComplexMatrix>,
}

impl CurveSpec {
    pub fn build(&self) -> Result<SampledCurve> {
        if self.grid_n + 1 != self.nodes.len() {
            return Err(Error::InvalidCurve(format!("grid_n = {} but {} nodes", self.grid_n, self.nodes.len())));
        }
        SampledCurve::from_nodes(self.nodes.clone(), self.target)
    }
}

impl From<&SampledCurve> for CurveSpec {
    fn from(curve: &SampledCurve) -> Self {
        Self { grid_n: curve.grid_n(), target: curve.target(), nodes: curve.nodes().to_vec() }
    }
}

/// Parses a JSON document, mapping parse failures to [`Error::Json`].
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))
}
