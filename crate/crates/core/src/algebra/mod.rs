//! Represented algebras and block elements over them.
//!
//! Every algebra is stored fiberwise: a full matrix algebra has one fiber,
//! a direct sum one fiber per summand, a sampled field one fiber per mesh
//! vertex. An element of `M_{r,c}(A)` is a list of `(r·k_f) × (c·k_f)`
//! matrices, one per fiber; tuples in `A^n` are the `r = n, c = 1` case.

mod mesh;
mod sample;
mod tuple;
mod winding;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, MatrixDoc};
use crate::{Error, Result};

pub use mesh::{Edge, MeshDoc, SimplicialMesh};
pub use sample::{probes, random_element, random_tuple, unitary_directions};
pub use tuple::{is_lg, tuple_norm, LgCertificate, Tuple};
pub use winding::winding_number;

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraKind {
    FullMatrix { k: usize },
    DirectSum { blocks: Vec<usize> },
    /// Vertex samples of a continuous `M_k`-valued function on a mesh.
    SampledField { mesh: SimplicialMesh, k: usize },
    /// A unital *-subalgebra of `M_d` given by an orthonormal basis.
    Represented {
        d: usize,
        basis: Vec<ComplexMatrix>,
        contains_unit: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Algebra {
    kind: AlgebraKind,
    fiber_dims: Vec<usize>,
}

/// Algebra spec document (tagged by `kind`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraSpec {
    FullMatrix { k: usize },
    DirectSum { blocks: Vec<usize> },
    Interval { resolution: usize, #[serde(default = "one")] k: usize },
    Disk { resolution: usize, #[serde(default = "one")] k: usize },
    MeshField { mesh: MeshDoc, #[serde(default = "one")] k: usize },
    Represented { d: usize, basis: Vec<MatrixDoc>, contains_unit: bool },
}

fn one() -> usize {
    1
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<Algebra> {
        match self {
            AlgebraSpec::FullMatrix { k } => Algebra::full_matrix(*k),
            AlgebraSpec::DirectSum { blocks } => Algebra::direct_sum(blocks.clone()),
            AlgebraSpec::Interval { resolution, k } => {
                Algebra::field(SimplicialMesh::interval(*resolution)?, *k)
            }
            AlgebraSpec::Disk { resolution, k } => {
                Algebra::field(SimplicialMesh::disk(*resolution)?, *k)
            }
            AlgebraSpec::MeshField { mesh, k } => Algebra::field(SimplicialMesh::from_doc(mesh)?, *k),
            AlgebraSpec::Represented {
                d,
                basis,
                contains_unit,
            } => {
                let basis = basis
                    .iter()
                    .map(ComplexMatrix::from_doc)
                    .collect::<Result<Vec<_>>>()?;
                Algebra::represented(*d, basis, *contains_unit)
            }
        }
    }
}

impl Algebra {
    pub fn full_matrix(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("fiber size must be at least 1".into()));
        }
        Ok(Self {
            kind: AlgebraKind::FullMatrix { k },
            fiber_dims: vec![k],
        })
    }

    pub fn direct_sum(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Invalid("direct sum blocks must be nonempty and ≥ 1".into()));
        }
        Ok(Self {
            fiber_dims: blocks.clone(),
            kind: AlgebraKind::DirectSum { blocks },
        })
    }

    pub fn field(mesh: SimplicialMesh, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("fiber size must be at least 1".into()));
        }
        Ok(Self {
            fiber_dims: vec![k; mesh.vertices().len()],
            kind: AlgebraKind::SampledField { mesh, k },
        })
    }

    /// Built-in unit interval field `C([0,1], M_k)`.
    pub fn interval(resolution: usize, k: usize) -> Result<Self> {
        Self::field(SimplicialMesh::interval(resolution)?, k)
    }

    /// Built-in closed disk field `C(D, M_k)`.
    pub fn disk(resolution: usize, k: usize) -> Result<Self> {
        Self::field(SimplicialMesh::disk(resolution)?, k)
    }

    pub fn represented(d: usize, basis: Vec<ComplexMatrix>, contains_unit: bool) -> Result<Self> {
        if d == 0 || basis.is_empty() {
            return Err(Error::Invalid("represented algebra needs d ≥ 1 and a basis".into()));
        }
        if basis.iter().any(|b| b.shape() != (d, d)) {
            return Err(Error::Shape(format!("basis matrices must be {d}x{d}")));
        }
        Ok(Self {
            fiber_dims: vec![d],
            kind: AlgebraKind::Represented {
                d,
                basis,
                contains_unit,
            },
        })
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn fiber_dims(&self) -> &[usize] {
        &self.fiber_dims
    }

    pub fn fiber_count(&self) -> usize {
        self.fiber_dims.len()
    }

    pub fn max_fiber_dim(&self) -> usize {
        self.fiber_dims.iter().copied().max().unwrap_or(1)
    }

    pub fn mesh(&self) -> Option<&SimplicialMesh> {
        match &self.kind {
            AlgebraKind::SampledField { mesh, .. } => Some(mesh),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        self.mesh().is_some()
    }

    pub fn is_unital(&self) -> bool {
        match &self.kind {
            AlgebraKind::Represented { contains_unit, .. } => *contains_unit,
            _ => true,
        }
    }

    /// Distance from any point of the underlying space to the nearest
    /// sample point; zero for algebras without a mesh.
    pub fn slack_radius(&self) -> f64 {
        self.mesh().map_or(0.0, SimplicialMesh::slack_radius)
    }

    pub fn into_arc(self) -> Arc<Self> {
        Arc::new(self)
    }

    /// A short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            AlgebraKind::FullMatrix { k } => format!("M_{k}"),
            AlgebraKind::DirectSum { blocks } => {
                blocks.iter().map(|b| format!("M_{b}")).collect::<Vec<_>>().join("+")
            }
            AlgebraKind::SampledField { mesh, k } => {
                let base = if mesh.dimension() == 1 { "interval" } else { "disk" };
                format!("C({base}[{}v], M_{k})", mesh.vertices().len())
            }
            AlgebraKind::Represented { d, basis, .. } => format!("A<M_{d}, dim {}>", basis.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_roundtrip_and_build() {
        let specs = vec![
            AlgebraSpec::FullMatrix { k: 3 },
            AlgebraSpec::DirectSum { blocks: vec![1, 2] },
            AlgebraSpec::Interval { resolution: 32, k: 1 },
            AlgebraSpec::Disk { resolution: 16, k: 1 },
        ];
        for s in specs {
            let json = serde_json::to_string(&s).unwrap();
            let back: AlgebraSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, s);
            back.build().unwrap();
        }
        let parsed: AlgebraSpec = serde_json::from_str(r#"{"kind":"disk","resolution":16}"#).unwrap();
        assert_eq!(parsed, AlgebraSpec::Disk { resolution: 16, k: 1 });
    }

    #[test]
    fn rejects_zero_fibers() {
        assert!(Algebra::full_matrix(0).is_err());
        assert!(Algebra::direct_sum(vec![2, 0]).is_err());
    }
}
