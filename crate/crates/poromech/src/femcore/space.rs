use std::sync::Arc;

use super::mesh::Mesh;
use super::FemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    ScalarH1,
    ScalarH1Dirichlet0,
    VectorH1Dirichlet0,
}

const NONE: usize = usize::MAX;

/// Conforming P1 space; dof `v * ncomp + c` is component c at vertex v.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub kind: SpaceKind,
    pub ncomp: usize,
    pub dirichlet_markers: Vec<String>,
    constrained: Vec<bool>,
    free_dofs: Vec<usize>,
    free_of: Vec<usize>,
}

impl FeSpace {
    pub fn scalar(mesh: Arc<Mesh>) -> Self {
        Self::build(mesh, SpaceKind::ScalarH1, 1, Vec::new()).expect("no markers to resolve")
    }

    pub fn scalar_dirichlet(mesh: Arc<Mesh>, markers: &[String]) -> Result<Self, FemError> {
        Self::build(mesh, SpaceKind::ScalarH1Dirichlet0, 1, markers.to_vec())
    }

    pub fn vector_dirichlet(mesh: Arc<Mesh>, markers: &[String]) -> Result<Self, FemError> {
        let d = mesh.dim;
        Self::build(mesh, SpaceKind::VectorH1Dirichlet0, d, markers.to_vec())
    }

    fn build(mesh: Arc<Mesh>, kind: SpaceKind, ncomp: usize, markers: Vec<String>) -> Result<Self, FemError> {
        let nv = mesh.num_vertices();
        let mut on_d = vec![false; nv];
        for name in &markers {
            let id = mesh
                .marker_id(name)
                .ok_or_else(|| FemError::UnknownMarker(name.clone()))?;
            for f in mesh.facets.iter().filter(|f| f.marker == id) {
                for v in &f.verts[..mesh.dim] {
                    on_d[*v] = true;
                }
            }
        }
        let ndofs = nv * ncomp;
        let constrained: Vec<bool> = (0..ndofs).map(|d| on_d[d / ncomp]).collect();
        let mut free_of = vec![NONE; ndofs];
        let mut free_dofs = Vec::new();
        for d in 0..ndofs {
            if !constrained[d] {
                free_of[d] = free_dofs.len();
                free_dofs.push(d);
            }
        }
        Ok(Self {
            mesh,
            kind,
            ncomp,
            dirichlet_markers: markers,
            constrained,
            free_dofs,
            free_of,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.constrained.len()
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn has_dirichlet(&self) -> bool {
        self.free_dofs.len() < self.constrained.len()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    /// Map from full dof index to free index, `usize::MAX` for constrained dofs.
    pub fn free_map(&self) -> &[usize] {
        &self.free_of
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        let f = self.free_of[dof];
        (f != NONE).then_some(f)
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|d| full[*d]).collect()
    }

    /// Full vector with `free` on free dofs and `fill` on constrained ones.
    pub fn extend(&self, free: &[f64], fill: &[f64]) -> Vec<f64> {
        let mut out = fill.to_vec();
        for (i, d) in self.free_dofs.iter().enumerate() {
            out[*d] = free[i];
        }
        out
    }

    pub fn extend_zero(&self, free: &[f64]) -> Vec<f64> {
        self.extend(free, &vec![0.0; self.num_dofs()])
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }
}

/// Coefficient vector on a space (all dofs, Dirichlet values included).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &FeSpace) -> Self {
        Self {
            ncomp: space.ncomp,
            values: vec![0.0; space.num_dofs()],
        }
    }

    pub fn from_values(space: &FeSpace, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != space.num_dofs() {
            return Err(FemError::DimensionMismatch {
                expected: space.num_dofs(),
                got: values.len(),
            });
        }
        Ok(Self {
            ncomp: space.ncomp,
            values,
        })
    }
}
