//! P1 assembly of mass, stiffness, elasticity, divergence coupling and loads.

use super::mesh::Mesh;
use super::space::FeSpace;
use super::sparse::SparseOperator;
use super::FemError;

/// Cellwise coefficient of a scalar diffusion form.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    PerCell(Vec<f64>),
    PerCellMatrix(Vec<[[f64; 2]; 2]>),
}

impl Coefficient {
    fn apply(&self, k: usize, g: [f64; 2]) -> [f64; 2] {
        match self {
            Self::Constant(c) => [c * g[0], c * g[1]],
            Self::PerCell(v) => [v[k] * g[0], v[k] * g[1]],
            Self::PerCellMatrix(m) => {
                let a = m[k];
                [a[0][0] * g[0] + a[0][1] * g[1], a[1][0] * g[0] + a[1][1] * g[1]]
            }
        }
    }
}

/// Bilinear forms and load functionals understood by [`assemble`].
#[derive(Debug, Clone, PartialEq)]
pub enum FormKind {
    Mass,
    LumpedMass,
    Stiffness(Coefficient),
    Elasticity {
        mu: f64,
        lambda: f64,
    },
    DivCoupling {
        b: f64,
    },
    /// cellwise constant vector density, tested with the (vector) test space
    CellLoad(Vec<[f64; 2]>),
    /// nodal scalar density, integrated exactly against the P1 test functions
    NodalLoad(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Assembled {
    Operator(SparseOperator),
    Vector(Vec<f64>),
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn mass_matrix(mesh: &Mesh) -> SparseOperator {
    let n = mesh.dim + 1;
    let denom = if mesh.dim == 1 { 6.0 } else { 12.0 };
    let mut t = Vec::with_capacity(mesh.num_cells() * n * n);
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let m = mesh.geometry(k).measure;
        for i in 0..n {
            for j in 0..n {
                let f = if i == j { 2.0 } else { 1.0 };
                t.push((c[i], c[j], f * m / denom));
            }
        }
    }
    SparseOperator::from_triplets(mesh.num_vertices(), mesh.num_vertices(), t, true)
}

/// Row sums of the consistent mass matrix.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let n = mesh.dim + 1;
    let mut out = vec![0.0; mesh.num_vertices()];
    for k in 0..mesh.num_cells() {
        let m = mesh.geometry(k).measure / n as f64;
        for v in mesh.cell(k) {
            out[*v] += m;
        }
    }
    out
}

pub fn stiffness_matrix(mesh: &Mesh, coeff: &Coefficient) -> SparseOperator {
    let n = mesh.dim + 1;
    let mut t = Vec::with_capacity(mesh.num_cells() * n * n);
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let g = mesh.geometry(k);
        for i in 0..n {
            let kg = coeff.apply(k, g.grads[i]);
            for j in 0..n {
                t.push((c[j], c[i], g.measure * dot(kg, g.grads[j])));
            }
        }
    }
    let sym = !matches!(coeff, Coefficient::PerCellMatrix(_));
    SparseOperator::from_triplets(mesh.num_vertices(), mesh.num_vertices(), t, sym)
}

/// ∫ 2μ ε(u):ε(v) + λ div u div v on vector dofs `v * dim + c`.
pub fn elasticity_matrix(mesh: &Mesh, mu: f64, lambda: f64) -> SparseOperator {
    let d = mesh.dim;
    let n = d + 1;
    let nd = mesh.num_vertices() * d;
    let mut t = Vec::with_capacity(mesh.num_cells() * n * n * d * d);
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let g = mesh.geometry(k);
        for i in 0..n {
            for a in 0..d {
                for j in 0..n {
                    for b in 0..d {
                        let gi = g.grads[i];
                        let gj = g.grads[j];
                        let mut v = mu * gi[b] * gj[a] + lambda * gi[a] * gj[b];
                        if a == b {
                            v += mu * dot(gi, gj);
                        }
                        t.push((c[i] * d + a, c[j] * d + b, g.measure * v));
                    }
                }
            }
        }
    }
    SparseOperator::from_triplets(nd, nd, t, true)
}

/// (w, v) ↦ ∫ b w div v: rows are scalar P1 dofs, columns vector dofs.
pub fn div_coupling_matrix(mesh: &Mesh, b: f64) -> SparseOperator {
    let d = mesh.dim;
    let n = d + 1;
    let mut t = Vec::with_capacity(mesh.num_cells() * n * n * d);
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let g = mesh.geometry(k);
        let w = g.measure / n as f64;
        for i in 0..n {
            for j in 0..n {
                for a in 0..d {
                    t.push((c[i], c[j] * d + a, b * w * g.grads[j][a]));
                }
            }
        }
    }
    SparseOperator::from_triplets(mesh.num_vertices(), mesh.num_vertices() * d, t, false)
}

/// ∫ f·v for a cellwise constant vector field f.
pub fn cell_load_vector(mesh: &Mesh, force: &[[f64; 2]]) -> Vec<f64> {
    let d = mesh.dim;
    let n = d + 1;
    let mut out = vec![0.0; mesh.num_vertices() * d];
    for k in 0..mesh.num_cells() {
        let w = mesh.geometry(k).measure / n as f64;
        for v in mesh.cell(k) {
            for a in 0..d {
                out[v * d + a] += w * force[k][a];
            }
        }
    }
    out
}

/// Cellwise gradient of a nodal scalar field.
pub fn cell_gradients(mesh: &Mesh, field: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.num_cells())
        .map(|k| {
            let g = mesh.geometry(k);
            let mut out = [0.0; 2];
            for (i, v) in mesh.cell(k).iter().enumerate() {
                out[0] += field[*v] * g.grads[i][0];
                out[1] += field[*v] * g.grads[i][1];
            }
            out
        })
        .collect()
}

/// Cellwise divergence of a nodal vector field (dofs `v * dim + c`).
pub fn cell_divergence(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    let d = mesh.dim;
    (0..mesh.num_cells())
        .map(|k| {
            let g = mesh.geometry(k);
            let mut div = 0.0;
            for (i, v) in mesh.cell(k).iter().enumerate() {
                for a in 0..d {
                    div += u[v * d + a] * g.grads[i][a];
                }
            }
            div
        })
        .collect()
}

/// Cellwise displacement gradient ∇u (row a = ∇u_a).
pub fn cell_vector_gradients(mesh: &Mesh, u: &[f64]) -> Vec<[[f64; 2]; 2]> {
    let d = mesh.dim;
    (0..mesh.num_cells())
        .map(|k| {
            let g = mesh.geometry(k);
            let mut out = [[0.0; 2]; 2];
            for (i, v) in mesh.cell(k).iter().enumerate() {
                for a in 0..d {
                    out[a][0] += u[v * d + a] * g.grads[i][0];
                    out[a][1] += u[v * d + a] * g.grads[i][1];
                }
            }
            out
        })
        .collect()
}

/// Cell means of a nodal scalar field.
pub fn cell_means(mesh: &Mesh, field: &[f64]) -> Vec<f64> {
    (0..mesh.num_cells())
        .map(|k| {
            let c = mesh.cell(k);
            c.iter().map(|v| field[*v]).sum::<f64>() / c.len() as f64
        })
        .collect()
}

/// Barycentric points and weights (summing to 1) of a degree-4 rule on the cell type.
fn cell_rule(dim: usize) -> Vec<([f64; 3], f64)> {
    if dim == 1 {
        let a = 0.5 * (1.0 - (3.0f64 / 5.0).sqrt());
        vec![
            ([a, 1.0 - a, 0.0], 5.0 / 18.0),
            ([0.5, 0.5, 0.0], 8.0 / 18.0),
            ([1.0 - a, a, 0.0], 5.0 / 18.0),
        ]
    } else {
        let (a1, b1, w1) = (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011);
        let (a2, b2, w2) = (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322);
        vec![
            ([a1, a1, b1], w1),
            ([a1, b1, a1], w1),
            ([b1, a1, a1], w1),
            ([a2, a2, b2], w2),
            ([a2, b2, a2], w2),
            ([b2, a2, a2], w2),
        ]
    }
}

/// ∫ f ψ_i for a pointwise function f, degree-4 quadrature per cell.
pub fn function_load(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let rule = cell_rule(mesh.dim);
    let mut out = vec![0.0; mesh.num_vertices()];
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let m = mesh.geometry(k).measure;
        for (lam, w) in &rule {
            let mut x = [0.0; 2];
            for (i, v) in c.iter().enumerate() {
                x[0] += lam[i] * mesh.coords[*v][0];
                x[1] += lam[i] * mesh.coords[*v][1];
            }
            let fx = f(x);
            for (i, v) in c.iter().enumerate() {
                out[*v] += m * w * fx * lam[i];
            }
        }
    }
    out
}

/// ‖v_h - v‖_{L²} for a nodal P1 field against a pointwise function.
pub fn l2_error(mesh: &Mesh, nodal: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let rule = cell_rule(mesh.dim);
    let mut acc = 0.0;
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let m = mesh.geometry(k).measure;
        for (lam, w) in &rule {
            let (mut x, mut vh) = ([0.0; 2], 0.0);
            for (i, v) in c.iter().enumerate() {
                x[0] += lam[i] * mesh.coords[*v][0];
                x[1] += lam[i] * mesh.coords[*v][1];
                vh += lam[i] * nodal[*v];
            }
            let e = vh - exact(x);
            acc += m * w * e * e;
        }
    }
    acc.sqrt()
}

/// Assembles `kind` with trial space `trial` and test space `test`, restricted to free dofs.
pub fn assemble(kind: &FormKind, trial: &FeSpace, test: &FeSpace) -> Result<Assembled, FemError> {
    if !trial.same_mesh(test) {
        return Err(FemError::SpaceMismatch(
            "trial and test spaces live on different meshes".into(),
        ));
    }
    let mesh = &*test.mesh;
    let need = |space: &FeSpace, ncomp: usize, role: &str| {
        if space.ncomp == ncomp {
            Ok(())
        } else {
            Err(FemError::SpaceMismatch(format!(
                "{role} space has {} components, form needs {ncomp}",
                space.ncomp
            )))
        }
    };
    let restrict =
        |op: SparseOperator| op.restrict(test.free_map(), test.num_free(), trial.free_map(), trial.num_free());
    match kind {
        FormKind::Mass => {
            need(trial, 1, "trial")?;
            need(test, 1, "test")?;
            Ok(Assembled::Operator(restrict(mass_matrix(mesh))))
        }
        FormKind::LumpedMass => {
            need(trial, 1, "trial")?;
            need(test, 1, "test")?;
            Ok(Assembled::Operator(restrict(SparseOperator::diagonal(&lumped_mass(
                mesh,
            )))))
        }
        FormKind::Stiffness(c) => {
            need(trial, 1, "trial")?;
            need(test, 1, "test")?;
            Ok(Assembled::Operator(restrict(stiffness_matrix(mesh, c))))
        }
        FormKind::Elasticity { mu, lambda } => {
            need(trial, mesh.dim, "trial")?;
            need(test, mesh.dim, "test")?;
            Ok(Assembled::Operator(restrict(elasticity_matrix(mesh, *mu, *lambda))))
        }
        FormKind::DivCoupling { b } => {
            need(trial, mesh.dim, "trial")?;
            need(test, 1, "test")?;
            Ok(Assembled::Operator(restrict(div_coupling_matrix(mesh, *b))))
        }
        FormKind::CellLoad(f) => {
            need(test, mesh.dim, "test")?;
            if f.len() != mesh.num_cells() {
                return Err(FemError::DimensionMismatch {
                    expected: mesh.num_cells(),
                    got: f.len(),
                });
            }
            Ok(Assembled::Vector(test.restrict(&cell_load_vector(mesh, f))))
        }
        FormKind::NodalLoad(rho) => {
            need(test, 1, "test")?;
            if rho.len() != mesh.num_vertices() {
                return Err(FemError::DimensionMismatch {
                    expected: mesh.num_vertices(),
                    got: rho.len(),
                });
            }
            Ok(Assembled::Vector(test.restrict(&mass_matrix(mesh).matvec(rho))))
        }
    }
}
