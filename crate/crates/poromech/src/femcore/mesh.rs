use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FemError;

/// Mesh generator input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeshSpec {
    Interval {
        n: usize,
        #[serde(default = "one")]
        length: f64,
    },
    Rectangle {
        nx: usize,
        ny: usize,
        #[serde(default = "one")]
        lx: f64,
        #[serde(default = "one")]
        ly: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    /// facet vertices; only the first `dim` entries are used
    pub verts: [usize; 2],
    pub marker: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub measure: f64,
    /// gradients of the barycentric coordinates
    pub grads: [[f64; 2]; 3],
    pub centroid: [f64; 2],
}

/// Conforming simplicial mesh in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub coords: Vec<[f64; 2]>,
    cells: Vec<usize>,
    pub facets: Vec<BoundaryFacet>,
    pub markers: Vec<String>,
    geometry: Vec<CellGeometry>,
}

impl Mesh {
    pub fn new(
        dim: usize,
        coords: Vec<[f64; 2]>,
        cells: Vec<usize>,
        facets: Vec<BoundaryFacet>,
        markers: Vec<String>,
    ) -> Result<Self, FemError> {
        if dim != 1 && dim != 2 {
            return Err(FemError::InvalidMesh(format!("dimension {dim} not supported")));
        }
        let nv = coords.len();
        if !cells.len().is_multiple_of(dim + 1) || cells.iter().any(|v| *v >= nv) {
            return Err(FemError::InvalidMesh("cell connectivity out of range".into()));
        }
        if facets
            .iter()
            .any(|f| f.verts[..dim].iter().any(|v| *v >= nv) || f.marker >= markers.len())
        {
            return Err(FemError::InvalidMesh(
                "facet connectivity or marker out of range".into(),
            ));
        }
        let mut mesh = Self {
            dim,
            coords,
            cells,
            facets,
            markers,
            geometry: Vec::new(),
        };
        mesh.geometry = (0..mesh.num_cells())
            .map(|k| mesh.compute_geometry(k))
            .collect::<Result<_, _>>()?;
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn cell(&self, k: usize) -> &[usize] {
        let n = self.dim + 1;
        &self.cells[k * n..(k + 1) * n]
    }

    pub fn geometry(&self, k: usize) -> &CellGeometry {
        &self.geometry[k]
    }

    pub fn total_measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.measure).sum()
    }

    pub fn marker_id(&self, name: &str) -> Option<usize> {
        self.markers.iter().position(|m| m == name)
    }

    /// Characteristic cell size (largest edge length).
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for k in 0..self.num_cells() {
            let c = self.cell(k);
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    let a = self.coords[c[i]];
                    let b = self.coords[c[j]];
                    h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
                }
            }
        }
        h
    }

    fn compute_geometry(&self, k: usize) -> Result<CellGeometry, FemError> {
        let c = self.cell(k);
        if self.dim == 1 {
            let (a, b) = (self.coords[c[0]][0], self.coords[c[1]][0]);
            let len = b - a;
            if len.abs() <= 0.0 {
                return Err(FemError::InvalidMesh(format!("degenerate cell {k}")));
            }
            Ok(CellGeometry {
                measure: len.abs(),
                grads: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
                centroid: [0.5 * (a + b), 0.0],
            })
        } else {
            let p = [self.coords[c[0]], self.coords[c[1]], self.coords[c[2]]];
            let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            if det.abs() <= 0.0 {
                return Err(FemError::InvalidMesh(format!("degenerate cell {k}")));
            }
            let mut grads = [[0.0; 2]; 3];
            for i in 0..3 {
                let j = (i + 1) % 3;
                let l = (i + 2) % 3;
                grads[i] = [(p[j][1] - p[l][1]) / det, (p[l][0] - p[j][0]) / det];
            }
            Ok(CellGeometry {
                measure: 0.5 * det.abs(),
                grads,
                centroid: [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0],
            })
        }
    }

    /// Plain-text format: `dim nv nc nbf`, vertices, cells, facets `v.. tag` with tag D or N.
    pub fn to_text(&self, dirichlet: &[&str]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.dim,
            self.num_vertices(),
            self.num_cells(),
            self.facets.len()
        );
        for x in &self.coords {
            let line: Vec<String> = x[..self.dim].iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        for k in 0..self.num_cells() {
            let line: Vec<String> = self.cell(k).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        for f in &self.facets {
            let tag = if dirichlet.contains(&self.markers[f.marker].as_str()) {
                "D"
            } else {
                "N"
            };
            let line: Vec<String> = f.verts[..self.dim].iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{} {}", line.join(" "), tag);
        }
        out
    }

    /// Reads the plain-text format; facets get markers "D" and "N".
    pub fn from_text(text: &str) -> Result<Self, FemError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |m: &str| FemError::InvalidMesh(m.to_string());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_, _>>()?;
        if header.len() != 4 {
            return Err(bad("header must read `dim nv nc nbf`"));
        }
        let (dim, nv, nc, nbf) = (header[0], header[1], header[2], header[3]);
        if dim != 1 && dim != 2 {
            return Err(bad("dimension must be 1 or 2"));
        }
        let mut coords = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l = lines.next().ok_or_else(|| bad("missing vertex line"))?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad coordinate")))
                .collect::<Result<_, _>>()?;
            if v.len() != dim {
                return Err(bad("vertex line has wrong arity"));
            }
            coords.push([v[0], if dim == 2 { v[1] } else { 0.0 }]);
        }
        let mut cells = Vec::with_capacity(nc * (dim + 1));
        for _ in 0..nc {
            let l = lines.next().ok_or_else(|| bad("missing cell line"))?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad("bad cell index")))
                .collect::<Result<_, _>>()?;
            if v.len() != dim + 1 {
                return Err(bad("cell line has wrong arity"));
            }
            cells.extend(v);
        }
        let markers = vec!["N".to_string(), "D".to_string()];
        let mut facets = Vec::with_capacity(nbf);
        for _ in 0..nbf {
            let l = lines.next().ok_or_else(|| bad("missing facet line"))?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != dim + 1 {
                return Err(bad("facet line has wrong arity"));
            }
            let mut verts = [0usize; 2];
            for i in 0..dim {
                verts[i] = t[i].parse().map_err(|_| bad("bad facet index"))?;
            }
            let marker = match t[dim] {
                "N" => 0,
                "D" => 1,
                _ => return Err(bad("facet tag must be D or N")),
            };
            facets.push(BoundaryFacet { verts, marker });
        }
        Self::new(dim, coords, cells, facets, markers)
    }
}

/// Uniform interval mesh or union-jack triangulation of a rectangle.
///
/// Markers: interval `left`, `right`; rectangle `bottom`, `right`, `top`, `left`.
pub fn generate_mesh(spec: &MeshSpec) -> Result<Mesh, FemError> {
    match *spec {
        MeshSpec::Interval { n, length } => {
            if n == 0 || !(length > 0.0) {
                return Err(FemError::InvalidMesh(
                    "interval needs n >= 1 and positive length".into(),
                ));
            }
            let coords = (0..=n).map(|i| [length * i as f64 / n as f64, 0.0]).collect();
            let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
            let facets = vec![
                BoundaryFacet {
                    verts: [0, 0],
                    marker: 0,
                },
                BoundaryFacet {
                    verts: [n, 0],
                    marker: 1,
                },
            ];
            Mesh::new(1, coords, cells, facets, vec!["left".into(), "right".into()])
        }
        MeshSpec::Rectangle { nx, ny, lx, ly } => {
            if nx == 0 || ny == 0 || !(lx > 0.0 && ly > 0.0) {
                return Err(FemError::InvalidMesh(
                    "rectangle needs nx, ny >= 1 and positive sides".into(),
                ));
            }
            let id = |i: usize, j: usize| j * (nx + 1) + i;
            let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
            for j in 0..=ny {
                for i in 0..=nx {
                    coords.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
                }
            }
            let mut cells = Vec::with_capacity(6 * nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                    if (i + j) % 2 == 0 {
                        cells.extend([v00, v10, v11, v00, v11, v01]);
                    } else {
                        cells.extend([v00, v10, v01, v10, v11, v01]);
                    }
                }
            }
            let mut facets = Vec::new();
            for i in 0..nx {
                facets.push(BoundaryFacet {
                    verts: [id(i, 0), id(i + 1, 0)],
                    marker: 0,
                });
            }
            for j in 0..ny {
                facets.push(BoundaryFacet {
                    verts: [id(nx, j), id(nx, j + 1)],
                    marker: 1,
                });
            }
            for i in 0..nx {
                facets.push(BoundaryFacet {
                    verts: [id(i + 1, ny), id(i, ny)],
                    marker: 2,
                });
            }
            for j in 0..ny {
                facets.push(BoundaryFacet {
                    verts: [id(0, j + 1), id(0, j)],
                    marker: 3,
                });
            }
            Mesh::new(
                2,
                coords,
                cells,
                facets,
                vec!["bottom".into(), "right".into(), "top".into(), "left".into()],
            )
        }
    }
}
