//! Discrete function spaces on 2D meshes and their operators.
//!
//! - `CellField` / `CellVectorField`: piecewise constants, one value per cell.
//! - `CRField`: Crouzeix–Raviart velocities, one vector per face (the face mean).
//! - `EdgeField`: lowest-order Nédélec fields, one mean tangential component per
//!   edge. Whitney functions on triangles, `(a1 + b1 y, a2 + b2 x)` on squares.
//! - `PotentialField`: continuous P1 (triangles) or Q1 (squares) potentials.
//!
//! The local edge order of a cell is `mesh.cell_edges[cell]`, which follows
//! `cell.faces`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{Factorized, Triplets};
use crate::mesh::{Mesh, MeshKind};
use crate::quadrature::{cell_points, segment_points, Rule};

pub use crate::quadrature::Vec2;

/// `t[a][b] = d u_a / d x_b`.
pub type Tensor2 = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct CellField(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct CellVectorField(pub Vec<Vec2>);

#[derive(Clone, Debug, PartialEq)]
pub struct CRField(pub Vec<Vec2>);

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeField(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField(pub Vec<f64>);

/// Values of the local basis functions of one cell at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalBasis {
    /// Crouzeix–Raviart scalar basis (triangles only; zero on squares).
    pub cr: [f64; 3],
    /// Nédélec vector basis, in local edge order.
    pub ned: [Vec2; 4],
}

#[derive(Clone, Debug)]
struct CellData {
    points: Vec<(Vec2, f64)>,
    basis: Vec<LocalBasis>,
    /// Local Nédélec mass matrix, row-major `edges x edges`.
    mass: Vec<f64>,
    /// Curl of each local Nédélec basis function.
    curl: Vec<f64>,
}

/// A 2D mesh with the precomputed local data of all discrete spaces.
#[derive(Clone, Debug)]
pub struct FeSpaces {
    pub mesh: Mesh,
    cells: Vec<CellData>,
}

fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl FeSpaces {
    pub fn new(mesh: Mesh) -> Result<Self> {
        if mesh.dim != 2 {
            return Err(Error::Unsupported(
                "discrete spaces are implemented for two-dimensional meshes".into(),
            ));
        }
        let mut spaces = FeSpaces { mesh, cells: Vec::new() };
        let cells = (0..spaces.mesh.num_cells())
            .map(|k| {
                let points = cell_points(&spaces.mesh, k, Rule::Exact);
                let basis: Vec<LocalBasis> = points.iter().map(|&(x, _)| spaces.basis_at(k, x)).collect();
                let ne = spaces.local_edges(k);
                let mut mass = vec![0.0; ne * ne];
                for ((_, w), b) in points.iter().zip(&basis) {
                    for i in 0..ne {
                        for j in 0..ne {
                            mass[i * ne + j] += w * dot(b.ned[i], b.ned[j]);
                        }
                    }
                }
                let measure = spaces.mesh.cells[k].measure;
                let curl = spaces.mesh.cell_edges[k]
                    .iter()
                    .map(|&(e, s)| s * spaces.mesh.edges[e].length / measure)
                    .collect();
                CellData { points, basis, mass, curl }
            })
            .collect();
        spaces.cells = cells;
        Ok(spaces)
    }

    pub fn is_periodic(&self) -> bool {
        self.mesh.is_periodic()
    }

    pub fn local_edges(&self, cell: usize) -> usize {
        self.mesh.cell_edges[cell].len()
    }

    /// Quadrature points of the exact rule on `cell`.
    pub fn points(&self, cell: usize) -> &[(Vec2, f64)] {
        &self.cells[cell].points
    }

    /// Local basis values at the exact-rule points of `cell`.
    pub fn basis(&self, cell: usize) -> &[LocalBasis] {
        &self.cells[cell].basis
    }

    pub fn local_mass(&self, cell: usize) -> &[f64] {
        &self.cells[cell].mass
    }

    pub fn local_curl(&self, cell: usize) -> &[f64] {
        &self.cells[cell].curl
    }

    fn barycentric(&self, cell: usize, x: Vec2) -> ([f64; 3], [Vec2; 3]) {
        let p = self.mesh.cell_vertex_coords(cell);
        let two_area = 2.0 * self.mesh.cells[cell].measure;
        let mut lambda = [0.0; 3];
        let mut grad = [[0.0; 2]; 3];
        for i in 0..3 {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            grad[i] = [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area];
            lambda[i] = 1.0 + grad[i][0] * (x[0] - p[i][0]) + grad[i][1] * (x[1] - p[i][1]);
        }
        (lambda, grad)
    }

    /// Local basis values at an arbitrary point of `cell` (in the cell's unwrapped
    /// coordinates on periodic meshes).
    pub fn basis_at(&self, cell: usize, x: Vec2) -> LocalBasis {
        let mut out = LocalBasis::default();
        let mesh = &self.mesh;
        match mesh.kind {
            MeshKind::Triangulated => {
                let (lambda, grad) = self.barycentric(cell, x);
                let verts = &mesh.cells[cell].vertices;
                for i in 0..3 {
                    out.cr[i] = 1.0 - 2.0 * lambda[i];
                    let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                    let e = mesh.cell_edges[cell][i].0;
                    let edge = &mesh.edges[e];
                    let (s, t) = if edge.start == verts[a] { (a, b) } else { (b, a) };
                    for c in 0..2 {
                        out.ned[i][c] = edge.length * (lambda[s] * grad[t][c] - lambda[t] * grad[s][c]);
                    }
                }
            }
            MeshKind::PeriodicBox => {
                let c = mesh.cells[cell].centroid;
                let width = 1.0 / mesh.n as f64;
                for (i, &(e, _)) in mesh.cell_edges[cell].iter().enumerate() {
                    let n = mesh.outward_normal(e, cell);
                    let t = mesh.edges[e].tangent;
                    let factor = ((x[0] - c[0]) * n[0] + (x[1] - c[1]) * n[1]) / width + 0.5;
                    out.ned[i] = [t[0] * factor, t[1] * factor];
                }
            }
        }
        out
    }

    // ---------------------------------------------------------------- projections

    /// Cell averages of a smooth scalar function.
    pub fn project_q(&self, f: impl Fn(Vec2) -> f64) -> CellField {
        CellField(
            (0..self.mesh.num_cells())
                .map(|k| {
                    let s: f64 = cell_points(&self.mesh, k, Rule::Smooth).iter().map(|&(x, w)| w * f(x)).sum();
                    s / self.mesh.cells[k].measure
                })
                .collect(),
        )
    }

    /// Cell averages of a smooth vector function.
    pub fn project_q_vec(&self, f: impl Fn(Vec2) -> Vec2) -> CellVectorField {
        CellVectorField(
            (0..self.mesh.num_cells())
                .map(|k| {
                    let mut s = [0.0; 2];
                    for (x, w) in cell_points(&self.mesh, k, Rule::Smooth) {
                        let v = f(x);
                        s[0] += w * v[0];
                        s[1] += w * v[1];
                    }
                    let m = self.mesh.cells[k].measure;
                    [s[0] / m, s[1] / m]
                })
                .collect(),
        )
    }

    fn edge_segment(&self, e: usize) -> (Vec2, Vec2) {
        let face = &self.mesh.faces[e];
        let t = self.mesh.edges[e].tangent;
        let half = 0.5 * self.mesh.edges[e].length;
        let c = face.centroid;
        ([c[0] - half * t[0], c[1] - half * t[1]], [c[0] + half * t[0], c[1] + half * t[1]])
    }

    /// Crouzeix–Raviart interpolant: face means of `f`.
    pub fn interpolate_cr(&self, f: impl Fn(Vec2) -> Vec2) -> CRField {
        CRField(
            (0..self.mesh.num_faces())
                .map(|e| {
                    let (a, b) = self.edge_segment(e);
                    let len = self.mesh.faces[e].measure;
                    let mut s = [0.0; 2];
                    for (x, w) in segment_points(a, b) {
                        let v = f(x);
                        s[0] += w * v[0];
                        s[1] += w * v[1];
                    }
                    [s[0] / len, s[1] / len]
                })
                .collect(),
        )
    }

    /// Nédélec interpolant: mean tangential component of `f` along every edge.
    pub fn interpolate_nedelec(&self, f: impl Fn(Vec2) -> Vec2) -> EdgeField {
        EdgeField(
            (0..self.mesh.edges.len())
                .map(|e| {
                    let (a, b) = self.edge_segment(e);
                    let t = self.mesh.edges[e].tangent;
                    let s: f64 = segment_points(a, b).iter().map(|&(x, w)| w * dot(f(x), [t[0], t[1]])).sum();
                    s / self.mesh.edges[e].length
                })
                .collect(),
        )
    }

    /// Vertex interpolation followed by subtraction of the mean.
    pub fn interpolate_w(&self, f: impl Fn(Vec2) -> f64) -> PotentialField {
        let mut values: Vec<f64> = self.mesh.vertices.iter().map(|p| f([p[0], p[1]])).collect();
        let mean = self.potential_mean(&PotentialField(values.clone()));
        for v in values.iter_mut() {
            *v -= mean;
        }
        PotentialField(values)
    }

    /// Mean of a P1/Q1 potential over the unit domain.
    pub fn potential_mean(&self, psi: &PotentialField) -> f64 {
        self.mesh
            .cells
            .iter()
            .map(|c| {
                let avg = c.vertices.iter().map(|&v| psi.0[v]).sum::<f64>() / c.vertices.len() as f64;
                c.measure * avg
            })
            .sum()
    }

    /// Exact gradient of a potential as an edge field.
    pub fn potential_gradient(&self, psi: &PotentialField) -> EdgeField {
        EdgeField(
            self.mesh
                .edges
                .iter()
                .map(|e| (psi.0[e.end] - psi.0[e.start]) / e.length)
                .collect(),
        )
    }

    // ---------------------------------------------------------------- operators

    /// Element-wise gradient of a CR field.
    pub fn grad_h(&self, u: &CRField) -> Vec<Tensor2> {
        self.mesh
            .cells
            .iter()
            .enumerate()
            .map(|(k, cell)| {
                let mut g = [[0.0; 2]; 2];
                for &f in &cell.faces {
                    let n = self.mesh.outward_normal(f, k);
                    let w = self.mesh.faces[f].measure / cell.measure;
                    for a in 0..2 {
                        for b in 0..2 {
                            g[a][b] += w * u.0[f][a] * n[b];
                        }
                    }
                }
                g
            })
            .collect()
    }

    /// Element-wise divergence of a CR field.
    pub fn div_h(&self, u: &CRField) -> CellField {
        CellField(self.grad_h(u).iter().map(|g| g[0][0] + g[1][1]).collect())
    }

    /// Cell means of a CR field (the piecewise constant projection).
    pub fn cr_cell_means(&self, u: &CRField) -> CellVectorField {
        CellVectorField(
            self.mesh
                .cells
                .iter()
                .map(|c| {
                    let m = c.faces.len() as f64;
                    let s = c.faces.iter().fold([0.0; 2], |s, &f| [s[0] + u.0[f][0], s[1] + u.0[f][1]]);
                    [s[0] / m, s[1] / m]
                })
                .collect(),
        )
    }

    /// Element-wise scalar curl `d1 B2 - d2 B1` of an edge field.
    pub fn curl_h(&self, b: &EdgeField) -> CellField {
        CellField(
            (0..self.mesh.num_cells())
                .map(|k| {
                    self.mesh.cell_edges[k]
                        .iter()
                        .zip(self.local_curl(k))
                        .map(|(&(e, _), c)| c * b.0[e])
                        .sum()
                })
                .collect(),
        )
    }

    /// Discrete divergence of a piecewise constant vector field on the torus:
    /// `(1/|K|) sum_faces |sigma| {{u}} . n`.
    pub fn div_h_pc(&self, u: &CellVectorField) -> Result<CellField> {
        if !self.is_periodic() {
            return Err(Error::Unsupported(
                "piecewise-constant divergence is defined on the periodic box mesh only".into(),
            ));
        }
        let mut div = vec![0.0; self.mesh.num_cells()];
        for face in &self.mesh.faces {
            let o = face.outside.expect("periodic faces are interior");
            let flux = face.measure * face_velocity_cell(&u.0[face.inside], &u.0[o], face.normal);
            div[face.inside] += flux;
            div[o] -= flux;
        }
        for (d, c) in div.iter_mut().zip(&self.mesh.cells) {
            *d /= c.measure;
        }
        Ok(CellField(div))
    }

    // ---------------------------------------------------------------- evaluation

    pub fn eval_cr(&self, u: &CRField, cell: usize, x: Vec2) -> Vec2 {
        let b = self.basis_at(cell, x);
        let mut v = [0.0; 2];
        for (i, &f) in self.mesh.cells[cell].faces.iter().enumerate() {
            v[0] += b.cr[i] * u.0[f][0];
            v[1] += b.cr[i] * u.0[f][1];
        }
        v
    }

    pub fn eval_edge(&self, b: &EdgeField, cell: usize, x: Vec2) -> Vec2 {
        let basis = self.basis_at(cell, x);
        let mut v = [0.0; 2];
        for (i, &(e, _)) in self.mesh.cell_edges[cell].iter().enumerate() {
            v[0] += basis.ned[i][0] * b.0[e];
            v[1] += basis.ned[i][1] * b.0[e];
        }
        v
    }

    pub fn eval_potential(&self, psi: &PotentialField, cell: usize, x: Vec2) -> f64 {
        let verts = &self.mesh.cells[cell].vertices;
        match self.mesh.kind {
            MeshKind::Triangulated => {
                let (lambda, _) = self.barycentric(cell, x);
                (0..3).map(|i| lambda[i] * psi.0[verts[i]]).sum()
            }
            MeshKind::PeriodicBox => {
                let p = self.mesh.cell_vertex_coords(cell);
                let width = 1.0 / self.mesh.n as f64;
                let s = (x[0] - p[0][0]) / width;
                let t = (x[1] - p[0][1]) / width;
                // vertices are ordered (0,0), (1,0), (1,1), (0,1)
                psi.0[verts[0]] * (1.0 - s) * (1.0 - t)
                    + psi.0[verts[1]] * s * (1.0 - t)
                    + psi.0[verts[2]] * s * t
                    + psi.0[verts[3]] * (1.0 - s) * t
            }
        }
    }

    /// Value of an edge field at the `q`-th exact-rule point of `cell`.
    pub fn edge_at(&self, b: &EdgeField, cell: usize, q: usize) -> Vec2 {
        let basis = &self.cells[cell].basis[q];
        let mut v = [0.0; 2];
        for (i, &(e, _)) in self.mesh.cell_edges[cell].iter().enumerate() {
            v[0] += basis.ned[i][0] * b.0[e];
            v[1] += basis.ned[i][1] * b.0[e];
        }
        v
    }

    /// Value of a CR field at the `q`-th exact-rule point of `cell`.
    pub fn cr_at(&self, u: &CRField, cell: usize, q: usize) -> Vec2 {
        let basis = &self.cells[cell].basis[q];
        let mut v = [0.0; 2];
        for (i, &f) in self.mesh.cells[cell].faces.iter().enumerate() {
            v[0] += basis.cr[i] * u.0[f][0];
            v[1] += basis.cr[i] * u.0[f][1];
        }
        v
    }

    // ---------------------------------------------------------------- L2 structure

    /// `M b`, the Nédélec mass matrix applied to an edge field.
    pub fn edge_mass_apply(&self, b: &EdgeField) -> Vec<f64> {
        let mut out = vec![0.0; b.0.len()];
        for k in 0..self.mesh.num_cells() {
            let edges = &self.mesh.cell_edges[k];
            let ne = edges.len();
            let m = self.local_mass(k);
            for i in 0..ne {
                let mut s = 0.0;
                for j in 0..ne {
                    s += m[i * ne + j] * b.0[edges[j].0];
                }
                out[edges[i].0] += s;
            }
        }
        out
    }

    pub fn edge_inner(&self, a: &EdgeField, b: &EdgeField) -> f64 {
        self.edge_mass_apply(a).iter().zip(&b.0).map(|(x, y)| x * y).sum()
    }

    /// `int B . grad(psi_v)` for every admissible hat function `psi_v`, in the
    /// order of `mesh.potential_vertices()`.
    pub fn weak_divergence(&self, b: &EdgeField) -> Vec<f64> {
        let mb = self.edge_mass_apply(b);
        let mut per_vertex = vec![0.0; self.mesh.vertices.len()];
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            per_vertex[edge.end] += mb[e] / edge.length;
            per_vertex[edge.start] -= mb[e] / edge.length;
        }
        self.mesh.potential_vertices().iter().map(|&v| per_vertex[v]).collect()
    }

    /// Removes the discrete-gradient component of `b`: returns `b - grad(phi)`
    /// with `phi` the admissible potential satisfying
    /// `int grad(phi) . grad(chi) = int b . grad(chi)` for all admissible `chi`.
    pub fn remove_gradient_component(&self, b: &EdgeField) -> Result<EdgeField> {
        let mut vertices = self.mesh.potential_vertices();
        if self.is_periodic() {
            // gradients of all hats minus one already span the discrete gradients
            vertices.remove(0);
        }
        let mut index = vec![usize::MAX; self.mesh.vertices.len()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let nv = vertices.len();
        let mut a = Triplets::new(nv, nv);
        for k in 0..self.mesh.num_cells() {
            let edges = &self.mesh.cell_edges[k];
            let ne = edges.len();
            let m = self.local_mass(k);
            let grad = |e: usize| {
                let edge = &self.mesh.edges[e];
                [(edge.start, -1.0 / edge.length), (edge.end, 1.0 / edge.length)]
            };
            for i in 0..ne {
                for j in 0..ne {
                    for (v, gv) in grad(edges[i].0) {
                        for (w, gw) in grad(edges[j].0) {
                            if index[v] != usize::MAX && index[w] != usize::MAX {
                                a.add(index[v], index[w], m[i * ne + j] * gv * gw);
                            }
                        }
                    }
                }
            }
        }
        let mb = self.edge_mass_apply(b);
        let mut rhs = vec![0.0; nv];
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            if index[edge.end] != usize::MAX {
                rhs[index[edge.end]] += mb[e] / edge.length;
            }
            if index[edge.start] != usize::MAX {
                rhs[index[edge.start]] -= mb[e] / edge.length;
            }
        }
        let (phi_dofs, _) = Factorized::new(a.to_csr())?.solve(&rhs)?;
        let mut phi = vec![0.0; self.mesh.vertices.len()];
        for (i, &v) in vertices.iter().enumerate() {
            phi[v] = phi_dofs[i];
        }
        let g = self.potential_gradient(&PotentialField(phi));
        Ok(EdgeField(b.0.iter().zip(&g.0).map(|(x, y)| x - y).collect()))
    }

    // ---------------------------------------------------------------- errors

    /// `|| f - q ||_{L2}` for a piecewise constant `q`.
    pub fn l2_error_q(&self, f: impl Fn(Vec2) -> f64, q: &CellField) -> f64 {
        self.l2(|k, x| f(x) - q.0[k])
    }

    pub fn l2_error_q_vec(&self, f: impl Fn(Vec2) -> Vec2, q: &CellVectorField) -> f64 {
        self.l2_vec(|k, x| {
            let v = f(x);
            [v[0] - q.0[k][0], v[1] - q.0[k][1]]
        })
    }

    pub fn l2_error_cr(&self, f: impl Fn(Vec2) -> Vec2, u: &CRField) -> f64 {
        self.l2_vec(|k, x| {
            let v = f(x);
            let w = self.eval_cr(u, k, x);
            [v[0] - w[0], v[1] - w[1]]
        })
    }

    pub fn l2_error_edge(&self, f: impl Fn(Vec2) -> Vec2, b: &EdgeField) -> f64 {
        self.l2_vec(|k, x| {
            let v = f(x);
            let w = self.eval_edge(b, k, x);
            [v[0] - w[0], v[1] - w[1]]
        })
    }

    /// `|| curl f - curl_h b ||_{L2}` given the exact scalar curl of `f`.
    pub fn l2_error_curl(&self, curl_f: impl Fn(Vec2) -> f64, b: &EdgeField) -> f64 {
        let c = self.curl_h(b);
        self.l2(|k, x| curl_f(x) - c.0[k])
    }

    pub fn l2_error_w(&self, f: impl Fn(Vec2) -> f64, psi: &PotentialField) -> f64 {
        self.l2(|k, x| f(x) - self.eval_potential(psi, k, x))
    }

    fn l2(&self, g: impl Fn(usize, Vec2) -> f64) -> f64 {
        (0..self.mesh.num_cells())
            .map(|k| {
                cell_points(&self.mesh, k, Rule::Smooth)
                    .iter()
                    .map(|&(x, w)| w * g(k, x).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    fn l2_vec(&self, g: impl Fn(usize, Vec2) -> Vec2) -> f64 {
        self.l2(|k, x| {
            let v = g(k, x);
            (v[0] * v[0] + v[1] * v[1]).sqrt()
        })
    }

    // ---------------------------------------------------------------- CSV

    pub fn cell_field_csv(&self, name: &str, f: &CellField, out: &mut String) {
        for (k, c) in self.mesh.cells.iter().enumerate() {
            let _ = writeln!(out, "{name},{k},{:.12e},{:.12e},{:.12e},", c.centroid[0], c.centroid[1], f.0[k]);
        }
    }

    pub fn cell_vector_csv(&self, name: &str, f: &CellVectorField, out: &mut String) {
        for (k, c) in self.mesh.cells.iter().enumerate() {
            let _ = writeln!(
                out,
                "{name},{k},{:.12e},{:.12e},{:.12e},{:.12e}",
                c.centroid[0], c.centroid[1], f.0[k][0], f.0[k][1]
            );
        }
    }

    pub fn cr_field_csv(&self, name: &str, f: &CRField, out: &mut String) {
        for (k, face) in self.mesh.faces.iter().enumerate() {
            let _ = writeln!(
                out,
                "{name},{k},{:.12e},{:.12e},{:.12e},{:.12e}",
                face.centroid[0], face.centroid[1], f.0[k][0], f.0[k][1]
            );
        }
    }

    pub fn edge_field_csv(&self, name: &str, f: &EdgeField, out: &mut String) {
        for (k, face) in self.mesh.faces.iter().enumerate() {
            let _ = writeln!(out, "{name},{k},{:.12e},{:.12e},{:.12e},", face.centroid[0], face.centroid[1], f.0[k]);
        }
    }
}

/// Traces of a piecewise field on a face together with its jump and average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trace {
    pub inner: f64,
    pub outer: f64,
    pub jump: f64,
    pub average: f64,
}

/// `[[f]] = f_out - f_in`, `{{f}} = (f_out + f_in) / 2`. Reversing the face
/// orientation swaps the roles of the two traces.
pub fn trace_jump_avg(f_in: f64, f_out: f64, reversed: bool) -> Trace {
    let (inner, outer) = if reversed { (f_out, f_in) } else { (f_in, f_out) };
    Trace { inner, outer, jump: outer - inner, average: 0.5 * (outer + inner) }
}

/// Normal face velocity of a CR field: the face dof dotted with the face normal.
pub fn face_velocity_cr(dof: &Vec2, normal: [f64; 3]) -> f64 {
    dof[0] * normal[0] + dof[1] * normal[1]
}

/// Normal face velocity of a piecewise constant field: `{{u}} . n`.
pub fn face_velocity_cell(u_in: &Vec2, u_out: &Vec2, normal: [f64; 3]) -> f64 {
    0.5 * ((u_in[0] + u_out[0]) * normal[0] + (u_in[1] + u_out[1]) * normal[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_periodic_mesh, build_tri_mesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tri(n: usize) -> FeSpaces {
        FeSpaces::new(build_tri_mesh(n).unwrap()).unwrap()
    }

    fn quad(n: usize) -> FeSpaces {
        FeSpaces::new(build_periodic_mesh(n, 2).unwrap()).unwrap()
    }

    #[test]
    fn rejects_3d_meshes() {
        assert!(FeSpaces::new(build_periodic_mesh(2, 3).unwrap()).is_err());
    }

    #[test]
    fn project_q_preserves_constants_and_averages() {
        let s = quad(2);
        assert!(s.project_q(|_| 3.5).0.iter().all(|&v| (v - 3.5).abs() < 1e-14));
        let p = s.project_q(|x| x[0]);
        // cell (0,0) = [0, 1/2]^2
        assert!((p.0[0] - 0.25).abs() < 1e-15);
        let t = tri(3);
        assert!(t.project_q(|_| -1.0).0.iter().all(|&v| (v + 1.0).abs() < 1e-14));
    }

    #[test]
    fn cr_interpolant_reproduces_linear_fields() {
        let s = tri(3);
        let f = |x: Vec2| [1.0 + 2.0 * x[0] - x[1], 0.5 * x[1] + 3.0 * x[0]];
        let u = s.interpolate_cr(f);
        assert!(s.l2_error_cr(f, &u) < 1e-14);
        // exact gradient on every cell
        for g in s.grad_h(&u) {
            assert!((g[0][0] - 2.0).abs() < 1e-12 && (g[0][1] + 1.0).abs() < 1e-12);
            assert!((g[1][0] - 3.0).abs() < 1e-12 && (g[1][1] - 0.5).abs() < 1e-12);
        }
        let c = s.interpolate_cr(|_| [1.0, -2.0]);
        assert!(s.div_h(&c).0.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn cr_face_means_are_continuous() {
        // the trace from either side of an interior face has the same mean
        let s = tri(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = CRField((0..s.mesh.num_faces()).map(|_| [rng.gen(), rng.gen()]).collect());
        for (f, face) in s.mesh.interior_faces() {
            let (a, b) = s.edge_segment(f);
            for cell in [face.inside, face.outside.unwrap()] {
                let mut m = [0.0; 2];
                for (x, w) in segment_points(a, b) {
                    let v = s.eval_cr(&u, cell, x);
                    m[0] += w * v[0] / face.measure;
                    m[1] += w * v[1] / face.measure;
                }
                assert!((m[0] - u.0[f][0]).abs() < 1e-12 && (m[1] - u.0[f][1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_theorem_per_cell() {
        let s = tri(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = CRField((0..s.mesh.num_faces()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect());
        let div = s.div_h(&u);
        let lhs: f64 = div.0.iter().zip(&s.mesh.cells).map(|(d, c)| d * c.measure).sum();
        // independent assembly: boundary fluxes of face means
        let mut rhs = 0.0;
        for (k, cell) in s.mesh.cells.iter().enumerate() {
            for &f in &cell.faces {
                let n = s.mesh.outward_normal(f, k);
                rhs += s.mesh.faces[f].measure * (u.0[f][0] * n[0] + u.0[f][1] * n[1]);
            }
        }
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn nedelec_reproduces_constants() {
        for s in [tri(3), quad(3)] {
            let b = s.interpolate_nedelec(|_| [0.7, -0.2]);
            assert!(s.curl_h(&b).0.iter().all(|v| v.abs() < 1e-13));
            assert!(s.l2_error_edge(|_| [0.7, -0.2], &b) < 1e-13);
        }
    }

    #[test]
    fn quad_nedelec_curl_of_rotation_field() {
        // (0, x) lies in the square Nédélec space with curl 1
        let s = quad(4);
        let b = s.interpolate_nedelec(|x| [0.0, x[0]]);
        // the periodic wrap breaks (0, x) globally; cell 1 = [1/4, 1/2] x [0, 1/4] sees it exactly
        assert!((s.curl_h(&b).0[1] - 1.0).abs() < 1e-13);
        let v = s.eval_edge(&b, 1, [0.3, 0.1]);
        assert!(v[0].abs() < 1e-14 && (v[1] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn whitney_curl_matches_finite_differences() {
        let s = tri(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = EdgeField((0..s.mesh.edges.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let curl = s.curl_h(&b);
        for k in 0..s.mesh.num_cells() {
            let c = s.mesh.cells[k].centroid;
            let x = [c[0], c[1]];
            let d = 1e-6;
            let fx = |dx: f64, dy: f64| s.eval_edge(&b, k, [x[0] + dx, x[1] + dy]);
            let d1b2 = (fx(d, 0.0)[1] - fx(-d, 0.0)[1]) / (2.0 * d);
            let d2b1 = (fx(0.0, d)[0] - fx(0.0, -d)[0]) / (2.0 * d);
            assert!((d1b2 - d2b1 - curl.0[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn edge_dofs_are_mean_tangential_components() {
        for s in [tri(2), quad(3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let b = EdgeField((0..s.mesh.edges.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            for (e, face) in s.mesh.faces.iter().enumerate() {
                let (a, z) = s.edge_segment(e);
                let t = s.mesh.edges[e].tangent;
                for cell in std::iter::once(face.inside).chain(face.outside) {
                    // evaluate in the cell's unwrapped frame
                    let c = s.mesh.cells[cell].centroid;
                    let shift = |p: Vec2| -> Vec2 {
                        let mut q = p;
                        for i in 0..2 {
                            while q[i] - c[i] > 0.5 {
                                q[i] -= 1.0;
                            }
                            while c[i] - q[i] > 0.5 {
                                q[i] += 1.0;
                            }
                        }
                        q
                    };
                    let mean: f64 = segment_points(shift(a), shift(z))
                        .iter()
                        .map(|&(x, w)| w * dot(s.eval_edge(&b, cell, x), [t[0], t[1]]))
                        .sum::<f64>()
                        / face.measure;
                    assert!((mean - b.0[e]).abs() < 1e-12, "edge {e} cell {cell}");
                }
            }
        }
    }

    #[test]
    fn gradients_of_potentials_are_edge_fields_with_zero_curl() {
        for s in [tri(4), quad(4)] {
            let psi = s.interpolate_w(|x| (2.0 * PI * x[0]).cos() * (x[1] + 0.3));
            let g = s.potential_gradient(&psi);
            assert!(s.curl_h(&g).0.iter().all(|v| v.abs() < 1e-12));
            // pointwise: the edge representative equals the gradient of the potential
            for k in 0..s.mesh.num_cells() {
                for &(x, _) in s.points(k) {
                    let d = 1e-6;
                    let p = |dx: f64, dy: f64| s.eval_potential(&psi, k, [x[0] + dx, x[1] + dy]);
                    let fd = [(p(d, 0.0) - p(-d, 0.0)) / (2.0 * d), (p(0.0, d) - p(0.0, -d)) / (2.0 * d)];
                    let v = s.eval_edge(&g, k, x);
                    assert!((v[0] - fd[0]).abs() < 1e-6 && (v[1] - fd[1]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn potentials_have_zero_mean() {
        for s in [tri(4), quad(4)] {
            let psi = s.interpolate_w(|x| x[0] * x[0] + 3.0);
            assert!(s.potential_mean(&psi).abs() < 1e-12);
        }
        let s = tri(3);
        let psi = s.interpolate_w(|x| x[0] - 0.5);
        assert!(s.l2_error_w(|x| x[0] - 0.5, &psi) < 1e-14);
        assert!(s.interpolate_w(|_| 0.0).0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn div_pc_rejects_triangles_and_telescopes() {
        let t = tri(2);
        assert!(t.div_h_pc(&CellVectorField(vec![[0.0; 2]; 8])).is_err());
        let s = quad(4);
        let c = s.div_h_pc(&CellVectorField(vec![[1.0, 2.0]; 16])).unwrap();
        assert!(c.0.iter().all(|v| v.abs() < 1e-13));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = CellVectorField((0..16).map(|_| [rng.gen(), rng.gen()]).collect());
        let d = s.div_h_pc(&u).unwrap();
        let total: f64 = d.0.iter().zip(&s.mesh.cells).map(|(v, c)| v * c.measure).sum();
        assert!(total.abs() < 1e-13);
    }

    #[test]
    fn removing_gradient_component_gives_weakly_divergence_free_field() {
        for s in [tri(4), quad(4)] {
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let b = EdgeField((0..s.mesh.edges.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let mut b = b;
            if !s.is_periodic() {
                for (f, _) in s.mesh.exterior_faces() {
                    b.0[f] = 0.0;
                }
            }
            assert!(s.weak_divergence(&b).iter().any(|v| v.abs() > 1e-3));
            let clean = s.remove_gradient_component(&b).unwrap();
            let r = s.weak_divergence(&clean).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(r < 1e-13, "{r}");
            // curl unchanged
            let (c0, c1) = (s.curl_h(&b), s.curl_h(&clean));
            assert!(c0.0.iter().zip(&c1.0).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    #[test]
    fn trace_operators() {
        let t = trace_jump_avg(1.0, 1.0, false);
        assert_eq!((t.jump, t.average), (0.0, 1.0));
        let t = trace_jump_avg(1.0, 3.0, false);
        assert_eq!((t.jump, t.average), (2.0, 2.0));
        let r = trace_jump_avg(1.0, 3.0, true);
        assert_eq!((r.jump, r.average), (-2.0, 2.0));
    }

    #[test]
    fn face_velocities() {
        assert_eq!(face_velocity_cell(&[1.0, 0.0], &[1.0, 0.0], [1.0, 0.0, 0.0]), 1.0);
        assert_eq!(face_velocity_cell(&[0.0, 1.0], &[0.0, 1.0], [1.0, 0.0, 0.0]), 0.0);
        assert_eq!(face_velocity_cr(&[2.0, -1.0], [0.0, 1.0, 0.0]), -1.0);
    }
}
