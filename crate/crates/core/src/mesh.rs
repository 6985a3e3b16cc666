//! Uniform meshes of the unit square / unit torus.
//!
//! Two families are supported:
//! - a periodic structured mesh of squares (2D) or cubes (3D) on the flat torus,
//! - a triangulation of the unit square where every sub-square is split along its
//!   south-west to north-east diagonal.
//!
//! Faces carry a fixed orientation: `normal` points from `inside` to `outside`.
//! In 2D every face is also an edge; its tangent is the normal rotated by +90°,
//! so a cell traverses the edge counter-clockwise exactly when it is the inside
//! cell of the face.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    /// Structured squares/cubes with periodic identification.
    PeriodicBox,
    /// Triangulated unit square with exterior faces on the boundary.
    Triangulated,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub measure: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Vertex ids, counter-clockwise in 2D.
    pub vertices: Vec<usize>,
    /// Face ids. On triangles `faces[i]` is opposite `vertices[i]`; on boxes the
    /// order is `[-x, +x, -y, +y(, -z, +z)]`.
    pub faces: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub measure: f64,
    /// Unit normal pointing from `inside` to `outside`.
    pub normal: Point,
    pub centroid: Point,
    /// Distance between the centroids of the two incident cells. For exterior
    /// faces, the distance from the inside centroid to the face.
    pub distance: f64,
    pub inside: usize,
    pub outside: Option<usize>,
    pub vertices: Vec<usize>,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.outside.is_some()
    }

    /// +1 if `cell` is the inside cell of this face, -1 if it is the outside cell.
    pub fn orientation(&self, cell: usize) -> f64 {
        if self.inside == cell {
            1.0
        } else {
            debug_assert_eq!(self.outside, Some(cell));
            -1.0
        }
    }

    /// The incident cell across the face from `cell`.
    pub fn neighbor(&self, cell: usize) -> Option<usize> {
        if self.inside == cell {
            self.outside
        } else {
            Some(self.inside)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub start: usize,
    pub end: usize,
    pub length: f64,
    pub tangent: Point,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub kind: MeshKind,
    /// Cells per dimension.
    pub n: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    /// Per cell: `(edge id, sign)` where sign is +1 when the edge tangent agrees
    /// with the counter-clockwise traversal of the cell boundary (2D only).
    pub cell_edges: Vec<Vec<(usize, f64)>>,
    /// Maximal cell diameter.
    pub h: f64,
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Rotation by +90° in the xy-plane.
pub fn rotate(a: &Point) -> Point {
    [-a[1], a[0], 0.0]
}

/// Uniform periodic mesh of `n^d` squares (d = 2) or cubes (d = 3) of side `1/n`.
pub fn build_periodic_mesh(n: usize, dim: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidMesh(format!(
            "periodic mesh needs n >= 2 cells per dimension, got {n}"
        )));
    }
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidMesh(format!("dimension must be 2 or 3, got {dim}")));
    }
    let spacing = 1.0 / n as f64;
    let count = n.pow(dim as u32);
    let strides: Vec<usize> = (0..dim).map(|a| n.pow(a as u32)).collect();
    let multi = |idx: usize| -> Vec<usize> { (0..dim).map(|a| (idx / strides[a]) % n).collect() };
    let linear = |m: &[usize]| -> usize { m.iter().zip(&strides).map(|(i, s)| (i % n) * s).sum() };

    let vertices: Vec<Point> = (0..count)
        .map(|v| {
            let m = multi(v);
            let mut p = [0.0; 3];
            for a in 0..dim {
                p[a] = m[a] as f64 * spacing;
            }
            p
        })
        .collect();

    let measure = spacing.powi(dim as i32);
    let face_measure = spacing.powi(dim as i32 - 1);
    let diameter = (dim as f64).sqrt() * spacing;

    // Face `cell * dim + axis` joins `cell` with its +axis neighbor.
    let mut faces = Vec::with_capacity(count * dim);
    for c in 0..count {
        let m = multi(c);
        for axis in 0..dim {
            let mut up = m.clone();
            up[axis] += 1;
            let mut normal = [0.0; 3];
            normal[axis] = 1.0;
            let mut centroid = [0.0; 3];
            for a in 0..dim {
                centroid[a] = (m[a] as f64 + 0.5) * spacing;
            }
            centroid[axis] = (m[axis] + 1) as f64 * spacing;
            // Vertices of the shared face: corners offset by 0/1 in the other axes.
            let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let corners: Vec<usize> = (0..1usize << others.len())
                .map(|bits| {
                    let mut q = up.clone();
                    for (k, &a) in others.iter().enumerate() {
                        q[a] += (bits >> k) & 1;
                    }
                    linear(&q)
                })
                .collect();
            faces.push(Face {
                measure: face_measure,
                normal,
                centroid,
                distance: spacing,
                inside: c,
                outside: Some(linear(&up)),
                vertices: corners,
            });
        }
    }

    let cells: Vec<Cell> = (0..count)
        .map(|c| {
            let m = multi(c);
            let mut centroid = [0.0; 3];
            for a in 0..dim {
                centroid[a] = (m[a] as f64 + 0.5) * spacing;
            }
            let mut cell_faces = Vec::with_capacity(2 * dim);
            for axis in 0..dim {
                let mut down = m.clone();
                down[axis] = (m[axis] + n - 1) % n;
                cell_faces.push(linear(&down) * dim + axis);
                cell_faces.push(c * dim + axis);
            }
            let cell_vertices = if dim == 2 {
                vec![
                    linear(&[m[0], m[1]]),
                    linear(&[m[0] + 1, m[1]]),
                    linear(&[m[0] + 1, m[1] + 1]),
                    linear(&[m[0], m[1] + 1]),
                ]
            } else {
                (0..8usize)
                    .map(|bits| {
                        let q: Vec<usize> = (0..3).map(|a| m[a] + ((bits >> a) & 1)).collect();
                        linear(&q)
                    })
                    .collect()
            };
            Cell { measure, centroid, diameter, vertices: cell_vertices, faces: cell_faces }
        })
        .collect();

    let (edges, cell_edges) = if dim == 2 {
        // Edge k coincides with face k; tangent = rotate(normal).
        let edges = faces
            .iter()
            .enumerate()
            .map(|(f, face)| {
                let c = f / 2;
                let axis = f % 2;
                let m = multi(c);
                let (start, end) = if axis == 0 {
                    (linear(&[m[0] + 1, m[1]]), linear(&[m[0] + 1, m[1] + 1]))
                } else {
                    (linear(&[m[0] + 1, m[1] + 1]), linear(&[m[0], m[1] + 1]))
                };
                Edge { start, end, length: spacing, tangent: rotate(&face.normal) }
            })
            .collect();
        let cell_edges = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| cell.faces.iter().map(|&f| (f, faces[f].orientation(c))).collect())
            .collect();
        (edges, cell_edges)
    } else {
        // Edge `vertex * 3 + axis` runs from `vertex` along +axis.
        let edges = (0..count * 3)
            .map(|e| {
                let v = e / 3;
                let axis = e % 3;
                let mut q = multi(v);
                q[axis] += 1;
                let mut tangent = [0.0; 3];
                tangent[axis] = 1.0;
                Edge { start: v, end: linear(&q), length: spacing, tangent }
            })
            .collect();
        let cell_edges = (0..count)
            .map(|c| {
                let m = multi(c);
                let mut list = Vec::with_capacity(12);
                for axis in 0..3 {
                    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
                    for bits in 0..4usize {
                        let mut q = m.clone();
                        q[others[0]] += bits & 1;
                        q[others[1]] += (bits >> 1) & 1;
                        list.push((linear(&q) * 3 + axis, 1.0));
                    }
                }
                list
            })
            .collect();
        (edges, cell_edges)
    };

    Ok(Mesh {
        dim,
        kind: MeshKind::PeriodicBox,
        n,
        vertices,
        cells,
        faces,
        edges,
        cell_edges,
        h: diameter,
    })
}

/// Triangulation of the unit square: `n x n` sub-squares, each split along the
/// diagonal from its lower-left to its upper-right corner.
pub fn build_tri_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidMesh(format!(
            "triangle mesh needs n >= 2 cells per dimension, got {n}"
        )));
    }
    let spacing = 1.0 / n as f64;
    let vid = |i: usize, j: usize| i + j * (n + 1);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * spacing, j as f64 * spacing, 0.0]);
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    // Faces keyed by their sorted vertex pair, numbered in order of discovery.
    let mut face_of: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
    let mut incident: Vec<Vec<usize>> = Vec::new();
    let mut face_vertices: Vec<(usize, usize)> = Vec::new();
    let mut cell_faces: Vec<Vec<usize>> = Vec::with_capacity(triangles.len());
    for (c, tri) in triangles.iter().enumerate() {
        let mut local = Vec::with_capacity(3);
        for i in 0..3 {
            let a = tri[(i + 1) % 3];
            let b = tri[(i + 2) % 3];
            let key = (a.min(b), a.max(b));
            let f = *face_of.entry(key).or_insert_with(|| {
                incident.push(Vec::new());
                face_vertices.push(key);
                incident.len() - 1
            });
            incident[f].push(c);
            local.push(f);
        }
        cell_faces.push(local);
    }

    let cells: Vec<Cell> = triangles
        .iter()
        .zip(&cell_faces)
        .map(|(tri, faces)| {
            let p: Vec<Point> = tri.iter().map(|&v| vertices[v]).collect();
            let e1 = sub(&p[1], &p[0]);
            let e2 = sub(&p[2], &p[0]);
            let measure = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]);
            let centroid = [
                (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                (p[0][1] + p[1][1] + p[2][1]) / 3.0,
                0.0,
            ];
            let diameter = (0..3)
                .map(|i| norm(&sub(&p[i], &p[(i + 1) % 3])))
                .fold(0.0, f64::max);
            Cell { measure, centroid, diameter, vertices: tri.to_vec(), faces: faces.clone() }
        })
        .collect();

    let mut faces = Vec::with_capacity(incident.len());
    let mut edges = Vec::with_capacity(incident.len());
    for (f, cells_at) in incident.iter().enumerate() {
        let (a, b) = face_vertices[f];
        let inside = cells_at[0];
        let outside = cells_at.get(1).copied();
        let pa = vertices[a];
        let pb = vertices[b];
        let d = sub(&pb, &pa);
        let length = norm(&d);
        let centroid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, 0.0];
        let mut normal = [d[1] / length, -d[0] / length, 0.0];
        let to_face = sub(&centroid, &cells[inside].centroid);
        if normal[0] * to_face[0] + normal[1] * to_face[1] < 0.0 {
            normal = [-normal[0], -normal[1], 0.0];
        }
        let distance = match outside {
            Some(o) => norm(&sub(&cells[o].centroid, &cells[inside].centroid)),
            None => (to_face[0] * normal[0] + to_face[1] * normal[1]).abs(),
        };
        let tangent = rotate(&normal);
        let (start, end) = if d[0] * tangent[0] + d[1] * tangent[1] > 0.0 { (a, b) } else { (b, a) };
        faces.push(Face {
            measure: length,
            normal,
            centroid,
            distance,
            inside,
            outside,
            vertices: vec![a, b],
        });
        edges.push(Edge { start, end, length, tangent });
    }

    let cell_edges = cells
        .iter()
        .enumerate()
        .map(|(c, cell)| cell.faces.iter().map(|&f| (f, faces[f].orientation(c))).collect())
        .collect();
    let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);

    Ok(Mesh {
        dim: 2,
        kind: MeshKind::Triangulated,
        n,
        vertices,
        cells,
        faces,
        edges,
        cell_edges,
        h,
    })
}

impl Mesh {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == MeshKind::PeriodicBox
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_interior())
    }

    pub fn exterior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| !f.is_interior())
    }

    /// Outward unit normal of face `f` with respect to `cell`.
    pub fn outward_normal(&self, f: usize, cell: usize) -> Point {
        let face = &self.faces[f];
        let s = face.orientation(cell);
        [s * face.normal[0], s * face.normal[1], s * face.normal[2]]
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    /// Ratio of the largest to the smallest cell diameter.
    pub fn quasi_uniformity(&self) -> f64 {
        let min = self.cells.iter().map(|c| c.diameter).fold(f64::INFINITY, f64::min);
        self.h / min
    }

    /// Vertices whose hat functions are admissible discrete potentials: all of them
    /// on the torus, the interior ones on the triangulated square.
    pub fn potential_vertices(&self) -> Vec<usize> {
        match self.kind {
            MeshKind::PeriodicBox => (0..self.vertices.len()).collect(),
            MeshKind::Triangulated => {
                let tol = 1e-12;
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p[0] > tol && p[0] < 1.0 - tol && p[1] > tol && p[1] < 1.0 - tol)
                    .map(|(v, _)| v)
                    .collect()
            }
        }
    }

    /// Coordinates of the cell's vertices unwrapped around its centroid, so that
    /// periodic cells are geometrically contiguous.
    pub fn cell_vertex_coords(&self, cell: usize) -> Vec<Point> {
        let c = &self.cells[cell];
        c.vertices
            .iter()
            .map(|&v| {
                let mut p = self.vertices[v];
                if self.is_periodic() {
                    for a in 0..self.dim {
                        while p[a] - c.centroid[a] > 0.5 {
                            p[a] -= 1.0;
                        }
                        while c.centroid[a] - p[a] > 0.5 {
                            p[a] += 1.0;
                        }
                    }
                }
                p
            })
            .collect()
    }

    /// Plain-text listing of cells, faces and adjacency.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# mesh kind={:?} dim={} n={} cells={} faces={} edges={} h={:.6e}",
            self.kind,
            self.dim,
            self.n,
            self.cells.len(),
            self.faces.len(),
            self.edges.len(),
            self.h
        );
        let _ = writeln!(s, "[cells] id measure centroid faces");
        for (k, c) in self.cells.iter().enumerate() {
            let _ = writeln!(
                s,
                "{k} {:.12e} ({:.6},{:.6},{:.6}) {:?}",
                c.measure, c.centroid[0], c.centroid[1], c.centroid[2], c.faces
            );
        }
        let _ = writeln!(s, "[faces] id measure normal inside outside distance");
        for (k, f) in self.faces.iter().enumerate() {
            let outside = f.outside.map_or_else(|| "-".to_string(), |o| o.to_string());
            let _ = writeln!(
                s,
                "{k} {:.12e} ({:.6},{:.6},{:.6}) {} {} {:.12e}",
                f.measure, f.normal[0], f.normal[1], f.normal[2], f.inside, outside, f.distance
            );
        }
        s
    }
}
