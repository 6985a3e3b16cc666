//! Fixed quadrature rules on triangles, squares and segments (2D).

use crate::mesh::{Mesh, MeshKind};

pub type Vec2 = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Exact for the polynomial integrands produced by the schemes: edge-midpoint
    /// rule on triangles (degree 2), 2x2 Gauss on squares (degree 3).
    Exact,
    /// `Exact` applied on the four congruent sub-cells.
    Fine,
    /// Higher order for smooth integrands: 6-point degree-4 rule on triangles,
    /// 3x3 Gauss on squares.
    Smooth,
}

const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

// Degree-4 six-point rule on the reference triangle (weights sum to 1).
const TRI6: [(f64, f64, f64); 6] = [
    (0.445_948_490_915_965, 0.445_948_490_915_965, 0.223_381_589_678_011),
    (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011),
    (0.108_103_018_168_070, 0.445_948_490_915_965, 0.223_381_589_678_011),
    (0.091_576_213_509_771, 0.091_576_213_509_771, 0.109_951_743_655_322),
    (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322),
    (0.816_847_572_980_459, 0.091_576_213_509_771, 0.109_951_743_655_322),
];

fn lerp3(p: &[Vec2; 3], b: [f64; 3]) -> Vec2 {
    [
        b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
        b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
    ]
}

fn mid(a: Vec2, b: Vec2) -> Vec2 {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
}

fn triangle_points(p: &[Vec2; 3], area: f64, rule: Rule, out: &mut Vec<(Vec2, f64)>) {
    match rule {
        Rule::Exact => {
            for i in 0..3 {
                out.push((mid(p[(i + 1) % 3], p[(i + 2) % 3]), area / 3.0));
            }
        }
        Rule::Fine => {
            let m = [mid(p[1], p[2]), mid(p[2], p[0]), mid(p[0], p[1])];
            let subs = [[p[0], m[2], m[1]], [m[2], p[1], m[0]], [m[1], m[0], p[2]], [m[0], m[1], m[2]]];
            for s in &subs {
                triangle_points(s, area / 4.0, Rule::Exact, out);
            }
        }
        Rule::Smooth => {
            for &(a, b, w) in &TRI6 {
                out.push((lerp3(p, [1.0 - a - b, a, b]), area * w));
            }
        }
    }
}

fn square_points(center: Vec2, half: f64, rule: Rule, out: &mut Vec<(Vec2, f64)>) {
    match rule {
        Rule::Exact | Rule::Smooth => {
            let g: &[(f64, f64)] = if rule == Rule::Exact { &GAUSS2 } else { &GAUSS3 };
            for &(xi, wi) in g {
                for &(eta, wj) in g {
                    out.push(([center[0] + half * xi, center[1] + half * eta], wi * wj * half * half));
                }
            }
        }
        Rule::Fine => {
            let q = half / 2.0;
            for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
                square_points([center[0] + dx, center[1] + dy], q, Rule::Exact, out);
            }
        }
    }
}

/// Quadrature points and weights of `rule` on a 2D cell. Periodic cells are
/// evaluated in coordinates unwrapped around the cell centroid.
pub fn cell_points(mesh: &Mesh, cell: usize, rule: Rule) -> Vec<(Vec2, f64)> {
    debug_assert_eq!(mesh.dim, 2);
    let c = &mesh.cells[cell];
    let mut out = Vec::with_capacity(16);
    match mesh.kind {
        MeshKind::Triangulated => {
            let v = mesh.cell_vertex_coords(cell);
            let p = [[v[0][0], v[0][1]], [v[1][0], v[1][1]], [v[2][0], v[2][1]]];
            triangle_points(&p, c.measure, rule, &mut out);
        }
        MeshKind::PeriodicBox => {
            let half = 0.5 / mesh.n as f64;
            square_points([c.centroid[0], c.centroid[1]], half, rule, &mut out);
        }
    }
    out
}

/// Three-point Gauss rule on the segment `a -> b`; weights sum to the length.
pub fn segment_points(a: Vec2, b: Vec2) -> [(Vec2, f64); 3] {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    GAUSS3.map(|(xi, w)| {
        let s = 0.5 * (xi + 1.0);
        ([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])], 0.5 * w * len)
    })
}

/// Three-point Gauss rule on `[a, b]`.
pub fn interval_points(a: f64, b: f64) -> [(f64, f64); 3] {
    GAUSS3.map(|(xi, w)| (a + 0.5 * (xi + 1.0) * (b - a), 0.5 * w * (b - a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_periodic_mesh, build_tri_mesh};

    fn integrate(mesh: &Mesh, rule: Rule, f: impl Fn(Vec2) -> f64) -> f64 {
        (0..mesh.num_cells())
            .flat_map(|k| cell_points(mesh, k, rule))
            .map(|(p, w)| w * f(p))
            .sum()
    }

    #[test]
    fn weights_sum_to_area() {
        for mesh in [build_tri_mesh(3).unwrap(), build_periodic_mesh(3, 2).unwrap()] {
            for rule in [Rule::Exact, Rule::Fine, Rule::Smooth] {
                assert!((integrate(&mesh, rule, |_| 1.0) - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn quadratics_are_exact() {
        // int_0^1 int_0^1 x^2 + xy + y^2 = 1/3 + 1/4 + 1/3
        let exact = 1.0 / 3.0 + 0.25 + 1.0 / 3.0;
        let mesh = build_tri_mesh(3).unwrap();
        for rule in [Rule::Exact, Rule::Fine, Rule::Smooth] {
            let v = integrate(&mesh, rule, |p| p[0] * p[0] + p[0] * p[1] + p[1] * p[1]);
            assert!((v - exact).abs() < 1e-13, "{rule:?} {v}");
        }
    }

    #[test]
    fn smooth_triangle_rule_is_degree_four() {
        // int x^4 over the unit square is 1/5
        let mesh = build_tri_mesh(2).unwrap();
        let v = integrate(&mesh, Rule::Smooth, |p| p[0].powi(4) + p[0] * p[1].powi(3));
        assert!((v - (0.2 + 0.125)).abs() < 1e-12);
    }

    #[test]
    fn segment_rule_is_degree_five() {
        let pts = segment_points([0.0, 0.0], [2.0, 0.0]);
        let v: f64 = pts.iter().map(|(p, w)| w * p[0].powi(5)).sum();
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
    }
}
