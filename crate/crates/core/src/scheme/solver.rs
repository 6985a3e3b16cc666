//! Newton iteration on the coupled residual of one time step.
//!
//! The unknown vector stacks the cell densities, the free velocity dofs and the
//! free edge dofs. The Jacobian is built by finite differences with column
//! coloring: two unknowns share a color when no residual row depends on both,
//! which is decided from the cells each unknown lives on and the stencil radius
//! of the scheme.

use std::collections::VecDeque;
use std::time::Instant;

use super::{DiscreteState, Residuals, Scheme, StepReport};
use crate::error::{Error, Result};
use crate::fespace::{CellField, EdgeField, Vec2};
use crate::linalg::{Factorized, Triplets};
use crate::numerics::Variant;

/// Column coloring and row pattern of the step Jacobian.
pub(super) struct Pattern {
    /// Rows touched by each column.
    rows: Vec<Vec<usize>>,
    colors: Vec<Vec<usize>>,
}

/// Densities, free velocity components, free edges.
struct Layout {
    cells: usize,
    velocity: Vec<usize>,
    edges: Vec<usize>,
}

impl Layout {
    fn new(scheme: &Scheme) -> Self {
        let velocity = scheme
            .velocity_index
            .iter()
            .enumerate()
            .filter(|(_, i)| i.is_some())
            .map(|(d, _)| d)
            .collect();
        let edges = scheme.edge_index.iter().enumerate().filter(|(_, i)| i.is_some()).map(|(e, _)| e).collect();
        Layout { cells: scheme.spaces.mesh.num_cells(), velocity, edges }
    }

    fn len(&self) -> usize {
        self.cells + 2 * self.velocity.len() + self.edges.len()
    }

    fn pack(&self, s: &DiscreteState) -> Vec<f64> {
        let mut x = s.rho.0.clone();
        let dofs = s.u.dofs();
        for &d in &self.velocity {
            x.extend_from_slice(&dofs[d]);
        }
        x.extend(self.edges.iter().map(|&e| s.b.0[e]));
        x
    }

    fn unpack(&self, scheme: &Scheme, x: &[f64], template: &DiscreteState) -> DiscreteState {
        let rho = CellField(x[..self.cells].to_vec());
        let mut dofs: Vec<Vec2> = vec![[0.0; 2]; template.u.dofs().len()];
        let off = self.cells;
        for (i, &d) in self.velocity.iter().enumerate() {
            dofs[d] = [x[off + 2 * i], x[off + 2 * i + 1]];
        }
        let off = off + 2 * self.velocity.len();
        let mut b = vec![0.0; template.b.0.len()];
        for (i, &e) in self.edges.iter().enumerate() {
            b[e] = x[off + i];
        }
        DiscreteState::new(&scheme.spaces, template.t, rho, template.u.with_dofs(dofs), EdgeField(b))
    }

    /// Residual blocks in unknown order; continuity is multiplied by `|K|`.
    fn gather(&self, scheme: &Scheme, r: &Residuals) -> Vec<f64> {
        let mut out: Vec<f64> =
            r.continuity.iter().zip(&scheme.spaces.mesh.cells).map(|(v, c)| v * c.measure).collect();
        for &d in &self.velocity {
            out.push(r.momentum[2 * d]);
            out.push(r.momentum[2 * d + 1]);
        }
        out.extend(self.edges.iter().map(|&e| r.induction[e]));
        out
    }
}

impl Pattern {
    fn new(scheme: &Scheme, layout: &Layout) -> Self {
        let mesh = &scheme.spaces.mesh;
        let nc = mesh.num_cells();
        let face_cells = |f: usize| {
            let face = &mesh.faces[f];
            let mut v = vec![face.inside];
            v.extend(face.outside);
            v
        };
        let mut support: Vec<Vec<usize>> = (0..nc).map(|k| vec![k]).collect();
        for &d in &layout.velocity {
            let cells = match scheme.variant {
                Variant::Scheme1 => face_cells(d),
                Variant::Scheme2 => vec![d],
            };
            support.push(cells.clone());
            support.push(cells);
        }
        for &e in &layout.edges {
            support.push(face_cells(e));
        }

        let mut by_cell = vec![Vec::new(); nc];
        for (j, cells) in support.iter().enumerate() {
            for &c in cells {
                by_cell[c].push(j);
            }
        }
        let mut neighbors = vec![Vec::new(); nc];
        for face in &mesh.faces {
            if let Some(o) = face.outside {
                neighbors[face.inside].push(o);
                neighbors[o].push(face.inside);
            }
        }
        let radius = match scheme.variant {
            Variant::Scheme1 => 1,
            Variant::Scheme2 => 2,
        };

        let mut dist = vec![usize::MAX; nc];
        let mut mark = vec![usize::MAX; support.len()];
        let mut rows = Vec::with_capacity(support.len());
        for (j, cells) in support.iter().enumerate() {
            let mut queue: VecDeque<usize> = cells.iter().copied().collect();
            let mut seen = cells.clone();
            for &c in cells {
                dist[c] = 0;
            }
            while let Some(c) = queue.pop_front() {
                if dist[c] == radius {
                    continue;
                }
                for &n in &neighbors[c] {
                    if dist[n] == usize::MAX {
                        dist[n] = dist[c] + 1;
                        seen.push(n);
                        queue.push_back(n);
                    }
                }
            }
            let mut r = Vec::new();
            for &c in &seen {
                dist[c] = usize::MAX;
                for &i in &by_cell[c] {
                    if mark[i] != j {
                        mark[i] = j;
                        r.push(i);
                    }
                }
            }
            r.sort_unstable();
            rows.push(r);
        }

        let n = support.len();
        let mut colors: Vec<Vec<usize>> = Vec::new();
        let mut claimed: Vec<Vec<bool>> = Vec::new();
        for (j, r) in rows.iter().enumerate() {
            let c = (0..colors.len()).find(|&c| r.iter().all(|&i| !claimed[c][i])).unwrap_or_else(|| {
                colors.push(Vec::new());
                claimed.push(vec![false; n]);
                colors.len() - 1
            });
            colors[c].push(j);
            for &i in r {
                claimed[c][i] = true;
            }
        }
        Pattern { rows, colors }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn max_norm(v: &[Vec2]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x[0].hypot(x[1])))
}

impl Scheme {
    /// Residuals made dimensionless: multiplied by `dt`, divided by the cell
    /// measure for the weak blocks, and relative to `max(1, |field|)`.
    pub fn scaled_residual(&self, r: &Residuals, state: &DiscreteState, prev: &DiscreteState, dt: f64) -> f64 {
        let cell = self.spaces.mesh.cells.iter().fold(0.0f64, |m, c| m.max(c.measure));
        let rho = max_abs(&state.rho.0).max(max_abs(&prev.rho.0)).max(1.0);
        let u = max_norm(state.u.dofs()).max(max_norm(prev.u.dofs())).max(1.0);
        let b = max_abs(&state.b.0).max(max_abs(&prev.b.0)).max(1.0);
        let c = max_abs(&r.continuity) * dt / rho;
        let m = max_abs(&r.momentum) * dt / (cell * rho * u);
        let i = max_abs(&r.induction) * dt / (cell * b);
        c.max(m).max(i)
    }

    pub(super) fn pattern(&self) -> &Pattern {
        self.pattern.get_or_init(|| Pattern::new(self, &Layout::new(self)))
    }
}

struct Evaluated {
    state: DiscreteState,
    residual: Vec<f64>,
    scaled: f64,
}

fn evaluate(scheme: &Scheme, layout: &Layout, x: &[f64], prev: &DiscreteState, t: f64) -> Result<Evaluated> {
    let mut template = prev.clone();
    template.t = t;
    let state = layout.unpack(scheme, x, &template);
    let r = scheme.residuals(&state, prev)?;
    let scaled = scheme.scaled_residual(&r, &state, prev, t - prev.t);
    Ok(Evaluated { residual: layout.gather(scheme, &r), state, scaled })
}

fn jacobian(
    scheme: &Scheme,
    layout: &Layout,
    x: &[f64],
    f0: &[f64],
    prev: &DiscreteState,
    t: f64,
) -> Result<Factorized> {
    let pattern = scheme.pattern();
    let n = x.len();
    let mut a = Triplets::new(n, n);
    let mut xp = x.to_vec();
    for color in &pattern.colors {
        let steps: Vec<f64> = color.iter().map(|&j| 1e-7 * (1.0 + x[j].abs())).collect();
        for (&j, &d) in color.iter().zip(&steps) {
            xp[j] = x[j] + d;
        }
        let fp = evaluate(scheme, layout, &xp, prev, t)?.residual;
        for (&j, &d) in color.iter().zip(&steps) {
            xp[j] = x[j];
            for &i in &pattern.rows[j] {
                let v = (fp[i] - f0[i]) / d;
                if v != 0.0 {
                    a.add(i, j, v);
                }
            }
        }
    }
    Factorized::with_limit(a.to_csr(), scheme.options.direct_limit)
}

/// Newton iteration from the previous level until the scaled residual is below tolerance.
pub(super) fn step(scheme: &Scheme, prev: &DiscreteState, dt: f64) -> Result<(DiscreteState, StepReport)> {
    let start = Instant::now();
    let t = prev.t + dt;
    let layout = Layout::new(scheme);
    debug_assert_eq!(layout.len(), scheme.pattern().rows.len());
    let mut x = layout.pack(prev);
    let mut current = evaluate(scheme, &layout, &x, prev, t)?;
    let mut linear_iterations = 0;
    let mut jac: Option<Factorized> = None;
    let mut last = current.scaled;
    for iteration in 1..=scheme.options.max_iterations {
        // a Jacobian is kept while it still cuts the residual tenfold per iteration
        if jac.is_none() || current.scaled > 0.1 * last {
            jac = Some(jacobian(scheme, &layout, &x, &current.residual, prev, t)?);
        }
        last = current.scaled;
        let rhs: Vec<f64> = current.residual.iter().map(|v| -v).collect();
        let (delta, its) = jac.as_ref().unwrap().solve(&rhs)?;
        linear_iterations += its;

        let mut scale = 1.0;
        let mut trial: Vec<f64>;
        loop {
            trial = x.iter().zip(&delta).map(|(a, d)| a + scale * d).collect();
            match trial[..layout.cells].iter().enumerate().find(|(_, r)| **r <= 0.0 || r.is_nan()) {
                None => break,
                Some((cell, &value)) if scale < 1e-3 => return Err(Error::PositivityLoss { cell, value }),
                Some(_) => scale *= 0.5,
            }
        }
        x = trial;
        current = evaluate(scheme, &layout, &x, prev, t)?;
        let residual = current.scaled;
        if !residual.is_finite() || residual > 1e8 {
            return Err(Error::PicardDivergence { iterations: iteration, residual });
        }
        if residual <= scheme.options.tolerance {
            let report = StepReport {
                step: 0,
                dt,
                regular: true,
                iterations: iteration,
                residual,
                linear_iterations,
                min_density: current.state.min_density(),
                wall_time: start.elapsed(),
            };
            return Ok((current.state, report));
        }
    }
    Err(Error::PicardDivergence { iterations: scheme.options.max_iterations, residual: current.scaled })
}
