//! Backward-Euler time stepping for Scheme-I and Scheme-II.
//!
//! Each step solves the coupled implicit system for density, velocity and
//! magnetic field at once by a Newton iteration started from the previous level.

mod residual;
pub mod scenario;
mod solver;

use std::sync::OnceLock;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::fespace::{CRField, CellField, CellVectorField, EdgeField, FeSpaces, Vec2};
use crate::linalg::{Factorized, Triplets, DIRECT_LIMIT};
use crate::mesh::MeshKind;
use crate::numerics::{flux_with, neg, pos, Params, Variant};

pub use scenario::{InitialData, Scenario};

/// Velocity unknowns: face dofs (Scheme-I) or cell values (Scheme-II).
#[derive(Clone, Debug, PartialEq)]
pub enum Velocity {
    Cr(CRField),
    Cell(CellVectorField),
}

impl Velocity {
    pub fn dofs(&self) -> &[Vec2] {
        match self {
            Velocity::Cr(u) => &u.0,
            Velocity::Cell(u) => &u.0,
        }
    }

    pub fn dofs_mut(&mut self) -> &mut Vec<Vec2> {
        match self {
            Velocity::Cr(u) => &mut u.0,
            Velocity::Cell(u) => &mut u.0,
        }
    }

    fn with_dofs(&self, dofs: Vec<Vec2>) -> Velocity {
        match self {
            Velocity::Cr(_) => Velocity::Cr(CRField(dofs)),
            Velocity::Cell(_) => Velocity::Cell(CellVectorField(dofs)),
        }
    }
}

/// One time level of the discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteState {
    pub t: f64,
    pub rho: CellField,
    pub u: Velocity,
    pub b: EdgeField,
    /// Cell means of the velocity (equal to `u` for Scheme-II).
    pub u_hat: CellVectorField,
}

impl DiscreteState {
    pub fn new(spaces: &FeSpaces, t: f64, rho: CellField, u: Velocity, b: EdgeField) -> Self {
        let u_hat = match &u {
            Velocity::Cr(cr) => spaces.cr_cell_means(cr),
            Velocity::Cell(c) => c.clone(),
        };
        DiscreteState { t, rho, u, b, u_hat }
    }

    pub fn mass(&self, spaces: &FeSpaces) -> f64 {
        self.rho.0.iter().zip(&spaces.mesh.cells).map(|(r, c)| r * c.measure).sum()
    }

    pub fn min_density(&self) -> f64 {
        self.rho.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solver statistics of one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub dt: f64,
    /// False for a shortened final step.
    pub regular: bool,
    /// Newton iterations.
    pub iterations: usize,
    /// Final scaled nonlinear residual.
    pub residual: f64,
    /// Linear-solver iterations summed over the step (1 per direct solve).
    pub linear_iterations: usize,
    pub min_density: f64,
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Scaled nonlinear residual at which the iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Systems with at most this many unknowns are factorized directly.
    pub direct_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-10, max_iterations: 100, direct_limit: DIRECT_LIMIT }
    }
}

/// The three residual blocks of the coupled system.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    /// Per cell, finite-volume form.
    pub continuity: Vec<f64>,
    /// Per velocity dof and component, `2 * dof + c`, weak form.
    pub momentum: Vec<f64>,
    /// Per edge, weak form.
    pub induction: Vec<f64>,
}

/// Stored states of a run and the reports of every step.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// States at the output stride; always contains the initial and final state.
    pub states: Vec<DiscreteState>,
    /// Step index of each stored state.
    pub steps: Vec<usize>,
    pub reports: Vec<StepReport>,
}

/// A discretization bound to a mesh and a parameter set.
pub struct Scheme {
    pub spaces: FeSpaces,
    pub params: Params,
    pub variant: Variant,
    pub options: SolverOptions,
    /// Unknown index of every edge, `None` for edges fixed by the boundary condition.
    edge_index: Vec<Option<usize>>,
    /// Unknown index of every velocity dof, `None` for no-slip faces.
    velocity_index: Vec<Option<usize>>,
    pattern: OnceLock<solver::Pattern>,
}

impl Scheme {
    /// Binds `variant` to `spaces`. The mesh size in `params` is replaced by the
    /// mesh's own `h` before validation.
    pub fn new(spaces: FeSpaces, params: Params, variant: Variant) -> Result<Self> {
        let expected = match variant {
            Variant::Scheme1 => MeshKind::Triangulated,
            Variant::Scheme2 => MeshKind::PeriodicBox,
        };
        if spaces.mesh.kind != expected {
            return Err(Error::Unsupported(format!("{variant} needs a {expected:?} mesh")));
        }
        if params.dim != 2 {
            return Err(Error::Unsupported(format!(
                "{variant} is implemented in two dimensions only (d = {})",
                params.dim
            )));
        }
        let params = Params { h: spaces.mesh.h, ..params };
        params.validate(variant)?;

        let mesh = &spaces.mesh;
        let mut next = 0;
        let edge_index = mesh
            .faces
            .iter()
            .map(|f| {
                f.is_interior().then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        let velocity_index = match variant {
            Variant::Scheme1 => {
                let mut next = 0;
                mesh.faces
                    .iter()
                    .map(|f| {
                        f.is_interior().then(|| {
                            next += 1;
                            next - 1
                        })
                    })
                    .collect()
            }
            Variant::Scheme2 => (0..mesh.num_cells()).map(Some).collect(),
        };
        Ok(Scheme {
            spaces,
            params,
            variant,
            options: SolverOptions::default(),
            edge_index,
            velocity_index,
            pattern: OnceLock::new(),
        })
    }

    pub fn with_options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn dt(&self) -> f64 {
        self.params.dt()
    }

    /// Number of time steps and the time levels `t^0 .. t^N`. The last step is
    /// shortened when `T` is not a multiple of `dt`.
    pub fn time_levels(&self) -> Vec<f64> {
        let dt = self.dt();
        let t_final = self.params.t_final;
        let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
        (0..=steps).map(|k| if k == steps { t_final } else { k as f64 * dt }).collect()
    }

    /// Size of the nonlinear system solved per step.
    pub fn unknowns(&self) -> usize {
        let velocity = self.velocity_index.iter().flatten().count();
        let edges = self.edge_index.iter().flatten().count();
        self.spaces.mesh.num_cells() + 2 * velocity + edges
    }

    /// Projects smooth initial data onto the discrete spaces.
    ///
    /// The magnetic field is the edge interpolant with its discrete-gradient
    /// component removed whenever the interpolant is not weakly divergence free.
    pub fn initial_state(&self, data: &InitialData) -> Result<DiscreteState> {
        let spaces = &self.spaces;
        let rho = spaces.project_q(&data.rho);
        for (cell, &value) in rho.0.iter().enumerate() {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::NonPositiveInitialDensity { cell, value });
            }
        }
        let u = match self.variant {
            Variant::Scheme1 => {
                let mut u = spaces.interpolate_cr(&data.u);
                for (f, idx) in self.velocity_index.iter().enumerate() {
                    if idx.is_none() {
                        u.0[f] = [0.0; 2];
                    }
                }
                Velocity::Cr(u)
            }
            Variant::Scheme2 => Velocity::Cell(spaces.project_q_vec(&data.u)),
        };
        let mut b = spaces.interpolate_nedelec(&data.b);
        for (e, idx) in self.edge_index.iter().enumerate() {
            if idx.is_none() {
                b.0[e] = 0.0;
            }
        }
        let scale = b.0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let div = spaces.weak_divergence(&b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if div > 1e-13 * scale {
            b = spaces.remove_gradient_component(&b)?;
        }
        Ok(DiscreteState::new(spaces, 0.0, rho, u, b))
    }

    /// Normal face velocities `u_sigma` (zero on exterior faces).
    pub fn face_velocities(&self, u: &Velocity) -> Vec<f64> {
        let mesh = &self.spaces.mesh;
        mesh.faces
            .iter()
            .enumerate()
            .map(|(f, face)| match (u, face.outside) {
                (_, None) => 0.0,
                (Velocity::Cr(cr), Some(_)) => cr.0[f][0] * face.normal[0] + cr.0[f][1] * face.normal[1],
                (Velocity::Cell(c), Some(o)) => {
                    let (a, b) = (c.0[face.inside], c.0[o]);
                    0.5 * ((a[0] + b[0]) * face.normal[0] + (a[1] + b[1]) * face.normal[1])
                }
            })
            .collect()
    }

    /// `sum_sigma |sigma| F(q, u) (+1 for the inside cell, -1 for the outside cell)`
    /// over interior faces: the integrated flux divergence of a cell quantity.
    pub fn flux_divergence(&self, q: &[f64], u_sigma: &[f64]) -> Vec<f64> {
        let h_eps = self.params.h_eps();
        let mut out = vec![0.0; q.len()];
        for (f, face) in self.spaces.mesh.interior_faces() {
            let o = face.outside.unwrap();
            let flux = face.measure * flux_with(q[face.inside], q[o], u_sigma[f], h_eps);
            out[face.inside] += flux;
            out[o] -= flux;
        }
        out
    }

    /// Per-cell discrete divergence `(1/|K|) sum_sigma |sigma| u_sigma` (outward).
    pub fn divergence(&self, u: &Velocity) -> Vec<f64> {
        let mesh = &self.spaces.mesh;
        let us = self.face_velocities(u);
        let mut div = vec![0.0; mesh.num_cells()];
        for (f, face) in mesh.interior_faces() {
            div[face.inside] += face.measure * us[f];
            div[face.outside.unwrap()] -= face.measure * us[f];
        }
        for (d, c) in div.iter_mut().zip(&mesh.cells) {
            *d /= c.measure;
        }
        div
    }

    /// Solves the discrete continuity equation for the density at the new
    /// level with the velocity `u` given.
    pub fn density_update(&self, rho_old: &CellField, u: &Velocity, dt: f64) -> Result<CellField> {
        let mesh = &self.spaces.mesh;
        let h_eps = self.params.h_eps();
        let us = self.face_velocities(u);
        let nc = mesh.num_cells();
        let mut a = Triplets::new(nc, nc);
        let mut rhs = vec![0.0; nc];
        for (k, cell) in mesh.cells.iter().enumerate() {
            a.add(k, k, cell.measure / dt);
            rhs[k] = cell.measure * rho_old.0[k] / dt;
        }
        for (f, face) in mesh.interior_faces() {
            let (i, o) = (face.inside, face.outside.unwrap());
            let ci = face.measure * (pos(us[f]) + h_eps);
            let co = face.measure * (neg(us[f]) - h_eps);
            a.add(i, i, ci);
            a.add(i, o, co);
            a.add(o, i, -ci);
            a.add(o, o, -co);
        }
        let (rho, _) = Factorized::with_limit(a.to_csr(), self.options.direct_limit)?.solve(&rhs)?;
        Ok(CellField(rho))
    }

    pub fn residuals(&self, state: &DiscreteState, prev: &DiscreteState) -> Result<Residuals> {
        Ok(Residuals {
            continuity: self.residual_continuity(state, prev),
            momentum: self.residual_momentum(state, prev)?,
            induction: self.residual_induction(state, prev),
        })
    }

    /// One backward-Euler step of length `dt`.
    pub fn step(&self, prev: &DiscreteState, dt: f64) -> Result<(DiscreteState, StepReport)> {
        solver::step(self, prev, dt)
    }

    /// Steps from `initial` to the final time. `observe` sees every accepted
    /// step `(prev, next, report)`; states are stored every `stride` steps.
    pub fn run(
        &self,
        initial: DiscreteState,
        stride: usize,
        mut observe: impl FnMut(&DiscreteState, &DiscreteState, &StepReport) -> Result<()>,
    ) -> Result<Trajectory> {
        let stride = stride.max(1);
        let levels = self.time_levels();
        let regular_dt = self.dt();
        let mut traj = Trajectory { states: vec![initial.clone()], steps: vec![0], reports: Vec::new() };
        let mut current = initial;
        for k in 1..levels.len() {
            let dt = levels[k] - levels[k - 1];
            let (mut next, mut report) =
                self.step(&current, dt).map_err(|e| Error::StepFailed { step: k, source: Box::new(e) })?;
            next.t = levels[k];
            report.step = k;
            report.regular = (dt - regular_dt).abs() <= 1e-12 * regular_dt;
            observe(&current, &next, &report)?;
            if k % stride == 0 || k + 1 == levels.len() {
                traj.states.push(next.clone());
                traj.steps.push(k);
            }
            traj.reports.push(report);
            current = next;
        }
        Ok(traj)
    }
}
