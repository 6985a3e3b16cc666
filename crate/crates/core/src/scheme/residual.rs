use super::{DiscreteState, Scheme, Velocity};
use crate::error::Result;
use crate::numerics::{cross, lorentz, lorentz_cr, Variant};

impl Scheme {
    /// `D_t rho_K + (1/|K|) sum_sigma |sigma| F(rho, u)` per cell.
    pub fn residual_continuity(&self, state: &DiscreteState, prev: &DiscreteState) -> Vec<f64> {
        let dt = state.t - prev.t;
        let us = self.face_velocities(&state.u);
        let div = self.flux_divergence(&state.rho.0, &us);
        self.spaces
            .mesh
            .cells
            .iter()
            .enumerate()
            .map(|(k, c)| (state.rho.0[k] - prev.rho.0[k]) / dt + div[k] / c.measure)
            .collect()
    }

    /// Weak momentum residual, `2 * dof + component`. Entries of no-slip dofs are zero.
    pub fn residual_momentum(&self, state: &DiscreteState, prev: &DiscreteState) -> Result<Vec<f64>> {
        match self.variant {
            Variant::Scheme1 => self.momentum_cr(state, prev),
            Variant::Scheme2 => self.momentum_cell(state, prev),
        }
    }

    fn pressures(&self, state: &DiscreteState) -> Result<Vec<f64>> {
        let eos = self.params.eos();
        state.rho.0.iter().map(|&r| eos.pressure(r)).collect()
    }

    /// Per-cell integrated momentum flux divergence for both components.
    fn momentum_flux(&self, state: &DiscreteState) -> [Vec<f64>; 2] {
        let us = self.face_velocities(&state.u);
        [0, 1].map(|c| {
            let q: Vec<f64> = state.rho.0.iter().zip(&state.u_hat.0).map(|(r, u)| r * u[c]).collect();
            self.flux_divergence(&q, &us)
        })
    }

    fn momentum_cr(&self, state: &DiscreteState, prev: &DiscreteState) -> Result<Vec<f64>> {
        let Velocity::Cr(u) = &state.u else { unreachable!("Scheme-I carries face velocities") };
        let spaces = &self.spaces;
        let mesh = &spaces.mesh;
        let p = &self.params;
        let dt = state.t - prev.t;
        let nu = p.nu();
        let pressure = self.pressures(state)?;
        let conv = self.momentum_flux(state);
        let grad = spaces.grad_h(u);
        let force = lorentz_cr(spaces, &state.b, &prev.b);
        let mut r = vec![0.0; 2 * mesh.num_faces()];
        for (k, cell) in mesh.cells.iter().enumerate() {
            let div = grad[k][0][0] + grad[k][1][1];
            for &f in &cell.faces {
                let n = mesh.outward_normal(f, k);
                let len = mesh.faces[f].measure;
                for c in 0..2 {
                    let dmom = state.rho.0[k] * state.u_hat.0[k][c] - prev.rho.0[k] * prev.u_hat.0[k][c];
                    let mut v = cell.measure / 3.0 * dmom / dt + conv[c][k] / 3.0;
                    // grad(phi_f) = |f| n / |K|
                    v += p.mu * len * (grad[k][c][0] * n[0] + grad[k][c][1] * n[1]);
                    v += len * n[c] * (nu * div - pressure[k]);
                    r[2 * f + c] += v;
                }
            }
        }
        for (f, idx) in self.velocity_index.iter().enumerate() {
            for c in 0..2 {
                if idx.is_some() {
                    r[2 * f + c] -= force[f][c];
                } else {
                    r[2 * f + c] = 0.0;
                }
            }
        }
        Ok(r)
    }

    fn momentum_cell(&self, state: &DiscreteState, prev: &DiscreteState) -> Result<Vec<f64>> {
        let spaces = &self.spaces;
        let mesh = &spaces.mesh;
        let p = &self.params;
        let dt = state.t - prev.t;
        let nu = p.nu();
        let pressure = self.pressures(state)?;
        let conv = self.momentum_flux(state);
        let u = &state.u_hat.0;
        let div = spaces.div_h_pc(&state.u_hat)?;
        let force = lorentz(spaces, &state.b, &prev.b);
        let mut r = vec![0.0; 2 * mesh.num_cells()];
        for (k, cell) in mesh.cells.iter().enumerate() {
            for c in 0..2 {
                let dmom = state.rho.0[k] * u[k][c] - prev.rho.0[k] * prev.u_hat.0[k][c];
                r[2 * k + c] += cell.measure * dmom / dt + conv[c][k] - force.0[k][c];
            }
        }
        for face in &mesh.faces {
            let (i, o) = (face.inside, face.outside.expect("periodic faces are interior"));
            let n = face.normal;
            let avg_p = 0.5 * (pressure[i] + pressure[o]);
            let avg_div = 0.5 * (div.0[i] + div.0[o]);
            for c in 0..2 {
                // seen from the inside cell; the outside cell has n -> -n and the jump reversed
                let flux = face.measure * ((avg_p - nu * avg_div) * n[c] - p.mu * (u[o][c] - u[i][c]) / face.distance);
                r[2 * i + c] += flux;
                r[2 * o + c] -= flux;
            }
        }
        Ok(r)
    }

    /// Weak induction residual per edge; edges fixed by the boundary condition are zero.
    pub fn residual_induction(&self, state: &DiscreteState, prev: &DiscreteState) -> Vec<f64> {
        let spaces = &self.spaces;
        let mesh = &spaces.mesh;
        let dt = state.t - prev.t;
        let alpha = self.params.alpha;
        let curl = spaces.curl_h(&state.b);
        let mut r = vec![0.0; mesh.edges.len()];
        for k in 0..mesh.num_cells() {
            let edges = &mesh.cell_edges[k];
            let ne = edges.len();
            let m = spaces.local_mass(k);
            let local_curl = spaces.local_curl(k);
            let measure = mesh.cells[k].measure;
            let transport: f64 = spaces
                .points(k)
                .iter()
                .enumerate()
                .map(|(q, &(_, w))| {
                    let u = match &state.u {
                        Velocity::Cr(cr) => spaces.cr_at(cr, k, q),
                        Velocity::Cell(c) => c.0[k],
                    };
                    w * cross(u, spaces.edge_at(&prev.b, k, q))
                })
                .sum();
            for i in 0..ne {
                let mut v = 0.0;
                for j in 0..ne {
                    let e = edges[j].0;
                    v += m[i * ne + j] * (state.b.0[e] - prev.b.0[e]) / dt;
                }
                v += local_curl[i] * (alpha * measure * curl.0[k] - transport);
                r[edges[i].0] += v;
            }
        }
        for (e, idx) in self.edge_index.iter().enumerate() {
            if idx.is_none() {
                r[e] = 0.0;
            }
        }
        r
    }
}
