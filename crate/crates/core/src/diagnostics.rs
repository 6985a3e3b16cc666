//! Measurements of the discrete properties: energy balance, relative energy,
//! weak divergence, consistency residuals and convergence orders.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fespace::{EdgeField, FeSpaces, Tensor2, Vec2};
use crate::mesh::MeshKind;
use crate::numerics::{cross, curl_cross, stress, Eos, Variant};
use crate::quadrature::{cell_points, Rule};
use crate::scheme::{DiscreteState, Scheme, Velocity};

/// Energy balance of one step.
///
/// Rates (`viscous`, `resistive`, `d`) refer to the new level and are per unit
/// time, so the balance reads `(E - E_prev)/dt + viscous + resistive + sum(d) = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub magnetic: f64,
    pub viscous: f64,
    pub resistive: f64,
    /// `[D1, .., D5]`: time-stepping, upwinding and density-jump dissipation.
    pub d: [f64; 5],
    /// `|D_t E + viscous + resistive + D1 + .. + D5|`.
    pub residual: f64,
    /// `E_prev - E - dt (viscous + resistive)`; nonnegative for a stable step.
    pub slack: f64,
    /// Smallest face contribution to D4 or D5.
    pub min_face_term: f64,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.kinetic + self.internal + self.magnetic
    }

    /// Report of the initial level: energies only.
    pub fn initial(scheme: &Scheme, state: &DiscreteState) -> Result<Self> {
        let (kinetic, internal, magnetic) = energy_parts(scheme, state, Rule::Exact)?;
        Ok(EnergyReport { t: state.t, kinetic, internal, magnetic, ..Default::default() })
    }
}

fn magnetic_energy(spaces: &FeSpaces, b: &EdgeField, rule: Rule) -> f64 {
    if rule == Rule::Exact {
        return 0.5 * spaces.edge_inner(b, b);
    }
    (0..spaces.mesh.num_cells())
        .map(|k| {
            cell_points(&spaces.mesh, k, rule)
                .iter()
                .map(|&(x, w)| {
                    let v = spaces.eval_edge(b, k, x);
                    0.5 * w * (v[0] * v[0] + v[1] * v[1])
                })
                .sum::<f64>()
        })
        .sum()
}

fn energy_parts(scheme: &Scheme, s: &DiscreteState, rule: Rule) -> Result<(f64, f64, f64)> {
    let eos = scheme.params.eos();
    let mut kinetic = 0.0;
    let mut internal = 0.0;
    for (k, cell) in scheme.spaces.mesh.cells.iter().enumerate() {
        let u = s.u_hat.0[k];
        kinetic += 0.5 * cell.measure * s.rho.0[k] * (u[0] * u[0] + u[1] * u[1]);
        internal += cell.measure * eos.potential(s.rho.0[k])?;
    }
    Ok((kinetic, internal, magnetic_energy(&scheme.spaces, &s.b, rule)))
}

/// `E_h = int (rho |u_hat|^2/2 + H(rho) + |B|^2/2)`.
pub fn total_energy(scheme: &Scheme, state: &DiscreteState) -> Result<f64> {
    let (k, i, m) = energy_parts(scheme, state, Rule::Exact)?;
    Ok(k + i + m)
}

/// `b(up) - b(down) - b'(down) (up - down)`, the upwind remainder of a convex `b`.
fn taylor_remainder(eos: &Eos, up: f64, down: f64) -> Result<f64> {
    Ok(eos.potential(up)? - eos.potential(down)? - eos.potential_prime(down)? * (up - down))
}

/// Viscous dissipation rate `mu |grad u|^2 + nu |div u|^2` in the discrete norms of the variant.
pub fn viscous_dissipation(scheme: &Scheme, u: &Velocity) -> Result<f64> {
    let p = &scheme.params;
    let spaces = &scheme.spaces;
    let mesh = &spaces.mesh;
    let nu = p.nu();
    Ok(match u {
        Velocity::Cr(cr) => spaces
            .grad_h(cr)
            .iter()
            .zip(&mesh.cells)
            .map(|(g, c)| {
                let div = g[0][0] + g[1][1];
                let norm: f64 = g.iter().flatten().map(|v| v * v).sum();
                c.measure * (p.mu * norm + nu * div * div)
            })
            .sum(),
        Velocity::Cell(c) => {
            let div = spaces.div_h_pc(c)?;
            let jumps: f64 = mesh
                .interior_faces()
                .map(|(_, f)| {
                    let (a, b) = (c.0[f.inside], c.0[f.outside.unwrap()]);
                    f.measure / f.distance * ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2))
                })
                .sum();
            let divs: f64 = div.0.iter().zip(&mesh.cells).map(|(d, c)| c.measure * d * d).sum();
            p.mu * jumps + nu * divs
        }
    })
}

/// Assembles every term of the discrete energy balance between two
/// consecutive levels.
///
/// The density remainders D3 and D5 are assembled from their exact per-cell
/// and per-face forms (Taylor remainders of `H`), which reduce to the
/// `H''`-weighted squares when `gamma = 2`.
pub fn energy_report(scheme: &Scheme, prev: &DiscreteState, next: &DiscreteState) -> Result<EnergyReport> {
    energy_report_with(scheme, prev, next, Rule::Exact)
}

/// As [`energy_report`], with the magnetic integrals evaluated by `rule`.
pub fn energy_report_with(
    scheme: &Scheme,
    prev: &DiscreteState,
    next: &DiscreteState,
    rule: Rule,
) -> Result<EnergyReport> {
    let spaces = &scheme.spaces;
    let mesh = &spaces.mesh;
    let p = &scheme.params;
    let eos = p.eos();
    let dt = next.t - prev.t;
    let h_eps = p.h_eps();

    let (kinetic, internal, magnetic) = energy_parts(scheme, next, rule)?;
    let (k0, i0, m0) = energy_parts(scheme, prev, rule)?;
    let viscous = viscous_dissipation(scheme, &next.u)?;
    let curl = spaces.curl_h(&next.b);
    let resistive: f64 = curl.0.iter().zip(&mesh.cells).map(|(w, c)| p.alpha * c.measure * w * w).sum();

    let mut d = [0.0; 5];
    for (k, cell) in mesh.cells.iter().enumerate() {
        let (u, u0) = (next.u_hat.0[k], prev.u_hat.0[k]);
        let du = [(u[0] - u0[0]) / dt, (u[1] - u0[1]) / dt];
        d[0] += 0.5 * dt * cell.measure * prev.rho.0[k] * (du[0] * du[0] + du[1] * du[1]);
        d[2] += cell.measure / dt * taylor_remainder(&eos, prev.rho.0[k], next.rho.0[k])?;
    }
    let db = EdgeField(next.b.0.iter().zip(&prev.b.0).map(|(a, b)| a - b).collect());
    d[1] = magnetic_energy(spaces, &db, rule) / dt;

    let us = scheme.face_velocities(&next.u);
    let mut min_face_term = f64::INFINITY;
    for (f, face) in mesh.interior_faces() {
        let (i, o) = (face.inside, face.outside.unwrap());
        let (ri, ro) = (next.rho.0[i], next.rho.0[o]);
        let (up, down) = if us[f] >= 0.0 { (ri, ro) } else { (ro, ri) };
        let (a, b) = (next.u_hat.0[i], next.u_hat.0[o]);
        let jump = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        let d4 = face.measure * (0.5 * up * us[f].abs() + h_eps * 0.5 * (ri + ro)) * jump;
        let d5 = face.measure
            * (h_eps * (ro - ri) * (eos.potential_prime(ro)? - eos.potential_prime(ri)?)
                + us[f].abs() * taylor_remainder(&eos, up, down)?);
        min_face_term = min_face_term.min(d4).min(d5);
        d[3] += d4;
        d[4] += d5;
    }
    if !min_face_term.is_finite() {
        min_face_term = 0.0;
    }

    let e = kinetic + internal + magnetic;
    let e0 = k0 + i0 + m0;
    let balance = (e - e0) / dt + viscous + resistive + d.iter().sum::<f64>();
    Ok(EnergyReport {
        t: next.t,
        kinetic,
        internal,
        magnetic,
        viscous,
        resistive,
        d,
        residual: balance.abs(),
        slack: e0 - e - dt * (viscous + resistive),
        min_face_term,
    })
}

/// `int (rho |u_hat - U|^2/2 + |B - b|^2/2 + H(rho) - H(r) - H'(r)(rho - r))`
/// against a smooth reference, by quadrature.
pub fn relative_energy(
    scheme: &Scheme,
    state: &DiscreteState,
    r: impl Fn(Vec2) -> f64,
    u_ref: impl Fn(Vec2) -> Vec2,
    b_ref: impl Fn(Vec2) -> Vec2,
) -> Result<f64> {
    let spaces = &scheme.spaces;
    let eos = scheme.params.eos();
    let mut total = 0.0;
    for k in 0..spaces.mesh.num_cells() {
        let rho = state.rho.0[k];
        let u = state.u_hat.0[k];
        for (x, w) in cell_points(&spaces.mesh, k, Rule::Smooth) {
            let rv = r(x);
            if rv <= 0.0 || !rv.is_finite() {
                return Err(Error::NonPositiveReference(rv));
            }
            let (uu, bb) = (u_ref(x), b_ref(x));
            let b = spaces.eval_edge(&state.b, k, x);
            let kin = 0.5 * rho * ((u[0] - uu[0]).powi(2) + (u[1] - uu[1]).powi(2));
            let mag = 0.5 * ((b[0] - bb[0]).powi(2) + (b[1] - bb[1]).powi(2));
            let pot = eos.potential(rho)? - eos.potential(rv)? - eos.potential_prime(rv)? * (rho - rv);
            total += w * (kin + mag + pot);
        }
    }
    Ok(total)
}

/// Largest `|int B . grad psi_h|` over the basis of the discrete potentials.
pub fn weak_divfree_residual(spaces: &FeSpaces, b: &EdgeField) -> f64 {
    spaces.weak_divergence(b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Both sides of the renormalized continuity identity for a convex `b` given as
/// `b, b'`: `int (D_t b(rho) + (rho b' - b) div u)` and the negative sum of the
/// time and face remainders.
pub fn renormalized_continuity(
    scheme: &Scheme,
    rho_old: &[f64],
    rho: &[f64],
    u: &Velocity,
    dt: f64,
    b: impl Fn(f64) -> (f64, f64),
) -> (f64, f64) {
    let mesh = &scheme.spaces.mesh;
    let h_eps = scheme.params.h_eps();
    let div = scheme.divergence(u);
    let remainder = |up: f64, down: f64| {
        let (bu, _) = b(up);
        let (bd, bd1) = b(down);
        bu - bd - bd1 * (up - down)
    };
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (k, cell) in mesh.cells.iter().enumerate() {
        let (b1, db1) = b(rho[k]);
        let (b0, _) = b(rho_old[k]);
        lhs += cell.measure * ((b1 - b0) / dt + (rho[k] * db1 - b1) * div[k]);
        rhs -= cell.measure / dt * remainder(rho_old[k], rho[k]);
    }
    let us = scheme.face_velocities(u);
    for (f, face) in mesh.interior_faces() {
        let (ri, ro) = (rho[face.inside], rho[face.outside.unwrap()]);
        let (up, down) = if us[f] >= 0.0 { (ri, ro) } else { (ro, ri) };
        rhs -= face.measure * (h_eps * (ro - ri) * (b(ro).1 - b(ri).1) + us[f].abs() * remainder(up, down));
    }
    (lhs, rhs)
}

// ------------------------------------------------------------------ orders

/// Least-squares slope of `log e` against `log h`.
pub fn eoc(errors: &[f64], h: &[f64]) -> Result<f64> {
    if errors.len() != h.len() || errors.len() < 2 {
        return Err(Error::Eoc(format!("need at least two levels, got {} errors and {} sizes", errors.len(), h.len())));
    }
    if let Some((i, e)) = errors.iter().enumerate().find(|(_, e)| **e <= 0.0 || !e.is_finite()) {
        return Err(Error::Eoc(format!("error {e} at level {i} is not positive (exact)")));
    }
    if let Some(v) = h.iter().find(|v| **v <= 0.0) {
        return Err(Error::Eoc(format!("mesh size {v} is not positive")));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Eoc("all levels share one mesh size".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

// ------------------------------------------------------------------ consistency

/// Consistency residuals `e1..e4` on one level.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyLevel {
    pub n: usize,
    pub h: f64,
    pub e: [f64; 4],
}

/// Residuals over a refinement sequence and their fitted orders.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub levels: Vec<ConsistencyLevel>,
    pub eoc: [f64; 4],
}

impl ConsistencyReport {
    pub fn new(levels: Vec<ConsistencyLevel>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::Eoc(format!("a refinement study needs at least 3 levels, got {}", levels.len())));
        }
        let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
        let mut orders = [0.0; 4];
        for (i, o) in orders.iter_mut().enumerate() {
            let e: Vec<f64> = levels.iter().map(|l| l.e[i]).collect();
            *o = eoc(&e, &h)?;
        }
        Ok(ConsistencyReport { levels, eoc: orders })
    }

    /// Columns `h, e1..e4, eoc1..eoc4`; the orders are repeated on every row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,e1,e2,e3,e4,eoc1,eoc2,eoc3,eoc4\n");
        for l in &self.levels {
            let _ = write!(out, "{:.16e}", l.h);
            for v in l.e.iter().chain(&self.eoc) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Wave numbers of the six members of every test-function family.
pub const FAMILY: [(f64, f64); 6] = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0), (1.0, 3.0), (3.0, 1.0)];

/// `cos(k pi x) cos(l pi y)` and its gradient.
pub fn cosine_mode(k: f64, l: f64, x: Vec2) -> (f64, Vec2) {
    let (sx, cx) = (k * PI * x[0]).sin_cos();
    let (sy, cy) = (l * PI * x[1]).sin_cos();
    (cx * cy, [-k * PI * sx * cy, -l * PI * cx * sy])
}

/// `sin^2(pi x) sin^2(pi y) (cos(k pi x) cos(l pi y), sin(k pi x) sin(l pi y))`
/// and its gradient `g[i][j] = d_j v_i`; vanishes with its gradient on the boundary.
pub fn bump_mode(k: f64, l: f64, x: Vec2) -> (Vec2, Tensor2) {
    let (s1, c1) = (PI * x[0]).sin_cos();
    let (s2, c2) = (PI * x[1]).sin_cos();
    let w = s1 * s1 * s2 * s2;
    let dw = [2.0 * PI * s1 * c1 * s2 * s2, 2.0 * PI * s2 * c2 * s1 * s1];
    let (sx, cx) = (k * PI * x[0]).sin_cos();
    let (sy, cy) = (l * PI * x[1]).sin_cos();
    let q = [cx * cy, sx * sy];
    let dq = [[-k * PI * sx * cy, -l * PI * cx * sy], [k * PI * cx * sy, l * PI * sx * cy]];
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = dw[j] * q[i] + w * dq[i][j];
        }
    }
    ([w * q[0], w * q[1]], g)
}

/// `(cos(k pi x) sin(l pi y), -sin(k pi x) cos(l pi y))` and its scalar curl;
/// the tangential trace vanishes on the boundary of the unit square.
pub fn tangential_mode(k: f64, l: f64, x: Vec2) -> (Vec2, f64) {
    let (sx, cx) = (k * PI * x[0]).sin_cos();
    let (sy, cy) = (l * PI * x[1]).sin_cos();
    ([cx * sy, -sx * cy], -(k + l) * PI * cx * cy)
}

/// `sin(k pi x) sin(l pi y)` and its gradient; vanishes on the boundary.
pub fn sine_mode(k: f64, l: f64, x: Vec2) -> (f64, Vec2) {
    let (sx, cx) = (k * PI * x[0]).sin_cos();
    let (sy, cy) = (l * PI * x[1]).sin_cos();
    (sx * sy, [k * PI * cx * sy, l * PI * sx * cy])
}

/// Time weight `cos^2(pi t/(2T))`, vanishing with its derivative at `T`.
fn chi(t: f64, t_final: f64) -> f64 {
    (PI * t / (2.0 * t_final)).cos().powi(2)
}

/// Exact integral of [`chi`] over `[a, b]`.
fn chi_integral(a: f64, b: f64, t_final: f64) -> f64 {
    let s = |t: f64| t / 2.0 + t_final / (2.0 * PI) * (PI * t / t_final).sin();
    s(b) - s(a)
}

/// Fields of one level sampled at the smooth quadrature points.
struct Sample {
    points: Vec<(Vec2, f64, usize)>,
    u: Vec<Vec2>,
    b: Vec<Vec2>,
}

fn sample(spaces: &FeSpaces, s: &DiscreteState) -> Sample {
    let Velocity::Cr(u) = &s.u else { unreachable!("consistency residuals are defined for face velocities") };
    let mut out = Sample { points: Vec::new(), u: Vec::new(), b: Vec::new() };
    for k in 0..spaces.mesh.num_cells() {
        for (x, w) in cell_points(&spaces.mesh, k, Rule::Smooth) {
            out.points.push((x, w, k));
            out.u.push(spaces.eval_cr(u, k, x));
            out.b.push(spaces.eval_edge(&s.b, k, x));
        }
    }
    out
}

/// `e1..e4` of a trajectory stored at every step (Scheme-I).
///
/// Each residual is the largest over [`FAMILY`] of the defect in the weak
/// formulation tested with `chi(t)` times the spatial mode, integrating the
/// piecewise constant in time discrete solution exactly in time. `e4` is the
/// largest `|int B . grad psi|` over all levels, with potentials vanishing on
/// the boundary since the tangential condition leaves `B . n` free there.
pub fn consistency_residuals(scheme: &Scheme, states: &[DiscreteState]) -> Result<[f64; 4]> {
    if scheme.variant != Variant::Scheme1 || scheme.spaces.mesh.kind != MeshKind::Triangulated {
        return Err(Error::Unsupported("consistency residuals are implemented for scheme1".into()));
    }
    if states.len() < 2 {
        return Err(Error::Unsupported("consistency residuals need at least one step".into()));
    }
    let spaces = &scheme.spaces;
    let p = &scheme.params;
    let eos = p.eos();
    let t_final = states.last().unwrap().t;
    let m = FAMILY.len();
    let mut acc = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    let mut e4 = 0.0f64;

    for (level, s) in states.iter().enumerate() {
        let fields = sample(spaces, s);
        // the level holds on (t_{k-1}, t_k]: the time derivative of the test
        // function integrates to a difference of chi, the rest to its integral;
        // the initial level enters through the data term
        let (wd, wi) = if level == 0 {
            (chi(0.0, t_final), 0.0)
        } else {
            let t0 = states[level - 1].t;
            (chi(s.t, t_final) - chi(t0, t_final), chi_integral(t0, s.t, t_final))
        };
        let Velocity::Cr(u_cr) = &s.u else { unreachable!() };
        let grad = spaces.grad_h(u_cr);
        let curl = spaces.curl_h(&s.b);
        let pressure: Vec<f64> = s.rho.0.iter().map(|&r| eos.pressure(r)).collect::<Result<_>>()?;
        for (j, &(kk, ll)) in FAMILY.iter().enumerate() {
            let (mut v1, mut v2, mut v3, mut v4) = (0.0, 0.0, 0.0, 0.0);
            for (q, &(x, w, k)) in fields.points.iter().enumerate() {
                let rho = s.rho.0[k];
                let (u, b, uh) = (fields.u[q], fields.b[q], s.u_hat.0[k]);

                let (phi, dphi) = cosine_mode(kk, ll, x);
                v1 += w * rho * (wd * phi + wi * (u[0] * dphi[0] + u[1] * dphi[1]));

                let (v, g) = bump_mode(kk, ll, x);
                let sg = stress(&grad[k], p.mu, p.lambda);
                let mut flux = 0.0;
                let mut visc = 0.0;
                for i in 0..2 {
                    for jj in 0..2 {
                        flux += rho * uh[i] * u[jj] * g[i][jj];
                        visc += sg[i][jj] * g[i][jj];
                    }
                }
                let f = curl_cross(curl.0[k], b);
                let lor = f[0] * v[0] + f[1] * v[1];
                let div_v = g[0][0] + g[1][1];
                v2 += w
                    * (wd * rho * (uh[0] * v[0] + uh[1] * v[1])
                        + wi * (flux + pressure[k] * div_v - visc + lor));

                let (c, curl_c) = tangential_mode(kk, ll, x);
                v3 += w
                    * (wd * (b[0] * c[0] + b[1] * c[1])
                        + wi * (-p.alpha * curl.0[k] * curl_c + cross(u, b) * curl_c));

                let (_, dpsi) = sine_mode(kk, ll, x);
                v4 += w * (b[0] * dpsi[0] + b[1] * dpsi[1]);
            }
            acc[0][j] += v1;
            acc[1][j] += v2;
            acc[2][j] += v3;
            e4 = e4.max(v4.abs());
        }
    }
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok([max(&acc[0]), max(&acc[1]), max(&acc[2]), e4])
}

// ------------------------------------------------------------------ output

/// One row of the energy time series.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyRow {
    pub report: EnergyReport,
    pub mass: f64,
    pub min_density: f64,
    pub divfree_residual: f64,
}

impl EnergyRow {
    pub fn new(scheme: &Scheme, report: EnergyReport, state: &DiscreteState) -> Self {
        EnergyRow {
            report,
            mass: state.mass(&scheme.spaces),
            min_density: state.min_density(),
            divfree_residual: weak_divfree_residual(&scheme.spaces, &state.b),
        }
    }
}

pub const ENERGY_HEADER: &str =
    "t,kinetic,internal,magnetic,viscous,resistive,D1,D2,D3,D4,D5,residual,mass,min_density,divfree_residual";

pub fn energy_csv(rows: &[EnergyRow]) -> String {
    let mut out = String::from(ENERGY_HEADER);
    out.push('\n');
    for row in rows {
        let r = &row.report;
        let values = [r.t, r.kinetic, r.internal, r.magnetic, r.viscous, r.resistive]
            .into_iter()
            .chain(r.d)
            .chain([r.residual, row.mass, row.min_density, row.divfree_residual]);
        let line: Vec<String> = values.map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Nodal dump of a state: cell averages, cell-mean velocity, and the raw
/// face and edge dofs.
pub fn fields_csv(scheme: &Scheme, state: &DiscreteState) -> String {
    let spaces = &scheme.spaces;
    let mut out = String::new();
    spaces.cell_field_csv("rho", &state.rho, &mut out);
    spaces.cell_vector_csv("u_hat", &state.u_hat, &mut out);
    if let Velocity::Cr(u) = &state.u {
        spaces.cr_field_csv("u", u, &mut out);
    }
    spaces.edge_field_csv("b", &state.b, &mut out);
    out
}

#[cfg(test)]
mod tests;
