//! Constitutive laws, numerical fluxes and run parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fespace::{CRField, CellVectorField, EdgeField, FeSpaces, Tensor2, Vec2};

/// Which of the two discretizations is being run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Triangles on the unit square: FV density, Crouzeix–Raviart velocity,
    /// Nédélec magnetic field, no-slip and tangential boundary conditions.
    Scheme1,
    /// Periodic squares: FV density and velocity, Nédélec magnetic field.
    Scheme2,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scheme1" => Ok(Variant::Scheme1),
            "scheme2" => Ok(Variant::Scheme2),
            other => Err(Error::Config(format!("unknown variant `{other}` (expected scheme1 or scheme2)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Scheme1 => "scheme1",
            Variant::Scheme2 => "scheme2",
        })
    }
}

/// Physical and numerical constants of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub dim: usize,
    /// Shear viscosity.
    pub mu: f64,
    /// Bulk viscosity.
    pub lambda: f64,
    /// Magnetic resistivity.
    pub alpha: f64,
    /// Pressure constant in `p = a rho^gamma`.
    pub a: f64,
    pub gamma: f64,
    /// Artificial diffusion exponent: the density jump penalty is `h^epsilon`.
    pub epsilon: f64,
    /// `dt = dt_over_h * h`.
    pub dt_over_h: f64,
    pub t_final: f64,
    /// Mesh size.
    pub h: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            dim: 2,
            mu: 0.1,
            lambda: 0.0,
            alpha: 0.1,
            a: 1.0,
            gamma: 2.0,
            epsilon: 1.0,
            dt_over_h: 1.0,
            t_final: 0.1,
            h: 1.0,
        }
    }
}

fn invalid(key: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter { key, message: message.into() }
}

impl Params {
    /// `nu = (d - 2)/d mu + lambda`, the coefficient of the grad-div term.
    pub fn nu(&self) -> f64 {
        (self.dim as f64 - 2.0) / self.dim as f64 * self.mu + self.lambda
    }

    pub fn dt(&self) -> f64 {
        self.dt_over_h * self.h
    }

    /// The artificial diffusion coefficient `h^epsilon`.
    pub fn h_eps(&self) -> f64 {
        self.h.powf(self.epsilon)
    }

    pub fn eos(&self) -> Eos {
        Eos { a: self.a, gamma: self.gamma }
    }

    /// Checks every parameter constraint, including the epsilon window of `variant`.
    pub fn validate(&self, variant: Variant) -> Result<()> {
        let finite = [
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("a", self.a),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("dt_over_h", self.dt_over_h),
            ("T", self.t_final),
            ("h", self.h),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(invalid(key, format!("must be finite, got {v}")));
            }
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(invalid("d", format!("must be 2 or 3, got {}", self.dim)));
        }
        if self.mu <= 0.0 {
            return Err(invalid("mu", format!("must be > 0, got {}", self.mu)));
        }
        if self.lambda < 0.0 {
            return Err(invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if self.alpha <= 0.0 {
            return Err(invalid("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if self.a <= 0.0 {
            return Err(invalid("a", format!("must be > 0, got {}", self.a)));
        }
        if self.gamma <= 1.0 {
            return Err(invalid("gamma", format!("must be > 1, got {}", self.gamma)));
        }
        if !(0.1..=10.0).contains(&self.dt_over_h) {
            return Err(invalid("dt_over_h", format!("must lie in [0.1, 10], got {}", self.dt_over_h)));
        }
        if self.t_final <= 0.0 {
            return Err(invalid("T", format!("must be > 0, got {}", self.t_final)));
        }
        if self.h <= 0.0 {
            return Err(invalid("h", format!("must be > 0, got {}", self.h)));
        }
        validate_epsilon(self.gamma, self.dim, self.epsilon, variant)
    }
}

/// Admissible window of the artificial diffusion exponent.
///
/// `gamma >= 2` needs `epsilon > 0`; below that `epsilon` must lie in
/// `(0, 2 gamma - 1 - d/3)`. Scheme-I further requires `gamma > 4d/(1+3d)`,
/// Scheme-II only `gamma > 1`.
pub fn validate_epsilon(gamma: f64, dim: usize, epsilon: f64, variant: Variant) -> Result<()> {
    let d = dim as f64;
    let lower = match variant {
        Variant::Scheme1 => 4.0 * d / (1.0 + 3.0 * d),
        Variant::Scheme2 => 1.0,
    };
    if gamma <= lower {
        return Err(Error::EpsilonWindow(format!(
            "{variant} needs gamma > {lower:.6} in d = {dim}, got gamma = {gamma}"
        )));
    }
    if gamma >= 2.0 {
        if epsilon > 0.0 {
            return Ok(());
        }
        return Err(Error::EpsilonWindow(format!(
            "epsilon = {epsilon} outside (0, inf) required for gamma = {gamma} >= 2"
        )));
    }
    let upper = 2.0 * gamma - 1.0 - d / 3.0;
    if epsilon > 0.0 && epsilon < upper {
        Ok(())
    } else {
        Err(Error::EpsilonWindow(format!(
            "epsilon = {epsilon} outside (0, {upper:.6}) required for gamma = {gamma}, d = {dim}"
        )))
    }
}

/// Isentropic equation of state `p = a rho^gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eos {
    pub a: f64,
    pub gamma: f64,
}

impl Eos {
    fn check(rho: f64) -> Result<()> {
        if rho < 0.0 || rho.is_nan() {
            Err(Error::NegativeDensity(rho))
        } else {
            Ok(())
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        Ok(self.a * rho.powf(self.gamma))
    }

    /// Pressure potential `H(rho) = a/(gamma-1) rho^gamma`.
    pub fn potential(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        Ok(self.a / (self.gamma - 1.0) * rho.powf(self.gamma))
    }

    pub fn potential_prime(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        Ok(self.a * self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0))
    }

    pub fn potential_second(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        Ok(self.a * self.gamma * rho.powf(self.gamma - 2.0))
    }

    /// `H''` when it does not depend on the density (`gamma = 2`).
    pub fn constant_second(&self) -> Option<f64> {
        (self.gamma == 2.0).then_some(2.0 * self.a)
    }
}

/// Newtonian stress `mu (G + G^T - (2/d) tr G I) + lambda tr G I` in 2D.
pub fn stress(g: &Tensor2, mu: f64, lambda: f64) -> Tensor2 {
    let div = g[0][0] + g[1][1];
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = mu * (g[i][j] + g[j][i]);
        }
        s[i][i] += (lambda - mu) * div;
    }
    s
}

/// `[f]^+ = (f + |f|)/2`.
pub fn pos(f: f64) -> f64 {
    0.5 * (f + f.abs())
}

/// `[f]^- = (f - |f|)/2`.
pub fn neg(f: f64) -> f64 {
    0.5 * (f - f.abs())
}

/// Upwind flux `r_in [u]^+ + r_out [u]^-`.
pub fn upwind(r_in: f64, r_out: f64, u_sigma: f64) -> f64 {
    r_in * pos(u_sigma) + r_out * neg(u_sigma)
}

/// Upwind flux with the artificial diffusion `h^epsilon (r_out - r_in)` subtracted.
pub fn diffusive_flux(r_in: f64, r_out: f64, u_sigma: f64, h: f64, epsilon: f64) -> f64 {
    upwind(r_in, r_out, u_sigma) - h.powf(epsilon) * (r_out - r_in)
}

/// Same as [`diffusive_flux`] with `h^epsilon` precomputed.
pub fn flux_with(r_in: f64, r_out: f64, u_sigma: f64, h_eps: f64) -> f64 {
    upwind(r_in, r_out, u_sigma) - h_eps * (r_out - r_in)
}

/// 2D Lorentz force `omega (-b2, b1)` for a scalar curl `omega`.
pub fn curl_cross(omega: f64, b: Vec2) -> Vec2 {
    [-omega * b[1], omega * b[0]]
}

/// 2D cross product `u1 b2 - u2 b1`.
pub fn cross(u: Vec2, b: Vec2) -> f64 {
    u[0] * b[1] - u[1] * b[0]
}

/// Cell integrals `int_K Curl_h B x B_old`.
pub fn lorentz(spaces: &FeSpaces, b: &EdgeField, b_old: &EdgeField) -> CellVectorField {
    let curl = spaces.curl_h(b);
    CellVectorField(
        (0..spaces.mesh.num_cells())
            .map(|k| {
                let mut s = [0.0; 2];
                for (q, &(_, w)) in spaces.points(k).iter().enumerate() {
                    let f = curl_cross(curl.0[k], spaces.edge_at(b_old, k, q));
                    s[0] += w * f[0];
                    s[1] += w * f[1];
                }
                s
            })
            .collect(),
    )
}

/// `int (Curl_h B x B_old) . phi_sigma e_c` for every Crouzeix–Raviart basis
/// function, indexed by face.
pub fn lorentz_cr(spaces: &FeSpaces, b: &EdgeField, b_old: &EdgeField) -> Vec<Vec2> {
    let curl = spaces.curl_h(b);
    let mut out = vec![[0.0; 2]; spaces.mesh.num_faces()];
    for k in 0..spaces.mesh.num_cells() {
        let faces = &spaces.mesh.cells[k].faces;
        for (q, (&(_, w), basis)) in spaces.points(k).iter().zip(spaces.basis(k)).enumerate() {
            let f = curl_cross(curl.0[k], spaces.edge_at(b_old, k, q));
            for (i, &face) in faces.iter().enumerate() {
                out[face][0] += w * f[0] * basis.cr[i];
                out[face][1] += w * f[1] * basis.cr[i];
            }
        }
    }
    out
}

/// `int Curl_h B . (u x B_old)` for a Crouzeix–Raviart velocity.
pub fn induction_work_cr(spaces: &FeSpaces, u: &CRField, b: &EdgeField, b_old: &EdgeField) -> f64 {
    let curl = spaces.curl_h(b);
    (0..spaces.mesh.num_cells())
        .map(|k| {
            spaces
                .points(k)
                .iter()
                .enumerate()
                .map(|(q, &(_, w))| w * curl.0[k] * cross(spaces.cr_at(u, k, q), spaces.edge_at(b_old, k, q)))
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_tri_mesh;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pressure_examples() {
        let eos = Eos { a: 1.0, gamma: 2.0 };
        assert_eq!(eos.pressure(2.0).unwrap(), 4.0);
        assert_eq!(eos.pressure(0.0).unwrap(), 0.0);
        assert!(eos.pressure(-1.0).is_err());
        let eos = Eos { a: 1.0, gamma: 1.4 };
        assert!((eos.pressure(2.0).unwrap() - 2.639_015_821_545_788_5).abs() < 1e-12);
    }

    #[test]
    fn potential_examples() {
        let eos = Eos { a: 1.0, gamma: 2.0 };
        assert_eq!(eos.potential(2.0).unwrap(), 4.0);
        assert!(eos.potential(-0.1).is_err());
        for gamma in [1.4, 2.0] {
            let eos = Eos { a: 1.0, gamma };
            for rho in [0.5, 1.0, 3.0] {
                let lhs = rho * eos.potential_prime(rho).unwrap() - eos.potential(rho).unwrap();
                assert!((lhs - eos.pressure(rho).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn potential_is_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for gamma in [1.4, 2.0, 3.0] {
            let eos = Eos { a: 1.3, gamma };
            for _ in 0..100 {
                let (rho, r): (f64, f64) = (rng.gen_range(0.0..5.0), rng.gen_range(0.01..5.0));
                let gap = eos.potential(rho).unwrap()
                    - eos.potential(r).unwrap()
                    - eos.potential_prime(r).unwrap() * (rho - r);
                assert!(gap >= -1e-12, "{rho} {r} {gap}");
            }
        }
    }

    #[test]
    fn stress_examples() {
        assert_eq!(stress(&[[0.0; 2]; 2], 1.0, 0.3), [[0.0; 2]; 2]);
        assert_eq!(stress(&[[1.0, 0.0], [0.0, -1.0]], 1.0, 0.0), [[2.0, 0.0], [0.0, -2.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let g = [[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]];
            let s = stress(&g, rng.gen_range(0.01..2.0), rng.gen_range(0.0..2.0));
            assert!((s[0][1] - s[1][0]).abs() < 1e-14);
            let work: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| s[i][j] * g[i][j]).sum();
            assert!(work >= -1e-14);
        }
    }

    #[test]
    fn flux_examples() {
        assert_eq!(upwind(2.0, 1.0, 3.0), 6.0);
        assert_eq!(upwind(2.0, 1.0, -3.0), -3.0);
        assert_eq!(upwind(5.0, -7.0, 0.0), 0.0);
        assert!((diffusive_flux(2.0, 1.0, 3.0, 0.1, 1.0) - 6.1).abs() < 1e-14);
        assert_eq!(diffusive_flux(2.0, 2.0, -0.5, 0.1, 1.0), upwind(2.0, 2.0, -0.5));
    }

    #[test]
    fn epsilon_windows() {
        assert!(validate_epsilon(2.0, 3, 0.5, Variant::Scheme1).is_ok());
        assert!(validate_epsilon(1.4, 3, 0.5, Variant::Scheme1).is_ok());
        assert!(validate_epsilon(1.2, 3, 0.1, Variant::Scheme1).is_err());
        assert!(validate_epsilon(1.2, 3, 0.1, Variant::Scheme2).is_ok());
        assert!(validate_epsilon(1.2, 2, 0.1, Variant::Scheme1).is_ok());
        let err = validate_epsilon(2.0, 2, -1.0, Variant::Scheme1).unwrap_err();
        assert!(err.to_string().contains("(0, inf)"));
        assert!(validate_epsilon(1.4, 2, 1.2, Variant::Scheme2).is_err());
    }

    #[test]
    fn params_validation_names_the_key() {
        let p = Params { mu: 0.0, ..Params::default() };
        assert!(matches!(p.validate(Variant::Scheme1), Err(Error::InvalidParameter { key: "mu", .. })));
        let p = Params { dt_over_h: 20.0, ..Params::default() };
        assert!(matches!(p.validate(Variant::Scheme1), Err(Error::InvalidParameter { key: "dt_over_h", .. })));
        assert!(Params::default().validate(Variant::Scheme2).is_ok());
        assert_eq!(Params::default().nu(), 0.0);
        assert!((Params { dim: 3, ..Params::default() }.nu() - 0.1 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lorentz_vanishes_for_constant_or_zero_fields() {
        let s = FeSpaces::new(build_tri_mesh(3).unwrap()).unwrap();
        let c = s.interpolate_nedelec(|_| [1.0, 2.0]);
        let zero = EdgeField(vec![0.0; c.0.len()]);
        let b = s.interpolate_nedelec(|x| [x[1] * x[1], x[0]]);
        assert!(lorentz(&s, &c, &b).0.iter().all(|v| v[0].abs() < 1e-14 && v[1].abs() < 1e-14));
        assert!(lorentz(&s, &b, &zero).0.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn lorentz_and_induction_work_cancel() {
        let s = FeSpaces::new(build_tri_mesh(4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ne = s.mesh.edges.len();
        for _ in 0..5 {
            let b = EdgeField((0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let b_old = EdgeField((0..ne).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let u = CRField((0..s.mesh.num_faces()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect());
            let force = lorentz_cr(&s, &b, &b_old);
            let a: f64 = force.iter().zip(&u.0).map(|(f, v)| f[0] * v[0] + f[1] * v[1]).sum();
            let w = induction_work_cr(&s, &u, &b, &b_old);
            assert!((a + w).abs() < 1e-12, "{a} {w}");
        }
    }

    proptest! {
        #[test]
        fn split_parts_recombine(f in -1e6f64..1e6) {
            prop_assert_eq!(pos(f) + neg(f), f);
            prop_assert!(pos(f) * neg(f) <= 0.0);
            prop_assert!(pos(f) >= 0.0 && neg(f) <= 0.0);
        }

        #[test]
        fn upwind_is_monotone_for_outflow(u in 0.0f64..10.0, r in 0.0f64..10.0, dr in 0.0f64..5.0, other in -10.0f64..10.0) {
            prop_assert!(upwind(r + dr, other, u) >= upwind(r, other, u));
            prop_assert_eq!(upwind(r, other, u), upwind(r, other + 1.0, u));
        }
    }
}
