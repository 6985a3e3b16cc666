//! Named initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fespace::Vec2;
use crate::numerics::Variant;

type Scalar = Box<dyn Fn(Vec2) -> f64 + Send + Sync>;
type Vector = Box<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// Smooth initial density, velocity and magnetic field.
pub struct InitialData {
    pub rho: Scalar,
    pub u: Vector,
    pub b: Vector,
}

impl InitialData {
    pub fn new(
        rho: impl Fn(Vec2) -> f64 + Send + Sync + 'static,
        u: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
        b: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        InitialData { rho: Box::new(rho), u: Box::new(u), b: Box::new(b) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Constant,
    SmoothPeriodic,
    PerturbedConstant,
    OrszagTangLike,
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Scenario::Constant),
            "smooth-periodic" => Ok(Scenario::SmoothPeriodic),
            "perturbed-constant" => Ok(Scenario::PerturbedConstant),
            "orszag-tang-like" => Ok(Scenario::OrszagTangLike),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected constant, smooth-periodic, perturbed-constant or orszag-tang-like)"
            ))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Constant => "constant",
            Scenario::SmoothPeriodic => "smooth-periodic",
            Scenario::PerturbedConstant => "perturbed-constant",
            Scenario::OrszagTangLike => "orszag-tang-like",
        })
    }
}

fn s2(x: f64) -> f64 {
    (2.0 * PI * x).sin()
}

/// `sin^2(pi x)`, vanishing with its derivative at 0 and 1.
fn bump(x: f64) -> f64 {
    (PI * x).sin().powi(2)
}

impl Scenario {
    /// Initial data for `variant`.
    ///
    /// On the torus the smooth scenario is `(1 + sin(2 pi x)/2, (sin 2 pi y, 0), Curl psi)`
    /// with `psi = sin(2 pi x) sin(2 pi y)/(2 pi)`. On the unit square with no-slip and
    /// tangential boundary conditions the velocity and the magnetic field are
    /// replaced by fields vanishing on the boundary: `u = (sin^2(pi x) sin(2 pi y), 0)`
    /// and `B = Curl(sin^2(pi x) sin^2(pi y))/pi`. The constant state on the square
    /// carries `B = 0`, the only constant field with vanishing tangential trace.
    pub fn data(self, variant: Variant) -> Result<InitialData> {
        let periodic = variant == Variant::Scheme2;
        Ok(match (self, periodic) {
            (Scenario::Constant, true) => InitialData::new(|_| 1.0, |_| [0.0, 0.0], |_| [1.0, 0.0]),
            (Scenario::Constant, false) => InitialData::new(|_| 1.0, |_| [0.0, 0.0], |_| [0.0, 0.0]),
            (Scenario::SmoothPeriodic, true) => {
                InitialData::new(|x| 1.0 + 0.5 * s2(x[0]), |x| [s2(x[1]), 0.0], periodic_field)
            }
            (Scenario::SmoothPeriodic, false) => {
                InitialData::new(|x| 1.0 + 0.5 * s2(x[0]), bounded_velocity, bounded_field)
            }
            (Scenario::PerturbedConstant, true) => InitialData::new(
                |x| 1.0 + 0.05 * s2(x[0]),
                |x| [0.1 * s2(x[1]), 0.0],
                |x| {
                    let b = periodic_field(x);
                    [1.0 + 0.1 * b[0], 0.1 * b[1]]
                },
            ),
            (Scenario::PerturbedConstant, false) => InitialData::new(
                |x| 1.0 + 0.05 * s2(x[0]),
                |x| {
                    let u = bounded_velocity(x);
                    [0.1 * u[0], 0.1 * u[1]]
                },
                |x| {
                    let b = bounded_field(x);
                    [0.1 * b[0], 0.1 * b[1]]
                },
            ),
            (Scenario::OrszagTangLike, true) => InitialData::new(
                |_| 1.0,
                |x| [-s2(x[1]), s2(x[0])],
                |x| [-s2(x[1]) / 2.0, (4.0 * PI * x[0]).sin() / 2.0],
            ),
            (Scenario::OrszagTangLike, false) => {
                return Err(Error::Unsupported(
                    "orszag-tang-like needs the periodic domain (variant scheme2)".into(),
                ))
            }
        })
    }
}

/// `Curl(sin(2 pi x) sin(2 pi y)/(2 pi))`.
fn periodic_field(x: Vec2) -> Vec2 {
    let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
    let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
    [sx * cy, -cx * sy]
}

fn bounded_velocity(x: Vec2) -> Vec2 {
    [bump(x[0]) * s2(x[1]), 0.0]
}

/// `Curl(sin^2(pi x) sin^2(pi y))/pi`.
fn bounded_field(x: Vec2) -> Vec2 {
    [bump(x[0]) * s2(x[1]), -s2(x[0]) * bump(x[1])]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [Scenario::Constant, Scenario::SmoothPeriodic, Scenario::PerturbedConstant, Scenario::OrszagTangLike] {
            assert_eq!(s.to_string().parse::<Scenario>().unwrap(), s);
        }
        assert!("vortex".parse::<Scenario>().is_err());
    }

    #[test]
    fn bounded_fields_vanish_on_the_boundary() {
        let d = Scenario::SmoothPeriodic.data(Variant::Scheme1).unwrap();
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            for x in [[0.0, t], [1.0, t], [t, 0.0], [t, 1.0]] {
                let (u, b) = ((d.u)(x), (d.b)(x));
                assert!(u[0].abs() < 1e-15 && u[1].abs() < 1e-15);
                assert!(b[0].abs() < 1e-15 && b[1].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn orszag_tang_is_periodic_only() {
        assert!(Scenario::OrszagTangLike.data(Variant::Scheme1).is_err());
        assert!(Scenario::OrszagTangLike.data(Variant::Scheme2).is_ok());
    }

    #[test]
    fn fields_are_divergence_free() {
        let d = 1e-5;
        for variant in [Variant::Scheme1, Variant::Scheme2] {
            let data = Scenario::SmoothPeriodic.data(variant).unwrap();
            for x in [[0.3, 0.7], [0.11, 0.52]] {
                let div = ((data.b)([x[0] + d, x[1]])[0] - (data.b)([x[0] - d, x[1]])[0]
                    + (data.b)([x[0], x[1] + d])[1]
                    - (data.b)([x[0], x[1] - d])[1])
                    / (2.0 * d);
                assert!(div.abs() < 1e-8);
            }
        }
    }
}
