//! Run configuration and the drivers behind the `run`, `study` and `check`
//! subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    consistency_residuals, energy_csv, energy_report, fields_csv, relative_energy, renormalized_continuity,
    total_energy, weak_divfree_residual, ConsistencyLevel, ConsistencyReport, EnergyReport, EnergyRow,
};
use crate::error::{Error, Result};
use crate::fespace::FeSpaces;
use crate::mesh::{build_periodic_mesh, build_tri_mesh};
use crate::numerics::{Params, Variant};
use crate::scheme::{Scenario, Scheme};

/// Everything one invocation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub d: usize,
    pub n: usize,
    pub scenario: Scenario,
    pub params: Params,
    pub out: Option<PathBuf>,
    pub stride: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variant: Variant::Scheme1,
            d: 2,
            n: 8,
            scenario: Scenario::SmoothPeriodic,
            params: Params::default(),
            out: None,
            stride: 1,
            seed: 0,
        }
    }
}

pub const KEYS: [&str; 15] = [
    "variant", "d", "n", "scenario", "mu", "lambda", "alpha", "a", "gamma", "epsilon", "dt_over_h", "T", "out",
    "stride", "seed",
];

fn number<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter {
        key,
        message: format!("expected a {}, got `{value}`", std::any::type_name::<T>()),
    })
}

/// Parses `key = value` entries separated by newlines or commas; `#` starts a
/// comment. Unset keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("");
        for entry in line.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected `key = value`, got `{entry}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let key: &'static str = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
            let p = &mut c.params;
            match key {
                "variant" => {
                    c.variant = value.parse().map_err(|e: Error| Error::InvalidParameter { key, message: e.to_string() })?
                }
                "scenario" => {
                    c.scenario = value.parse().map_err(|e: Error| Error::InvalidParameter { key, message: e.to_string() })?
                }
                "d" => c.d = number(key, value)?,
                "n" => c.n = number(key, value)?,
                "mu" => p.mu = number(key, value)?,
                "lambda" => p.lambda = number(key, value)?,
                "alpha" => p.alpha = number(key, value)?,
                "a" => p.a = number(key, value)?,
                "gamma" => p.gamma = number(key, value)?,
                "epsilon" => p.epsilon = number(key, value)?,
                "dt_over_h" => p.dt_over_h = number(key, value)?,
                "T" => p.t_final = number(key, value)?,
                "out" => c.out = Some(PathBuf::from(value)),
                "stride" => c.stride = number(key, value)?,
                "seed" => c.seed = number(key, value)?,
                _ => unreachable!(),
            }
        }
    }
    c.validate()?;
    Ok(c)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let allowed: &[usize] = match self.variant {
            Variant::Scheme1 => &[2],
            Variant::Scheme2 => &[2, 3],
        };
        if !allowed.contains(&self.d) {
            return Err(Error::InvalidParameter {
                key: "d",
                message: format!("{} supports d in {allowed:?}, got {}", self.variant, self.d),
            });
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter { key: "n", message: "must be at least 1".into() });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter { key: "stride", message: "must be at least 1".into() });
        }
        self.scenario
            .data(self.variant)
            .map_err(|e| Error::InvalidParameter { key: "scenario", message: e.to_string() })?;
        Params { dim: self.d, ..self.params }.validate(self.variant)
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.scheme_at(self.n)
    }

    fn scheme_at(&self, n: usize) -> Result<Scheme> {
        let mesh = match self.variant {
            Variant::Scheme1 => build_tri_mesh(n)?,
            Variant::Scheme2 => build_periodic_mesh(n, self.d)?,
        };
        let params = Params { dim: self.d, ..self.params };
        Scheme::new(FeSpaces::new(mesh)?, params, self.variant)
    }
}

/// CSV outputs of a run: the energy series and the stored states by step.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub energy: String,
    pub fields: Vec<(usize, String)>,
    pub rows: Vec<EnergyRow>,
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let scheme = config.scheme()?;
    let initial = scheme.initial_state(&config.scenario.data(config.variant)?)?;
    let mut rows = vec![EnergyRow::new(&scheme, EnergyReport::initial(&scheme, &initial)?, &initial)];
    let traj = scheme.run(initial, config.stride, |prev, next, _| {
        rows.push(EnergyRow::new(&scheme, energy_report(&scheme, prev, next)?, next));
        Ok(())
    })?;
    let fields = traj.steps.iter().zip(&traj.states).map(|(&k, s)| (k, fields_csv(&scheme, s))).collect();
    Ok(RunOutput { energy: energy_csv(&rows), fields, rows })
}

pub fn write_run(output: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("energy.csv"), &output.energy)?;
    for (k, text) in &output.fields {
        fs::write(dir.join(format!("fields_{k}.csv")), text)?;
    }
    Ok(())
}

/// Consistency residuals on every level of `levels`, solved in parallel.
pub fn study(config: &RunConfig, levels: &[usize]) -> Result<ConsistencyReport> {
    if config.variant != Variant::Scheme1 {
        return Err(Error::Unsupported("refinement studies are implemented for scheme1".into()));
    }
    let results: Vec<Result<ConsistencyLevel>> = std::thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| {
                s.spawn(move || {
                    let scheme = config.scheme_at(n)?;
                    let initial = scheme.initial_state(&config.scenario.data(config.variant)?)?;
                    let traj = scheme.run(initial, 1, |_, _, _| Ok(()))?;
                    let e = consistency_residuals(&scheme, &traj.states)?;
                    Ok(ConsistencyLevel { n, h: scheme.spaces.mesh.h, e })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("study worker panicked")).collect()
    });
    ConsistencyReport::new(results.into_iter().collect::<Result<_>>()?)
}

/// Outcome of one invariant of `check`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn line(name: &'static str, value: f64, bound: f64) -> CheckLine {
    CheckLine { name, pass: value <= bound, detail: format!("{value:.3e} <= {bound:.1e}") }
}

/// Runs the configured case and checks the discrete invariants along it.
pub fn check(config: &RunConfig) -> Result<Vec<CheckLine>> {
    let scheme = config.scheme()?;
    let tolerance = scheme.options.tolerance;
    let initial = scheme.initial_state(&config.scenario.data(config.variant)?)?;
    let e0 = total_energy(&scheme, &initial)?;
    let m0 = initial.mass(&scheme.spaces);
    let r_star = m0 / scheme.spaces.mesh.total_measure();
    let relative = |s: &_| relative_energy(&scheme, s, |_| r_star, |_| [0.0; 2], |_| [0.0; 2]);
    let mut worst = [0.0f64; 6];
    let mut min_density = f64::INFINITY;
    let mut last_relative = relative(&initial)?;
    let mut cumulative = 0.0;
    scheme.run(initial.clone(), usize::MAX, |prev, next, report| {
        let r = energy_report(&scheme, prev, next)?;
        cumulative += report.dt * (r.viscous + r.resistive);
        worst[0] = worst[0].max(r.residual / e0);
        worst[1] = worst[1].max((total_energy(&scheme, next)? + cumulative - e0) / e0);
        worst[2] = worst[2].max((next.mass(&scheme.spaces) - m0).abs());
        worst[3] = worst[3].max(weak_divfree_residual(&scheme.spaces, &next.b));
        let rel = relative(next)?;
        worst[4] = worst[4].max(rel - last_relative);
        last_relative = rel;
        min_density = min_density.min(next.min_density());
        Ok(())
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..5 {
        let mut state = initial.clone();
        for v in state.u.dofs_mut().iter_mut() {
            *v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        }
        let rho = scheme.density_update(&state.rho, &state.u, scheme.dt())?;
        let (lhs, rhs) =
            renormalized_continuity(&scheme, &state.rho.0, &rho.0, &state.u, scheme.dt(), |r| (r * r, 2.0 * r));
        worst[5] = worst[5].max((lhs - rhs).abs());
    }

    Ok(vec![
        line("energy identity", worst[0], 1e-8),
        line("energy stability", worst[1], 1e-10),
        line("mass conservation", worst[2], 1e-12),
        CheckLine { name: "positivity", pass: min_density > 0.0, detail: format!("min density {min_density:.6e}") },
        line("weak divergence", worst[3], 10.0 * tolerance),
        line("relative energy monotone", worst[4], 1e-10),
        line("renormalized continuity", worst[5], 1e-10),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config("variant=scheme2, n=8, scenario=constant").unwrap();
        assert_eq!(c.variant, Variant::Scheme2);
        assert_eq!(c.n, 8);
        assert_eq!(c.scenario, Scenario::Constant);
        let p = c.params;
        assert_eq!((p.gamma, p.mu, p.lambda, p.alpha, p.a, p.epsilon, p.t_final), (2.0, 0.1, 0.0, 0.1, 1.0, 1.0, 0.1));
    }

    #[test]
    fn comments_and_lines() {
        let c = parse_config("# case\nvariant = scheme1\n\nn = 4  # small\nT = 0.5\n").unwrap();
        assert_eq!((c.n, c.params.t_final), (4, 0.5));
    }

    #[test]
    fn epsilon_window_on_the_config() {
        let c = parse_config("gamma=1.2, variant=scheme1, d=2, epsilon=0.1").unwrap();
        assert_eq!(c.params.gamma, 1.2);
        let err = parse_config("epsilon=-1").unwrap_err().to_string();
        assert!(err.contains("epsilon") && err.contains("(0, "), "{err}");
    }

    #[test]
    fn errors_name_the_key() {
        let err = parse_config("viscosity = 1").unwrap_err().to_string();
        assert!(err.contains("viscosity"), "{err}");
        let err = parse_config("n = eight").unwrap_err().to_string();
        assert!(err.contains("`n`"), "{err}");
        let err = parse_config("variant = scheme1, scenario = orszag-tang-like").unwrap_err().to_string();
        assert!(err.contains("scenario"), "{err}");
        let err = parse_config("variant = scheme1, d = 3").unwrap_err().to_string();
        assert!(err.contains("`d`"), "{err}");
        assert!(parse_config("n").is_err());
    }

    #[test]
    fn constant_run_has_identical_energy_rows() {
        let c = parse_config("variant=scheme2, n=4, scenario=constant, T=0.5").unwrap();
        let out = run(&c).unwrap();
        let rows: Vec<&str> = out.energy.lines().skip(1).collect();
        assert!(rows.len() > 2);
        let energy = |r: &str| r.split(',').skip(1).take(3).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>();
        for r in &rows {
            for (a, b) in energy(r).iter().zip(energy(rows[0])) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let c = parse_config("variant=scheme1, n=4, T=0.3, stride=2").unwrap();
        let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.fields, b.fields);
        assert_eq!(a.fields.first().unwrap().0, 0);
    }

    #[test]
    fn check_passes_on_a_small_case() {
        let c = parse_config("variant=scheme1, n=4, T=0.3").unwrap();
        for l in check(&c).unwrap() {
            assert!(l.pass, "{l}");
        }
    }
}
