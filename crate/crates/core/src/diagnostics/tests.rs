use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{build_periodic_mesh, build_tri_mesh};
use crate::numerics::Params;
use crate::scheme::Scenario;

fn scheme(variant: Variant, n: usize, params: Params) -> Scheme {
    let mesh = match variant {
        Variant::Scheme1 => build_tri_mesh(n).unwrap(),
        Variant::Scheme2 => build_periodic_mesh(n, 2).unwrap(),
    };
    Scheme::new(FeSpaces::new(mesh).unwrap(), params, variant).unwrap()
}

fn start(s: &Scheme, scenario: Scenario) -> DiscreteState {
    s.initial_state(&scenario.data(s.variant).unwrap()).unwrap()
}

#[test]
fn total_energy_of_constant_states() {
    let s2 = scheme(Variant::Scheme2, 4, Params::default());
    assert!((total_energy(&s2, &start(&s2, Scenario::Constant)).unwrap() - 1.5).abs() < 1e-14);
    let s1 = scheme(Variant::Scheme1, 4, Params::default());
    assert!((total_energy(&s1, &start(&s1, Scenario::Constant)).unwrap() - 1.0).abs() < 1e-14);
    assert!(total_energy(&s1, &start(&s1, Scenario::SmoothPeriodic)).unwrap() >= 0.0);
}

#[test]
fn constant_step_has_no_dissipation() {
    for variant in [Variant::Scheme1, Variant::Scheme2] {
        let s = scheme(variant, 4, Params::default());
        let prev = start(&s, Scenario::Constant);
        let (next, _) = s.step(&prev, s.dt()).unwrap();
        let r = energy_report(&s, &prev, &next).unwrap();
        for v in [r.viscous, r.resistive, r.residual, r.slack].iter().chain(&r.d) {
            assert!(v.abs() < 1e-12, "{variant}: {r:?}");
        }
    }
}

#[test]
fn energy_identity_holds_for_one_step() {
    for (variant, gamma) in [(Variant::Scheme1, 2.0), (Variant::Scheme2, 2.0), (Variant::Scheme1, 1.4), (Variant::Scheme2, 1.4)] {
        let s = scheme(variant, 8, Params { gamma, ..Params::default() });
        let prev = start(&s, Scenario::SmoothPeriodic);
        let e0 = total_energy(&s, &prev).unwrap();
        let (next, _) = s.step(&prev, s.dt()).unwrap();
        let r = energy_report(&s, &prev, &next).unwrap();
        assert!(r.residual <= 1e-8 * e0, "{variant} gamma {gamma}: {r:?}");
        assert!(r.slack >= -1e-10, "{variant} gamma {gamma}: {r:?}");
        assert!(r.min_face_term >= 0.0);
        assert!(r.d.iter().all(|d| *d >= 0.0));
        assert!(r.viscous > 0.0 && r.resistive > 0.0);

        let fine = energy_report_with(&s, &prev, &next, Rule::Fine).unwrap();
        for (a, b) in [(r.magnetic, fine.magnetic), (r.d[1], fine.d[1]), (r.residual, fine.residual)] {
            assert!((a - b).abs() <= 1e-12 * e0.max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn gamma_two_density_remainders_match_the_quadratic_form() {
    let s = scheme(Variant::Scheme1, 6, Params::default());
    let prev = start(&s, Scenario::SmoothPeriodic);
    let dt = s.dt();
    let (next, _) = s.step(&prev, dt).unwrap();
    let r = energy_report(&s, &prev, &next).unwrap();
    let h2 = 2.0 * s.params.a;
    let mesh = &s.spaces.mesh;
    let d3: f64 = mesh
        .cells
        .iter()
        .enumerate()
        .map(|(k, c)| 0.5 * dt * c.measure * h2 * ((next.rho.0[k] - prev.rho.0[k]) / dt).powi(2))
        .sum();
    let us = s.face_velocities(&next.u);
    let d5: f64 = mesh
        .interior_faces()
        .map(|(f, face)| {
            let jump = next.rho.0[face.outside.unwrap()] - next.rho.0[face.inside];
            face.measure * h2 * jump * jump * (s.params.h_eps() + 0.5 * us[f].abs())
        })
        .sum();
    assert!((r.d[2] - d3).abs() < 1e-12 * d3.max(1e-3));
    assert!((r.d[4] - d5).abs() < 1e-12 * d5.max(1e-3));
}

#[test]
fn relative_energy_examples() {
    let s = scheme(Variant::Scheme1, 4, Params::default());
    let state = start(&s, Scenario::Constant);
    let own = relative_energy(&s, &state, |_| 1.0, |_| [0.0; 2], |_| [0.0; 2]).unwrap();
    assert!(own.abs() < 1e-15);
    let two = relative_energy(&s, &state, |_| 2.0, |_| [0.0; 2], |_| [0.0; 2]).unwrap();
    assert!((two - 1.0).abs() < 1e-13);
    assert!(matches!(
        relative_energy(&s, &state, |_| 0.0, |_| [0.0; 2], |_| [0.0; 2]),
        Err(Error::NonPositiveReference(_))
    ));
}

#[test]
fn relative_energy_is_nonnegative_for_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for gamma in [2.0, 1.4] {
        let s = scheme(Variant::Scheme2, 3, Params { gamma, ..Params::default() });
        for _ in 0..50 {
            let mut state = start(&s, Scenario::SmoothPeriodic);
            for r in state.rho.0.iter_mut() {
                *r = rng.gen_range(0.05..3.0);
            }
            for b in state.b.0.iter_mut() {
                *b = rng.gen_range(-2.0..2.0);
            }
            let (r0, a, c) = (rng.gen_range(0.1..3.0), rng.gen_range(0.0..1.0), rng.gen_range(-1.0..1.0));
            let e = relative_energy(
                &s,
                &state,
                move |x| r0 + a * (6.0 * x[0]).sin().abs(),
                move |x| [c * x[1], -c],
                move |x| [c, x[0]],
            )
            .unwrap();
            assert!(e >= 0.0, "{e}");
        }
    }
}

#[test]
fn eoc_examples() {
    assert!((eoc(&[0.4, 0.2, 0.1], &[0.4, 0.2, 0.1]).unwrap() - 1.0).abs() < 1e-12);
    assert!((eoc(&[0.4, 0.1, 0.025], &[0.4, 0.2, 0.1]).unwrap() - 2.0).abs() < 1e-12);
    assert!(eoc(&[0.3, 0.3, 0.3], &[0.4, 0.2, 0.1]).unwrap().abs() < 1e-12);
    let err = eoc(&[0.1, 0.0], &[0.2, 0.1]).unwrap_err();
    assert!(err.to_string().contains("exact"));
    assert!(eoc(&[0.1], &[0.2]).is_err());
}

#[test]
fn weak_divergence_of_constant_and_gradient_fields() {
    let s = scheme(Variant::Scheme2, 4, Params::default());
    let b = s.spaces.interpolate_nedelec(|_| [0.7, -0.3]);
    assert!(weak_divfree_residual(&s.spaces, &b) < 1e-15);

    let curl_part = s.spaces.interpolate_nedelec(|x| {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        [sx * cy, -cx * sy]
    });
    assert!(weak_divfree_residual(&s.spaces, &curl_part) < 1e-13);
    let psi = s.spaces.interpolate_w(|x| (2.0 * PI * x[0]).cos() + (2.0 * PI * x[1]).sin());
    let grad = s.spaces.potential_gradient(&psi);
    let mixed = EdgeField(grad.0.iter().zip(&curl_part.0).map(|(a, b)| a + b).collect());
    let r_grad = weak_divfree_residual(&s.spaces, &grad);
    let r_mixed = weak_divfree_residual(&s.spaces, &mixed);
    assert!(r_grad > 1e-2);
    assert!((r_grad - r_mixed).abs() < 1e-13, "{r_grad} vs {r_mixed}");
    // the residual is the gradient energy tested against each basis potential
    let energy = s.spaces.edge_inner(&grad, &grad);
    let weak: f64 = s.spaces.weak_divergence(&grad).iter().zip(&psi.0).map(|(w, p)| w * p).sum();
    assert!((weak - energy).abs() < 1e-12 * energy);
}

#[test]
fn renormalized_identity_for_random_velocities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for variant in [Variant::Scheme1, Variant::Scheme2] {
        let s = scheme(variant, 4, Params::default());
        let mut state = start(&s, Scenario::SmoothPeriodic);
        for v in state.u.dofs_mut().iter_mut() {
            *v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        }
        let u = state.u.clone();
        let dt = s.dt();
        let rho = s.density_update(&state.rho, &u, dt).unwrap();
        let convex: [fn(f64) -> (f64, f64); 2] = [|r| (r * r, 2.0 * r), |r| (r * r.ln(), r.ln() + 1.0)];
        for b in convex {
            let (lhs, rhs) = renormalized_continuity(&s, &state.rho.0, &rho.0, &u, dt, b);
            assert!((lhs - rhs).abs() < 1e-10, "{variant}: {lhs} vs {rhs}");
            assert!(rhs <= 0.0);
        }
    }
}

#[test]
fn consistency_of_the_constant_trajectory() {
    let s = scheme(Variant::Scheme1, 4, Params { t_final: 0.5, ..Params::default() });
    let traj = s.run(start(&s, Scenario::Constant), 1, |_, _, _| Ok(())).unwrap();
    let e = consistency_residuals(&s, &traj.states).unwrap();
    assert!(e[0] < 1e-13, "{e:?}");
    assert!(e[2] < 1e-13 && e[3] < 1e-13, "{e:?}");
    // pressure against a compactly supported field, up to quadrature
    assert!(e[1] < 1e-3, "{e:?}");
    let s2 = scheme(Variant::Scheme2, 4, Params::default());
    assert!(consistency_residuals(&s2, &vec![start(&s2, Scenario::Constant); 2]).is_err());
}

#[test]
fn consistency_report_needs_three_levels() {
    let level = |n: usize| ConsistencyLevel { n, h: 1.0 / n as f64, e: [1.0 / n as f64; 4] };
    assert!(ConsistencyReport::new(vec![level(4), level(8)]).is_err());
    let r = ConsistencyReport::new(vec![level(4), level(8), level(16)]).unwrap();
    assert!(r.eoc.iter().all(|o| (o - 1.0).abs() < 1e-12));
    let csv = r.to_csv();
    assert!(csv.starts_with("h,e1,e2,e3,e4,eoc1,eoc2,eoc3,eoc4\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn energy_csv_has_the_documented_columns() {
    let s = scheme(Variant::Scheme2, 3, Params::default());
    let state = start(&s, Scenario::Constant);
    let row = EnergyRow::new(&s, EnergyReport::initial(&s, &state).unwrap(), &state);
    let csv = energy_csv(&[row]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 15);
    assert_eq!(lines.next().unwrap().split(',').count(), 15);
}

