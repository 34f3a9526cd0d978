//! Adiabatic solution against the oracle and against its own characteristics.

use tristate::adiabatic::{self, CharacteristicMap};
use tristate::diagnostics::breakdown_length;
use tristate::oracle::{self, FieldHistory, OracleConfig};
use tristate::{make_sech_pulses, normalize, MediumParams, Problem, SystemKind};

fn problem(kind: SystemKind, q: f64, a: f64, t_d: f64) -> Problem {
    normalize(
        MediumParams::new(kind, q).unwrap(),
        make_sech_pulses(a, 1.0, t_d).unwrap(),
    )
    .unwrap()
}

fn lambda(q: f64, a: f64) -> Problem {
    problem(SystemKind::Lambda, q, a, 2.5)
}

fn run(p: &Problem, z: &[f64]) -> FieldHistory {
    oracle::propagate_at(p, &OracleConfig::for_problem(p), z).unwrap()
}

fn rel_l2(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = y.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// `max_τ |b2|²` from the oracle and `max_τ (θ̇/W)²` from the characteristics.
fn upper_level_peaks(p: &Problem, h: &FieldHistory, z: f64) -> (f64, f64) {
    let s = h.nearest(z).unwrap();
    let oracle = s
        .amplitudes
        .iter()
        .map(|b| b[1].norm_sqr())
        .fold(0.0, f64::max);
    let map = CharacteristicMap::new(p, s.z).unwrap();
    let adiabatic = h
        .tau
        .iter()
        .map(|&t| map.point(t).unwrap())
        .filter(|pt| pt.w_total > 1e-3 * p.peak())
        .map(|pt| (pt.theta_dot / pt.w_total).powi(2))
        .fold(0.0, f64::max);
    (oracle, adiabatic)
}

#[test]
fn launch_time_is_constant_along_group_velocity() {
    let p = lambda(0.5, 10.0);
    let xi0 = 1.0;
    let (z_end, n) = (1.0, 50);
    let dz = z_end / n as f64;
    let v = |z: f64, tau: f64| adiabatic::group_velocity(&p, z, tau).unwrap();
    let mut tau = xi0;
    for k in 0..n {
        let z = k as f64 * dz;
        let k1 = v(z, tau);
        let k2 = v(z + dz / 2.0, tau + dz / 2.0 * k1);
        let k3 = v(z + dz / 2.0, tau + dz / 2.0 * k2);
        let k4 = v(z + dz, tau + dz * k3);
        tau += dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    assert!(tau > xi0 + 0.1, "characteristic should be delayed: {tau}");
    let xi = adiabatic::solve_characteristic(&p, z_end, tau).unwrap().xi;
    assert!((xi - xi0).abs() < 1e-6, "{xi} vs {xi0}");
}

#[test]
fn upper_level_population_matches_first_order_estimate() {
    for (q, z) in [(1.0, 0.0), (1.0, 1.0), (0.5, 1.0)] {
        let p = lambda(q, 10.0);
        let h = run(&p, &[z]);
        let (oracle, adiabatic) = upper_level_peaks(&p, &h, z);
        let ratio = oracle / adiabatic;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "q = {q}, z = {z}: ratio {ratio}"
        );
    }
}

#[test]
fn mixing_angle_matches_oracle_for_large_area() {
    let p = lambda(1.0, 20.0);
    let rows = oracle::validate(&p, &run(&p, &[3.0])).unwrap();
    let last = rows.last().unwrap();
    assert!(last.annotation.is_none());
    assert!(last.metrics.l2.theta < 0.05, "{}", last.metrics.l2.theta);
}

#[test]
fn total_rabi_matches_oracle_for_weak_pump_coupling() {
    let p = lambda(0.5, 10.0);
    let h = run(&p, &[3.0]);
    let s = h.slices.last().unwrap();
    let w_oracle: Vec<f64> = s
        .pump
        .iter()
        .zip(&s.stokes)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .collect();
    let w = adiabatic::field_slice(&p, s.z, &h.tau).unwrap().w_total;
    let err = rel_l2(&w_oracle, &w);
    assert!(err < 0.05, "{err}");
}

#[test]
fn angle_steepens_towards_breakdown() {
    let p = lambda(2.0, 10.0);
    let zb = breakdown_length(&p, 10.0, 64).unwrap().z_break.unwrap();
    let taus = p.grid.taus();
    let steepest = |z: f64| {
        let map = CharacteristicMap::new(&p, z).unwrap();
        taus.iter()
            .map(|&t| map.point(t).unwrap().theta_dot.abs())
            .fold(0.0, f64::max)
    };
    let (s0, s1) = (steepest(0.0), steepest(0.99 * zb));
    assert!(s1 > 10.0 * s0, "{s0} -> {s1}");
    assert!(!CharacteristicMap::new(&p, 0.99 * zb).unwrap().has_fold());
    assert!(CharacteristicMap::new(&p, 1.01 * zb).unwrap().has_fold());
}

#[test]
fn fig2_length_is_fold_free() {
    let p = lambda(2.0, 10.0);
    assert!(!CharacteristicMap::new(&p, 0.03).unwrap().has_fold());
}

#[test]
fn decay_removes_photons() {
    let medium = MediumParams::lambda(1.0).unwrap().with_decay(0.5);
    let p = normalize(medium, make_sech_pulses(10.0, 1.0, 2.5).unwrap()).unwrap();
    let z = [0.0, 0.25, 0.5, 1.0];
    let fields = run(&p, &z).field_state();
    let totals: Vec<f64> = fields
        .slices
        .iter()
        .map(|s| {
            let d: Vec<f64> = s
                .omega_p
                .iter()
                .zip(&s.omega_s)
                .map(|(&a, &b)| p.conserved_density(a, b))
                .collect();
            fields
                .tau
                .windows(2)
                .zip(d.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
                .sum()
        })
        .collect();
    let losses: Vec<f64> = totals.iter().map(|t| 1.0 - t / totals[0]).collect();
    assert!(losses.windows(2).all(|w| w[1] > w[0]), "{losses:?}");
    // lossless runs drift by ~1e-8
    assert!(losses[3] > 1e-5, "{losses:?}");
}

#[test]
fn pump_depletes_by_three() {
    let p = lambda(1.0, 10.0);
    let h = run(&p, &[3.0]);
    let peak = h
        .slices
        .last()
        .unwrap()
        .pump
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    assert!(peak < 0.15 * p.peak(), "{}", peak / p.peak());
}

#[test]
fn error_shrinks_with_pulse_area() {
    let z = [0.5, 1.0];
    let worst = |a: f64| {
        let p = lambda(1.0, a);
        oracle::validate(&p, &run(&p, &z))
            .unwrap()
            .iter()
            .map(|r| r.metrics.l2.omega_p.max(r.metrics.l2.omega_s))
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&a| worst(a)).collect();
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
}

#[test]
fn xi_folds_only_in_counter_intuitive_order() {
    let counter = breakdown_length(&problem(SystemKind::Xi, 10.0, 10.0, 1.0), 10.0, 64).unwrap();
    let intuitive = breakdown_length(&problem(SystemKind::Xi, 10.0, 10.0, -1.0), 10.0, 64).unwrap();
    let zb = counter.z_break.expect("counter-intuitive order folds");
    assert!((zb - 0.1547).abs() < 1e-3, "{zb}");
    assert_eq!(intuitive.z_break, None);
}
