//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed on every run.
//! Set `TRISTATE_ACCEPTANCE_STRICT` to exit non-zero when any criterion fails.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tristate::adiabatic::{self, CharacteristicMap, Launch};
use tristate::diagnostics::{
    breakdown_length, transfer_efficiency, z_pump_measured, z_stirap_estimate,
};
use tristate::oracle::{self, OracleConfig};
use tristate::{make_sech_pulses, normalize, MediumParams, Problem, SystemKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn problem(kind: SystemKind, q: f64, a: f64, t_d: f64) -> Problem {
    normalize(
        MediumParams::new(kind, q).unwrap(),
        make_sech_pulses(a, 1.0, t_d).unwrap(),
    )
    .unwrap()
}

fn lambda(q: f64, t_d: f64) -> Problem {
    problem(SystemKind::Lambda, q, 10.0, t_d)
}

fn steps(end: f64, h: f64) -> Vec<f64> {
    (0..=(end / h).round() as usize)
        .map(|k| k as f64 * h)
        .collect()
}

/// Oracle and adiabatic envelopes agree to 5% L2 for q = 1, a = 10, z <= 3.
fn oracle_equivalence() -> Outcome {
    let p = lambda(1.0, 2.5);
    let start = Instant::now();
    let cfg = OracleConfig::for_problem(&p);
    let history = oracle::propagate_at(&p, &cfg, &steps(3.0, 0.1)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let rows = oracle::validate(&p, &history).unwrap();
    let (worst_z, worst) = rows
        .iter()
        .map(|r| (r.z, r.metrics.l2.omega_p.max(r.metrics.l2.omega_s)))
        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let folds = rows.iter().filter(|r| r.annotation.is_some()).count();
    let last_ok = rows
        .iter()
        .take_while(|r| r.metrics.l2.omega_p.max(r.metrics.l2.omega_s) <= 0.05)
        .last()
        .map(|r| r.z)
        .unwrap_or(0.0);
    outcome(
        worst <= 0.05 && folds == 0 && elapsed < 60.0,
        format!(
            "worst L2 {worst:.4} at z = {worst_z:.2} (bound 0.05, met up to z = {last_ok:.2}); \
             {folds} folded slices; oracle time {elapsed:.1} s"
        ),
    )
}

/// Depletion length near 3 for q = 1 and at least twice that for q = 0.5.
fn pump_depletion() -> Outcome {
    let scan = steps(12.0, 0.05);
    let z1 = z_pump_measured(&lambda(1.0, 2.5), 0.1, &scan).unwrap();
    let z05 = z_pump_measured(&lambda(0.5, 2.5), 0.1, &scan).unwrap();
    let pass = match (z1, z05) {
        (Some(a), Some(b)) => (2.4..=3.6).contains(&a) && b >= 2.0 * a,
        // not depleted anywhere up to the scan limit
        (Some(a), None) => (2.4..=3.6).contains(&a) && 12.0 >= 2.0 * a,
        _ => false,
    };
    outcome(
        pass,
        format!("q = 1: {z1:?}, q = 0.5: {z05:?} (scan limit 12)"),
    )
}

/// No fold for q <= 1; finite, decreasing fold length for q > 1.
fn adiabaticity_criterion() -> Outcome {
    let none: Vec<Option<f64>> = [0.5, 1.0]
        .iter()
        .map(|&q| breakdown_length(&lambda(q, 2.5), 10.0, 64).unwrap().z_break)
        .collect();
    let some: Vec<Option<f64>> = [1.5, 2.0, 3.0]
        .iter()
        .map(|&q| breakdown_length(&lambda(q, 2.5), 10.0, 64).unwrap().z_break)
        .collect();
    let finite: Vec<f64> = some.iter().flatten().copied().collect();
    let pass = none.iter().all(Option::is_none)
        && finite.len() == 3
        && finite.windows(2).all(|w| w[1] < w[0]);
    outcome(
        pass,
        format!("q = 0.5, 1: {none:?}; q = 1.5, 2, 3: {some:?}"),
    )
}

/// Longer delay transfers better at z = 1.6 by at least 0.2; estimates exact.
fn stirap_scaling() -> Outcome {
    let e5 = transfer_efficiency(&lambda(1.0, 5.0), 1.6).unwrap();
    let e25 = transfer_efficiency(&lambda(1.0, 2.5), 1.6).unwrap();
    let est5 = z_stirap_estimate(5.0, 1.0, 1.0).unwrap();
    let est25 = z_stirap_estimate(2.5, 1.0, 1.0).unwrap();
    let gap = e5 - e25;
    outcome(
        gap >= 0.2 && est5 == 2.5 && est25 == 1.25,
        format!(
            "efficiency t_d = 5: {e5:.4}, t_d = 2.5: {e25:.4}, gap {gap:.4} (need 0.2); \
             estimates {est5}, {est25}"
        ),
    )
}

/// Efficiency curves for q = 0.5 and q = 1 agree within 0.05 for z <= 2.
fn stirap_q_independence() -> Outcome {
    let z = steps(2.0, 0.1);
    let mut worst = (0.0, 0.0);
    let mut first_bad = None;
    for t_d in [2.5, 5.0] {
        let (a, b) = (lambda(0.5, t_d), lambda(1.0, t_d));
        for &zk in &z {
            let d =
                (transfer_efficiency(&a, zk).unwrap() - transfer_efficiency(&b, zk).unwrap()).abs();
            if d > worst.1 {
                worst = (zk, d);
            }
            if d > 0.05 && first_bad.is_none() {
                first_bad = Some((t_d, zk));
            }
        }
    }
    outcome(
        worst.1 <= 0.05,
        format!(
            "largest gap {:.4} at z = {:.1}; first z over 0.05: {first_bad:?} (t_d, z)",
            worst.1, worst.0
        ),
    )
}

fn max_rel_density_drift(p: &Problem, z_values: &[f64]) -> f64 {
    let taus = p.grid.taus();
    let d0: Vec<f64> = taus
        .iter()
        .map(|&t| p.conserved_density(p.pulses.pump(t), p.pulses.stokes(t)))
        .collect();
    z_values
        .iter()
        .map(|&z| {
            let f = adiabatic::field_slice(p, z, &taus).unwrap();
            f.omega_p
                .iter()
                .zip(&f.omega_s)
                .zip(&d0)
                .map(|((&op, &os), &d)| (p.conserved_density(op, os) - d).abs() / d.abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Photon-number conservation: adiabatic per tau, oracle integrated, Ξ difference.
fn conservation() -> Outcome {
    let adiabatic_drift = [0.5, 1.0]
        .iter()
        .map(|&q| max_rel_density_drift(&lambda(q, 2.5), &steps(3.0, 0.25)))
        .chain(std::iter::once(max_rel_density_drift(
            &lambda(2.0, 2.5),
            &steps(0.3, 0.05),
        )))
        .fold(0.0, f64::max);

    let p = lambda(1.0, 2.5);
    let h = oracle::propagate_at(&p, &OracleConfig::for_problem(&p), &steps(3.0, 0.5)).unwrap();
    let oracle_drift = h.stats.max_photon_drift;

    // tan²θ0 < e² < q keeps f > 0
    let xi_counter = max_rel_density_drift(&problem(SystemKind::Xi, 10.0, 10.0, 1.0), &[0.05, 0.1]);
    let xi_intuitive =
        max_rel_density_drift(&problem(SystemKind::Xi, 10.0, 10.0, -1.0), &steps(3.0, 0.5));
    let xi = xi_counter.max(xi_intuitive);

    outcome(
        adiabatic_drift < 1e-10 && oracle_drift < 1e-3 && xi < 1e-10,
        format!(
            "adiabatic per-tau {adiabatic_drift:.1e}, oracle integrated {oracle_drift:.1e}, \
             xi difference {xi:.1e}"
        ),
    )
}

fn oracle_final(p: &Problem, dz: f64, dt: f64, z: f64) -> (Vec<f64>, Vec<f64>) {
    let mut cfg = OracleConfig::for_problem(p);
    cfg.dz = dz;
    cfg.dt = dt;
    let h = oracle::propagate(p, &cfg, z).unwrap();
    let s = h.slices.last().unwrap();
    let mag = |v: &[num_complex::Complex64]| v.iter().map(|c| c.norm()).collect::<Vec<f64>>();
    (mag(&s.pump), mag(&s.stokes))
}

/// Observed order from three runs refined by halving. Runs on nested τ
/// grids are compared on the coarsest one.
fn refinement_order(runs: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let n0 = runs[0].0.len();
    let coarse = |r: &(Vec<f64>, Vec<f64>)| -> Vec<f64> {
        let stride = (r.0.len() - 1) / (n0 - 1);
        (0..n0)
            .flat_map(|i| [r.0[i * stride], r.1[i * stride]])
            .collect()
    };
    let c: Vec<Vec<f64>> = runs.iter().map(coarse).collect();
    let diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    (diff(&c[0], &c[1]) / diff(&c[1], &c[2])).log2()
}

/// θ̇ against finite differences, residual at random points, oracle orders.
fn consistency() -> Outcome {
    // theta_dot vs centered differences of theta, away from tails
    let mut worst_fd: f64 = 0.0;
    for (q, z) in [(0.5, 1.0), (1.0, 1.0), (1.0, 2.0), (2.0, 0.2)] {
        let p = lambda(q, 2.5);
        let map = CharacteristicMap::new(&p, z).unwrap();
        let h = 1e-4;
        for k in 0..=14 {
            let tau = -0.5 + 0.25 * k as f64;
            // a stencil straddling the tail launch edge sees a genuine kink
            if [tau - h, tau, tau + h]
                .iter()
                .any(|&t| !matches!(map.launch(t), Launch::Root(_)))
            {
                continue;
            }
            let pt = map.point(tau).unwrap();
            let fd =
                (map.point(tau + h).unwrap().theta - map.point(tau - h).unwrap().theta) / (2.0 * h);
            worst_fd = worst_fd.max((pt.theta_dot - fd).abs() / pt.theta_dot.abs());
        }
    }

    // characteristic residual at random fold-free points
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_g: f64 = 0.0;
    let mut tails = 0;
    for _ in 0..10_000 {
        let q = rng.random_range(0.2..=1.0);
        let t_d = rng.random_range(1.0..=5.0);
        let a = rng.random_range(5.0..=20.0);
        let p = problem(SystemKind::Lambda, q, a, t_d);
        let z = rng.random_range(0.0..=3.0);
        let tau = rng.random_range(p.grid.tau_min..=p.grid.tau_max);
        let map = CharacteristicMap::new(&p, z).unwrap();
        match map.launch(tau) {
            Launch::Root(r) => {
                assert!(!r.fold_flag);
                worst_g = worst_g.max(map.residual(r.xi, tau).abs() / (a * a));
            }
            _ => tails += 1,
        }
    }

    // oracle self-convergence: dz (Heun, order 2) and dt (RK4, order 4)
    let p = lambda(1.0, 2.5);
    let span = p.grid.tau_max - p.grid.tau_min;
    let dt0 = span / 2048.0;
    let dz_runs: Vec<_> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&dz| oracle_final(&p, dz, dt0 / 2.0, 0.5))
        .collect();
    let dt_runs: Vec<_> = [dt0, dt0 / 2.0, dt0 / 4.0]
        .iter()
        .map(|&dt| oracle_final(&p, 0.01, dt, 0.5))
        .collect();
    let dz_order = refinement_order(&dz_runs);
    let dt_order = refinement_order(&dt_runs);

    let pass = worst_fd < 1e-3
        && worst_g < 1e-12
        && (dz_order - 2.0).abs() <= 0.5
        && (dt_order - 4.0).abs() <= 0.5;
    outcome(
        pass,
        format!(
            "theta_dot vs FD {worst_fd:.1e}; max |g|/a^2 {worst_g:.1e} ({tails} tail launches of 10^4); \
             oracle order dz {dz_order:.2}, dt {dt_order:.2}"
        ),
    )
}

/// At z = 0.03 the q = 2 angle deviates at least 3x more than q = 0.5 and q = 1.
fn fig2_regime() -> Outcome {
    // both envelopes above a/10
    let hi = 10f64.acosh();
    let (lo, hi) = (2.5 - hi, hi);
    let taus: Vec<f64> = (0..=400)
        .map(|k| lo + (hi - lo) * k as f64 / 400.0)
        .collect();
    let deviation = |q: f64| {
        let p = lambda(q, 2.5);
        let f = adiabatic::field_slice(&p, 0.03, &taus).unwrap();
        taus.iter()
            .zip(&f.theta)
            .map(|(&t, &th)| (th - p.pulses.mixing_angle(t)).abs())
            .fold(0.0, f64::max)
    };
    let (d05, d1, d2) = (deviation(0.5), deviation(1.0), deviation(2.0));
    let (r05, r1) = (d2 / d05, d2 / d1);
    outcome(
        r05 >= 3.0 && r1 >= 3.0,
        format!("max |theta - theta0|: {d05:.4}, {d1:.4}, {d2:.4}; q = 2 ratios {r05:.2}, {r1:.2}"),
    )
}

/// q = 0.001: the pump barely changes while the Stokes tail grows.
fn weak_pump_regime() -> Outcome {
    let p = lambda(0.001, 2.5);
    let taus = p.grid.taus();
    let f0 = adiabatic::field_slice(&p, 0.0, &taus).unwrap();
    let pump_peak = f0.omega_p.iter().copied().fold(0.0, f64::max);
    let tail_peak = |f: &tristate::model::FieldSlice| {
        taus.iter()
            .zip(&f.omega_s)
            .filter(|(&t, _)| t >= 2.5)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    };
    let tail0 = tail_peak(&f0);
    let mut pump_change: f64 = 0.0;
    let mut tail3 = tail0;
    for z in steps(3.0, 0.25) {
        let f = adiabatic::field_slice(&p, z, &taus).unwrap();
        let d = f
            .omega_p
            .iter()
            .zip(&f0.omega_p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pump_change = pump_change.max(d / pump_peak);
        tail3 = tail_peak(&f);
    }
    let growth = tail3 / tail0 - 1.0;
    outcome(
        pump_change <= 0.02 && growth >= 0.1,
        format!(
            "pump change {:.3}%, Stokes tail peak {tail0:.3} -> {tail3:.3} (+{:.0}%)",
            100.0 * pump_change,
            100.0 * growth
        ),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("pump depletion length", pump_depletion),
        ("adiabaticity criterion", adiabaticity_criterion),
        ("STIRAP length scaling", stirap_scaling),
        ("STIRAP q-independence", stirap_q_independence),
        ("conservation", conservation),
        ("gradient and consistency", consistency),
        ("fig2 regime", fig2_regime),
        ("weak pump regime", weak_pump_regime),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        println!(
            "criterion {} {name}: {} [{:.1} s] {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        // plain `cargo test` reports; strict mode gates
        if std::env::var_os("TRISTATE_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
