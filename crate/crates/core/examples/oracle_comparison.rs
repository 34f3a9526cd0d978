//! Direct Maxwell–Schrödinger integration against the adiabatic solution.
//!
//! The envelope error shrinks as the pulse area grows.
//!
//! cargo run --release --example oracle_comparison [a]

use tristate::oracle::{self, OracleConfig};
use tristate::{make_sech_pulses, normalize, MediumParams};

fn main() -> tristate::Result<()> {
    let a: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10.0);
    let problem = normalize(MediumParams::lambda(1.0)?, make_sech_pulses(a, 1.0, 2.5)?)?;
    let config = OracleConfig::for_problem(&problem);
    let z: Vec<f64> = (0..=6).map(|k| k as f64 * 0.5).collect();

    let start = std::time::Instant::now();
    let history = oracle::propagate_at(&problem, &config, &z)?;
    println!(
        "a = {a}: dz = {:.2e}, dt = {:.2e}, {} steps in {:.2?}",
        config.dz,
        config.dt,
        history.stats.steps,
        start.elapsed()
    );
    println!(
        "norm drift {:.1e}, photon drift {:.1e}",
        history.stats.max_norm_drift, history.stats.max_photon_drift
    );

    for row in oracle::validate(&problem, &history)? {
        println!(
            "z = {:4.2}  L2 pump {:.4}  L2 stokes {:.4}  L2 theta {:.4}{}",
            row.z,
            row.metrics.l2.omega_p,
            row.metrics.l2.omega_s,
            row.metrics.l2.theta,
            row.annotation
                .map(|s| format!("  [{s}]"))
                .unwrap_or_default()
        );
    }
    Ok(())
}
