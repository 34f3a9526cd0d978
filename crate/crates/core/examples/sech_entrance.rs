//! Entrance pulse pair, its mixing angle and the fluence integral.
//!
//! cargo run --example sech_entrance

use tristate::adiabatic::{entrance_mixing_angle, photon_fluence};
use tristate::make_sech_pulses;

fn main() -> tristate::Result<()> {
    let pulses = make_sech_pulses(10.0, 1.0, 2.5)?;

    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "tau", "omega_p", "omega_s", "theta0"
    );
    for k in 0..=12 {
        let tau = -4.0 + k as f64 * (2.5 + 8.0) / 12.0;
        println!(
            "{tau:8.3} {:12.6} {:12.6} {:10.6}",
            pulses.pump(tau),
            pulses.stokes(tau),
            entrance_mixing_angle(&pulses, tau)
        );
    }

    let (lead, trail) = pulses.limiting_angles();
    println!("limiting angles: {lead:.6} (leading), {trail:.6} (trailing)");

    // both pulses together carry 2a² T each
    let (lo, hi) = pulses.support();
    let total = photon_fluence(&pulses, 1.0, 1.0, lo, hi)?;
    println!(
        "total fluence for q_p = q_s = 1: {total:.6} (4 a^2 = {})",
        4.0 * 100.0
    );
    Ok(())
}
