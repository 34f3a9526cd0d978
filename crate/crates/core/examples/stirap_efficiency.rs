//! Population transfer against propagation length for two delays and two
//! coupling ratios, next to the t_d/2T estimate.
//!
//! cargo run --release --example stirap_efficiency

use tristate::diagnostics::{efficiency_curve, z_stirap_estimate};
use tristate::{make_sech_pulses, normalize, MediumParams};

fn main() -> tristate::Result<()> {
    let z: Vec<f64> = (0..=12).map(|k| k as f64 * 0.25).collect();
    for t_d in [2.5, 5.0] {
        for q in [0.5, 1.0] {
            let p = normalize(MediumParams::lambda(q)?, make_sech_pulses(10.0, 1.0, t_d)?)?;
            let curve = efficiency_curve(&p, &z)?;
            print!(
                "t_d = {t_d} q = {q} (estimate {:.2}):",
                z_stirap_estimate(t_d, 1.0, q)?
            );
            for pt in curve {
                match pt.efficiency {
                    Some(e) => print!(" {e:.3}"),
                    None => print!(" fold"),
                }
            }
            println!();
        }
    }
    Ok(())
}
