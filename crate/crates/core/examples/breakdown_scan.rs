//! Where adiabatic following breaks down.
//!
//! For a Λ medium with counter-intuitive ordering the launch map only folds
//! when the pump couples more strongly than the Stokes field.
//!
//! cargo run --release --example breakdown_scan

use tristate::diagnostics::breakdown_length;
use tristate::{make_sech_pulses, normalize, MediumParams, SystemKind};

fn main() -> tristate::Result<()> {
    for q in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let p = normalize(MediumParams::lambda(q)?, make_sech_pulses(10.0, 1.0, 2.5)?)?;
        let b = breakdown_length(&p, 10.0, 64)?;
        match b.z_break {
            Some(z) => println!("lambda q = {q:<4} z_break = {z:.5}"),
            None => println!("lambda q = {q:<4} no fold up to z = 10"),
        }
    }

    // Ξ: compare both pulse orders. With q = 10 and |t_d| = 1 the
    // coupling factor stays positive (tan²θ0 < q everywhere).
    for (label, delay) in [("counter-intuitive", 1.0), ("intuitive", -1.0)] {
        let p = normalize(
            MediumParams::new(SystemKind::Xi, 10.0)?,
            make_sech_pulses(10.0, 1.0, delay)?,
        )?;
        let b = breakdown_length(&p, 10.0, 64)?;
        println!("xi q = 10 {label:<18} z_break = {:?}", b.z_break);
    }
    Ok(())
}
