//! Pump depletion and Stokes build-up in the adiabatic solution.
//!
//! cargo run --release --example adiabatic_propagation [q]

use tristate::adiabatic;
use tristate::{make_sech_pulses, normalize, MediumParams};

fn main() -> tristate::Result<()> {
    let q: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let problem = normalize(MediumParams::lambda(q)?, make_sech_pulses(10.0, 1.0, 2.5)?)?
        .with_z_values(vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])?;

    let sol = adiabatic::solve(&problem)?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let a = problem.peak();
    println!("q = {q}");
    println!(
        "{:>5} {:>10} {:>10} {:>10}",
        "z", "pump/a", "stokes/a", "max|b2|"
    );
    for (f, b) in sol.fields.slices.iter().zip(&sol.amplitudes.slices) {
        let b2: Vec<f64> = b.b2.iter().map(|c| c.norm()).collect();
        println!(
            "{:5.2} {:10.5} {:10.5} {:10.5}",
            f.z,
            max(&f.omega_p) / a,
            max(&f.omega_s) / a,
            max(&b2)
        );
    }
    Ok(())
}
