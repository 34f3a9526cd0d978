//! Diagnostics over a (q, t_d) grid, written as sweep.csv.
//!
//! cargo run --release --example parameter_sweep -- out_dir

use std::path::PathBuf;

use tristate::cli::{self, Command, RunOptions, Solver, Source};

fn main() -> tristate::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "sweep_out".into()),
    );
    let manifest = cli::run(&RunOptions {
        command: Command::Sweep,
        source: Source::Preset("fig5".into()),
        out: out.clone(),
        solver: Solver::Adiabatic,
        jobs: Some(4),
    })?;
    print!(
        "{}",
        std::fs::read_to_string(out.join("sweep.csv")).expect("sweep.csv")
    );
    println!("took {:.2} s", manifest.wall_clock_seconds);
    Ok(())
}
