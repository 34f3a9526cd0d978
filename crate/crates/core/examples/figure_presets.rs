//! Regenerate the data behind every bundled preset: fields.csv from
//! `simulate` and diagnostics.json from `diagnose`, one directory each.
//!
//! cargo run --release --example figure_presets -- out_dir

use std::path::PathBuf;

use tristate::cli::{self, Command, RunOptions, Solver, Source};
use tristate::config::PRESETS;

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    for (name, _) in PRESETS {
        for command in [Command::Simulate, Command::Diagnose] {
            let opts = RunOptions {
                command,
                source: Source::Preset(name.to_string()),
                out: root.join(name),
                solver: Solver::Adiabatic,
                jobs: None,
            };
            match cli::run(&opts) {
                Ok(m) => println!(
                    "{name} {command}: {:?} ({:.2} s)",
                    m.outputs, m.wall_clock_seconds
                ),
                // fig2 runs q = 2 past its fold; the fold is the result
                Err(e) => println!("{name} {command}: {e}"),
            }
        }
    }
}
