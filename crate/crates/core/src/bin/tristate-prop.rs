use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tristate::cli::{self, Command, RunOptions, Solver, Source};

#[derive(Parser)]
#[command(
    name = "tristate-prop",
    version,
    about = "Pulse-pair propagation in three-level media"
)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML problem definition.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Adiabatic)]
    solver: SolverArg,
    /// Worker threads for sweep.
    #[arg(long)]
    jobs: Option<usize>,
    /// Bundled figure configuration (fig2 .. fig6).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Simulate,
    Diagnose,
    Compare,
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Adiabatic,
    Oracle,
    Both,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("TRISTATE_LOG", "warn"))
        .init();
    let args = Args::parse();
    let source = match (args.config, args.preset) {
        (Some(path), _) => Source::File(path),
        (None, Some(name)) => Source::Preset(name),
        (None, None) => unreachable!("clap requires one of --config, --preset"),
    };
    let opts = RunOptions {
        command: match args.command {
            Cmd::Simulate => Command::Simulate,
            Cmd::Diagnose => Command::Diagnose,
            Cmd::Compare => Command::Compare,
            Cmd::Sweep => Command::Sweep,
        },
        source,
        out: args.out,
        solver: match args.solver {
            SolverArg::Adiabatic => Solver::Adiabatic,
            SolverArg::Oracle => Solver::Oracle,
            SolverArg::Both => Solver::Both,
        },
        jobs: args.jobs,
    };
    match cli::run(&opts) {
        Ok(manifest) => {
            if let Some(v) = manifest.verdict {
                println!("verdict: {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tristate-prop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
