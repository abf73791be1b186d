use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use worldtube_cli::run::{effective_config, execute, CliError, Command, Overrides};

#[derive(Parser)]
#[command(name = "worldtube", version, about = "Shell versus point-charge potentials of an accelerated charge")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the invariant suite; exit 1 if any check fails.
    Verify(Args),
    /// Pair shell and point potentials with each test function at the configured radius.
    Compare(Args),
    /// Fit the log–log slope of the difference over the configured radii.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "WORLDTUBE_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let overrides = Overrides { out: args.out, seed: args.seed };
    let result = effective_config(&args.config, &overrides).map_err(CliError::from).and_then(|c| execute(command, c));
    match result {
        Ok(report) => {
            let dir = report.config.output.dir.as_ref().expect("resolved output directory");
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            eprintln!(
                "{}: {} in {:.1} s, results in {}",
                report.command,
                if report.passed { "passed" } else { "FAILED" },
                report.wall_seconds,
                dir.display()
            );
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
