use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conslaw_cli::{execute, Invocation, Kind};

#[derive(Parser)]
#[command(name = "conslaw", version, about = "Numerical experiments on scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smooth, sublevel-measure and Hölder degeneracy of a flux.
    Degeneracy(Common),
    /// TV^s of the oscillator and growth of its variation series.
    Variation(Common),
    /// Transition data with a certified pre-shock time, transported and solved.
    Cheng(Common),
    /// Residual of the high-frequency expansion against finite volumes.
    Wkb(Common),
    /// Sobolev-scale seminorms of the expansion across frequencies.
    Sweep(Common),
    /// Dynamic programming against exhaustive search for TV^s.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Degeneracy(a) => (Kind::Degeneracy, a),
        Command::Variation(a) => (Kind::Variation, a),
        Command::Cheng(a) => (Kind::Cheng, a),
        Command::Wkb(a) => (Kind::Wkb, a),
        Command::Sweep(a) => (Kind::Sweep, a),
        Command::OracleCheck(a) => (Kind::OracleCheck, a),
    };
    let inv = Invocation { kind, config: args.config, out: args.out, seed: args.seed, threads: args.threads };
    let (manifest, dir) = execute(&inv);
    for e in &manifest.errors {
        eprintln!("error: {e}");
    }
    for c in &manifest.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    match manifest.write(&dir) {
        Ok(path) => println!("manifest: {}", path.display()),
        Err(e) => {
            eprintln!("error: cannot write manifest to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(manifest.exit_code() as u8)
}
