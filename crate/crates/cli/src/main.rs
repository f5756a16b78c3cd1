use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use krein_cli::{execute, Command, Format, RunArgs};

#[derive(Parser)]
#[command(name = "krein", version, about = "Construct, verify and evolve reflectionless M functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tables of M(z) and xi(t), W(0), the sharp bound and the classification.
    Construct(Flags),
    /// The invariant suite on a profile and/or a seeded random batch.
    Verify(Flags),
    /// W(x) along x >= 0.
    Evolve(Flags),
    /// Constant potential: closed form vs ODE vs construction.
    Oracle(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    /// Directory for tables and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Construct(f) => (Command::Construct, f),
        Cmd::Verify(f) => (Command::Verify, f),
        Cmd::Evolve(f) => (Command::Evolve, f),
        Cmd::Oracle(f) => (Command::Oracle, f),
    };
    let args = RunArgs {
        config: flags.config,
        out: flags.out,
        format: flags.format,
        seed: flags.seed,
    };
    match execute(command, &args) {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("krein {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
