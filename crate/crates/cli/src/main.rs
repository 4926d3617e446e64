use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedshare::reference::{reference_scenario, ReferenceExpectations};

#[derive(Parser)]
#[command(name = "fedshare", version, about = "Threshold secure data sharing simulator for federated clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write transcript.json and report.json.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reproduce the built-in four-cloud example.
    VerifyPaper,
    /// Print the key material derived for a scenario.
    Keygen {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let code = match cli.command {
        Command::Run { scenario, out: dir, seed } => fedshare_cli::cmd_run(&scenario, &dir, seed, &mut out),
        Command::VerifyPaper => fedshare_cli::cmd_verify_reference(&reference_scenario(), &ReferenceExpectations::default(), &mut out),
        Command::Keygen { scenario } => fedshare_cli::cmd_keygen(&scenario, &mut out),
    };
    ExitCode::from(code as u8)
}
