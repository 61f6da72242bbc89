use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use modelrisk_cli::{run, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "modelrisk",
    version,
    about = "Model-risk measures over Fisher-Rao neighbourhoods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the assessment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output.dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file without computing anything.
    Validate { config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let (report, dir) = run(&cfg, out.as_deref())?;
            println!("{} at base: {}", report.functional, report.f0);
            for n in &report.norms {
                println!("  Z[{}] = {}", n.label, n.value);
            }
            println!(
                "  worst case: direction {}, t = {}",
                report.worst_case.direction, report.worst_case.t
            );
            println!("wrote {}", dir.display());
        }
        Command::Validate { config } => {
            RunConfig::load(&config)?;
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
