use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lensreg::scenario::{self, Scenario};

#[derive(Parser)]
#[command(name = "lensreg", version, about = "Microlens qubit-register scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a shipped scenario by name.
    Run {
        scenario: String,
        /// Output directory (default: the scenario's `output`, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List shipped scenarios.
    List,
    /// Print the field schema of an experiment kind.
    Describe { kind: String },
}

fn load(arg: &str) -> lensreg::Result<Scenario> {
    if Path::new(arg).exists() {
        Scenario::load(arg)
    } else {
        Scenario::shipped(arg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for line in scenario::list_scenarios() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Command::Describe { kind } => match scenario::describe(&kind) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { scenario: arg, out, seed } => {
            let result = load(&arg).and_then(|mut s| {
                if let Some(seed) = seed {
                    s = s.with_seed(seed);
                }
                let dir = out
                    .or_else(|| s.output.clone())
                    .unwrap_or_else(|| Path::new("out").join(s.name()));
                scenario::run(&s, &dir).map(|summary| (summary, dir))
            });
            match result {
                Ok((summary, dir)) => {
                    let _ = scenario::report(&summary, std::io::stdout().lock());
                    println!("wrote {}", dir.display());
                    if summary.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
