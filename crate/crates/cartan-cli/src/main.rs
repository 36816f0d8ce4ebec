use std::path::PathBuf;
use std::process::ExitCode;

use cartan_cli::{explain, list_fixtures, load, overall, parse_with_override, run_file, Status};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cartan", version, about = "Exact checks for Cartan homotopy modules and their connections")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a task file (a path or a shipped name) and write one JSON report per task.
    Run {
        file: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Print an implemented identity.
    Explain { id: String },
    /// List fixtures, task kinds and shipped task files.
    ListFixtures,
}

fn code(s: Status) -> ExitCode {
    ExitCode::from(s.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Explain { id } => match explain::explain(&id) {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                code(Status::Schema)
            }
        },
        Cmd::ListFixtures => {
            print!("{}", list_fixtures());
            ExitCode::SUCCESS
        }
        Cmd::Run { file, out, seed_override, jobs } => {
            let parsed = load(&file).and_then(|t| parse_with_override(&t, seed_override));
            let tf = match parsed {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("{e}");
                    return code(Status::Schema);
                }
            };
            let results = match run_file(&tf, &out, jobs) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("i/o error: {e:#}");
                    return code(Status::Schema);
                }
            };
            for r in &results {
                let extra = if r.failing.is_empty() { String::new() } else { format!(" [{}]", r.failing.join(", ")) };
                println!("{}: {}{extra}", r.name, r.status.as_str());
                if let Some(e) = r.report.get("error").and_then(|e| e.as_str()) {
                    eprintln!("{}: {e}", r.name);
                }
            }
            code(overall(&results))
        }
    }
}
