use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use drinfeld_lab::run::{self, has_errors, load_replay, output_dir, write_outputs};
use drinfeld_lab::{Command, Config, Overrides, Pool};

#[derive(Parser)]
#[command(name = "drinfeld-lab", version, about = "Drinfeld module reduction experiments")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run an experiment command on a config file.
    Run {
        #[arg(value_enum)]
        command: Command,
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Re-run the command and config embedded in a report.
    Replay {
        report: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a config without running anything.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    prime: Option<String>,
    #[arg(short = 'D', long)]
    degree_bound: Option<usize>,
    #[arg(short = 'B', long)]
    coeff_bound: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for prime scans (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            prime: self.prime.clone(),
            degree_bound: self.degree_bound,
            coeff_bound: self.coeff_bound,
            n_max: self.n_max,
            seed: self.seed,
        }
    }
}

fn execute(command: Command, config: Config, flags: &Flags, started: Instant) -> u8 {
    let pool = Pool::new(flags.jobs);
    let outcome = run::run(command, config, &flags.overrides(), &pool);
    let dir = output_dir(flags.out.clone());
    if let Err(e) = write_outputs(&dir, &outcome, started) {
        eprintln!("error: {e}");
        return 2;
    }
    for (k, v) in &outcome.summary {
        println!("{k}: {v}");
    }
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    println!("report: {}", dir.join("report.json").display());
    outcome.exit_code as u8
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let code = match cli.action {
        Action::Run { command, config, flags } => match Config::load(&config) {
            Ok(cfg) => execute(command, cfg, &flags, started),
            Err(e) => {
                eprintln!("error: {}: {e}", config.display());
                2
            }
        },
        Action::Replay { report, flags } => match load_replay(&report) {
            Ok((command, cfg)) => execute(command, cfg, &flags, started),
            Err(e) => {
                eprintln!("error: {}: {e}", report.display());
                2
            }
        },
        Action::Validate { config } => match std::fs::read_to_string(&config) {
            Ok(text) => {
                let diags = run::validate(&text);
                for d in &diags {
                    let loc = if d.path.is_empty() { String::new() } else { format!("{}: ", d.path) };
                    println!("{}: {loc}{}", d.severity, d.message);
                }
                if has_errors(&diags) {
                    2
                } else {
                    println!("ok");
                    0
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", config.display());
                2
            }
        },
    };
    ExitCode::from(code)
}
