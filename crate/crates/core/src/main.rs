use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nhscatter::scenario::{list_presets, load_scenario, run_batch, RunReport};
use nhscatter::Error;

#[derive(Parser)]
#[command(
    name = "nhscatter",
    version,
    about = "Waves under rapidly oscillating complex potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Output directory (replaces outputs.directory; batch: parent directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config field, e.g. --set plan.total_time=60
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Time step override (plan.dt)
    #[arg(long)]
    dt: Option<f64>,
    /// Grid size override (grid.n)
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
}

impl Overrides {
    fn assignments(&self, with_out: bool) -> Vec<String> {
        let mut all = self.set.clone();
        if let Some(dt) = self.dt {
            all.push(format!("plan.dt={dt:e}"));
        }
        if let Some(n) = self.grid_n {
            all.push(format!("grid.n={n}"));
        }
        if let (true, Some(out)) = (with_out, &self.out) {
            all.push(format!(
                "outputs.directory={}",
                toml_string(&out.display().to_string())
            ));
        }
        all
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML scenario file
    Run {
        target: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List compiled-in presets
    List,
    /// Run several presets concurrently, each in <out>/<preset>
    Batch {
        #[arg(required = true)]
        presets: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

const EXIT_ERROR: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidGrid(_)
        | Error::InvalidPacket(_)
        | Error::InvalidModulation(_)
        | Error::InvalidPotential(_)
        | Error::InvalidPlan(_)
        | Error::InvalidChannels(_)
        | Error::Incommensurate
        | Error::ThresholdChannel { .. } => EXIT_CONFIG,
        Error::Singular { .. } | Error::NotConverged { .. } => EXIT_NUMERICAL,
        _ => EXIT_ERROR,
    }
}

fn summarize(name: &str, report: &RunReport) {
    println!(
        "{name}: wrote {} files to {}",
        report.files.len(),
        report.directory.display()
    );
    if let Some(td) = &report.time_domain {
        println!(
            "  t={} norm={:.6e} width={:.6e} invisibility_error={:.3e}",
            td.final_time, td.final_norm, td.final_width, td.final_invisibility_error
        );
    }
    if let Some(fl) = &report.floquet {
        println!(
            "  residual={:.2e} flux={:.12} invisible={}",
            fl.residual,
            fl.flux,
            fl.invisibility.invisible()
        );
    }
    if report.flags.runaway {
        eprintln!("  warning: runaway gain, trajectory truncated");
    }
    if report.flags.truncation_warning {
        eprintln!("  warning: outermost sidebands above the truncation level; widen m_min/m_max");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for (name, description) in list_presets() {
                println!("{name:<20} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { target, overrides } => {
            let result = load_scenario(&target, &overrides.assignments(true)).and_then(|s| s.run());
            match result {
                Ok(report) => {
                    summarize(&target, &report);
                    if report.numerical_flag() {
                        ExitCode::from(EXIT_NUMERICAL)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Batch { presets, overrides } => {
            let root = overrides
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("out"));
            let mut worst = 0u8;
            for (name, result) in run_batch(&presets, &root, &overrides.assignments(false)) {
                let code = match result {
                    Ok(report) => {
                        summarize(&name, &report);
                        if report.numerical_flag() {
                            EXIT_NUMERICAL
                        } else {
                            0
                        }
                    }
                    Err(e) => {
                        eprintln!("{name}: error: {e}");
                        exit_code(&e)
                    }
                };
                worst = worst.max(code);
            }
            ExitCode::from(worst)
        }
    }
}
