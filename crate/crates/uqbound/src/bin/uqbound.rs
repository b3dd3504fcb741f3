//! Command-line front end: parse flags, load the JSON experiment config,
//! dispatch to the library, write CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 configuration problems, 3 numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uqbound::cli::{
    self, ExperimentConfig, cmd_limit, cmd_optimize, cmd_re, cmd_surrogate_report, cmd_sweep,
};
use uqbound::distributions::Distribution;
use uqbound::{Error, Result};

#[derive(Parser)]
#[command(name = "uqbound", version, about = "Robust performance bounds under mixed aleatoric/epistemic uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the risk-sensitive integrals and bounds over the c grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        c_min: Option<f64>,
        #[arg(long)]
        c_max: Option<f64>,
        #[arg(long)]
        c_points: Option<usize>,
    },
    /// Minimize B/c + Lambda_c^i over c for the selected integral forms.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// JSON report output path; stdout only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integral selector: 0, 1, 2, or all.
        #[arg(long, default_value = "all")]
        which: String,
    },
    /// Relative-entropy calculator: closed form vs numerical oracle.
    Re {
        /// Distribution P as JSON, e.g. '{"kind":"beta","alpha":1.5,"beta":1.5}'.
        p: String,
        /// Distribution Q as JSON, e.g. '{"kind":"uniform","lo":0,"hi":1}'.
        q: String,
    },
    /// Per-order surrogate accuracy report.
    SurrogateReport {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Collocation orders to test, lowest to highest.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
        orders: Vec<usize>,
    },
    /// c -> infinity sup-limit of the epistemic-only integral.
    Limit {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<(ExperimentConfig, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Error::Config(format!("{} is not UTF-8: {e}", path.display())))?;
    Ok((ExperimentConfig::from_json(&text)?, cli::config_hash(&bytes)))
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_distribution(text: &str) -> Result<Distribution> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("distribution spec: {e}")))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep { config, out, c_min, c_max, c_points } => {
            let (mut cfg, hash) = load_config(&config)?;
            if let Some(v) = c_min {
                cfg.c_grid.min = v;
            }
            if let Some(v) = c_max {
                cfg.c_grid.max = v;
            }
            if let Some(v) = c_points {
                cfg.c_grid.points = v;
            }
            cfg.validate()?;
            let result = cmd_sweep(&cfg, &hash)?;
            write_or_print(&out, &result.csv)?;
            if out.is_some() {
                print!("{}", result.summary);
            } else {
                eprint!("{}", result.summary);
            }
            Ok(())
        }
        Command::Optimize { config, out, which } => {
            let (cfg, _hash) = load_config(&config)?;
            let selector = match which.as_str() {
                "all" => None,
                "0" => Some(0),
                "1" => Some(1),
                "2" => Some(2),
                other => return Err(Error::Config(format!("--which must be 0, 1, 2 or all, got {other}"))),
            };
            let report = cmd_optimize(&cfg, selector)?;
            print!("{}", report.human_lines());
            let json = report.to_json();
            if let Some(path) = &out {
                std::fs::write(path, &json)
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            } else {
                println!("{json}");
            }
            Ok(())
        }
        Command::Re { p, q } => {
            let p = parse_distribution(&p)?;
            let q = parse_distribution(&q)?;
            let rep = cmd_re(&p, &q)?;
            println!("closed_form: {:.12e}", rep.closed);
            println!("numeric_oracle: {:.12e}", rep.numeric);
            println!("difference: {:.3e}", rep.difference);
            Ok(())
        }
        Command::SurrogateReport { config, out, orders } => {
            let (cfg, hash) = load_config(&config)?;
            let csv = cmd_surrogate_report(&cfg, &orders, &hash)?;
            write_or_print(&out, &csv)
        }
        Command::Limit { config } => {
            let (cfg, _hash) = load_config(&config)?;
            let rep = cmd_limit(&cfg)?;
            println!("lambda1_infinity: {:.12e}", rep.lambda1_infinity);
            println!("lambda1_at_c_max: {:.12e}", rep.lambda1_at_c_max);
            println!("gap: {:.3e}", rep.gap);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
