//! `oicap`: capacity bounds, simulations, and oracle cross-checks for
//! optical intensity channels, emitted as reproducible CSV.

mod config;
mod csvout;
mod runner;

use clap::{Args, Parser, Subcommand};
use config::{RawConfig, SweepConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "oicap", version, about = "capacity bounds for optical intensity channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form upper/lower bounds and scaling-target ratios per sweep point
    Bounds(CommonArgs),
    /// Monte-Carlo validation of the MAP detectors against exact error rates
    Simulate(CommonArgs),
    /// Blahut-Arimoto, exact mutual information, and numeric duality cross-checks
    Oracle(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Channel model: gaussian | poisson
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated intensity budgets in (0,1)
    #[arg(long)]
    eps: Option<String>,
    /// Comma-separated L = log(1/eps) values (deep-regime sweeps)
    #[arg(long)]
    logeps: Option<String>,
    /// Comma-separated knee exponents (a_G or a_P)
    #[arg(long)]
    a: Option<String>,
    /// Poisson dark current
    #[arg(long)]
    lambda: Option<f64>,
    /// Geometric tail parameter of the Poisson auxiliary distribution
    #[arg(long = "geom-p")]
    geom_p: Option<f64>,
    /// Monte-Carlo trials per point (simulate)
    #[arg(long)]
    trials: Option<u64>,
    /// Master RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Wilson interval z
    #[arg(long)]
    z: Option<f64>,
    /// Amplitude grid size for oracle runs
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,
    /// Blahut-Arimoto certificate tolerance
    #[arg(long = "ba-tol")]
    ba_tol: Option<f64>,
    /// Upper end of the duality multiplier search
    #[arg(long = "mu-max")]
    mu_max: Option<f64>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn into_raw(self) -> (RawConfig, Option<PathBuf>) {
        (
            RawConfig {
                channel: self.channel,
                eps: self.eps,
                logeps: self.logeps,
                a: self.a,
                lambda: self.lambda,
                geom_p: self.geom_p,
                oracle: None,
                trials: self.trials,
                seed: self.seed,
                z: self.z,
                grid_points: self.grid_points,
                ba_tol: self.ba_tol,
                mu_max: self.mu_max,
                out: self.out,
            },
            self.config,
        )
    }
}

fn resolve(args: CommonArgs) -> Result<SweepConfig, config::ConfigError> {
    let (flags, config_path) = args.into_raw();
    let from_file = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                config::ConfigError(format!("cannot read {}: {e}", path.display()))
            })?;
            RawConfig::from_file(&text)?
        }
        None => RawConfig::default(),
    };
    flags.or(from_file).resolve()
}

fn emit(cfg: &SweepConfig, doc: String) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, doc),
        None => {
            use std::io::Write as _;
            std::io::stdout().write_all(doc.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::Bounds(a) => ("bounds", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Oracle(a) => ("oracle", a),
    };
    let mut cfg = match resolve(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if name == "oracle" {
        cfg.oracle = true;
    }
    if name == "simulate" && cfg.mc_trials == 0 {
        eprintln!("config error: simulate needs --trials >= 1");
        return ExitCode::from(2);
    }

    let points = runner::sweep_points(&cfg);
    let meta = cfg.echo_lines(name);
    let doc = match name {
        "bounds" => {
            let rows = runner::compute_rows(&points, |p| runner::bounds_row(&cfg, p));
            let header = match cfg.channel {
                config::Channel::Gaussian => runner::BOUNDS_HEADER_GAUSSIAN,
                config::Channel::Poisson => runner::BOUNDS_HEADER_POISSON,
            };
            csvout::document(&meta, header, &rows)
        }
        "simulate" => {
            let rows = runner::compute_rows(&points, |p| runner::simulate_row(&cfg, p));
            csvout::document(&meta, runner::SIMULATE_HEADER, &rows)
        }
        _ => {
            let rows = runner::compute_rows(&points, |p| runner::oracle_row(&cfg, p));
            let doc = csvout::document(&meta, runner::ORACLE_HEADER, &rows);
            if runner::all_rows_failed(&rows) {
                // still emit the diagnostics before signaling systemic failure
                let _ = emit(&cfg, doc);
                eprintln!("oracle: every sweep point failed");
                return ExitCode::from(3);
            }
            doc
        }
    };
    match emit(&cfg, doc) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
    }
}
