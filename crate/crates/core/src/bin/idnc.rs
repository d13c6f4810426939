use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use idnc::harness::{
    emit_plot, run_bound_sweep, run_experiment, run_selftest, write_bounds_csv, write_results_csv,
    ExperimentConfig, PlotKind,
};
use idnc::{Error, Result};

#[derive(Parser)]
#[command(name = "idnc", version, about = "Distributed noncircular source estimation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Overrides {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (defaults to available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for relative output paths.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo RMSE sweep.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// CRLB sweep for both signal models.
    Bounds {
        config: PathBuf,
        #[command(flatten)]
        o: Overrides,
    },
    /// Render a CSV produced by `simulate` or `bounds` as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_parser = ["rmse", "crlb", "ratio"])]
        kind: String,
        /// Output file; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the built-in numerical checks.
    Selftest,
}

fn load(path: &Path, o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(match &o.out_dir {
        Some(d) => cfg.with_out_dir(d),
        None => cfg,
    })
}

fn workers(o: &Overrides) -> usize {
    o.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Simulate { config, o } => {
            let cfg = load(&config, &o)?;
            let rows = run_experiment(&cfg, workers(&o))?;
            write_results_csv(&cfg.outputs.csv, &cfg, &rows)?;
            println!("wrote {}", cfg.outputs.csv.display());
            for r in rows.iter().filter(|r| r.flagged()) {
                eprintln!("warning: {} = {}: {}/{} trials failed", cfg.sweep.column(), r.sweep_value, r.failures, r.trials);
            }
            if let Some(p) = &cfg.outputs.plot {
                emit_plot(&cfg.outputs.csv, PlotKind::Rmse, p)?;
                println!("wrote {}", p.display());
            }
        }
        Cmd::Bounds { config, o } => {
            let cfg = load(&config, &o)?;
            let rows = run_bound_sweep(&cfg)?;
            write_bounds_csv(&cfg.outputs.csv, &cfg, &rows)?;
            println!("wrote {}", cfg.outputs.csv.display());
            if let Some(p) = &cfg.outputs.plot {
                emit_plot(&cfg.outputs.csv, PlotKind::Crlb, p)?;
                println!("wrote {}", p.display());
            }
        }
        Cmd::Plot { csv, kind, out, out_dir } => {
            let kind: PlotKind = kind.parse()?;
            let mut out = out.unwrap_or_else(|| csv.with_extension("svg"));
            if let Some(d) = out_dir.filter(|_| out.is_relative()) {
                out = d.join(out.file_name().unwrap_or_default());
            }
            emit_plot(&csv, kind, &out)?;
            println!("wrote {}", out.display());
        }
        Cmd::Selftest => {
            let checks = run_selftest()?;
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Error::SelfTest { failed });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
