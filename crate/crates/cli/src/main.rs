//! `sweep`: run parameter sweeps, single points and the oracle gate.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 at least one
//! degenerate or failed point (or a failing oracle).

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use picard_ns::oracles::OracleSuite;
use picard_ns::stokes::HistoryOptions;
use picard_ns::sweep::{
    emit_border_curves, emit_borders, emit_reports, evaluate_point, format_records, run_sweep_with, SweepConfig,
    SweepPoint,
};
use picard_ns::{Error, Execution, GridSpec, TimeGrid};

#[derive(Parser)]
#[command(name = "sweep", version, about = "Two-step Picard iteration sweeps for 2-D Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and write its reports.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 means one per CPU. Overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Run points one after another on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Write only the border-curve tables.
    Borders {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve a single point and print its record as one CSV row.
    Point {
        #[arg(long)]
        n: u32,
        #[arg(long = "F")]
        amplitude: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 8.0)]
        half_width: f64,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Print the column header first.
        #[arg(long)]
        header: bool,
    },
    /// Run the reference oracles; exits 0 only if all pass.
    Verify,
    /// Render SVG charts from the CSV files of a finished run.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Points(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Points(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Points(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            Error::NonFinite { .. } => Failure::Points(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SweepConfig, Failure> {
    match path {
        Some(p) => SweepConfig::from_file(p).map_err(|e| match e {
            Error::Io { .. } => Failure::Config(e.to_string()),
            _ => Failure::from(e),
        }),
        None => Ok(SweepConfig::default()),
    }
}

fn run(config: Option<&Path>, out: &Path, workers: Option<usize>, sequential: bool) -> Result<(), Failure> {
    let mut cfg = load_config(config)?;
    cfg.out_dir = Some(out.to_path_buf());
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel { workers: cfg.workers }
    };
    let report = run_sweep_with(&cfg, exec)?;
    let files = emit_reports(&report, out)?;
    println!("{} records, {} files in {}", report.records.len(), files.len(), out.display());
    for f in &report.failures {
        eprintln!("point n={} k={:?} nu={} failed: {}", f.n, f.k, f.nu, f.error);
    }
    if report.has_degenerate() {
        let count = report.records.iter().filter(|r| r.degenerate).count();
        return Err(Failure::Points(format!("{count} degenerate or failed points")));
    }
    Ok(())
}

fn borders(config: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let curves = emit_border_curves(&cfg.viscosities, cfg.border_f_min, cfg.border_f_max, cfg.border_samples)?;
    for path in emit_borders(&curves, out)? {
        println!("{}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn point(
    n: u32,
    amplitude: f64,
    mu: f64,
    nu: f64,
    half_width: f64,
    resolution: usize,
    t_final: f64,
    steps: usize,
    header: bool,
) -> Result<(), Failure> {
    let grid = GridSpec::new(half_width, resolution)?;
    let tg = TimeGrid::new(t_final, steps)?;
    let pt = SweepPoint {
        n,
        k: None,
        amplitude,
        mu,
        nu,
        profile: false,
    };
    pt.params().validate()?;
    let (record, _, failure) = evaluate_point(&pt, &grid, &tg, HistoryOptions::default(), &[], &[]);
    print!("{}", format_records(std::slice::from_ref(&record), header));
    if let Some(f) = failure {
        return Err(Failure::Points(f.error));
    }
    if record.degenerate {
        return Err(Failure::Points("degenerate first iterate".into()));
    }
    Ok(())
}

fn verify() -> Result<(), Failure> {
    let gate = OracleSuite::default().run()?;
    for r in &gate.reports {
        println!("{r}");
    }
    println!("{}", gate.refinement);
    if gate.passed() {
        Ok(())
    } else {
        Err(Failure::Points("oracle gate failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            config,
            out,
            workers,
            sequential,
        } => run(config.as_deref(), out, *workers, *sequential),
        Command::Borders { out, config } => borders(config.as_deref(), out),
        Command::Point {
            n,
            amplitude,
            mu,
            nu,
            half_width,
            resolution,
            t_final,
            steps,
            header,
        } => point(*n, *amplitude, *mu, *nu, *half_width, *resolution, *t_final, *steps, *header),
        Command::Verify => verify(),
        Command::Plot { input, out } => plot::render_dir(input, out.as_deref().unwrap_or(input)).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
