//! Command-line front end: run scenarios, calibrate parameters, compare
//! control vs smart-packaging runs, and render trace plots.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 IO error.

mod plot;

use clap::{Parser, Subcommand};
use smartpack::calibrate::{calibrate_all, AnchorSet};
use smartpack::engine;
use smartpack::{CalibratedParams, Error, ScenarioConfig, SimulationTrace};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "smartpack",
    about = "Deterministic digital twin of closed-loop antimicrobial food packaging",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace.csv + events.csv.
    Simulate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Calibrated-parameter JSON overriding the built-in defaults
        /// (also settable via SMARTPACK_PARAMS).
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Fit all model parameters to an anchor dataset; write params.json and
    /// residuals.csv.
    Calibrate {
        /// Anchor CSV (model_id, input_json, observed, tolerance, provenance).
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run two scenarios on a shared grid and write comparison.csv plus a
    /// shelf-life report.
    Compare {
        #[arg(long)]
        config_a: PathBuf,
        #[arg(long)]
        config_b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Render line plots of trace columns into a self-contained SVG.
    Plot {
        /// trace.csv produced by `simulate`.
        #[arg(long)]
        trace: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Column groups: comma-separated columns, semicolon-separated
        /// groups (one chart per group). Defaults to a standard set.
        #[arg(long)]
        columns: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage text + validation exit code for unknown flags
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, params } => simulate_cmd(&config, &out, params.as_deref()),
        Command::Calibrate { anchors, out } => calibrate_cmd(&anchors, &out),
        Command::Compare {
            config_a,
            config_b,
            out,
            params,
        } => compare_cmd(&config_a, &config_b, &out, params.as_deref()),
        Command::Plot { trace, out, columns } => plot_cmd(&trace, &out, columns.as_deref()),
    }
}

fn load_scenario(path: &Path, params: Option<&Path>) -> Result<ScenarioConfig, Error> {
    let defaults = CalibratedParams::resolve(params)?;
    ScenarioConfig::from_toml_file(path, &defaults)
}

fn simulate_cmd(config: &Path, out: &Path, params: Option<&Path>) -> Result<(), Error> {
    let cfg = load_scenario(config, params)?;
    let trace = engine::simulate(&cfg)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("trace.csv"), trace.to_csv())?;
    std::fs::write(out.join("events.csv"), trace.events_csv())?;
    println!(
        "{}: {} steps over {:.1} h, {} events",
        cfg.name,
        trace.rows.len() - 1,
        trace.duration_h(),
        trace.events.len()
    );
    for e in &trace.events {
        println!("  {:>22} at {:.3} h  {}", e.kind.as_str(), e.t_h, e.detail);
    }
    Ok(())
}

fn calibrate_cmd(anchors: &Path, out: &Path) -> Result<(), Error> {
    let set = AnchorSet::from_csv_path(anchors)?;
    let outcome = calibrate_all(&set)?;
    std::fs::create_dir_all(out)?;
    outcome.params.save(&out.join("params.json"))?;
    std::fs::write(out.join("residuals.csv"), outcome.residual_report_csv())?;
    for r in &outcome.reports {
        println!(
            "{:<22} residual {:10.3e}  iterations {:4}  converged {}  in-bounds {}",
            r.problem_id, r.result.residual, r.result.iterations, r.result.converged, r.in_bounds
        );
    }
    println!("wrote {}", out.join("params.json").display());
    Ok(())
}

fn compare_cmd(
    config_a: &Path,
    config_b: &Path,
    out: &Path,
    params: Option<&Path>,
) -> Result<(), Error> {
    let cfg_a = load_scenario(config_a, params)?;
    let cfg_b = load_scenario(config_b, params)?;
    // simulate is pure; the two runs are independent
    let (trace_a, trace_b) = std::thread::scope(|s| {
        let a = s.spawn(|| engine::simulate(&cfg_a));
        let b = s.spawn(|| engine::simulate(&cfg_b));
        (a.join().expect("join"), b.join().expect("join"))
    });
    let (trace_a, trace_b): (SimulationTrace, SimulationTrace) = (trace_a?, trace_b?);
    let report = engine::compare(&[&trace_a, &trace_b])?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("comparison.csv"), report.to_csv())?;
    std::fs::write(out.join("shelf_life.txt"), report.shelf_life_report())?;
    print!("{}", report.shelf_life_report());
    Ok(())
}

fn plot_cmd(trace: &Path, out: &Path, columns: Option<&str>) -> Result<(), Error> {
    let text = std::fs::read_to_string(trace)?;
    let rows = SimulationTrace::rows_from_csv(&text)?;
    let groups: Vec<Vec<String>> = match columns {
        Some(spec) => spec
            .split(';')
            .map(|g| g.split(',').map(|c| c.trim().to_string()).collect())
            .collect(),
        None => plot::default_groups(),
    };
    let svg = plot::render_svg(&rows, &groups)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
