use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpsteady_sweep::config::{ParamValue, PointParams, SweepConfig};
use fpsteady_sweep::emit::{emit, json_value};
use fpsteady_sweep::error::{Result, SweepError};
use fpsteady_sweep::figures::{phase_diagram_config, run_figures};
use fpsteady_sweep::run::{evaluate, run_sweep, Manifest, RunOptions, SweepResult};
use fpsteady_sweep::validate::run_validation;

#[derive(Parser)]
#[command(name = "fpsteady", version, about = "Steady states of driven nonlinear oscillators")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Record the run time in the manifest (output is then no longer reproducible).
        #[arg(long)]
        stamp: bool,
    },
    /// Evaluate a config's observables at its fixed parameters and print JSON.
    Point {
        config: PathBuf,
        /// Override a parameter, e.g. `--set eps2=3.5` (config units).
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// Classify the mean-field phases over a (Δ, ε₂) grid in units of γ₁.
    PhaseDiagram {
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        delta_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        delta_max: f64,
        #[arg(long, default_value_t = 5.0)]
        eps2_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        u: f64,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare the analytic solutions with the Lindblad oracle.
    Validate {
        #[arg(long, default_value_t = 20)]
        sets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Regenerate all bundled figure outputs.
    Figures {
        #[arg(short, long, default_value = "figures")]
        out: PathBuf,
        /// Only this bundled config.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

fn summarize(r: &SweepResult) {
    eprintln!("{} points, {} failed evaluations", r.points.len(), r.failure_count());
    let failed = r.oracle_checks.iter().filter(|c| !c.pass).count();
    if !r.oracle_checks.is_empty() {
        eprintln!("oracle spot checks: {} of {} passed", r.oracle_checks.len() - failed, r.oracle_checks.len());
    }
}

fn point(config: &Path, set: &[String]) -> Result<()> {
    let mut cfg = SweepConfig::load(config)?;
    for s in set {
        let (k, v) = s.split_once('=').ok_or_else(|| SweepError::Config(format!("expected NAME=VALUE, got `{s}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| SweepError::Config(format!("`{v}` is not a number")))?;
        let z = cfg.params.get(k.trim()).map(|p| p.to_complex());
        let value = match z {
            Some(z) if z.im != 0.0 => ParamValue::Polar { abs: v, phase: z.arg() },
            _ => ParamValue::Real(v),
        };
        cfg.params.insert(k.trim().to_string(), value);
    }
    cfg.axes.clear();
    cfg.validate()?;
    let params: PointParams = cfg.point_params(&[])?;
    let obs = cfg.parsed_observables()?;
    let grid = cfg.qgrid.map(|q| q.spec());
    let mut p = evaluate(&cfg, &obs, &params, grid.as_ref());
    p.coords.clear();
    let r = SweepResult {
        manifest: Manifest::new(&cfg, false),
        axis_names: Vec::new(),
        axis_points: Vec::new(),
        columns: obs.iter().flat_map(|o| o.columns()).collect(),
        points: vec![p],
        oracle_checks: Vec::new(),
    };
    println!("{}", serde_json::to_string_pretty(&json_value(&r)?)?);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Sweep { config, out, stamp } => {
            let cfg = SweepConfig::load(&config)?;
            let r = run_sweep(&cfg, RunOptions { stamp })?;
            for p in emit(&r, &out)? {
                println!("{}", p.display());
            }
            summarize(&r);
            Ok(r.oracle_checks.iter().all(|c| c.pass))
        }
        Cmd::Point { config, set } => point(&config, &set).map(|_| true),
        Cmd::PhaseDiagram { delta_min, delta_max, eps2_max, count, u, out } => {
            let cfg = phase_diagram_config((delta_min, delta_max), eps2_max, count, u, "phase_diagram");
            let r = run_sweep(&cfg, RunOptions::default())?;
            for p in emit(&r, &out)? {
                println!("{}", p.display());
            }
            summarize(&r);
            Ok(true)
        }
        Cmd::Validate { sets, seed } => {
            let lines = run_validation(sets, seed);
            for l in &lines {
                println!("{l}");
            }
            let passed = lines.iter().filter(|l| l.pass).count();
            println!("{passed}/{} checks passed", lines.len());
            Ok(passed == lines.len())
        }
        Cmd::Figures { out, only, list } => {
            if list {
                for (name, _) in fpsteady_sweep::figures::BUNDLED {
                    println!("{name}");
                }
                return Ok(true);
            }
            for p in run_figures(&out, only.as_deref(), RunOptions::default())? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
