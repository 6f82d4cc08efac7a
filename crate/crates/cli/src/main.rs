use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ifalign::aligner::Method;
use ifalign::error::Error;
use ifalign::harness::{
    monte_carlo, oracle_integrate, run_alignment, simulate_input, simulate_logs, IngestOptions,
    Logs, McSummary, RunMeta, RunOptions, RunReport, DEFAULT_EPOCHS,
};
use ifalign::sim::{Scenario, SimConfig};

/// In-flight coarse alignment from aided velocity and position.
#[derive(Parser)]
#[command(name = "ifalign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write truth, IMU and GPS logs of one simulated run.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Align one run, from logs or from a simulated scenario.
    Align {
        #[arg(long, default_value = "vif")]
        method: Method,
        /// Directory holding imu.csv, gps.csv and optionally truth.csv.
        #[arg(long, conflicts_with = "config")]
        logs: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        /// Update interval for log input (s).
        #[arg(long, default_value_t = 0.02)]
        interval: f64,
        /// Longest allowed gap between aiding fixes (s).
        #[arg(long, default_value_t = 2.0)]
        max_gap: f64,
        /// Solve every N updates; 0 solves only at the epochs and the end.
        #[arg(long, default_value_t = 1)]
        solve_every: usize,
        /// Extra report times (s), comma separated.
        #[arg(long, value_delimiter = ',')]
        epochs: Vec<f64>,
        /// Output directory; the report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo batch with per-epoch mean and 3-sigma.
    Montecarlo {
        #[arg(long, default_value = "vif")]
        method: Method,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        /// Report times (s), comma separated.
        #[arg(long, value_delimiter = ',')]
        epochs: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fine-step reference integrals along the simulated trajectory.
    Oracle {
        #[command(flatten)]
        sim: SimArgs,
        /// Times (s), comma separated.
        #[arg(long, value_delimiter = ',')]
        epochs: Vec<f64>,
        #[arg(long, default_value_t = 2e-4)]
        substep: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimArgs {
    /// Scenario and sensor config (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run index within the seed.
    #[arg(long, default_value_t = 0)]
    run: u64,
    /// Zero lever arm: the aiding describes the IMU itself.
    #[arg(long)]
    no_lever_arm: bool,
}

impl SimArgs {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                SimConfig::load(path).with_context(|| format!("loading {}", path.display()))?
            }
            None => SimConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.sensors.rng_seed = seed;
        }
        if self.no_lever_arm {
            cfg.sensors.lever_arm = [0.0; 3];
        }
        Ok(cfg)
    }
}

fn output(out: Option<&Path>, file: &str) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Box::new(std::fs::File::create(dir.join(file))?)
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(file), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_report(w: impl Write, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "t_s",
        "roll_deg",
        "pitch_deg",
        "yaw_deg",
        "err_roll_deg",
        "err_pitch_deg",
        "err_yaw_deg",
        "lambda_min",
    ])?;
    for r in &report.rows {
        let mut rec = vec![r.t.to_string()];
        rec.extend((0..3).map(|i| cell(r.estimate.map(|e| e[i]))));
        rec.extend((0..3).map(|i| cell(r.error.map(|e| e[i]))));
        rec.push(cell(r.lambda_min));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(w: impl Write, s: &McSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "t_s",
        "mean_roll",
        "mean_pitch",
        "mean_yaw",
        "3sigma_roll",
        "3sigma_pitch",
        "3sigma_yaw",
    ])?;
    for e in &s.epochs {
        let rec: Vec<String> = std::iter::once(e.t)
            .chain(e.mean)
            .chain(e.three_sigma)
            .map(|x| x.to_string())
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(sim: &SimArgs, out: &Path) -> Result<()> {
    let cfg = sim.load()?;
    let scenario = Scenario::new(&cfg.scenario)?;
    simulate_logs(&scenario, &cfg.sensors, sim.run)?.write_dir(out)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    eprintln!("wrote {} (config {})", out.display(), cfg.hash());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn align(
    method: Method,
    logs: Option<&Path>,
    sim: &SimArgs,
    interval: f64,
    max_gap: f64,
    solve_every: usize,
    epochs: Vec<f64>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let (input, meta) = match logs {
        Some(dir) => (
            Logs::read_dir(dir)?.ingest(interval, &IngestOptions { max_gap })?,
            RunMeta::default(),
        ),
        None => {
            let cfg = sim.load()?;
            let scenario = Scenario::new(&cfg.scenario)?;
            let meta = RunMeta {
                seed: Some(cfg.sensors.rng_seed),
                run: Some(sim.run),
                config_hash: Some(cfg.hash()),
            };
            (simulate_input(&scenario, &cfg.sensors, sim.run)?, meta)
        }
    };
    let report = run_alignment(
        &input,
        method,
        &RunOptions {
            solve_every,
            epochs,
        },
        meta,
    )?;
    write_report(output(out, "report.csv")?, &report)?;
    if let Some(dir) = out {
        write_json(dir, "report.json", &report)?;
    }
    if report.degenerate_at_end() {
        eprintln!(
            "attitude still unobservable after {} updates",
            report.updates
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn montecarlo(
    method: Method,
    sim: &SimArgs,
    runs: u64,
    epochs: Vec<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = sim.load()?;
    let scenario = Scenario::new(&cfg.scenario)?;
    let epochs = if epochs.is_empty() {
        DEFAULT_EPOCHS.to_vec()
    } else {
        epochs
    };
    let summary = monte_carlo(
        &scenario,
        &cfg.sensors,
        runs,
        method,
        &epochs,
        Some(cfg.hash()),
    )?;
    for x in &summary.excluded {
        eprintln!("run {} excluded: {}", x.run, x.reason);
    }
    write_summary(output(out, "summary.csv")?, &summary)?;
    if let Some(dir) = out {
        write_json(dir, "summary.json", &summary)?;
    }
    Ok(())
}

fn oracle(sim: &SimArgs, epochs: Vec<f64>, substep: f64, out: Option<&Path>) -> Result<()> {
    let cfg = sim.load()?;
    let scenario = Scenario::new(&cfg.scenario)?;
    let times = if epochs.is_empty() {
        vec![cfg.scenario.duration]
    } else {
        epochs
    };
    if times.iter().any(|&t| t > cfg.scenario.duration) {
        bail!("oracle times must not exceed the scenario duration");
    }
    let states = oracle_integrate(&scenario.trajectory, &times, substep)?;
    let mut w = csv::Writer::from_writer(output(out, "oracle.csv")?);
    let mut header = vec!["t_s".to_string()];
    for name in ["alpha_v", "beta_v", "alpha_p", "beta_p"] {
        header.extend(["x", "y", "z"].map(|a| format!("{name}_{a}")));
    }
    w.write_record(&header)?;
    for s in &states {
        let rec: Vec<String> = std::iter::once(s.t)
            .chain(
                [s.alpha_v, s.beta_v, s.alpha_p, s.beta_p]
                    .iter()
                    .flat_map(|v| v.iter().copied()),
            )
            .map(|x| x.to_string())
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Format { .. }
            | Error::Gap { .. }
            | Error::RateMismatch { .. }
            | Error::Config(_),
        ) => 2,
        Some(Error::DegenerateSpectrum { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { sim, out } => simulate(&sim, &out).map(|_| ExitCode::SUCCESS),
        Command::Align {
            method,
            logs,
            sim,
            interval,
            max_gap,
            solve_every,
            epochs,
            out,
        } => align(
            method,
            logs.as_deref(),
            &sim,
            interval,
            max_gap,
            solve_every,
            epochs,
            out.as_deref(),
        ),
        Command::Montecarlo {
            method,
            sim,
            runs,
            epochs,
            out,
        } => montecarlo(method, &sim, runs, epochs, out.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Oracle {
            sim,
            epochs,
            substep,
            out,
        } => oracle(&sim, epochs, substep, out.as_deref()).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
