//! `risdet`: runs the detection experiments and RIS design calculations,
//! writing CSV tables plus a `manifest.json` that records the resolved
//! configuration and seed.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 usage or configuration
//! error, 3 numerical failure.

mod output;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use risdet::config::{Profile, RunConfig};
use risdet::detectors::DetectorKind;
use risdet::geometry::scenario_report;
use risdet::montecarlo::{
    calibrate_thresholds, cfar_sweep, convergence_study, pd_curve, rmse_nm, sliding_window,
    Simulation, SweepAxis, ThresholdTable,
};
use risdet::ris_design::{
    crossovers, default_side_grid, from_db, min_size, power_sweep, tapering_comparison, to_db,
    LinkBudget,
};
use serde::{Deserialize, Serialize};

use output::{curve_rows, RunManifest, Sink};
use settings::{apply_overrides, config_err, ConfigError};

#[derive(Debug, Parser)]
#[command(
    name = "risdet",
    version,
    about = "RIS-aided radar detection experiments"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON config (sections scenario, model, detectors, experiment); a run manifest also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides experiment.master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment scale preset for pfa and trial counts.
    #[arg(long, global = true, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Artifacts go to <out-dir>/<command>/.
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Comma-separated detector list, e.g. KM1,KA,C-GLRT,KELLY@3:SR.
    #[arg(long, global = true, value_delimiter = ',')]
    detectors: Option<Vec<String>>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "RISDET_THREADS")]
    threads: Option<usize>,
    /// Dotted override, e.g. --set model.rho=0.5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: risdet::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Cnr,
    Rho,
    Both,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Calibrate detection thresholds under H0.
    Calibrate {
        /// H0 trials; defaults to experiment.trials_cal.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// P_d versus SINR.
    PdCurve {
        /// Thresholds from a previous `calibrate` run (thresholds.json).
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// H1 trials per SINR point; defaults to experiment.trials_pd.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Empirical P_fa versus CNR and/or one-lag correlation with fixed thresholds.
    CfarSweep {
        #[arg(long, value_enum, default_value = "both")]
        axis: Axis,
        /// Thresholds from a previous `calibrate` run (thresholds.json).
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// H0 trials per point; defaults to experiment.trials_cal.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// RMSE of the estimated bins (n, m) versus SINR.
    Rmse {
        /// Trials per SINR point; defaults to experiment.trials_pd.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Mean relative likelihood gain of the cyclic estimation per iteration.
    Convergence {
        /// Trials per pair; defaults to experiment.convergence.trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// P_d of a window sliding over the range bins.
    SlidingWindow {
        /// Thresholds from a previous `calibrate` run (thresholds.json).
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Trials per window position; defaults to experiment.trials_pd.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Uniform, sinc and LFM tapering RCS table and minimum aperture size.
    RisDesign {
        /// Desired beamwidth, degrees.
        #[arg(long, default_value_t = 10.0)]
        phi0_deg: f64,
        /// Target RCS for the aperture sizing, dBsm.
        #[arg(long, default_value_t = 55.0)]
        sigma_dbsm: f64,
        /// Wavelength in meters; defaults to the scenario carrier.
        #[arg(long)]
        wavelength: Option<f64>,
    },
    /// Received power of the three paths versus RIS RCS.
    LinkBudget {
        /// First RIS RCS of the sweep, dBsm.
        #[arg(long, default_value_t = 10.0)]
        from_dbsm: f64,
        #[arg(long, default_value_t = 80.0)]
        to_dbsm: f64,
        /// Sweep step, dB.
        #[arg(long, default_value_t = 1.0)]
        step_db: f64,
    },
    /// Distances, delays, RIS angles and bin layout of the scenario.
    ScenarioCheck,
    /// Re-runs the command recorded in a manifest with its configuration.
    Replay {
        /// Path to a manifest.json written by an earlier run.
        manifest: PathBuf,
    },
}

impl Command {
    /// Subdirectory of `--out-dir` receiving this command's artifacts.
    fn name(&self) -> &'static str {
        match self {
            Command::Calibrate { .. } => "calibrate",
            Command::PdCurve { .. } => "pd-curve",
            Command::CfarSweep { .. } => "cfar-sweep",
            Command::Rmse { .. } => "rmse",
            Command::Convergence { .. } => "convergence",
            Command::SlidingWindow { .. } => "sliding-window",
            Command::RisDesign { .. } => "ris-design",
            Command::LinkBudget { .. } => "link-budget",
            Command::ScenarioCheck => "scenario-check",
            Command::Replay { .. } => "replay",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<risdet::Error>() {
            use risdet::Error::*;
            return match err {
                NotPositiveDefinite { .. } | NotHermitian { .. } | NonMonotonic { .. } => 3,
                _ => 2,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(config_err("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let (cfg, command) = match cli.command {
        Command::Replay { manifest } => {
            let m = RunManifest::load(&manifest)?;
            if matches!(m.command, Command::Replay { .. }) {
                return Err(config_err("manifest records a replay"));
            }
            (m.config, m.command)
        }
        command => (resolve_config(&g)?, command),
    };
    cfg.validate()
        .map_err(|e| config_err(format!("invalid configuration: {e}")))?;
    execute(&command, &cfg, &g.out_dir)
}

fn resolve_config(g: &GlobalArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => settings::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = g.profile {
        cfg.experiment.apply_profile(p);
    }
    cfg = apply_overrides(&cfg, &g.overrides)?;
    if let Some(s) = g.seed {
        cfg.experiment.master_seed = s;
    }
    if let Some(list) = &g.detectors {
        cfg.detectors.list = list
            .iter()
            .map(|s| s.parse::<DetectorKind>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_err(e.to_string()))?;
        if cfg.detectors.list.is_empty() {
            return Err(config_err("--detectors is empty"));
        }
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct ThresholdRow {
    detector: String,
    pfa: f64,
    threshold: f64,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct RmseRow {
    detector: String,
    sinr_db: f64,
    rmse_n: f64,
    rmse_m: f64,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct GainRow {
    n: usize,
    m: usize,
    h: usize,
    mean_gain: f64,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct TaperCsvRow {
    side_m: f64,
    side_wavelengths: f64,
    uniform_dbsm: f64,
    sinc_dbsm: f64,
    lfm_dbsm: f64,
}

fn calibrate(
    cfg: &RunConfig,
    sim: &Simulation,
    trials: usize,
    sink: &mut Sink,
) -> anyhow::Result<ThresholdTable> {
    let seed = cfg.experiment.master_seed;
    let pfa = cfg.experiment.pfa;
    let table = calibrate_thresholds(sim, &cfg.detectors.list, pfa, trials, seed)?;
    let rows: Vec<ThresholdRow> = table
        .entries
        .iter()
        .map(|e| ThresholdRow {
            detector: e.detector.to_string(),
            pfa,
            threshold: e.threshold,
            trials,
            seed,
        })
        .collect();
    sink.csv("thresholds.csv", &rows)?;
    sink.json("thresholds.json", &table)?;
    println!("thresholds at pfa {pfa:e} from {trials} H0 trials (seed {seed}):");
    for e in &table.entries {
        println!("  {:<16} {:.6}", e.detector.to_string(), e.threshold);
    }
    Ok(table)
}

/// Loads thresholds from a previous run or calibrates them now.
fn thresholds(
    cfg: &RunConfig,
    sim: &Simulation,
    path: Option<&Path>,
    sink: &mut Sink,
) -> anyhow::Result<ThresholdTable> {
    match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let table: ThresholdTable = serde_json::from_str(&text)
                .map_err(|e| config_err(format!("{}: not a threshold table: {e}", p.display())))?;
            if (table.pfa - cfg.experiment.pfa).abs() > 1e-15 {
                log::warn!(
                    "thresholds were calibrated at pfa {} but experiment.pfa is {}",
                    table.pfa,
                    cfg.experiment.pfa
                );
            }
            for &k in &cfg.detectors.list {
                table
                    .require(k)
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            }
            Ok(table)
        }
        None => calibrate(cfg, sim, cfg.experiment.trials_cal, sink),
    }
}

fn execute(command: &Command, cfg: &RunConfig, out_dir: &Path) -> anyhow::Result<()> {
    let mut sink = Sink::new(&out_dir.join(command.name()))?;
    let seed = cfg.experiment.master_seed;
    let exp = &cfg.experiment;
    let kinds = &cfg.detectors.list;
    match command {
        Command::Calibrate { trials } => {
            let sim = Simulation::from_config(cfg)?;
            calibrate(cfg, &sim, trials.unwrap_or(exp.trials_cal), &mut sink)?;
        }
        Command::PdCurve {
            thresholds: path,
            trials,
        } => {
            let sim = Simulation::from_config(cfg)?;
            let th = thresholds(cfg, &sim, path.as_deref(), &mut sink)?;
            let pts = pd_curve(
                &sim,
                &th,
                kinds,
                &exp.sinr_grid,
                trials.unwrap_or(exp.trials_pd),
                seed,
            )?;
            sink.csv("pd_curve.csv", &curve_rows(&pts, seed))?;
            println!("SINR (dB) at which P_d first reaches 0.9:");
            for &k in kinds {
                let hit = pts.iter().find(|p| p.detector == k && p.estimate >= 0.9);
                let shown = hit.map_or_else(|| "not reached".to_string(), |p| format!("{}", p.x));
                println!("  {:<16} {shown}", k.to_string());
            }
        }
        Command::CfarSweep {
            axis,
            thresholds: path,
            trials,
        } => {
            let sim = Simulation::from_config(cfg)?;
            let th = thresholds(cfg, &sim, path.as_deref(), &mut sink)?;
            let trials = trials.unwrap_or(exp.trials_cal);
            let mut runs = Vec::new();
            if matches!(axis, Axis::Cnr | Axis::Both) {
                runs.push((SweepAxis::Cnr, &exp.cnr_grid, "cfar_cnr.csv"));
            }
            if matches!(axis, Axis::Rho | Axis::Both) {
                runs.push((SweepAxis::Rho, &exp.rho_grid, "cfar_rho.csv"));
            }
            for (ax, grid, name) in runs {
                let pts = cfar_sweep(cfg, &th, kinds, ax, grid, trials, seed)?;
                sink.csv(name, &curve_rows(&pts, seed))?;
                let (lo, hi) = pts.iter().fold((1.0f64, 0.0f64), |(a, b), p| {
                    (a.min(p.estimate), b.max(p.estimate))
                });
                println!(
                    "{name}: {} points, P_fa in [{lo:.3e}, {hi:.3e}] (nominal {:e})",
                    pts.len(),
                    exp.pfa
                );
            }
        }
        Command::Rmse { trials } => {
            let sim = Simulation::from_config(cfg)?;
            let trials = trials.unwrap_or(exp.trials_pd);
            let pts = rmse_nm(&sim, kinds, &exp.sinr_grid, trials, seed)?;
            let rows: Vec<RmseRow> = pts
                .iter()
                .map(|p| RmseRow {
                    detector: p.detector.to_string(),
                    sinr_db: p.sinr_db,
                    rmse_n: p.rmse_n,
                    rmse_m: p.rmse_m,
                    trials: p.trials,
                    seed,
                })
                .collect();
            sink.csv("rmse.csv", &rows)?;
            println!("{} RMSE points written", rows.len());
        }
        Command::Convergence { trials } => {
            let sim = Simulation::from_config(cfg)?;
            let c = &exp.convergence;
            let trials = trials.unwrap_or(c.trials);
            let rep = convergence_study(&sim, c.sinr_db, &c.pairs, trials, seed)?;
            let mut rows = Vec::new();
            for curve in &rep.curves {
                for (i, g) in curve.mean_gain.iter().enumerate() {
                    rows.push(GainRow {
                        n: curve.pair.0,
                        m: curve.pair.1,
                        h: i + 1,
                        mean_gain: *g,
                        trials,
                        seed,
                    });
                }
                let first = curve.first_below(cfg.detectors.c_glrt.epsilon);
                println!(
                    "pair {:?}: mean gain below {:e} from iteration {}",
                    curve.pair,
                    cfg.detectors.c_glrt.epsilon,
                    first.map_or_else(|| "never".to_string(), |h| h.to_string())
                );
            }
            println!(
                "{} of {} coordinate updates lowered the likelihood",
                rep.violations, rep.updates
            );
            sink.csv("convergence.csv", &rows)?;
        }
        Command::SlidingWindow {
            thresholds: path,
            trials,
        } => {
            let sim = Simulation::from_config(cfg)?;
            let th = thresholds(cfg, &sim, path.as_deref(), &mut sink)?;
            let sw = &exp.sliding_window;
            let pts = sliding_window(
                &sim,
                &th,
                kinds,
                sw.sinr_db,
                sw.n_bins,
                sw.target_bins,
                trials.unwrap_or(exp.trials_pd),
                seed,
            )?;
            sink.csv("sliding_window.csv", &curve_rows(&pts, seed))?;
            println!(
                "{} window positions x {} detectors written",
                sw.n_bins - sim.k_p + 1,
                kinds.len()
            );
        }
        Command::RisDesign {
            phi0_deg,
            sigma_dbsm,
            wavelength,
        } => {
            let lambda = wavelength.unwrap_or_else(|| cfg.scenario.wavelength());
            let rows = tapering_comparison(lambda, *phi0_deg, &default_side_grid(lambda))
                .map_err(|e| config_err(e.to_string()))?;
            let csv_rows: Vec<TaperCsvRow> = rows
                .iter()
                .map(|r| TaperCsvRow {
                    side_m: r.side,
                    side_wavelengths: r.side / lambda,
                    uniform_dbsm: to_db(r.uniform),
                    sinc_dbsm: to_db(r.sinc),
                    lfm_dbsm: to_db(r.lfm),
                })
                .collect();
            sink.csv("tapering.csv", &csv_rows)?;
            let size =
                min_size(from_db(*sigma_dbsm), lambda).map_err(|e| config_err(e.to_string()))?;
            sink.json("ris_size.json", &size)?;
            println!(
                "{sigma_dbsm} dBsm at lambda = {lambda:.4} m: side {:.3} m, {} elements per side, HPBW {:.2} deg",
                size.side, size.elements, size.hpbw_deg
            );
        }
        Command::LinkBudget {
            from_dbsm,
            to_dbsm,
            step_db,
        } => {
            if !(*step_db > 0.0) || to_dbsm < from_dbsm {
                return Err(config_err(
                    "link-budget needs step_db > 0 and to_dbsm >= from_dbsm",
                ));
            }
            let lb = LinkBudget::from_geometry(&cfg.scenario)?;
            let count = ((to_dbsm - from_dbsm) / step_db + 1e-9).floor() as usize + 1;
            let grid: Vec<f64> = (0..count).map(|i| from_dbsm + i as f64 * step_db).collect();
            sink.csv("link_budget.csv", &power_sweep(&lb, &grid))?;
            let c = crossovers(&lb);
            sink.json("crossovers.json", &c)?;
            println!(
                "RIS RCS at which received power matches the LOS path: RSTR {:.2} dBsm, RSTSR {:.2} dBsm, \
                 both paths together {:.2} dBsm",
                to_db(c.rstr),
                to_db(c.rstsr),
                to_db(c.combined)
            );
        }
        Command::ScenarioCheck => {
            let r = scenario_report(&cfg.scenario, cfg.model.k_p)?;
            sink.json("scenario.json", &r)?;
            let d = &r.distances;
            let t = &r.delays;
            println!(
                "d_RT = {:.3} m, d_RS = {:.3} m, d_ST = {:.3} m",
                d.d_rt, d.d_rs, d.d_st
            );
            println!(
                "tau1 = {:.4} us, tau2 = {:.4} us, tau3 = {:.4} us",
                t.tau1 * 1e6,
                t.tau2 * 1e6,
                t.tau3 * 1e6
            );
            println!(
                "theta_si = {:.3} deg, theta_so = {:.3} deg",
                r.theta_si_deg, r.theta_so_deg
            );
            match r.layout {
                Some(l) => println!("(n, m) = ({}, {})", l.n, l.m),
                None => println!("(n, m) = none within a window of {}", cfg.model.k_p),
            }
            println!("feasible = {}", r.feasible);
        }
        Command::Replay { .. } => unreachable!("replay is resolved before execution"),
    }
    let manifest = sink.finish(command, cfg)?;
    println!("manifest: {}", manifest.display());
    Ok(())
}
