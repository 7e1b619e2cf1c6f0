//! Threshold calibration and Monte Carlo estimation of P_fa, P_d, bin
//! localization error, C-GLRT convergence and the sliding-window response.
//!
//! Trial `t` of an experiment always draws from `trial_rng(seed, domain, t)`,
//! and results are collected in trial order, so every output is independent
//! of thread count and scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{check_calibration_size, ModelConfig, RunConfig};
use crate::detectors::{warn_if_degenerate, CGlrtConfig, DetectionOutcome, DetectorKind, Prepared};
use crate::error::{Error, Result};
use crate::geometry::BinLayout;
use crate::hermitian::HermitianFactor;
use crate::rng::{domain_tag, trial_rng, TrialRng};
use crate::signal_model::{
    alpha_from_sinr, covariance_factor, synthesize_cells, synthesize_with, DataSet, Echo,
    Hypothesis, SteeringSet, TargetParams,
};

/// Resolved, ready-to-sample experiment setup.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub steering: SteeringSet,
    pub covariance: HermitianFactor,
    pub layout: BinLayout,
    pub k_p: usize,
    pub k_s: usize,
    pub alpha_ratio: f64,
    pub c_glrt: CGlrtConfig,
}

impl Simulation {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Self::with_model(cfg, &cfg.model)
    }

    /// Same scenario and detectors with a different signal model.
    pub fn with_model(cfg: &RunConfig, model: &ModelConfig) -> Result<Self> {
        model.validate()?;
        cfg.detectors.c_glrt.validate()?;
        let steering = model.steering()?;
        warn_if_degenerate(&steering);
        let layout = RunConfig {
            model: model.clone(),
            ..cfg.clone()
        }
        .layout()?;
        Ok(Self {
            covariance: covariance_factor(&model.covariance()?)?,
            steering,
            layout,
            k_p: model.k_p,
            k_s: model.k_s,
            alpha_ratio: model.alpha_ratio,
            c_glrt: cfg.detectors.c_glrt,
        })
    }

    pub fn target(&self, sinr_db: f64) -> Result<TargetParams> {
        let alpha = alpha_from_sinr(
            sinr_db,
            &self.covariance,
            &self.steering.v_r,
            self.alpha_ratio,
        )?;
        Ok(TargetParams {
            alpha,
            layout: self.layout,
        })
    }

    /// One data set; `target` is ignored under H0.
    pub fn draw(&self, target: Option<&TargetParams>, rng: &mut TrialRng) -> Result<DataSet> {
        match target {
            None => {
                let dummy = TargetParams {
                    alpha: [num_complex::Complex64::new(0.0, 0.0); 3],
                    layout: self.layout,
                };
                synthesize_with(
                    Hypothesis::H0,
                    &dummy,
                    &self.covariance,
                    &self.steering,
                    self.k_p,
                    self.k_s,
                    rng,
                )
            }
            Some(t) => synthesize_with(
                Hypothesis::H1,
                t,
                &self.covariance,
                &self.steering,
                self.k_p,
                self.k_s,
                rng,
            ),
        }
    }

    /// Draws `trials` data sets and evaluates `kinds` on each.
    pub fn simulate(
        &self,
        kinds: &[DetectorKind],
        target: Option<&TargetParams>,
        trials: usize,
        seed: u64,
        domain: u64,
    ) -> Result<Vec<Vec<DetectionOutcome>>> {
        run_trials(trials, seed, domain, |rng| {
            let data = self.draw(target, rng)?;
            Prepared::new(&data, &self.steering)?.evaluate(kinds, &self.c_glrt)
        })
    }
}

/// Runs `f` for trials `0..trials` in parallel, results in trial order.
pub fn run_trials<T, F>(trials: usize, seed: u64, domain: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut TrialRng) -> Result<T> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(seed, domain, t)))
        .collect()
}

/// Threshold for exceedance probability `pfa`: the order statistic of
/// (1-based) index `ceil((1 − pfa) T)`.
pub fn quantile(stats: &[f64], pfa: f64) -> Result<f64> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pfa must lie in (0, 1), got {pfa}"
        )));
    }
    let t = stats.len();
    if t == 0 {
        return Err(Error::InsufficientTrials { trials: 0, pfa });
    }
    if stats.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter(
            "NaN among calibration statistics".into(),
        ));
    }
    // slack absorbs rounding in (1 − pfa)·T when it is an integer
    let idx = (((1.0 - pfa) * t as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut sorted = stats.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[idx.min(t) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub detector: DetectorKind,
    pub threshold: f64,
}

/// Calibrated thresholds; baselines share one entry across cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub pfa: f64,
    pub trials: usize,
    pub entries: Vec<ThresholdEntry>,
}

impl ThresholdTable {
    pub fn get(&self, kind: DetectorKind) -> Option<f64> {
        let key = kind.threshold_key();
        self.entries
            .iter()
            .find(|e| e.detector == key)
            .map(|e| e.threshold)
    }

    pub fn require(&self, kind: DetectorKind) -> Result<f64> {
        self.get(kind)
            .ok_or_else(|| Error::InvalidParameter(format!("no calibrated threshold for {kind}")))
    }
}

/// H0 statistics kept for re-thresholding at several false-alarm rates.
#[derive(Debug, Clone)]
pub struct CalibrationSample {
    pub kinds: Vec<DetectorKind>,
    /// `stats[i]` holds every trial's statistic for `kinds[i]`.
    pub stats: Vec<Vec<f64>>,
}

impl CalibrationSample {
    pub fn trials(&self) -> usize {
        self.stats.first().map_or(0, Vec::len)
    }

    pub fn thresholds(&self, pfa: f64) -> Result<ThresholdTable> {
        check_calibration_size(self.trials(), pfa)?;
        let entries = self
            .kinds
            .iter()
            .zip(&self.stats)
            .map(|(&detector, s)| {
                Ok(ThresholdEntry {
                    detector,
                    threshold: quantile(s, pfa)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ThresholdTable {
            pfa,
            trials: self.trials(),
            entries,
        })
    }
}

fn dedup_keys(kinds: &[DetectorKind]) -> Vec<DetectorKind> {
    let mut keys: Vec<DetectorKind> = Vec::new();
    for k in kinds {
        let key = k.threshold_key();
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys
}

fn transpose(rows: Vec<Vec<DetectionOutcome>>, width: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); width];
    for row in rows {
        for (c, o) in cols.iter_mut().zip(row) {
            c.push(o.statistic);
        }
    }
    cols
}

/// Draws `trials` H0 data sets and records every detector's statistic.
pub fn calibration_sample(
    sim: &Simulation,
    kinds: &[DetectorKind],
    trials: usize,
    seed: u64,
) -> Result<CalibrationSample> {
    let keys = dedup_keys(kinds);
    let rows = sim.simulate(&keys, None, trials, seed, domain_tag("calibrate", 0))?;
    let stats = transpose(rows, keys.len());
    Ok(CalibrationSample { kinds: keys, stats })
}

pub fn calibrate_thresholds(
    sim: &Simulation,
    kinds: &[DetectorKind],
    pfa: f64,
    trials: usize,
    seed: u64,
) -> Result<ThresholdTable> {
    check_calibration_size(trials, pfa)?;
    calibration_sample(sim, kinds, trials, seed)?.thresholds(pfa)
}

pub fn calibrate_threshold(
    sim: &Simulation,
    kind: DetectorKind,
    pfa: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    calibrate_thresholds(sim, &[kind], pfa, trials, seed)?.require(kind)
}

/// One estimated probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub detector: DetectorKind,
    pub x: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl CurvePoint {
    pub fn from_counts(detector: DetectorKind, x: f64, hits: usize, trials: usize) -> Self {
        let p = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        Self {
            detector,
            x,
            estimate: p,
            stderr,
            trials,
        }
    }
}

fn exceedances(
    kinds: &[DetectorKind],
    thresholds: &ThresholdTable,
    rows: &[Vec<DetectionOutcome>],
    x: f64,
) -> Result<Vec<CurvePoint>> {
    let etas: Vec<f64> = kinds
        .iter()
        .map(|&k| thresholds.require(k))
        .collect::<Result<_>>()?;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let hits = rows.iter().filter(|r| r[i].statistic > etas[i]).count();
            CurvePoint::from_counts(k, x, hits, rows.len())
        })
        .collect())
}

/// Empirical false-alarm rate of each detector under `sim`.
pub fn false_alarm_rate(
    sim: &Simulation,
    thresholds: &ThresholdTable,
    kinds: &[DetectorKind],
    trials: usize,
    seed: u64,
    domain: u64,
    x: f64,
) -> Result<Vec<CurvePoint>> {
    let rows = sim.simulate(kinds, None, trials, seed, domain)?;
    exceedances(kinds, thresholds, &rows, x)
}

/// P_d per SINR point; output grouped by SINR, detectors in `kinds` order.
pub fn pd_curve(
    sim: &Simulation,
    thresholds: &ThresholdTable,
    kinds: &[DetectorKind],
    sinr_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(sinr_grid.len() * kinds.len());
    for (i, &sinr) in sinr_grid.iter().enumerate() {
        let target = sim.target(sinr)?;
        let rows = sim.simulate(
            kinds,
            Some(&target),
            trials,
            seed,
            domain_tag("pd", i as u64),
        )?;
        out.extend(exceedances(kinds, thresholds, &rows, sinr)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Cnr,
    Rho,
}

/// Empirical P_fa with fixed thresholds while CNR or ρ varies.
pub fn cfar_sweep(
    cfg: &RunConfig,
    thresholds: &ThresholdTable,
    kinds: &[DetectorKind],
    axis: SweepAxis,
    values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(values.len() * kinds.len());
    for (i, &v) in values.iter().enumerate() {
        let mut model = cfg.model.clone();
        let label = match axis {
            SweepAxis::Cnr => {
                model.cnr_db = v;
                "cfar-cnr"
            }
            SweepAxis::Rho => {
                model.rho = v;
                "cfar-rho"
            }
        };
        let sim = Simulation::with_model(cfg, &model)?;
        out.extend(false_alarm_rate(
            &sim,
            thresholds,
            kinds,
            trials,
            seed,
            domain_tag(label, i as u64),
            v,
        )?);
    }
    Ok(out)
}

/// `sqrt(mean((x̂ − x)²))`.
pub fn rmse(truth: usize, estimates: impl IntoIterator<Item = usize>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for e in estimates {
        let d = e as f64 - truth as f64;
        sum += d * d;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsePoint {
    pub detector: DetectorKind,
    pub sinr_db: f64,
    pub rmse_n: f64,
    pub rmse_m: f64,
    pub trials: usize,
}

/// Localization error of `(n̂, m̂)` against the true bins, per SINR.
pub fn rmse_nm(
    sim: &Simulation,
    kinds: &[DetectorKind],
    sinr_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<RmsePoint>> {
    let kinds: Vec<DetectorKind> = kinds.iter().copied().filter(|k| !k.is_baseline()).collect();
    let mut out = Vec::new();
    for (i, &sinr) in sinr_grid.iter().enumerate() {
        let target = sim.target(sinr)?;
        let rows = sim.simulate(
            &kinds,
            Some(&target),
            trials,
            seed,
            domain_tag("rmse", i as u64),
        )?;
        for (j, &k) in kinds.iter().enumerate() {
            let pairs: Vec<(usize, usize)> = rows.iter().filter_map(|r| r[j].pair).collect();
            out.push(RmsePoint {
                detector: k,
                sinr_db: sinr,
                rmse_n: rmse(sim.layout.n, pairs.iter().map(|p| p.0)),
                rmse_m: rmse(sim.layout.m, pairs.iter().map(|p| p.1)),
                trials,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    /// True bins of the simulated echoes, also the traced pair.
    pub pair: (usize, usize),
    /// Mean relative gain after iteration `h = 1..=h_max`.
    pub mean_gain: Vec<f64>,
}

impl ConvergenceCurve {
    /// First iteration whose mean gain is below `epsilon`.
    pub fn first_below(&self, epsilon: f64) -> Option<usize> {
        self.mean_gain
            .iter()
            .position(|&g| g < epsilon)
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub curves: Vec<ConvergenceCurve>,
    /// Coordinate updates examined and how many lowered the likelihood.
    pub updates: usize,
    pub violations: usize,
    pub trials: usize,
}

/// For each pair, simulates H1 data with the echoes at that pair, runs every
/// iteration of the cyclic estimation there and averages the relative gains.
pub fn convergence_study(
    sim: &Simulation,
    sinr_db: f64,
    pairs: &[(usize, usize)],
    trials: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    let pairs: Vec<(usize, usize)> = if pairs.is_empty() {
        vec![(sim.layout.n, sim.layout.m)]
    } else {
        pairs.to_vec()
    };
    let h_max = sim.c_glrt.h_max;
    let mut report = ConvergenceReport {
        curves: Vec::new(),
        updates: 0,
        violations: 0,
        trials,
    };
    for (i, &(n, m)) in pairs.iter().enumerate() {
        let layout = BinLayout::new(n, m, sim.k_p)?;
        let target = TargetParams {
            layout,
            ..sim.target(sinr_db)?
        };
        let traces = run_trials(trials, seed, domain_tag("convergence", i as u64), |rng| {
            let data = synthesize_with(
                Hypothesis::H1,
                &target,
                &sim.covariance,
                &sim.steering,
                sim.k_p,
                sim.k_s,
                rng,
            )?;
            Prepared::new(&data, &sim.steering)?.c_glrt_trace(&sim.c_glrt, n, m)
        })?;
        let mut sum = vec![0.0; h_max];
        for t in &traces {
            for (s, g) in sum.iter_mut().zip(&t.gains) {
                *s += g;
            }
            report.updates += t.log_dets.len() - 1;
            report.violations += t.violations;
        }
        let mean_gain = sum.into_iter().map(|s| s / trials.max(1) as f64).collect();
        report.curves.push(ConvergenceCurve {
            pair: (n, m),
            mean_gain,
        });
    }
    Ok(report)
}

/// P_d of a `K_P`-cell window sliding over `n_bins` range bins holding the
/// three echoes at `target_bins`; `x` is the 1-based window start.
#[allow(clippy::too_many_arguments)]
pub fn sliding_window(
    sim: &Simulation,
    thresholds: &ThresholdTable,
    kinds: &[DetectorKind],
    sinr_db: f64,
    n_bins: usize,
    target_bins: [usize; 3],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if n_bins < sim.k_p {
        return Err(Error::InvalidParameter(format!(
            "{n_bins} range bins cannot hold a window of {}",
            sim.k_p
        )));
    }
    let target = sim.target(sinr_db)?;
    let sigs = sim.steering.ordered();
    let echoes: Vec<Echo<'_>> = (0..3)
        .map(|i| Echo {
            cell: target_bins[i],
            amplitude: target.alpha[i],
            signature: sigs[i],
        })
        .collect();
    let positions = n_bins - sim.k_p + 1;
    let etas: Vec<f64> = kinds
        .iter()
        .map(|&k| thresholds.require(k))
        .collect::<Result<_>>()?;
    let hits = run_trials(trials, seed, domain_tag("sliding-window", 0), |rng| {
        let data = synthesize_cells(n_bins, &echoes, sim.k_s, &sim.covariance, rng)?;
        let mut row = vec![false; positions * kinds.len()];
        for start in 1..=positions {
            let w = data.window(start, sim.k_p)?;
            let outs = Prepared::new(&w, &sim.steering)?.evaluate(kinds, &sim.c_glrt)?;
            for (j, o) in outs.iter().enumerate() {
                row[(start - 1) * kinds.len() + j] = o.statistic > etas[j];
            }
        }
        Ok(row)
    })?;
    let mut out = Vec::with_capacity(positions * kinds.len());
    for start in 1..=positions {
        for (j, &k) in kinds.iter().enumerate() {
            let idx = (start - 1) * kinds.len() + j;
            let count = hits.iter().filter(|r| r[idx]).count();
            out.push(CurvePoint::from_counts(k, start as f64, count, trials));
        }
    }
    Ok(out)
}
