//! Run configuration: scenario geometry, signal model, detector set and
//! experiment sizes. Every section has defaults matching the case study, so
//! a configuration file only lists what it changes.

use serde::{Deserialize, Serialize};

use crate::detectors::{Baseline, CGlrtConfig, DetectorKind};
use crate::error::{Error, Result};
use crate::geometry::{bin_layout, compute_delays, path_distances, BinLayout, ScenarioGeometry};
use crate::signal_model::{CovarianceModel, SteeringSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Array elements.
    pub n: usize,
    /// Primary window length.
    pub k_p: usize,
    /// Training vectors.
    pub k_s: usize,
    pub theta_r_deg: f64,
    pub theta_s_deg: f64,
    pub cnr_db: f64,
    pub noise_power: f64,
    pub rho: f64,
    /// `α_n = α_m = alpha_ratio · α_1`.
    pub alpha_ratio: f64,
    /// Explicit `(n, m)`; derived from the scenario geometry when absent.
    pub bins: Option<(usize, usize)>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n: 16,
            k_p: 6,
            k_s: 24,
            theta_r_deg: 0.5,
            theta_s_deg: -0.4,
            cnr_db: 25.0,
            noise_power: 1.0,
            rho: 0.9,
            alpha_ratio: 10.0,
            bins: None,
        }
    }
}

impl ModelConfig {
    pub fn covariance(&self) -> Result<CovarianceModel> {
        CovarianceModel::from_cnr_db(self.cnr_db, self.noise_power, self.rho, self.n)
    }

    pub fn steering(&self) -> Result<SteeringSet> {
        SteeringSet::spatial(self.theta_r_deg, self.theta_s_deg, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("model.n must be >= 1".into()));
        }
        if self.k_p < 3 {
            return Err(Error::InvalidParameter("model.k_p must be >= 3".into()));
        }
        if self.k_s < self.n {
            return Err(Error::InvalidParameter(format!(
                "model.k_s = {} is below model.n = {}",
                self.k_s, self.n
            )));
        }
        if !(self.alpha_ratio.is_finite() && self.alpha_ratio >= 0.0) {
            return Err(Error::InvalidParameter(
                "model.alpha_ratio must be finite and >= 0".into(),
            ));
        }
        self.covariance()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorsConfig {
    pub list: Vec<DetectorKind>,
    pub c_glrt: CGlrtConfig,
}

impl Default for DetectorsConfig {
    fn default() -> Self {
        let mut list = DetectorKind::PROPOSED.to_vec();
        list.push(DetectorKind::Kelly(Baseline::default()));
        list.push(DetectorKind::Amf(Baseline::default()));
        Self {
            list,
            c_glrt: CGlrtConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// pfa 1e−3, 10⁵ calibration trials, 10³ detection trials.
    Desk,
    /// pfa 1e−4, 10⁶ calibration trials, 10⁴ detection trials.
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::InvalidParameter(format!(
                "unknown profile '{s}' (desk|paper)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlidingWindowConfig {
    pub n_bins: usize,
    /// Absolute bins of the RTR, single-bounce and double-bounce echoes.
    pub target_bins: [usize; 3],
    pub sinr_db: f64,
}

impl Default for SlidingWindowConfig {
    fn default() -> Self {
        Self {
            n_bins: 20,
            target_bins: [1, 3, 6],
            sinr_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub trials: usize,
    pub sinr_db: f64,
    /// Pairs at which the cyclic estimation is traced; the true pair when empty.
    pub pairs: Vec<(usize, usize)>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            sinr_db: 0.0,
            pairs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pfa: f64,
    pub trials_cal: usize,
    pub trials_pd: usize,
    pub sinr_grid: Vec<f64>,
    pub cnr_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub master_seed: u64,
    pub sliding_window: SlidingWindowConfig,
    pub convergence: ConvergenceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Desk)
    }
}

impl ExperimentConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let (pfa, trials_cal, trials_pd) = match profile {
            Profile::Desk => (1e-3, 100_000, 1_000),
            Profile::Paper => (1e-4, 1_000_000, 10_000),
        };
        Self {
            pfa,
            trials_cal,
            trials_pd,
            sinr_grid: (-30..=30).step_by(2).map(f64::from).collect(),
            cnr_grid: vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            rho_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            master_seed: 1,
            sliding_window: SlidingWindowConfig::default(),
            convergence: ConvergenceConfig::default(),
        }
    }

    /// Applies a profile's pfa and trial counts, keeping everything else.
    pub fn apply_profile(&mut self, profile: Profile) {
        let p = Self::for_profile(profile);
        self.pfa = p.pfa;
        self.trials_cal = p.trials_cal;
        self.trials_pd = p.trials_pd;
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "experiment.pfa must lie in (0, 1), got {}",
                self.pfa
            )));
        }
        check_calibration_size(self.trials_cal, self.pfa)?;
        if self.trials_pd == 0 {
            return Err(Error::InvalidParameter(
                "experiment.trials_pd must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Calibration needs at least `10 / pfa` trials.
pub fn check_calibration_size(trials: usize, pfa: f64) -> Result<()> {
    if (trials as f64) * pfa < 10.0 - 1e-9 {
        return Err(Error::InsufficientTrials { trials, pfa });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioGeometry,
    pub model: ModelConfig,
    pub detectors: DetectorsConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.model.validate()?;
        self.detectors.c_glrt.validate()?;
        self.experiment.validate()?;
        self.layout()?;
        Ok(())
    }

    /// True `(n, m)` bins: explicit override or derived from the geometry.
    pub fn layout(&self) -> Result<BinLayout> {
        match self.model.bins {
            Some((n, m)) => BinLayout::new(n, m, self.model.k_p),
            None => {
                let delays = compute_delays(&path_distances(&self.scenario)?)?;
                bin_layout(&delays, self.scenario.range_resolution, self.model.k_p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_give_case_study_bins() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let l = c.layout().unwrap();
        assert_eq!((l.n, l.m), (3, 6));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"model": {"rho": 0.5}, "experiment": {"master_seed": 9}}"#)
                .unwrap();
        assert_eq!(c.model.rho, 0.5);
        assert_eq!(c.model.n, 16);
        assert_eq!(c.experiment.master_seed, 9);
        assert_eq!(c.scenario, ScenarioGeometry::case_study());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"model": {"rh": 0.5}}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }

    #[test]
    fn profiles() {
        let p = ExperimentConfig::for_profile(Profile::Paper);
        assert_eq!(
            (p.pfa, p.trials_cal, p.trials_pd),
            (1e-4, 1_000_000, 10_000)
        );
        p.validate().unwrap();
        let mut d = ExperimentConfig::default();
        d.trials_cal = 9_999;
        assert!(matches!(
            d.validate(),
            Err(Error::InsufficientTrials { .. })
        ));
        d.trials_cal = 10_000;
        d.validate().unwrap();
    }

    #[test]
    fn too_few_training_vectors() {
        let mut c = RunConfig::default();
        c.model.k_s = 15;
        assert!(c.validate().is_err());
    }
}
