//! Decision statistics for the three-echo (RTR, RSTR/RTSR, RSTSR) model and
//! the single-cell Kelly/AMF baselines.
//!
//! Every proposed detector maximizes over the candidate bins
//! `n ∈ {2..K_P}`, `m ∈ {n+1..K_P}`; ties resolve to the first pair in
//! lexicographic order. Determinant ratios are handled as log-determinant
//! differences and exponentiated only in [`DetectionOutcome::statistic`].
//!
//! Two evaluation routes exist. [`Prepared`] factors `S_S` once per data set
//! and evaluates every pair in a small whitened basis; [`direct`] forms and
//! factors each `S_{n,m}` and residual-augmented matrix explicitly. They are
//! algebraically identical and cross-checked in tests.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{cholesky, gram, CMat, CVec, HermitianFactor};
use crate::signal_model::{DataSet, SteeringSet};

pub mod direct;
mod engine;

pub use engine::{CGlrtTrace, PairSpace, Prepared};

/// Which of `v_R`, `v_SR`, `v_S` a baseline detector matches against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Signature {
    R,
    SR,
    S,
}

impl Signature {
    pub(crate) fn slot(self) -> usize {
        match self {
            Signature::R => 0,
            Signature::SR => 1,
            Signature::S => 2,
        }
    }

    pub fn vector(self, steering: &SteeringSet) -> &CVec {
        steering.ordered()[self.slot()]
    }
}

/// Cell (1-based) and signature fed to Kelly's GLRT or the AMF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Baseline {
    pub cell: usize,
    pub signature: Signature,
}

impl Default for Baseline {
    fn default() -> Self {
        Self {
            cell: 1,
            signature: Signature::R,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    EpGlrtKm1,
    EpGlrtKm2,
    EpGlrtKa,
    CGlrt,
    AGlrt,
    Kelly(Baseline),
    Amf(Baseline),
}

impl DetectorKind {
    /// The five detectors that search over `(n, m)`.
    pub const PROPOSED: [DetectorKind; 5] = [
        DetectorKind::EpGlrtKm1,
        DetectorKind::EpGlrtKm2,
        DetectorKind::EpGlrtKa,
        DetectorKind::CGlrt,
        DetectorKind::AGlrt,
    ];

    pub fn is_baseline(&self) -> bool {
        matches!(self, DetectorKind::Kelly(_) | DetectorKind::Amf(_))
    }

    /// Statistic is a determinant ratio (scale invariant) rather than an energy.
    pub fn is_det_ratio(&self) -> bool {
        matches!(
            self,
            DetectorKind::EpGlrtKa | DetectorKind::CGlrt | DetectorKind::AGlrt
        )
    }

    pub fn baseline(&self) -> Option<Baseline> {
        match self {
            DetectorKind::Kelly(b) | DetectorKind::Amf(b) => Some(*b),
            _ => None,
        }
    }

    /// Same detector with the baseline cell/signature reset to the default,
    /// used to share one threshold across cells.
    pub fn threshold_key(&self) -> DetectorKind {
        match self {
            DetectorKind::Kelly(_) => DetectorKind::Kelly(Baseline::default()),
            DetectorKind::Amf(_) => DetectorKind::Amf(Baseline::default()),
            other => *other,
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, b) = match self {
            DetectorKind::EpGlrtKm1 => return f.write_str("EP-GLRT-KM-1"),
            DetectorKind::EpGlrtKm2 => return f.write_str("EP-GLRT-KM-2"),
            DetectorKind::EpGlrtKa => return f.write_str("EP-GLRT-KA"),
            DetectorKind::CGlrt => return f.write_str("C-GLRT"),
            DetectorKind::AGlrt => return f.write_str("A-GLRT"),
            DetectorKind::Kelly(b) => ("KELLY", b),
            DetectorKind::Amf(b) => ("AMF", b),
        };
        f.write_str(head)?;
        if *b != Baseline::default() {
            let sig = match b.signature {
                Signature::R => "R",
                Signature::SR => "SR",
                Signature::S => "S",
            };
            write!(f, "@{}:{}", b.cell, sig)?;
        }
        Ok(())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    /// Accepts the display names, case-insensitively; baselines take an
    /// optional `@cell` and `:R|SR|S`, e.g. `KELLY@3:SR`.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let simple = match upper.as_str() {
            "EP-GLRT-KM-1" | "KM1" => Some(DetectorKind::EpGlrtKm1),
            "EP-GLRT-KM-2" | "KM2" => Some(DetectorKind::EpGlrtKm2),
            "EP-GLRT-KA" | "KA" => Some(DetectorKind::EpGlrtKa),
            "C-GLRT" => Some(DetectorKind::CGlrt),
            "A-GLRT" => Some(DetectorKind::AGlrt),
            _ => None,
        };
        if let Some(k) = simple {
            return Ok(k);
        }
        let bad = || Error::InvalidParameter(format!("unknown detector '{s}'"));
        let (head, rest) = match upper.find(['@', ':']) {
            Some(i) => upper.split_at(i),
            None => (upper.as_str(), ""),
        };
        let (cell_part, sig_part) = match rest.find(':') {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, ""),
        };
        let cell = match cell_part.strip_prefix('@') {
            Some(c) => c.parse::<usize>().map_err(|_| bad())?,
            None if cell_part.is_empty() => 1,
            None => return Err(bad()),
        };
        let signature = match sig_part {
            "" | "R" => Signature::R,
            "SR" => Signature::SR,
            "S" => Signature::S,
            _ => return Err(bad()),
        };
        if cell == 0 {
            return Err(bad());
        }
        let b = Baseline { cell, signature };
        match head {
            "KELLY" => Ok(DetectorKind::Kelly(b)),
            "AMF" => Ok(DetectorKind::Amf(b)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for DetectorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DetectorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of one detector on one data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub statistic: f64,
    /// `(n̂, m̂)`; `None` for the baselines.
    pub pair: Option<(usize, usize)>,
    /// C-GLRT iterations at the selected pair.
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CGlrtConfig {
    pub epsilon: f64,
    pub h_max: usize,
}

impl Default for CGlrtConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            h_max: 20,
        }
    }
}

impl CGlrtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C-GLRT epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.h_max == 0 {
            return Err(Error::InvalidParameter("C-GLRT h_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Enumerates the candidate pairs in lexicographic order.
pub fn candidate_pairs(k_p: usize) -> impl Iterator<Item = (usize, usize)> {
    (2..=k_p).flat_map(move |n| (n + 1..=k_p).map(move |m| (n, m)))
}

/// `v† W⁻¹ z / v† W⁻¹ v`.
pub fn alpha_hat(v: &CVec, w: &HermitianFactor, z: &CVec) -> Result<Complex64> {
    if v.len() != w.dim() || z.len() != w.dim() {
        return Err(Error::DimensionMismatch("alpha_hat operand lengths".into()));
    }
    let wv = w.whiten(v.as_slice());
    let wz = w.whiten(z.as_slice());
    let num = crate::hermitian::dot(&wv, &wz);
    let den = crate::hermitian::norm_sqr(&wv);
    Ok(num / den)
}

/// Threshold-free variant selector for the known-matrix plug-in test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KmVariant {
    /// Plug `S_S`.
    One,
    /// Plug `S_{n,m}`.
    Two,
}

pub fn ep_glrt_km(
    data: &DataSet,
    steering: &SteeringSet,
    variant: KmVariant,
) -> Result<DetectionOutcome> {
    let p = Prepared::new(data, steering)?;
    Ok(p.ep_glrt_km(variant))
}

pub fn ep_glrt_ka(data: &DataSet, steering: &SteeringSet) -> Result<DetectionOutcome> {
    Prepared::new(data, steering)?.ep_glrt_ka()
}

pub fn a_glrt(data: &DataSet, steering: &SteeringSet) -> Result<DetectionOutcome> {
    Prepared::new(data, steering)?.a_glrt()
}

pub fn c_glrt(
    data: &DataSet,
    steering: &SteeringSet,
    cfg: &CGlrtConfig,
) -> Result<DetectionOutcome> {
    cfg.validate()?;
    Prepared::new(data, steering)?.c_glrt(cfg)
}

fn secondary_factor(z: &[Complex64], r: &CMat, v: &CVec) -> Result<HermitianFactor> {
    let n = r.nrows();
    if z.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch("baseline operand lengths".into()));
    }
    if r.ncols() < n {
        return Err(Error::InvalidParameter(format!(
            "K_S = {} training vectors is below N = {n}",
            r.ncols()
        )));
    }
    cholesky(&gram(r))
}

/// Kelly's GLRT `|v†S⁻¹z|² / [(v†S⁻¹v)(1 + z†S⁻¹z)]` with `S = R R†`.
pub fn kelly(z: &[Complex64], r: &CMat, v: &CVec) -> Result<f64> {
    let f = secondary_factor(z, r, v)?;
    let wz = f.whiten(z);
    let wv = f.whiten(v.as_slice());
    let num = crate::hermitian::dot(&wv, &wz).norm_sqr();
    Ok(num / (crate::hermitian::norm_sqr(&wv) * (1.0 + crate::hermitian::norm_sqr(&wz))))
}

/// Adaptive matched filter `|v†S⁻¹z|² / (v†S⁻¹v)` with `S = R R†`.
pub fn amf(z: &[Complex64], r: &CMat, v: &CVec) -> Result<f64> {
    let f = secondary_factor(z, r, v)?;
    let wz = f.whiten(z);
    let wv = f.whiten(v.as_slice());
    let num = crate::hermitian::dot(&wv, &wz).norm_sqr();
    Ok(num / crate::hermitian::norm_sqr(&wv))
}

/// Evaluates a list of detectors on one data set, sharing the factorizations.
pub fn evaluate(
    data: &DataSet,
    steering: &SteeringSet,
    kinds: &[DetectorKind],
    cfg: &CGlrtConfig,
) -> Result<Vec<DetectionOutcome>> {
    Prepared::new(data, steering)?.evaluate(kinds, cfg)
}

/// Alignment above which `v_SR` is treated as parallel to `v_R` or `v_S`.
/// Slack allowed on a likelihood increase before a cyclic update is reported as
/// non-monotone. The second term covers cancellation in residual Gram entries,
/// which grows with the largest whitened cell energy.
pub(crate) fn monotone_slack(prev: f64, energy: f64) -> f64 {
    1e-9 * (1.0 + prev.abs()) + 64.0 * f64::EPSILON * energy
}

pub const PARALLEL_ALIGNMENT: f64 = 1.0 - 1e-9;

/// Emits a warning when the composite signature is numerically parallel to
/// one of its components; the statistics remain well defined in that case.
pub fn warn_if_degenerate(steering: &SteeringSet) -> bool {
    let a = steering.composite_alignment();
    let degenerate = a > PARALLEL_ALIGNMENT;
    if degenerate {
        log::warn!("v_SR is numerically parallel to v_R or v_S (alignment {a:.12})");
    }
    degenerate
}
