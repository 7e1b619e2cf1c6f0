//! Pair evaluation in the `S_S`-whitened basis.
//!
//! With `L L† = S_S`, every vector entering a statistic is one of
//! `v_R, v_SR, v_S, z_1, …, z_{K_P}`. After whitening, all inner products
//! `a† S_S⁻¹ b` live in one `(3 + K_P)`-square Gram matrix. For a pair
//! `(n, m)`, `S_{n,m} = S_S + Z_O Z_O†` with `O` the remaining cells, so
//! `a† S_{n,m}⁻¹ b` is the Schur complement of `I + Z̃_O† Z̃_O` and
//! `log det S_{n,m} − log det S_S = log det(I + Z̃_O† Z̃_O)`. The residual
//! terms of each detector then reduce to 3x3 determinants over the six
//! vectors `[v_R, v_SR, v_S, z_1, z_n, z_m]`. Only positive semidefinite
//! updates are applied; nothing is downdated.

use nalgebra::{Matrix2, Matrix3, SMatrix, SVector};
use num_complex::Complex64;

use super::{
    candidate_pairs, monotone_slack, Baseline, CGlrtConfig, DetectionOutcome, DetectorKind,
    KmVariant,
};
use crate::error::{Error, Result};
use crate::hermitian::{cholesky, column, CMat};
use crate::signal_model::{DataSet, SteeringSet};

type V6 = SVector<Complex64, 6>;
type M6 = SMatrix<Complex64, 6, 6>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Per-data-set state shared by all detectors.
#[derive(Debug, Clone)]
pub struct Prepared {
    k_p: usize,
    k_total: usize,
    /// Gram matrix of the whitened `[v_R, v_SR, v_S, z_1..z_{K_P}]`.
    gram: CMat,
    /// `log det(S_P + S_S) − log det S_S`.
    log_num: f64,
    pairs: Vec<PairSpace>,
}

/// Inner products for one candidate pair, in the basis
/// `[v_R, v_SR, v_S, z_1, z_n, z_m]`.
#[derive(Debug, Clone)]
pub struct PairSpace {
    pub n: usize,
    pub m: usize,
    /// `log det S_{n,m} − log det S_S`.
    pub log_snm: f64,
    /// `S_S` metric.
    g: M6,
    /// `S_{n,m}` metric.
    h: M6,
}

/// Full C-GLRT history at one pair, run for all `h_max` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct CGlrtTrace {
    pub pair: (usize, usize),
    /// Relative likelihood gain after each iteration (length `h_max`).
    pub gains: Vec<f64>,
    /// `log det` of the residual-augmented matrix relative to `S_{n,m}`,
    /// at initialization and after every coordinate update.
    pub log_dets: Vec<f64>,
    /// Number of likelihood decreases beyond rounding slack.
    pub violations: usize,
    pub log_statistic: f64,
}

fn small_logdet<const D: usize>(m: SMatrix<Complex64, D, D>) -> Option<f64> {
    let c = nalgebra::Cholesky::new(m)?;
    let l = c.l_dirty();
    Some((0..D).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

#[inline]
fn ip(metric: &M6, x: &V6, y: &V6) -> Complex64 {
    x.dotc(&(metric * y))
}

#[inline]
fn unit(i: usize) -> V6 {
    let mut e = V6::zeros();
    e[i] = ONE;
    e
}

/// `z_s − α v_s` in the six-vector basis.
#[inline]
fn residual(slot: usize, alpha: Complex64) -> V6 {
    let mut r = V6::zeros();
    r[3 + slot] = ONE;
    r[slot] = -alpha;
    r
}

fn alpha_in(metric: &M6, slot: usize) -> Complex64 {
    metric[(slot, 3 + slot)] / metric[(slot, slot)].re
}

fn not_finite(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} statistic is not finite"))
}

impl PairSpace {
    /// `log det(I₃ + R† S_{n,m}⁻¹ R)` for residual columns `R`.
    fn residual_logdet(&self, r: &[V6; 3]) -> Result<f64> {
        let q = Matrix3::from_fn(|i, j| {
            let d = if i == j { ONE } else { ZERO };
            d + ip(&self.h, &r[i], &r[j])
        });
        small_logdet(q).ok_or(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        })
    }

    fn energies(metric: &M6) -> [f64; 3] {
        std::array::from_fn(|s| metric[(s, 3 + s)].norm_sqr() / metric[(s, s)].re)
    }

    pub fn km(&self, variant: KmVariant) -> f64 {
        let metric = match variant {
            KmVariant::One => &self.g,
            KmVariant::Two => &self.h,
        };
        Self::energies(metric).iter().sum()
    }

    /// Amplitude estimates `α̂(S_S)` (`plug = One`) or `ᾱ = α̂(S_{n,m})`.
    pub fn alphas(&self, plug: KmVariant) -> [Complex64; 3] {
        let metric = match plug {
            KmVariant::One => &self.g,
            KmVariant::Two => &self.h,
        };
        std::array::from_fn(|s| alpha_in(metric, s))
    }

    fn log_ratio_at(&self, log_num: f64, alpha: &[Complex64; 3]) -> Result<f64> {
        let r = std::array::from_fn(|s| residual(s, alpha[s]));
        Ok(log_num - self.log_snm - self.residual_logdet(&r)?)
    }

    /// `α_s` maximizing the likelihood with the other two amplitudes fixed.
    fn coordinate_update(&self, slot: usize, alpha: &[Complex64; 3]) -> Complex64 {
        let (a, b) = match slot {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let ra = residual(a, alpha[a]);
        let rb = residual(b, alpha[b]);
        let hra = self.h * ra;
        let hrb = self.h * rb;
        // (I₂ + U† S⁻¹ U)⁻¹ with U = [r_a, r_b]
        let g = Matrix2::new(
            ONE + ra.dotc(&hra),
            ra.dotc(&hrb),
            rb.dotc(&hra),
            ONE + rb.dotc(&hrb),
        );
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        let ginv =
            Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / Complex64::new(det, 0.0);
        // x† C⁻¹ y = x†S⁻¹y − (x†S⁻¹U) G⁻¹ (U†S⁻¹y)
        let v = unit(slot);
        let z = unit(3 + slot);
        let left = |x: &V6| nalgebra::RowVector2::new(hra.dotc(x).conj(), hrb.dotc(x).conj());
        let right = |y: &V6| nalgebra::Vector2::new(hra.dotc(y), hrb.dotc(y));
        let cvz = ip(&self.h, &v, &z) - (left(&v) * ginv * right(&z))[0];
        let cvv = ip(&self.h, &v, &v) - (left(&v) * ginv * right(&v))[0];
        cvz / cvv.re
    }

    /// Cyclic estimation from the A-GLRT amplitudes. Returns
    /// `(log statistic, iterations)`; with `trace` set, every iteration up
    /// to `h_max` runs and the history is recorded.
    fn cyclic(
        &self,
        log_num: f64,
        k_total: usize,
        cfg: &CGlrtConfig,
        mut trace: Option<&mut CGlrtTrace>,
    ) -> Result<(f64, usize)> {
        let mut alpha = self.alphas(KmVariant::Two);
        let residuals = |a: &[Complex64; 3]| std::array::from_fn(|s| residual(s, a[s]));
        let mut prev_iter = self.residual_logdet(&residuals(&alpha))?;
        if let Some(t) = trace.as_deref_mut() {
            t.log_dets.push(prev_iter);
        }
        let energy = (3..6).map(|i| self.h[(i, i)].re).fold(0.0, f64::max);
        let mut iterations = cfg.h_max;
        for h in 1..=cfg.h_max {
            let mut prev = prev_iter;
            for slot in 0..3 {
                alpha[slot] = self.coordinate_update(slot, &alpha);
                let cur = self.residual_logdet(&residuals(&alpha))?;
                if cur > prev + monotone_slack(prev, energy) {
                    match trace.as_deref_mut() {
                        Some(t) => t.violations += 1,
                        None => {
                            return Err(Error::NonMonotonic {
                                n: self.n,
                                m: self.m,
                                update: 3 * (h - 1) + slot + 1,
                                before: prev,
                                after: cur,
                            })
                        }
                    }
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.log_dets.push(cur);
                }
                prev = cur;
            }
            // g ∝ det(·)^(−K): relative gain of g over one full iteration
            let gain = (-(k_total as f64) * (prev - prev_iter)).exp_m1().max(0.0);
            prev_iter = prev;
            match trace.as_deref_mut() {
                Some(t) => t.gains.push(gain),
                None => {
                    if gain < cfg.epsilon {
                        iterations = h;
                        break;
                    }
                }
            }
        }
        Ok((log_num - self.log_snm - prev_iter, iterations))
    }
}

impl Prepared {
    pub fn new(data: &DataSet, steering: &SteeringSet) -> Result<Self> {
        data.validate()?;
        let n = data.dim();
        if steering.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "steering vectors have length {}, data has {n} rows",
                steering.dim()
            )));
        }
        let k_p = data.k_p();
        if k_p < 3 {
            return Err(Error::InvalidParameter(format!(
                "the primary window needs K_P >= 3 cells, got {k_p}"
            )));
        }
        let ss = crate::hermitian::gram(&data.secondary);
        let f = cholesky(&ss)?;

        let cols = 3 + k_p;
        let mut w = CMat::zeros(n, cols);
        {
            let buf = w.as_mut_slice();
            for (c, v) in steering.ordered().iter().enumerate() {
                f.whiten_into(v.as_slice(), &mut buf[c * n..(c + 1) * n]);
            }
            for k in 0..k_p {
                f.whiten_into(column(&data.primary, k), &mut buf[(3 + k) * n..(4 + k) * n]);
            }
        }
        let gram = w.adjoint() * &w;

        let zz = CMat::from_fn(k_p, k_p, |i, j| {
            let d = if i == j { ONE } else { ZERO };
            d + gram[(3 + i, 3 + j)]
        });
        let log_num = cholesky(&zz)?.logdet();

        let mut pairs = Vec::with_capacity((k_p - 1) * (k_p - 2) / 2);
        for (pn, pm) in candidate_pairs(k_p) {
            pairs.push(Self::pair_space(&gram, k_p, pn, pm)?);
        }
        Ok(Self {
            k_p,
            k_total: k_p + data.k_s(),
            gram,
            log_num,
            pairs,
        })
    }

    fn pair_space(gram: &CMat, k_p: usize, n: usize, m: usize) -> Result<PairSpace> {
        // z_k sits at Gram index 2 + k
        let a_idx = [0, 1, 2, 3, 2 + n, 2 + m];
        let g = M6::from_fn(|i, j| gram[(a_idx[i], a_idx[j])]);
        let others: Vec<usize> = (2..=k_p)
            .filter(|&k| k != n && k != m)
            .map(|k| 2 + k)
            .collect();
        if others.is_empty() {
            return Ok(PairSpace {
                n,
                m,
                log_snm: 0.0,
                g,
                h: g,
            });
        }
        let o = others.len();
        let e = CMat::from_fn(o, o, |i, j| {
            let d = if i == j { ONE } else { ZERO };
            d + gram[(others[i], others[j])]
        });
        let fe = cholesky(&e)?;
        let mut rhs = vec![ZERO; o];
        let mut out = vec![ZERO; o];
        let mut proj = vec![vec![ZERO; o]; 6];
        for (j, &aj) in a_idx.iter().enumerate() {
            for (i, &oi) in others.iter().enumerate() {
                rhs[i] = gram[(oi, aj)];
            }
            fe.whiten_into(&rhs, &mut out);
            proj[j].copy_from_slice(&out);
        }
        let mut h = g;
        for i in 0..6 {
            for j in 0..6 {
                let s: Complex64 = proj[i]
                    .iter()
                    .zip(&proj[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                h[(i, j)] -= s;
            }
            h[(i, i)].im = 0.0;
        }
        Ok(PairSpace {
            n,
            m,
            log_snm: fe.logdet(),
            g,
            h,
        })
    }

    pub fn k_p(&self) -> usize {
        self.k_p
    }

    /// `K = K_P + K_S`.
    pub fn k_total(&self) -> usize {
        self.k_total
    }

    pub fn pairs(&self) -> &[PairSpace] {
        &self.pairs
    }

    pub fn pair(&self, n: usize, m: usize) -> Result<&PairSpace> {
        self.pairs
            .iter()
            .find(|p| p.n == n && p.m == m)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "({n}, {m}) is not a candidate pair for K_P = {}",
                    self.k_p
                ))
            })
    }

    /// `log det(S_P + S_S) − log det S_S`.
    pub fn log_numerator(&self) -> f64 {
        self.log_num
    }

    fn argmax<F>(&self, what: &str, mut f: F) -> Result<(f64, usize)>
    where
        F: FnMut(&PairSpace) -> Result<f64>,
    {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in self.pairs.iter().enumerate() {
            let v = f(p)?;
            if v.is_nan() {
                return Err(not_finite(what));
            }
            if v > best.0 {
                best = (v, i);
            }
        }
        Ok(best)
    }

    fn outcome(
        &self,
        statistic: f64,
        idx: usize,
        iterations: Option<usize>,
        what: &str,
    ) -> Result<DetectionOutcome> {
        if !statistic.is_finite() {
            return Err(not_finite(what));
        }
        let p = &self.pairs[idx];
        Ok(DetectionOutcome {
            statistic,
            pair: Some((p.n, p.m)),
            iterations,
        })
    }

    pub fn ep_glrt_km(&self, variant: KmVariant) -> DetectionOutcome {
        let (v, i) = self
            .argmax("EP-GLRT-KM", |p| Ok(p.km(variant)))
            .expect("energy sums are finite");
        let p = &self.pairs[i];
        DetectionOutcome {
            statistic: v,
            pair: Some((p.n, p.m)),
            iterations: None,
        }
    }

    pub fn ep_glrt_ka(&self) -> Result<DetectionOutcome> {
        let (v, i) = self.argmax("EP-GLRT-KA", |p| {
            p.log_ratio_at(self.log_num, &p.alphas(KmVariant::One))
        })?;
        self.outcome(v.exp(), i, None, "EP-GLRT-KA")
    }

    pub fn a_glrt(&self) -> Result<DetectionOutcome> {
        let (v, i) = self.argmax("A-GLRT", |p| {
            p.log_ratio_at(self.log_num, &p.alphas(KmVariant::Two))
        })?;
        self.outcome(v.exp(), i, None, "A-GLRT")
    }

    pub fn c_glrt(&self, cfg: &CGlrtConfig) -> Result<DetectionOutcome> {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (i, p) in self.pairs.iter().enumerate() {
            let (v, it) = p.cyclic(self.log_num, self.k_total, cfg, None)?;
            if v.is_nan() {
                return Err(not_finite("C-GLRT"));
            }
            if v > best.0 {
                best = (v, i, it);
            }
        }
        self.outcome(best.0.exp(), best.1, Some(best.2), "C-GLRT")
    }

    /// Runs the cyclic estimation at `(n, m)` for all `h_max` iterations,
    /// recording gains and likelihood values instead of stopping early.
    pub fn c_glrt_trace(&self, cfg: &CGlrtConfig, n: usize, m: usize) -> Result<CGlrtTrace> {
        cfg.validate()?;
        let p = self.pair(n, m)?;
        let mut t = CGlrtTrace {
            pair: (n, m),
            gains: Vec::with_capacity(cfg.h_max),
            log_dets: Vec::with_capacity(3 * cfg.h_max + 1),
            violations: 0,
            log_statistic: 0.0,
        };
        let (s, _) = p.cyclic(self.log_num, self.k_total, cfg, Some(&mut t))?;
        t.log_statistic = s;
        Ok(t)
    }

    fn baseline_terms(&self, b: Baseline) -> Result<(f64, f64, f64)> {
        if b.cell == 0 || b.cell > self.k_p {
            return Err(Error::InvalidParameter(format!(
                "baseline cell {} outside 1..={}",
                b.cell, self.k_p
            )));
        }
        let v = b.signature.slot();
        let z = 2 + b.cell;
        Ok((
            self.gram[(v, z)].norm_sqr(),
            self.gram[(v, v)].re,
            self.gram[(z, z)].re,
        ))
    }

    pub fn kelly(&self, b: Baseline) -> Result<f64> {
        let (num, vv, zz) = self.baseline_terms(b)?;
        Ok(num / (vv * (1.0 + zz)))
    }

    pub fn amf(&self, b: Baseline) -> Result<f64> {
        let (num, vv, _) = self.baseline_terms(b)?;
        Ok(num / vv)
    }

    /// `max_{n,m} det(S_P + S_S) / det S_{n,m}`.
    pub fn det_ratio_bound(&self) -> f64 {
        let best = self
            .pairs
            .iter()
            .map(|p| self.log_num - p.log_snm)
            .fold(f64::NEG_INFINITY, f64::max);
        best.exp()
    }

    /// `z_1†S_S⁻¹z_1 + max_{n,m} (z_n†S_S⁻¹z_n + z_m†S_S⁻¹z_m)`.
    pub fn km1_bound(&self) -> f64 {
        let e = |k: usize| self.gram[(2 + k, 2 + k)].re;
        let best = candidate_pairs(self.k_p)
            .map(|(n, m)| e(n) + e(m))
            .fold(f64::NEG_INFINITY, f64::max);
        e(1) + best
    }

    /// `max_{n,m} Σ_{k∈{1,n,m}} z_k†S_{n,m}⁻¹z_k`.
    pub fn km2_bound(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| (3..6).map(|i| p.h[(i, i)].re).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn evaluate_one(&self, kind: DetectorKind, cfg: &CGlrtConfig) -> Result<DetectionOutcome> {
        let baseline = |statistic: f64| DetectionOutcome {
            statistic,
            pair: None,
            iterations: None,
        };
        match kind {
            DetectorKind::EpGlrtKm1 => Ok(self.ep_glrt_km(KmVariant::One)),
            DetectorKind::EpGlrtKm2 => Ok(self.ep_glrt_km(KmVariant::Two)),
            DetectorKind::EpGlrtKa => self.ep_glrt_ka(),
            DetectorKind::CGlrt => self.c_glrt(cfg),
            DetectorKind::AGlrt => self.a_glrt(),
            DetectorKind::Kelly(b) => self.kelly(b).map(baseline),
            DetectorKind::Amf(b) => self.amf(b).map(baseline),
        }
    }

    pub fn evaluate(
        &self,
        kinds: &[DetectorKind],
        cfg: &CGlrtConfig,
    ) -> Result<Vec<DetectionOutcome>> {
        kinds.iter().map(|&k| self.evaluate_one(k, cfg)).collect()
    }
}
