//! Straightforward evaluation: every `S_{n,m}` and residual-augmented
//! matrix is formed explicitly and factored on its own.
//!
//! Roughly two orders of magnitude slower than [`super::Prepared`]; kept as
//! an independent route for cross-checking.

use num_complex::Complex64;

use super::{alpha_hat, candidate_pairs, monotone_slack, CGlrtConfig, DetectionOutcome, KmVariant};
use crate::error::{Error, Result};
use crate::hermitian::{add_outer, cholesky, column, gram, CMat, CVec, HermitianFactor};
use crate::signal_model::{DataSet, SteeringSet};

struct Setup {
    ss: CMat,
    f_ss: HermitianFactor,
    log_num: f64,
    z: Vec<CVec>,
    v: [CVec; 3],
    k_total: usize,
}

fn setup(data: &DataSet, steering: &SteeringSet) -> Result<Setup> {
    data.validate()?;
    if steering.dim() != data.dim() {
        return Err(Error::DimensionMismatch(
            "steering vs data dimension".into(),
        ));
    }
    if data.k_p() < 3 {
        return Err(Error::InvalidParameter("K_P must be at least 3".into()));
    }
    let ss = gram(&data.secondary);
    let f_ss = cholesky(&ss)?;
    let log_num = cholesky(&(&ss + gram(&data.primary)))?.logdet();
    let z = (0..data.k_p())
        .map(|k| CVec::from_column_slice(column(&data.primary, k)))
        .collect();
    let [a, b, c] = steering.ordered();
    Ok(Setup {
        ss,
        f_ss,
        log_num,
        z,
        v: [a.clone(), b.clone(), c.clone()],
        k_total: data.k_p() + data.k_s(),
    })
}

impl Setup {
    /// `S_S + Σ_{k ∉ {1, n, m}} z_k z_k†`.
    fn s_nm(&self, n: usize, m: usize) -> CMat {
        let mut s = self.ss.clone();
        for k in 2..=self.z.len() {
            if k != n && k != m {
                add_outer(&mut s, self.z[k - 1].as_slice());
            }
        }
        s
    }

    fn cells(&self, n: usize, m: usize) -> [&CVec; 3] {
        [&self.z[0], &self.z[n - 1], &self.z[m - 1]]
    }

    fn residual(&self, n: usize, m: usize, slot: usize, alpha: Complex64) -> CVec {
        self.cells(n, m)[slot] - &self.v[slot] * alpha
    }

    fn augmented_logdet(
        &self,
        s_nm: &CMat,
        n: usize,
        m: usize,
        alpha: &[Complex64; 3],
    ) -> Result<f64> {
        let mut c = s_nm.clone();
        for (s, a) in alpha.iter().enumerate() {
            add_outer(&mut c, self.residual(n, m, s, *a).as_slice());
        }
        Ok(cholesky(&c)?.logdet())
    }

    fn alphas(&self, w: &HermitianFactor, n: usize, m: usize) -> Result<[Complex64; 3]> {
        let cells = self.cells(n, m);
        Ok([
            alpha_hat(&self.v[0], w, cells[0])?,
            alpha_hat(&self.v[1], w, cells[1])?,
            alpha_hat(&self.v[2], w, cells[2])?,
        ])
    }
}

fn maximize<F>(k_p: usize, mut f: F) -> Result<(f64, (usize, usize))>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for (n, m) in candidate_pairs(k_p) {
        let v = f(n, m)?;
        if v > best.0 {
            best = (v, (n, m));
        }
    }
    Ok(best)
}

fn outcome(statistic: f64, pair: (usize, usize)) -> DetectionOutcome {
    DetectionOutcome {
        statistic,
        pair: Some(pair),
        iterations: None,
    }
}

pub fn ep_glrt_km(
    data: &DataSet,
    steering: &SteeringSet,
    variant: KmVariant,
) -> Result<DetectionOutcome> {
    let s = setup(data, steering)?;
    let (v, p) = maximize(data.k_p(), |n, m| {
        let f_nm;
        let w = match variant {
            KmVariant::One => &s.f_ss,
            KmVariant::Two => {
                f_nm = cholesky(&s.s_nm(n, m))?;
                &f_nm
            }
        };
        let cells = s.cells(n, m);
        let mut sum = 0.0;
        for slot in 0..3 {
            let num = w
                .quad_form(s.v[slot].as_slice(), cells[slot].as_slice())
                .norm_sqr();
            sum += num / w.quad_form(s.v[slot].as_slice(), s.v[slot].as_slice()).re;
        }
        Ok(sum)
    })?;
    Ok(outcome(v, p))
}

fn det_ratio(data: &DataSet, steering: &SteeringSet, plug: KmVariant) -> Result<DetectionOutcome> {
    let s = setup(data, steering)?;
    let (v, p) = maximize(data.k_p(), |n, m| {
        let s_nm = s.s_nm(n, m);
        let alpha = match plug {
            KmVariant::One => s.alphas(&s.f_ss, n, m)?,
            KmVariant::Two => s.alphas(&cholesky(&s_nm)?, n, m)?,
        };
        Ok(s.log_num - s.augmented_logdet(&s_nm, n, m, &alpha)?)
    })?;
    Ok(outcome(v.exp(), p))
}

pub fn ep_glrt_ka(data: &DataSet, steering: &SteeringSet) -> Result<DetectionOutcome> {
    det_ratio(data, steering, KmVariant::One)
}

pub fn a_glrt(data: &DataSet, steering: &SteeringSet) -> Result<DetectionOutcome> {
    det_ratio(data, steering, KmVariant::Two)
}

/// Per-iteration relative gains at one pair, stopping by the usual rule.
fn cyclic(s: &Setup, n: usize, m: usize, cfg: &CGlrtConfig) -> Result<(f64, usize, Vec<f64>)> {
    let s_nm = s.s_nm(n, m);
    let w = cholesky(&s_nm)?;
    let energy = s
        .cells(n, m)
        .iter()
        .map(|z| w.quad_form(z.as_slice(), z.as_slice()).re)
        .fold(0.0, f64::max);
    let mut alpha = s.alphas(&w, n, m)?;
    let mut prev = s.augmented_logdet(&s_nm, n, m, &alpha)?;
    let mut gains = Vec::new();
    for h in 1..=cfg.h_max {
        let start = prev;
        for slot in 0..3 {
            // C = S_{n,m} plus the residual outer products of the other two cells
            let mut c = s_nm.clone();
            for other in (0..3).filter(|&o| o != slot) {
                add_outer(&mut c, s.residual(n, m, other, alpha[other]).as_slice());
            }
            alpha[slot] = alpha_hat(&s.v[slot], &cholesky(&c)?, s.cells(n, m)[slot])?;
            let cur = s.augmented_logdet(&s_nm, n, m, &alpha)?;
            if cur > prev + monotone_slack(prev, energy) {
                return Err(Error::NonMonotonic {
                    n,
                    m,
                    update: 3 * (h - 1) + slot + 1,
                    before: prev,
                    after: cur,
                });
            }
            prev = cur;
        }
        let gain = (-(s.k_total as f64) * (prev - start)).exp_m1().max(0.0);
        gains.push(gain);
        if gain < cfg.epsilon {
            return Ok((s.log_num - prev, h, gains));
        }
    }
    Ok((s.log_num - prev, cfg.h_max, gains))
}

pub fn c_glrt(
    data: &DataSet,
    steering: &SteeringSet,
    cfg: &CGlrtConfig,
) -> Result<DetectionOutcome> {
    cfg.validate()?;
    let s = setup(data, steering)?;
    let mut iters = 0;
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for (n, m) in candidate_pairs(data.k_p()) {
        let (v, it, _) = cyclic(&s, n, m, cfg)?;
        if v > best.0 {
            best = (v, (n, m));
            iters = it;
        }
    }
    Ok(DetectionOutcome {
        statistic: best.0.exp(),
        pair: Some(best.1),
        iterations: Some(iters),
    })
}

/// Relative gains of the cyclic estimation at `(n, m)` until it stops.
pub fn c_glrt_gains(
    data: &DataSet,
    steering: &SteeringSet,
    cfg: &CGlrtConfig,
    n: usize,
    m: usize,
) -> Result<Vec<f64>> {
    let s = setup(data, steering)?;
    Ok(cyclic(&s, n, m, cfg)?.2)
}

/// `max_{n,m} det(S_P + S_S) / det S_{n,m}` from explicit matrices.
pub fn det_ratio_bound(data: &DataSet) -> Result<f64> {
    let ss = gram(&data.secondary);
    let log_num = cholesky(&(&ss + gram(&data.primary)))?.logdet();
    let mut best = f64::NEG_INFINITY;
    for (n, m) in candidate_pairs(data.k_p()) {
        let mut s = ss.clone();
        for k in (2..=data.k_p()).filter(|&k| k != n && k != m) {
            add_outer(&mut s, data.z(k));
        }
        best = best.max(log_num - cholesky(&s)?.logdet());
    }
    Ok(best.exp())
}
