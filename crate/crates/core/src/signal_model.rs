//! Steering vectors, the clutter-plus-noise covariance, target amplitudes
//! and synthetic primary/secondary data under either hypothesis.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BinLayout;
use crate::hermitian::{cholesky, column, dot, norm_sqr, CMat, CVec, HermitianFactor};
use crate::rng::{trial_rng, TrialRng};

/// Uniform linear array with half-wavelength spacing:
/// entry k is `exp(jπ k sin θ)`, k = 0..N−1.
pub fn steering_vector(theta_deg: f64, n: usize) -> CVec {
    let phase = std::f64::consts::PI * theta_deg.to_radians().sin();
    CVec::from_fn(n, |k, _| Complex64::from_polar(1.0, phase * k as f64))
}

/// Radar line-of-sight signature `v_R`, RIS signature `v_S` and the
/// single-bounce composite `v_SR = v_S,1 + v_R,1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSet {
    pub v_r: CVec,
    pub v_s: CVec,
    pub v_sr: CVec,
}

fn unit_modulus(v: &CVec, name: &str) -> Result<()> {
    if v.iter().any(|x| (x.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "{name} entries must have unit magnitude"
        )));
    }
    Ok(())
}

impl SteeringSet {
    /// General form with separate single-bounce components.
    pub fn with_components(v_r: CVec, v_s: CVec, v_s1: &CVec, v_r1: &CVec) -> Result<Self> {
        let n = v_r.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "steering vectors need N >= 1".into(),
            ));
        }
        if v_s.len() != n || v_s1.len() != n || v_r1.len() != n {
            return Err(Error::DimensionMismatch(
                "steering vectors must share one length".into(),
            ));
        }
        for (v, name) in [(&v_r, "v_R"), (&v_s, "v_S"), (v_s1, "v_S1"), (v_r1, "v_R1")] {
            unit_modulus(v, name)?;
        }
        let v_sr = v_s1 + v_r1;
        Ok(Self { v_r, v_s, v_sr })
    }

    /// Spatial-only processing: `v_S,1 = v_S` and `v_R,1 = v_R`.
    pub fn new(v_r: CVec, v_s: CVec) -> Result<Self> {
        let (s1, r1) = (v_s.clone(), v_r.clone());
        Self::with_components(v_r, v_s, &s1, &r1)
    }

    pub fn spatial(theta_r_deg: f64, theta_s_deg: f64, n: usize) -> Result<Self> {
        Self::new(
            steering_vector(theta_r_deg, n),
            steering_vector(theta_s_deg, n),
        )
    }

    pub fn dim(&self) -> usize {
        self.v_r.len()
    }

    /// Signatures in cell order (1, n, m).
    pub fn ordered(&self) -> [&CVec; 3] {
        [&self.v_r, &self.v_sr, &self.v_s]
    }

    /// Largest normalized correlation between `v_SR` and `v_R` or `v_S`.
    pub fn composite_alignment(&self) -> f64 {
        let corr = |a: &CVec, b: &CVec| {
            dot(a.as_slice(), b.as_slice()).norm()
                / (norm_sqr(a.as_slice()) * norm_sqr(b.as_slice())).sqrt()
        };
        corr(&self.v_sr, &self.v_r).max(corr(&self.v_sr, &self.v_s))
    }
}

/// `M = σ_n² I + M_c`, `M_c(i, j) = σ_c² ρ^|i−j|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub noise_power: f64,
    pub clutter_power: f64,
    pub one_lag: f64,
    pub dim: usize,
}

impl CovarianceModel {
    pub fn from_cnr_db(cnr_db: f64, noise_power: f64, one_lag: f64, dim: usize) -> Result<Self> {
        let m = Self {
            noise_power,
            clutter_power: noise_power * 10f64.powf(cnr_db / 10.0),
            one_lag,
            dim,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn cnr_db(&self) -> f64 {
        10.0 * (self.clutter_power / self.noise_power).log10()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0) || !(self.clutter_power >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "powers must be positive (noise {}, clutter {})",
                self.noise_power, self.clutter_power
            )));
        }
        if !(0.0..1.0).contains(&self.one_lag) {
            return Err(Error::InvalidParameter(format!(
                "one-lag correlation must lie in [0, 1), got {}",
                self.one_lag
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter(
                "covariance dimension must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn build_covariance(model: &CovarianceModel) -> Result<CMat> {
    model.validate()?;
    let n = model.dim;
    Ok(CMat::from_fn(n, n, |i, j| {
        let lag = i.abs_diff(j) as i32;
        let clutter = model.clutter_power * model.one_lag.powi(lag);
        let noise = if i == j { model.noise_power } else { 0.0 };
        Complex64::new(noise + clutter, 0.0)
    }))
}

/// Complex amplitudes of the three echoes and the bins they occupy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetParams {
    /// (α_1, α_n, α_m)
    pub alpha: [Complex64; 3],
    pub layout: BinLayout,
}

/// Monostatic SINR `|α_1|² v_R† M⁻¹ v_R` (linear).
pub fn sinr_rtr(alpha_1: Complex64, covariance: &HermitianFactor, v_r: &CVec) -> f64 {
    alpha_1.norm_sqr() * covariance.quad_form(v_r.as_slice(), v_r.as_slice()).re
}

/// Amplitudes that put the monostatic echo at `sinr_db`; `α_1` is real
/// positive and the bistatic echoes are `ratio · α_1`.
pub fn alpha_from_sinr(
    sinr_db: f64,
    covariance: &HermitianFactor,
    v_r: &CVec,
    ratio: f64,
) -> Result<[Complex64; 3]> {
    if v_r.len() != covariance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "v_R has length {} for an {}-dimensional covariance",
            v_r.len(),
            covariance.dim()
        )));
    }
    let gain = covariance.quad_form(v_r.as_slice(), v_r.as_slice()).re;
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "v_R† M⁻¹ v_R = {gain} is not a positive finite number"
        )));
    }
    let a1 = (10f64.powf(sinr_db / 10.0) / gain).sqrt();
    let a1 = Complex64::new(a1, 0.0);
    Ok([a1, a1 * ratio, a1 * ratio])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Primary window `Z_P` (N × K_P) and training data `R` (N × K_S).
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub primary: CMat,
    pub secondary: CMat,
}

impl DataSet {
    pub fn new(primary: CMat, secondary: CMat) -> Result<Self> {
        let d = Self { primary, secondary };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.primary.nrows() != self.secondary.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "primary has {} rows, secondary {}",
                self.primary.nrows(),
                self.secondary.nrows()
            )));
        }
        if self.secondary.ncols() < self.primary.nrows() {
            return Err(Error::InvalidParameter(format!(
                "K_S = {} training vectors is below N = {}",
                self.secondary.ncols(),
                self.primary.nrows()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.primary.nrows()
    }

    pub fn k_p(&self) -> usize {
        self.primary.ncols()
    }

    pub fn k_s(&self) -> usize {
        self.secondary.ncols()
    }

    /// Column `k` (1-based) of the primary window.
    pub fn z(&self, k: usize) -> &[Complex64] {
        column(&self.primary, k - 1)
    }

    pub fn scaled(&self, gamma: f64) -> Self {
        let g = Complex64::new(gamma, 0.0);
        Self {
            primary: &self.primary * g,
            secondary: &self.secondary * g,
        }
    }

    /// Consecutive primary columns `start..start+len` (1-based) with the same training data.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start == 0 || start + len - 1 > self.k_p() {
            return Err(Error::InvalidParameter(format!(
                "window {start}..{} exceeds {} cells",
                start + len - 1,
                self.k_p()
            )));
        }
        Ok(Self {
            primary: self.primary.columns(start - 1, len).into_owned(),
            secondary: self.secondary.clone(),
        })
    }
}

/// A deterministic echo placed in one primary cell (1-based).
#[derive(Debug, Clone)]
pub struct Echo<'a> {
    pub cell: usize,
    pub amplitude: Complex64,
    pub signature: &'a CVec,
}

/// One draw of `CN(0, I)`: real and imaginary parts each of variance 1/2.
#[inline]
pub fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `cols` columns of `mean + L u` with `u ~ CN(0, I)`.
pub fn colored_noise<R: Rng + ?Sized>(factor: &HermitianFactor, cols: usize, rng: &mut R) -> CMat {
    let n = factor.dim();
    let mut out = CMat::zeros(n, cols);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..cols {
        for x in u.iter_mut() {
            *x = standard_complex_normal(rng);
        }
        factor.color_into(&u, &mut out.as_mut_slice()[c * n..(c + 1) * n]);
    }
    out
}

/// Primary cells with the given echoes plus target-free training data.
pub fn synthesize_cells<R: Rng + ?Sized>(
    num_cells: usize,
    echoes: &[Echo<'_>],
    k_s: usize,
    covariance: &HermitianFactor,
    rng: &mut R,
) -> Result<DataSet> {
    let n = covariance.dim();
    let mut primary = colored_noise(covariance, num_cells, rng);
    let secondary = colored_noise(covariance, k_s, rng);
    for e in echoes {
        if e.cell == 0 || e.cell > num_cells {
            return Err(Error::InvalidParameter(format!(
                "echo cell {} outside 1..={num_cells}",
                e.cell
            )));
        }
        if e.signature.len() != n {
            return Err(Error::DimensionMismatch("echo signature length".into()));
        }
        let col = &mut primary.as_mut_slice()[(e.cell - 1) * n..e.cell * n];
        for (x, v) in col.iter_mut().zip(e.signature.iter()) {
            *x += e.amplitude * v;
        }
    }
    DataSet::new(primary, secondary)
}

/// Draws one data set under `hypothesis` using `rng`.
pub fn synthesize_with<R: Rng + ?Sized>(
    hypothesis: Hypothesis,
    params: &TargetParams,
    covariance: &HermitianFactor,
    steering: &SteeringSet,
    k_p: usize,
    k_s: usize,
    rng: &mut R,
) -> Result<DataSet> {
    let layout = params.layout;
    if layout.m > k_p {
        return Err(Error::WindowTooSmall {
            m: layout.m,
            window: k_p,
        });
    }
    if steering.dim() != covariance.dim() {
        return Err(Error::DimensionMismatch(
            "steering vs covariance dimension".into(),
        ));
    }
    let echoes = match hypothesis {
        Hypothesis::H0 => Vec::new(),
        Hypothesis::H1 => vec![
            Echo {
                cell: 1,
                amplitude: params.alpha[0],
                signature: &steering.v_r,
            },
            Echo {
                cell: layout.n,
                amplitude: params.alpha[1],
                signature: &steering.v_sr,
            },
            Echo {
                cell: layout.m,
                amplitude: params.alpha[2],
                signature: &steering.v_s,
            },
        ],
    };
    synthesize_cells(k_p, &echoes, k_s, covariance, rng)
}

/// Seeded variant of [`synthesize_with`]: same seed, bit-identical data.
pub fn synthesize(
    hypothesis: Hypothesis,
    params: &TargetParams,
    covariance: &HermitianFactor,
    steering: &SteeringSet,
    k_p: usize,
    k_s: usize,
    seed: u64,
) -> Result<DataSet> {
    let mut rng: TrialRng = trial_rng(seed, 0, 0);
    synthesize_with(hypothesis, params, covariance, steering, k_p, k_s, &mut rng)
}

/// Factor of the covariance, checked for positive definiteness.
pub fn covariance_factor(model: &CovarianceModel) -> Result<HermitianFactor> {
    cholesky(&build_covariance(model)?)
}
