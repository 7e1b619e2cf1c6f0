//! RIS sizing: per-path link budgets against the RIS cross section, minimum
//! aperture for a target RCS, and boresight RCS of uniform, sinc and LFM
//! aperture tapers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{path_distances, ScenarioGeometry};
use crate::special::si;

/// Half of the uniform-aperture HPBW constant, in degrees per element.
const HPBW_HALF_DEG: f64 = 50.8;

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Path {
    /// Radar, target, radar.
    Rtr,
    /// Single bounce via the RIS.
    Rstr,
    /// Double bounce via the RIS.
    Rstsr,
}

impl Path {
    pub const ALL: [Path; 3] = [Path::Rtr, Path::Rstr, Path::Rstsr];

    pub fn name(self) -> &'static str {
        match self {
            Path::Rtr => "RTR",
            Path::Rstr => "RSTR",
            Path::Rstsr => "RSTSR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    /// Transmit power, W.
    pub p_t: f64,
    /// Transmit gain, dBi.
    pub g_t_dbi: f64,
    pub wavelength: f64,
    pub sigma_rtr: f64,
    pub sigma_str: f64,
    pub sigma_sts: f64,
    pub d_rt: f64,
    pub d_rs: f64,
    pub d_st: f64,
}

impl LinkBudget {
    /// 10 kW, 37 dBi, target RCS −20/0/0 dBsm, distances from the geometry.
    pub fn from_geometry(geom: &ScenarioGeometry) -> Result<Self> {
        let d = path_distances(geom)?;
        let lb = Self {
            p_t: 10e3,
            g_t_dbi: 37.0,
            wavelength: geom.wavelength(),
            sigma_rtr: 1e-2,
            sigma_str: 1.0,
            sigma_sts: 1.0,
            d_rt: d.d_rt,
            d_rs: d.d_rs,
            d_st: d.d_st,
        };
        lb.validate()?;
        Ok(lb)
    }

    pub fn case_study() -> Self {
        Self::from_geometry(&ScenarioGeometry::case_study()).expect("case-study geometry is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.p_t,
            self.wavelength,
            self.sigma_rtr,
            self.sigma_str,
            self.sigma_sts,
            self.d_rt,
            self.d_rs,
            self.d_st,
        ];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !self.g_t_dbi.is_finite() {
            return Err(Error::InvalidParameter(
                "link budget entries must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn gain(&self) -> f64 {
        from_db(self.g_t_dbi)
    }

    /// `λ² G_T / 4π`.
    pub fn a_eff(&self) -> f64 {
        self.wavelength * self.wavelength * self.gain() / (4.0 * PI)
    }
}

/// Received power in watts over `path` for RIS cross section `sigma_ris` (m²).
pub fn received_power(path: Path, lb: &LinkBudget, sigma_ris: f64) -> f64 {
    let pg = lb.p_t * lb.gain();
    let a = lb.a_eff();
    let sphere = |d: f64| 4.0 * PI * d * d;
    match path {
        Path::Rtr => pg * lb.sigma_rtr * a / ((4.0 * PI).powi(2) * lb.d_rt.powi(4)),
        Path::Rstr => {
            pg / sphere(lb.d_rs) * sigma_ris / sphere(lb.d_st) * lb.sigma_str * a / sphere(lb.d_rt)
        }
        Path::Rstsr => {
            pg / sphere(lb.d_rs).powi(2) * sigma_ris * sigma_ris / sphere(lb.d_st).powi(2)
                * lb.sigma_sts
                * a
        }
    }
}

/// RIS cross sections (m²) at which the RIS paths catch up with the LOS path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossovers {
    /// Single bounce alone equals RTR.
    pub rstr: f64,
    /// Double bounce alone equals RTR.
    pub rstsr: f64,
    /// Single plus double bounce equals RTR.
    pub combined: f64,
}

pub fn crossovers(lb: &LinkBudget) -> Crossovers {
    let p0 = received_power(Path::Rtr, lb, 1.0);
    // P_RSTR = a1 σ, P_RSTSR = a2 σ²
    let a1 = received_power(Path::Rstr, lb, 1.0);
    let a2 = received_power(Path::Rstsr, lb, 1.0);
    let combined = (-a1 + (a1 * a1 + 4.0 * a2 * p0).sqrt()) / (2.0 * a2);
    Crossovers {
        rstr: p0 / a1,
        rstsr: (p0 / a2).sqrt(),
        combined,
    }
}

/// One row of the received power sweep, normalised by `P_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub sigma_ris_dbsm: f64,
    pub rtr_db: f64,
    pub rstr_db: f64,
    pub rstsr_db: f64,
}

pub fn power_sweep(lb: &LinkBudget, sigma_dbsm: &[f64]) -> Vec<PowerRow> {
    sigma_dbsm
        .iter()
        .map(|&s| {
            let sigma = from_db(s);
            let rel = |p: Path| to_db(received_power(p, lb, sigma) / lb.p_t);
            PowerRow {
                sigma_ris_dbsm: s,
                rtr_db: rel(Path::Rtr),
                rstr_db: rel(Path::Rstr),
                rstsr_db: rel(Path::Rstsr),
            }
        })
        .collect()
}

/// Peak RCS of a perfectly phased square aperture of side `l`.
pub fn uniform_rcs(l: f64, lambda: f64) -> f64 {
    4.0 * PI * l.powi(4) / (lambda * lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureSize {
    /// Side length, m.
    pub side: f64,
    /// Elements per side at λ/2 spacing.
    pub elements: usize,
    pub hpbw_deg: f64,
}

/// Smallest uniform aperture reaching `sigma`.
pub fn min_size(sigma: f64, lambda: f64) -> Result<ApertureSize> {
    positive(&[("sigma", sigma), ("lambda", lambda)])?;
    let side = (sigma * lambda * lambda / (4.0 * PI)).powf(0.25);
    let elements = (2.0 * side / lambda - 1e-9).ceil().max(1.0) as usize;
    Ok(ApertureSize {
        side,
        elements,
        hpbw_deg: 2.0 * HPBW_HALF_DEG / elements as f64,
    })
}

/// Sinc width from the desired beamwidth: `b = λ/φ₀`, with φ₀ in degrees.
pub fn sinc_width(phi0_deg: f64, lambda: f64) -> f64 {
    lambda / phi0_deg.to_radians()
}

/// Boresight RCS of a sinc-tapered aperture.
pub fn sinc_rcs(l: f64, b: f64, lambda: f64) -> f64 {
    let s = si(PI * l / (2.0 * b));
    16.0 * b * b * l * l / (PI * lambda * lambda) * s * s
}

/// Large-aperture limit of [`sinc_rcs`].
pub fn sinc_rcs_asymptote(l: f64, b: f64, lambda: f64) -> f64 {
    4.0 * PI * b * b * l * l / (lambda * lambda)
}

/// LFM chirp rate `K_x = φ₀/(λL)`, with φ₀ in degrees.
pub fn chirp_rate(phi0_deg: f64, lambda: f64, l: f64) -> f64 {
    phi0_deg.to_radians() / (lambda * l)
}

/// Stationary-phase RCS of an LFM phase taper.
pub fn lfm_rcs(l: f64, k_x: f64, lambda: f64) -> f64 {
    8.0 * PI * l * l / (lambda * lambda * k_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Taper {
    Uniform,
    Sinc { b: f64 },
    Lfm { k_x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperingSpec {
    pub taper: Taper,
    pub side: f64,
    pub wavelength: f64,
}

impl TaperingSpec {
    pub fn new(taper: Taper, side: f64, wavelength: f64) -> Result<Self> {
        positive(&[("side", side), ("wavelength", wavelength)])?;
        match taper {
            Taper::Sinc { b } => positive(&[("b", b)])?,
            Taper::Lfm { k_x } => positive(&[("k_x", k_x)])?,
            Taper::Uniform => {}
        }
        Ok(Self {
            taper,
            side,
            wavelength,
        })
    }

    /// Sinc taper sized for beamwidth `phi0_deg`.
    pub fn sinc(phi0_deg: f64, side: f64, wavelength: f64) -> Result<Self> {
        Self::new(
            Taper::Sinc {
                b: sinc_width(phi0_deg, wavelength),
            },
            side,
            wavelength,
        )
    }

    /// LFM taper sized for beamwidth `phi0_deg`.
    pub fn lfm(phi0_deg: f64, side: f64, wavelength: f64) -> Result<Self> {
        Self::new(
            Taper::Lfm {
                k_x: chirp_rate(phi0_deg, wavelength, side),
            },
            side,
            wavelength,
        )
    }

    pub fn rcs(&self) -> f64 {
        let (l, lambda) = (self.side, self.wavelength);
        match self.taper {
            Taper::Uniform => uniform_rcs(l, lambda),
            Taper::Sinc { b } => sinc_rcs(l, b, lambda),
            Taper::Lfm { k_x } => lfm_rcs(l, k_x, lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperRow {
    pub side: f64,
    pub uniform: f64,
    pub sinc: f64,
    pub lfm: f64,
}

pub fn tapering_comparison(lambda: f64, phi0_deg: f64, sides: &[f64]) -> Result<Vec<TaperRow>> {
    positive(&[("lambda", lambda), ("phi0", phi0_deg)])?;
    sides
        .iter()
        .map(|&l| {
            Ok(TaperRow {
                side: l,
                uniform: TaperingSpec::new(Taper::Uniform, l, lambda)?.rcs(),
                sinc: TaperingSpec::sinc(phi0_deg, l, lambda)?.rcs(),
                lfm: TaperingSpec::lfm(phi0_deg, l, lambda)?.rcs(),
            })
        })
        .collect()
}

/// Side lengths 20λ, 30λ, ..., 210λ.
pub fn default_side_grid(lambda: f64) -> Vec<f64> {
    (2..=21).map(|k| 10.0 * lambda * f64::from(k)).collect()
}

fn positive(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(())
}
