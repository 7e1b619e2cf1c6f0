//! Operating scenario in the x–z plane: radar, RIS and target positions,
//! the three echo delays and the range bins they land in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub z: f64,
}

impl Point2 {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(p: [f64; 2]) -> Self {
        Self::new(p[0], p[1])
    }
}

/// Positions (m), range resolution Δr (m) and carrier frequency (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioGeometry {
    pub radar_pos: Point2,
    pub ris_pos: Point2,
    pub target_pos: Point2,
    pub range_resolution: f64,
    pub carrier_freq: f64,
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self::case_study()
    }
}

impl ScenarioGeometry {
    pub fn new(
        radar_pos: Point2,
        ris_pos: Point2,
        target_pos: Point2,
        range_resolution: f64,
        carrier_freq: f64,
    ) -> Result<Self> {
        let g = Self {
            radar_pos,
            ris_pos,
            target_pos,
            range_resolution,
            carrier_freq,
        };
        g.validate()?;
        Ok(g)
    }

    /// Radar at (−30 km, 200 m), RIS at the origin, target at (1 km, 500 m),
    /// Δr = 20 m, f_c = 3 GHz.
    pub fn case_study() -> Self {
        Self {
            radar_pos: Point2::new(-30_000.0, 200.0),
            ris_pos: Point2::new(0.0, 0.0),
            target_pos: Point2::new(1_000.0, 500.0),
            range_resolution: 20.0,
            carrier_freq: 3e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pts = [self.radar_pos, self.ris_pos, self.target_pos];
        if pts.iter().any(|p| !p.x.is_finite() || !p.z.is_finite()) {
            return Err(Error::InvalidParameter("non-finite position".into()));
        }
        if self.radar_pos == self.ris_pos
            || self.radar_pos == self.target_pos
            || self.ris_pos == self.target_pos
        {
            return Err(Error::InvalidParameter(
                "radar, RIS and target positions must be distinct".into(),
            ));
        }
        if !(self.range_resolution > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "range resolution must be positive, got {}",
                self.range_resolution
            )));
        }
        if !(self.carrier_freq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_freq
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }
}

/// Radar–target, radar–RIS and RIS–target distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathDistances {
    pub d_rt: f64,
    pub d_rs: f64,
    pub d_st: f64,
}

impl PathDistances {
    /// Extra one-way length of the RIS detour, `d_RS + d_ST − d_RT`.
    pub fn excess(&self) -> f64 {
        self.d_rs + self.d_st - self.d_rt
    }
}

/// Round-trip delays (s) of the monostatic, single-bounce and double-bounce echoes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathDelays {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl PathDelays {
    /// True when all three delay separations clear the resolution limits:
    /// τ3−τ1 ≥ 4Δr/c, τ3−τ2 ≥ 2Δr/c, τ2−τ1 ≥ 2Δr/c.
    pub fn separations_hold(&self, delta_r: f64) -> bool {
        let unit = delta_r / SPEED_OF_LIGHT;
        let tol = 1e-12 * self.tau3.abs();
        self.tau3 - self.tau1 >= 4.0 * unit - tol
            && self.tau3 - self.tau2 >= 2.0 * unit - tol
            && self.tau2 - self.tau1 >= 2.0 * unit - tol
    }
}

/// Bin of the single-bounce echo (`n`) and the double-bounce echo (`m`)
/// inside a window of `window_size` bins whose first bin holds the
/// monostatic echo. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinLayout {
    pub n: usize,
    pub m: usize,
    pub window_size: usize,
}

impl BinLayout {
    pub fn new(n: usize, m: usize, window_size: usize) -> Result<Self> {
        if !(1 < n && n < m && m <= window_size) {
            return Err(Error::InvalidParameter(format!(
                "bin layout needs 1 < n < m <= K_P, got n={n}, m={m}, K_P={window_size}"
            )));
        }
        Ok(Self { n, m, window_size })
    }
}

pub fn path_distances(geom: &ScenarioGeometry) -> Result<PathDistances> {
    geom.validate()?;
    Ok(PathDistances {
        d_rt: geom.radar_pos.distance(&geom.target_pos),
        d_rs: geom.radar_pos.distance(&geom.ris_pos),
        d_st: geom.ris_pos.distance(&geom.target_pos),
    })
}

pub fn compute_delays(d: &PathDistances) -> Result<PathDelays> {
    if !(d.d_rt > 0.0 && d.d_rs > 0.0 && d.d_st > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distances must be positive, got {d:?}"
        )));
    }
    Ok(PathDelays {
        tau1: 2.0 * d.d_rt / SPEED_OF_LIGHT,
        tau2: (d.d_rt + d.d_st + d.d_rs) / SPEED_OF_LIGHT,
        tau3: 2.0 * (d.d_rs + d.d_st) / SPEED_OF_LIGHT,
    })
}

/// `d_RS + d_ST − d_RT ≥ 2Δr`, boundary included.
pub fn check_feasibility(d: &PathDistances, delta_r: f64) -> bool {
    d.excess() >= 2.0 * delta_r
}

// Slack for delay round-off when the excess path sits exactly on a bin edge.
const BIN_EDGE_SLACK: f64 = 1e-9;

/// Maps the echo delays to bin indices with the monostatic echo in bin 1:
/// `n = 1 + ⌊c(τ2−τ1)/(2Δr)⌋`, `m = 1 + ⌊c(τ3−τ1)/(2Δr)⌋`.
pub fn bin_layout(delays: &PathDelays, delta_r: f64, window_size: usize) -> Result<BinLayout> {
    if !(delta_r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "range resolution must be positive, got {delta_r}"
        )));
    }
    let single = SPEED_OF_LIGHT * (delays.tau2 - delays.tau1) / 2.0;
    let double = SPEED_OF_LIGHT * (delays.tau3 - delays.tau1) / 2.0;
    // c(τ2−τ1) is the excess path
    let excess = 2.0 * single;
    if excess < 2.0 * delta_r * (1.0 - BIN_EDGE_SLACK) {
        return Err(Error::InfeasibleGeometry { excess, delta_r });
    }
    let offset = |len: f64| (len / delta_r + BIN_EDGE_SLACK).floor() as usize;
    let n = 1 + offset(single);
    let m = 1 + offset(double);
    if m > window_size {
        return Err(Error::WindowTooSmall {
            m,
            window: window_size,
        });
    }
    BinLayout::new(n, m, window_size)
}

/// Incidence angle θ_Si (from the RIS normal to the radar direction) and
/// reflection angle θ_So (between the RIS→target line and the x-axis), in degrees.
pub fn ris_angles(geom: &ScenarioGeometry) -> Result<(f64, f64)> {
    geom.validate()?;
    let to_radar = (
        geom.radar_pos.x - geom.ris_pos.x,
        geom.radar_pos.z - geom.ris_pos.z,
    );
    let to_target = (
        geom.target_pos.x - geom.ris_pos.x,
        geom.target_pos.z - geom.ris_pos.z,
    );
    let theta_si = to_radar.0.abs().atan2(to_radar.1.abs());
    let theta_so = std::f64::consts::FRAC_PI_2 - to_target.0.atan2(to_target.1);
    Ok((theta_si.to_degrees(), theta_so.to_degrees()))
}

/// Summary of a scenario: distances, delays, feasibility and bins.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub distances: PathDistances,
    pub delays: PathDelays,
    pub feasible: bool,
    pub layout: Option<BinLayout>,
    pub theta_si_deg: f64,
    pub theta_so_deg: f64,
    pub wavelength: f64,
}

pub fn scenario_report(geom: &ScenarioGeometry, window_size: usize) -> Result<ScenarioReport> {
    let distances = path_distances(geom)?;
    let delays = compute_delays(&distances)?;
    let feasible = check_feasibility(&distances, geom.range_resolution);
    let layout = bin_layout(&delays, geom.range_resolution, window_size).ok();
    let (theta_si_deg, theta_so_deg) = ris_angles(geom)?;
    Ok(ScenarioReport {
        distances,
        delays,
        feasible,
        layout,
        theta_si_deg,
        theta_so_deg,
        wavelength: geom.wavelength(),
    })
}
