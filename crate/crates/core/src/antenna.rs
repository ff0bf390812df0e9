//! Horn antenna pattern and gimbal scan grid.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Gaussian main lobe clamped to a flat sidelobe floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HornPattern {
    pub boresight_gain_dbi: f64,
    pub hpbw_az_deg: f64,
    pub hpbw_el_deg: f64,
    /// Floor relative to boresight, dB (negative).
    pub sidelobe_floor_db: f64,
}

impl Default for HornPattern {
    fn default() -> Self {
        Self {
            boresight_gain_dbi: 17.0,
            hpbw_az_deg: 24.0,
            hpbw_el_deg: 26.0,
            sidelobe_floor_db: -30.0,
        }
    }
}

impl HornPattern {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("azimuth", self.hpbw_az_deg), ("elevation", self.hpbw_el_deg)] {
            if !(v > 0.0 && v < 180.0) {
                return domain(format!("{what} HPBW must lie in (0, 180) degrees, got {v}"));
            }
        }
        if self.sidelobe_floor_db >= 0.0 || self.sidelobe_floor_db.is_nan() {
            return domain(format!(
                "sidelobe floor must be negative, got {}",
                self.sidelobe_floor_db
            ));
        }
        if !self.boresight_gain_dbi.is_finite() {
            return domain("boresight gain must be finite");
        }
        Ok(())
    }

    /// Gain toward a direction offset from boresight, dBi.
    pub fn gain_dbi(&self, az_offset_deg: f64, el_offset_deg: f64) -> f64 {
        let az = wrap_deg(az_offset_deg) / self.hpbw_az_deg;
        let el = el_offset_deg / self.hpbw_el_deg;
        let rolloff = -12.0 * (az * az + el * el);
        self.boresight_gain_dbi + rolloff.max(self.sidelobe_floor_db)
    }
}

/// Free-function form of [`HornPattern::gain_dbi`].
pub fn gain_dbi(pattern: &HornPattern, az_offset_deg: f64, el_offset_deg: f64) -> f64 {
    pattern.gain_dbi(az_offset_deg, el_offset_deg)
}

/// Wraps an angle into (-180, 180].
pub fn wrap_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Gimbal azimuths visited at each end of the link, relative to the node
/// heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScanGrid {
    azimuths_deg: Vec<f64>,
}

impl ScanGrid {
    pub fn new(azimuths_deg: Vec<f64>) -> Result<Self> {
        if azimuths_deg.is_empty() {
            return domain("scan grid must contain at least one azimuth");
        }
        if let Some(bad) = azimuths_deg.iter().find(|a| !(**a > -180.0 && **a <= 180.0)) {
            return domain(format!("scan azimuth {bad} outside (-180, 180]"));
        }
        if azimuths_deg.windows(2).any(|w| w[1] <= w[0]) {
            return domain("scan azimuths must be strictly increasing");
        }
        Ok(Self { azimuths_deg })
    }

    /// `count` azimuths starting at `start_deg` with spacing `step_deg`.
    pub fn uniform(start_deg: f64, step_deg: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start_deg + step_deg * i as f64).collect())
    }

    pub fn azimuths_deg(&self) -> &[f64] {
        &self.azimuths_deg
    }

    pub fn len(&self) -> usize {
        self.azimuths_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.azimuths_deg.is_empty()
    }

    /// Index of the grid azimuth closest to `target_deg` (first on ties).
    pub fn nearest_index(&self, target_deg: f64) -> usize {
        self.nearest_indices(target_deg)[0]
    }

    /// All grid indices whose angular distance to `target_deg` is minimal
    /// (within 1e-9 degrees).
    pub fn nearest_indices(&self, target_deg: f64) -> Vec<usize> {
        let dist: Vec<f64> = self
            .azimuths_deg
            .iter()
            .map(|a| wrap_deg(a - target_deg).abs())
            .collect();
        let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
        (0..dist.len()).filter(|&i| dist[i] - best <= 1e-9).collect()
    }
}

impl TryFrom<Vec<f64>> for ScanGrid {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScanGrid::new(v)
    }
}

impl From<ScanGrid> for Vec<f64> {
    fn from(g: ScanGrid) -> Vec<f64> {
        g.azimuths_deg
    }
}

impl Default for ScanGrid {
    fn default() -> Self {
        default_scan_grid()
    }
}

/// 18 azimuths from -170 to +170 degrees in 20 degree steps.
pub fn default_scan_grid() -> ScanGrid {
    ScanGrid::uniform(-170.0, 20.0, 18).expect("static grid is valid")
}
