//! Multipath component detection on power-delay profiles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::propagation::{db_to_power, power_to_db};
use crate::sounder::Pdp;

/// Relative tolerance under which two neighbouring bins count as equal.
const TIE_TOL: f64 = 1e-6;

/// One resolved arrival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mpc {
    pub delay_s: f64,
    pub power_dbm: f64,
    pub tx_az_deg: f64,
    pub rx_az_deg: f64,
}

/// Which peak the relative threshold is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakReference {
    /// Strongest bin over the whole angular set.
    #[default]
    Set,
    /// Strongest bin of each PDP.
    Cell,
}

/// Per-cell value of a power coverage map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerMode {
    /// Strongest detected MPC.
    #[default]
    Peak,
    /// Sum of detected MPC powers.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Detector {
    /// Window below the reference peak, dB.
    pub threshold_rel_db: f64,
    /// Margin above the noise floor, dB.
    pub guard_db: f64,
    pub reference: PeakReference,
    pub power_mode: PowerMode,
}

impl Default for Detector {
    fn default() -> Self {
        Self {
            threshold_rel_db: 25.0,
            guard_db: 6.0,
            reference: PeakReference::Set,
            power_mode: PowerMode::Peak,
        }
    }
}

impl Detector {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_rel_db.is_finite() && self.threshold_rel_db >= 0.0) {
            return domain(format!(
                "threshold_rel_db must be finite and >= 0, got {}",
                self.threshold_rel_db
            ));
        }
        if !self.guard_db.is_finite() {
            return domain("guard_db must be finite");
        }
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Left and right neighbours of bin `k`. The correlation PDP is circular in
/// delay, so the ends wrap.
fn neighbours(len: usize, k: usize) -> [Option<usize>; 2] {
    if len < 2 {
        return [None, None];
    }
    let left = (k + len - 1) % len;
    let right = (k + 1) % len;
    if left == right {
        [Some(left), None]
    } else {
        [Some(left), Some(right)]
    }
}

fn is_local_max(p: &[f64], k: usize) -> bool {
    neighbours(p.len(), k)
        .into_iter()
        .flatten()
        .all(|j| p[k] >= p[j] * (1.0 - TIE_TOL))
}

/// Candidate arrivals of one PDP: local maxima at least `guard_db` above
/// `noise_floor_dbm`.
///
/// Delay and power are refined from the stronger neighbour assuming a
/// sinc-shaped pulse, unless that neighbour is itself a candidate.
pub fn candidates(pdp: &Pdp, guard_db: f64, noise_floor_dbm: f64, tx_az_deg: f64, rx_az_deg: f64) -> Vec<Mpc> {
    let floor = noise_floor_dbm + guard_db;
    let lin: Vec<f64> = pdp.power_db.iter().map(|p| db_to_power(*p)).collect();
    let peaks: Vec<usize> = (0..lin.len())
        .filter(|&k| pdp.power_db[k] >= floor && is_local_max(&lin, k))
        .collect();
    peaks
        .iter()
        .map(|&k| {
            let [left, right] = neighbours(lin.len(), k);
            // Stronger neighbour, with the side it lies on.
            let neighbour = match (left, right) {
                (Some(l), Some(r)) if lin[r] > lin[l] => Some((r, 1.0)),
                (Some(l), _) => Some((l, -1.0)),
                _ => None,
            };
            let (mut offset, mut power) = (0.0, lin[k]);
            if let Some((j, side)) = neighbour {
                if peaks.binary_search(&j).is_err() && lin[k] > 0.0 {
                    let r = (lin[j] / lin[k]).sqrt().min(1.0);
                    let delta = r / (1.0 + r);
                    offset = side * delta;
                    power = lin[k] / sinc(delta).powi(2);
                }
            }
            Mpc {
                delay_s: ((k as f64 + offset) * pdp.delay_bin_s).max(0.0),
                power_dbm: power_to_db(power),
                tx_az_deg,
                rx_az_deg,
            }
        })
        .collect()
}

/// Strongest power in a list of arrivals.
pub fn strongest_dbm(mpcs: &[Mpc]) -> Option<f64> {
    mpcs.iter().map(|m| m.power_dbm).reduce(f64::max)
}

/// Keeps arrivals no more than `threshold_rel_db` below `reference_dbm`.
pub fn apply_window(mut mpcs: Vec<Mpc>, reference_dbm: f64, threshold_rel_db: f64) -> Vec<Mpc> {
    mpcs.retain(|m| m.power_dbm >= reference_dbm - threshold_rel_db);
    mpcs
}

/// MPCs of one PDP with the window measured from its own strongest arrival.
pub fn detect_cell(pdp: &Pdp, detector: &Detector, noise_floor_dbm: f64, tx_az_deg: f64, rx_az_deg: f64) -> Vec<Mpc> {
    let found = candidates(pdp, detector.guard_db, noise_floor_dbm, tx_az_deg, rx_az_deg);
    match strongest_dbm(&found) {
        Some(peak) => apply_window(found, peak, detector.threshold_rel_db),
        None => found,
    }
}

/// MPCs of a standalone PDP: local maxima 6 dB above `noise_floor_dbm`
/// and within `threshold_rel_db` of the strongest one.
pub fn extract_mpcs(pdp: &Pdp, threshold_rel_db: f64, noise_floor_dbm: f64) -> Result<Vec<Mpc>> {
    if !threshold_rel_db.is_finite() || noise_floor_dbm.is_nan() {
        return domain("detector thresholds must be finite");
    }
    let detector = Detector {
        threshold_rel_db,
        ..Detector::default()
    };
    Ok(detect_cell(pdp, &detector, noise_floor_dbm, 0.0, 0.0))
}

/// Strongest MPC whose delay lies within `tolerance_s` of `delay_s`.
pub fn mpc_near(mpcs: &[Mpc], delay_s: f64, tolerance_s: f64) -> Option<Mpc> {
    mpcs.iter()
        .filter(|m| (m.delay_s - delay_s).abs() <= tolerance_s)
        .copied()
        .max_by(|a, b| a.power_dbm.total_cmp(&b.power_dbm))
}
