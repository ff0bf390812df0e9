//! Power and MPC-count maps over the gimbal grid.

use crate::error::{domain, Result};
use crate::propagation::{db_to_power, power_to_db};

use super::mpc::{apply_window, candidates, strongest_dbm, Detector, Mpc, PeakReference, PowerMode};
use super::AngularPdpSet;

/// A rectangular map indexed by (Tx azimuth row, Rx azimuth column).
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap<T> {
    pub tx_az_deg: Vec<f64>,
    pub rx_az_deg: Vec<f64>,
    /// Row-major cells.
    pub cells: Vec<T>,
}

/// Received power per cell, dBm; `None` where nothing was detected.
pub type PowerMap = CoverageMap<Option<f64>>;
/// Detected MPCs per cell.
pub type CountMap = CoverageMap<usize>;

impl<T: Clone> CoverageMap<T> {
    pub fn new(tx_az_deg: Vec<f64>, rx_az_deg: Vec<f64>, cells: Vec<T>) -> Result<Self> {
        if cells.len() != tx_az_deg.len() * rx_az_deg.len() {
            return domain(format!(
                "{} cells do not fill a {}x{} map",
                cells.len(),
                tx_az_deg.len(),
                rx_az_deg.len()
            ));
        }
        Ok(Self {
            tx_az_deg,
            rx_az_deg,
            cells,
        })
    }

    pub fn get(&self, tx_index: usize, rx_index: usize) -> &T {
        &self.cells[tx_index * self.rx_az_deg.len() + rx_index]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.cells.chunks(self.rx_az_deg.len().max(1))
    }

    /// The map with Tx and Rx axes exchanged.
    pub fn transpose(&self) -> Self {
        let (nt, nr) = (self.tx_az_deg.len(), self.rx_az_deg.len());
        let cells = (0..nr * nt).map(|k| self.get(k % nt, k / nt).clone()).collect();
        Self {
            tx_az_deg: self.rx_az_deg.clone(),
            rx_az_deg: self.tx_az_deg.clone(),
            cells,
        }
    }
}

impl CountMap {
    pub fn total(&self) -> usize {
        self.cells.iter().sum()
    }

    /// Population variance of the cell counts.
    pub fn variance(&self) -> f64 {
        let n = self.cells.len() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let mean = self.total() as f64 / n;
        self.cells.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n
    }
}

impl PowerMap {
    /// Strongest cell as `(tx_index, rx_index, power_dbm)`.
    pub fn peak(&self) -> Option<(usize, usize, f64)> {
        let nr = self.rx_az_deg.len();
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|p| (k / nr, k % nr, p)))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }
}

/// Runs the detector over every cell of a complete set.
pub fn detect_set(set: &AngularPdpSet, detector: &Detector) -> Result<Vec<Vec<Mpc>>> {
    detector.validate()?;
    if !set.is_complete() {
        return domain(format!(
            "angular set {}/{} holds {} PDPs, expected {}",
            set.scenario,
            set.position,
            set.pdps.len(),
            set.tx_grid.len() * set.rx_grid.len()
        ));
    }
    let (tx_az, rx_az) = (set.tx_grid.azimuths_deg(), set.rx_grid.azimuths_deg());
    let nr = rx_az.len();
    let found: Vec<Vec<Mpc>> = set
        .pdps
        .iter()
        .enumerate()
        .map(|(k, pdp)| {
            candidates(
                pdp,
                detector.guard_db,
                set.noise_floor_dbm,
                tx_az[k / nr],
                rx_az[k % nr],
            )
        })
        .collect();
    let set_peak = found.iter().filter_map(|c| strongest_dbm(c)).reduce(f64::max);
    Ok(found
        .into_iter()
        .map(|cell| {
            let reference = match detector.reference {
                PeakReference::Set => set_peak,
                PeakReference::Cell => strongest_dbm(&cell),
            };
            match reference {
                Some(r) => apply_window(cell, r, detector.threshold_rel_db),
                None => cell,
            }
        })
        .collect())
}

/// Power and MPC-count maps of a complete set.
pub fn coverage_maps(set: &AngularPdpSet, detector: &Detector) -> Result<(PowerMap, CountMap)> {
    let mpcs = detect_set(set, detector)?;
    let power = mpcs
        .iter()
        .map(|cell| {
            if cell.is_empty() {
                return None;
            }
            Some(match detector.power_mode {
                PowerMode::Peak => cell.iter().map(|m| m.power_dbm).fold(f64::NEG_INFINITY, f64::max),
                PowerMode::Sum => power_to_db(cell.iter().map(|m| db_to_power(m.power_dbm)).sum()),
            })
        })
        .collect();
    let counts = mpcs.iter().map(Vec::len).collect();
    let tx = set.tx_grid.azimuths_deg().to_vec();
    let rx = set.rx_grid.azimuths_deg().to_vec();
    Ok((
        CoverageMap::new(tx.clone(), rx.clone(), power)?,
        CoverageMap::new(tx, rx, counts)?,
    ))
}
