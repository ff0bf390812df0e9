//! Angular measurement campaigns.
//!
//! For each Tx/Rx position the scene is traced once; every gimbal pair of
//! the scan grid then weights the same paths by the antenna pattern, the
//! resulting channel is sounded, and the PDP is stored. Detection and map
//! building operate on the finished [`AngularPdpSet`].

pub mod analysis;
mod coverage;
mod mpc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::antenna::ScanGrid;
use crate::error::{domain, Result};
use crate::geometry::{trace_paths, Node, PathKind, RayPath, Scene};
use crate::propagation::{db_to_power, fspl_db, reflection_coefficient, wavelength_m, SPEED_OF_LIGHT};
use crate::scenarios::{LinkParams, Position, Scenario};
use crate::sounder::{ChannelTap, Pdp, Sounder};

pub use coverage::{coverage_maps, detect_set, CountMap, CoverageMap, PowerMap};
pub use mpc::{
    apply_window, candidates, detect_cell, extract_mpcs, mpc_near, strongest_dbm, Detector, Mpc, PeakReference,
    PowerMode,
};

/// RNG stream reserved for single-link soundings outside a grid.
pub const SINGLE_LINK_STREAM: u64 = u64::MAX;

/// Gimbal-pointing offsets of a path at each end, `(az, el)` in degrees
/// relative to the steered boresight.
fn pointing_offsets(path: &RayPath, tx: &Node, rx: &Node, tx_az_deg: f64, rx_az_deg: f64) -> [(f64, f64); 2] {
    let rise = rx.height_m - tx.height_m;
    let el = rise.atan2(path.total_length_m).to_degrees();
    [
        (path.departure_azimuth_deg() - tx.heading_deg - tx_az_deg, el),
        (path.arrival_azimuth_deg() - rx.heading_deg - rx_az_deg, -el),
    ]
}

/// Converts traced paths into channel taps for one gimbal pair.
///
/// Tap power is the transmit power less the gain-weighted free-space loss
/// over the path length, the Fresnel loss of a bounce, the slab loss of
/// every crossing and the scenario excess loss. Phase follows the free-space
/// electrical length.
pub fn paths_to_taps(
    scene: &Scene,
    paths: &[RayPath],
    tx: &Node,
    rx: &Node,
    tx_az_deg: f64,
    rx_az_deg: f64,
    link: &LinkParams,
) -> Result<Vec<ChannelTap>> {
    let lambda = wavelength_m(link.frequency_hz);
    let mut taps = Vec::with_capacity(paths.len());
    for path in paths {
        let rise = rx.height_m - tx.height_m;
        let length = path.total_length_m.hypot(rise);
        let [(taz, tel), (raz, rel)] = pointing_offsets(path, tx, rx, tx_az_deg, rx_az_deg);
        let g_t = link.antenna.gain_dbi(taz, tel);
        let g_r = link.antenna.gain_dbi(raz, rel);
        let mut power = link.tx_power_dbm - fspl_db(length, link.frequency_hz, g_t, g_r)? - link.excess_loss_db;
        if path.kind == PathKind::Reflected {
            let (Some(wall), Some(theta)) = (path.reflector, path.incident_angle_deg) else {
                return domain("reflected path without a reflector");
            };
            let eps = scene.walls[wall].material.rel_permittivity;
            let gamma = reflection_coefficient(theta, eps, link.polarization)?;
            if gamma == 0.0 {
                continue;
            }
            power += 20.0 * gamma.log10();
        }
        for c in &path.crossings {
            power -= scene.walls[c.wall].material.slab_loss_db(c.length_cm);
        }
        let phase = -2.0 * std::f64::consts::PI * length / lambda;
        taps.push(ChannelTap::new(
            length / SPEED_OF_LIGHT,
            Complex64::from_polar(db_to_power(power).sqrt(), phase),
        ));
    }
    Ok(taps)
}

/// Traces one position and returns its taps for a gimbal pair.
pub fn link_taps(scenario: &Scenario, position: &Position, tx_az_deg: f64, rx_az_deg: f64) -> Result<Vec<ChannelTap>> {
    let paths = trace_paths(&scenario.scene, &position.tx, &position.rx)?;
    paths_to_taps(
        &scenario.scene,
        &paths,
        &position.tx,
        &position.rx,
        tx_az_deg,
        rx_az_deg,
        &scenario.link,
    )
}

fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sounds a single gimbal pair, which need not lie on the scan grid.
pub fn sound_link(scenario: &Scenario, position: &Position, tx_az_deg: f64, rx_az_deg: f64, seed: u64) -> Result<Pdp> {
    let sounder = Sounder::new(scenario.sounder.clone())?;
    let taps = link_taps(scenario, position, tx_az_deg, rx_az_deg)?;
    sounder.sound(&taps, &mut cell_rng(seed, SINGLE_LINK_STREAM))
}

/// PDPs for every (Tx az, Rx az) pair of a position, stored row-major with
/// the Tx azimuth as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPdpSet {
    pub scenario: String,
    pub position: String,
    pub tx_grid: ScanGrid,
    pub rx_grid: ScanGrid,
    pub pdps: Vec<Pdp>,
    /// Mean noise power per delay bin, dBm.
    pub noise_floor_dbm: f64,
}

impl AngularPdpSet {
    pub fn get(&self, tx_index: usize, rx_index: usize) -> &Pdp {
        &self.pdps[tx_index * self.rx_grid.len() + rx_index]
    }

    pub fn is_complete(&self) -> bool {
        self.pdps.len() == self.tx_grid.len() * self.rx_grid.len()
    }

    /// Strongest bin over all cells, dBm.
    pub fn peak_dbm(&self) -> Option<f64> {
        self.pdps
            .iter()
            .filter_map(|p| p.peak().map(|(_, v)| v))
            .reduce(f64::max)
    }
}

/// Sounds every gimbal pair of the scenario's scan grid for one position.
///
/// Cell `k` (row-major) draws its noise from stream `k` of a ChaCha8
/// generator keyed by `seed`, so the result is independent of scheduling.
pub fn run_campaign(scenario: &Scenario, position: &Position, seed: u64) -> Result<AngularPdpSet> {
    let sounder = Sounder::new(scenario.sounder.clone())?;
    let paths = trace_paths(&scenario.scene, &position.tx, &position.rx)?;
    let grid = scenario.scan.azimuths_deg();
    let n = grid.len();
    let pdps = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (tx_az, rx_az) = (grid[k / n], grid[k % n]);
            let taps = paths_to_taps(
                &scenario.scene,
                &paths,
                &position.tx,
                &position.rx,
                tx_az,
                rx_az,
                &scenario.link,
            )?;
            sounder.sound(&taps, &mut cell_rng(seed, k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngularPdpSet {
        scenario: scenario.name.clone(),
        position: position.name.clone(),
        tx_grid: scenario.scan.clone(),
        rx_grid: scenario.scan.clone(),
        pdps,
        noise_floor_dbm: scenario.sounder.pdp_noise_floor_dbm(),
    })
}
