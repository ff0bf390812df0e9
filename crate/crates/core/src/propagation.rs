//! Closed-form propagation math at a single carrier frequency.
//!
//! Angles cross the public boundary in degrees and are converted to radians
//! internally. Power quantities use `10·log10`, amplitudes `20·log10`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Intrinsic impedance of free space, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_to_db(power: f64) -> f64 {
    10.0 * power.log10()
}

pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

pub fn wavelength_m(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Inputs of a single directional link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub tx_power_dbm: f64,
}

impl LinkBudget {
    pub fn new(
        distance_m: f64,
        frequency_hz: f64,
        tx_gain_dbi: f64,
        rx_gain_dbi: f64,
        tx_power_dbm: f64,
    ) -> Result<Self> {
        check_positive("distance", distance_m)?;
        check_positive("frequency", frequency_hz)?;
        Ok(Self {
            distance_m,
            frequency_hz,
            tx_gain_dbi,
            rx_gain_dbi,
            tx_power_dbm,
        })
    }

    /// Gain-inclusive free-space path loss of this link.
    pub fn path_loss_db(&self) -> f64 {
        fspl_unchecked(self.distance_m, self.frequency_hz, self.tx_gain_dbi, self.rx_gain_dbi)
    }

    pub fn received_power_dbm(&self) -> f64 {
        self.tx_power_dbm - self.path_loss_db()
    }
}

/// A dielectric slab at the simulation frequency.
///
/// Permittivity is real; material losses are carried only by
/// `attenuation_db_per_cm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub rel_permittivity: f64,
    pub thickness_cm: f64,
    pub attenuation_db_per_cm: f64,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        rel_permittivity: f64,
        thickness_cm: f64,
        attenuation_db_per_cm: f64,
    ) -> Result<Self> {
        let name = name.into();
        if rel_permittivity < 1.0 || !rel_permittivity.is_finite() {
            return domain(format!(
                "material {name}: relative permittivity must be >= 1, got {rel_permittivity}"
            ));
        }
        if thickness_cm <= 0.0 || !thickness_cm.is_finite() {
            return domain(format!("material {name}: thickness must be > 0 cm, got {thickness_cm}"));
        }
        if attenuation_db_per_cm < 0.0 || !attenuation_db_per_cm.is_finite() {
            return domain(format!(
                "material {name}: attenuation must be >= 0 dB/cm, got {attenuation_db_per_cm}"
            ));
        }
        Ok(Self {
            name,
            rel_permittivity,
            thickness_cm,
            attenuation_db_per_cm,
        })
    }

    /// Loss of a ray travelling `path_cm` inside this material.
    pub fn slab_loss_db(&self, path_cm: f64) -> f64 {
        self.attenuation_db_per_cm * path_cm
    }
}

/// E-field orientation relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// E-field in the plane of incidence (TM).
    #[default]
    Parallel,
    /// E-field normal to the plane of incidence (TE).
    Perpendicular,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::Parallel => f.write_str("parallel"),
            Polarization::Perpendicular => f.write_str("perpendicular"),
        }
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" | "par" | "tm" | "p" => Ok(Polarization::Parallel),
            "perpendicular" | "perp" | "te" | "s" => Ok(Polarization::Perpendicular),
            other => domain(format!("unknown polarization '{other}'")),
        }
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be positive and finite, got {v}"))
    }
}

fn check_permittivity(eps_r: f64) -> Result<()> {
    if eps_r >= 1.0 && eps_r.is_finite() {
        Ok(())
    } else {
        domain(format!("relative permittivity must be >= 1, got {eps_r}"))
    }
}

fn fspl_unchecked(distance_m: f64, frequency_hz: f64, tx_gain_dbi: f64, rx_gain_dbi: f64) -> f64 {
    20.0 * distance_m.log10() + 20.0 * frequency_hz.log10() + 20.0 * (4.0 * PI / SPEED_OF_LIGHT).log10()
        - tx_gain_dbi
        - rx_gain_dbi
}

/// Friis free-space path loss in dB, net of both antenna gains.
pub fn fspl_db(distance_m: f64, frequency_hz: f64, tx_gain_dbi: f64, rx_gain_dbi: f64) -> Result<f64> {
    check_positive("distance", distance_m)?;
    check_positive("frequency", frequency_hz)?;
    Ok(fspl_unchecked(distance_m, frequency_hz, tx_gain_dbi, rx_gain_dbi))
}

/// Refraction angle (degrees) for a wave entering a dielectric from air.
pub fn snell_refraction_angle(theta_i_deg: f64, eps_r: f64) -> Result<f64> {
    if !(0.0..90.0).contains(&theta_i_deg) {
        return domain(format!("incident angle must lie in [0, 90) degrees, got {theta_i_deg}"));
    }
    check_permittivity(eps_r)?;
    Ok(refraction_rad(theta_i_deg.to_radians(), eps_r).to_degrees())
}

fn refraction_rad(theta_i: f64, eps_r: f64) -> f64 {
    (theta_i.sin() / eps_r.sqrt()).asin()
}

fn check_incidence(theta_i_deg: f64) -> Result<()> {
    if (0.0..=90.0).contains(&theta_i_deg) {
        Ok(())
    } else {
        domain(format!("incident angle must lie in [0, 90] degrees, got {theta_i_deg}"))
    }
}

/// Magnitude of the Fresnel reflection coefficient at an air/dielectric
/// interface, written in terms of incidence angle and permittivity only.
pub fn reflection_coefficient(theta_i_deg: f64, eps_r: f64, polarization: Polarization) -> Result<f64> {
    check_incidence(theta_i_deg)?;
    check_permittivity(eps_r)?;
    if theta_i_deg == 90.0 {
        return Ok(1.0);
    }
    let theta = theta_i_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let root = (eps_r - sin * sin).sqrt();
    let gamma = match polarization {
        Polarization::Perpendicular => (cos - root) / (cos + root),
        Polarization::Parallel => (eps_r * cos - root) / (eps_r * cos + root),
    };
    Ok(gamma.abs())
}

/// The same coefficient evaluated through refraction angle and wave
/// impedances `Z = Z0 / n` of the two media.
pub fn reflection_coefficient_impedance_form(theta_i_deg: f64, eps_r: f64, polarization: Polarization) -> Result<f64> {
    check_incidence(theta_i_deg)?;
    check_permittivity(eps_r)?;
    if theta_i_deg == 90.0 {
        return Ok(1.0);
    }
    let theta_i = theta_i_deg.to_radians();
    let theta_t = refraction_rad(theta_i, eps_r);
    let z_air = FREE_SPACE_IMPEDANCE;
    let z_slab = FREE_SPACE_IMPEDANCE / eps_r.sqrt();
    let (ci, ct) = (theta_i.cos(), theta_t.cos());
    let gamma = match polarization {
        Polarization::Perpendicular => (z_slab * ci - z_air * ct) / (z_slab * ci + z_air * ct),
        Polarization::Parallel => (z_slab * ct - z_air * ci) / (z_slab * ct + z_air * ci),
    };
    Ok(gamma.abs())
}

/// Reflection coefficient recovered from received powers of a reflected
/// and a direct ray, compensating the extra spreading of the longer path.
pub fn measured_reflection_coefficient(
    d_los_m: f64,
    d_total_m: f64,
    pr_reflected_dbm: f64,
    pr_los_dbm: f64,
) -> Result<f64> {
    check_positive("LOS distance", d_los_m)?;
    if d_total_m < d_los_m || d_total_m.is_nan() {
        return domain(format!(
            "reflected path length {d_total_m} m is shorter than the LOS distance {d_los_m} m"
        ));
    }
    let power_ratio = db_to_power(pr_reflected_dbm - pr_los_dbm);
    Ok(d_total_m / d_los_m * power_ratio.sqrt())
}

/// Penetration loss from the received power with and without the blockage.
pub fn penetration_loss_db(pr_los_dbm: f64, pr_penetration_dbm: f64) -> f64 {
    pr_los_dbm - pr_penetration_dbm
}

/// Penetration loss from the path losses with and without the blockage.
/// Equivalent to [`penetration_loss_db`] at a fixed transmit power.
pub fn penetration_loss_from_path_loss_db(pl_without_db: f64, pl_with_db: f64) -> f64 {
    pl_with_db - pl_without_db
}

/// Penetration loss averaged over slab thickness, dB/cm.
pub fn attenuation_factor(loss_db: f64, thickness_cm: f64) -> Result<f64> {
    check_positive("thickness", thickness_cm)?;
    Ok(loss_db / thickness_cm)
}
