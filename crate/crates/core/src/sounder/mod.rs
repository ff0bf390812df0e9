//! Correlation channel sounder.
//!
//! A Zadoff-Chu sequence is zero-stuffed to `oversample` samples per chip
//! and shaped by an RRC filter applied circularly, giving one period of a
//! periodic sounding waveform. The receiver correlates one period against
//! the same waveform, so the CIR is exact up to the raised-cosine pulse
//! shape, and decimates it to the chip-spaced delay grid.
//!
//! Amplitudes are in `sqrt(mW)`: the transmitted waveform has unit mean
//! power per sample, so a tap of power `P` dBm appears in the CIR as
//! `|h|² = P` dBm.

mod rrc;
mod zc;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::propagation::{db_to_power, power_to_db};

pub use rrc::rrc_taps;
pub use zc::generate_zc;

/// PDP values are floored here so every bin stays finite.
pub const MIN_POWER_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SounderConfig {
    pub zc_length: usize,
    pub zc_root: u64,
    pub sample_rate_hz: f64,
    /// Samples per ZC chip.
    pub oversample: usize,
    pub rrc_rolloff: f64,
    pub rrc_span_symbols: usize,
    pub pdp_averages: usize,
    /// Receiver noise power per sample, dBm. `-inf` disables noise.
    pub noise_floor_dbm: f64,
}

impl Default for SounderConfig {
    fn default() -> Self {
        Self {
            zc_length: 2048,
            zc_root: 1,
            sample_rate_hz: 3.072e9,
            oversample: 2,
            rrc_rolloff: 0.22,
            rrc_span_symbols: 48,
            pdp_averages: 16,
            noise_floor_dbm: -94.0,
        }
    }
}

impl SounderConfig {
    pub fn noiseless(mut self) -> Self {
        self.noise_floor_dbm = f64::NEG_INFINITY;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.zc_length < 2 {
            return domain("zc_length must be at least 2");
        }
        if self.zc_root == 0 || zc::gcd(self.zc_root, self.zc_length as u64) != 1 {
            return domain(format!(
                "zc_root {} is not coprime with zc_length {}",
                self.zc_root, self.zc_length
            ));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return domain("sample_rate_hz must be positive");
        }
        if self.oversample == 0 {
            return domain("oversample must be at least 1");
        }
        if self.pdp_averages == 0 {
            return domain("pdp_averages must be at least 1");
        }
        if self.noise_floor_dbm.is_nan() || self.noise_floor_dbm == f64::INFINITY {
            return domain("noise_floor_dbm must be finite or -inf");
        }
        rrc_taps(self.rrc_rolloff, self.rrc_span_symbols, self.oversample).map(|_| ())
    }

    /// Spacing of the CIR delay grid, `oversample / f_s`.
    pub fn delay_bin_s(&self) -> f64 {
        self.oversample as f64 / self.sample_rate_hz
    }

    /// Samples per sounding period.
    pub fn waveform_len(&self) -> usize {
        self.zc_length * self.oversample
    }

    pub fn unambiguous_delay_s(&self) -> f64 {
        self.waveform_len() as f64 / self.sample_rate_hz
    }

    /// Mean noise power of one CIR bin after correlation, dBm.
    pub fn pdp_noise_floor_dbm(&self) -> f64 {
        self.noise_floor_dbm - power_to_db(self.waveform_len() as f64)
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_floor_dbm == f64::NEG_INFINITY
    }
}

/// One path of a tapped-delay-line channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    pub delay_s: f64,
    /// Complex gain in `sqrt(mW)` relative to a unit-power transmit sample.
    pub amplitude: Complex64,
}

impl ChannelTap {
    pub fn new(delay_s: f64, amplitude: Complex64) -> Self {
        Self { delay_s, amplitude }
    }

    pub fn power_dbm(&self) -> f64 {
        power_to_db(self.amplitude.norm_sqr())
    }
}

/// Complex channel impulse response on a uniform delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub taps: Vec<Complex64>,
    pub delay_bin_s: f64,
}

impl Cir {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Averaged power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Pdp {
    pub power_db: Vec<f64>,
    pub delay_bin_s: f64,
    pub averages: usize,
}

impl Pdp {
    pub fn len(&self) -> usize {
        self.power_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power_db.is_empty()
    }

    pub fn delay_s(&self, bin: usize) -> f64 {
        bin as f64 * self.delay_bin_s
    }

    /// Strongest bin as `(index, power_db)`.
    pub fn peak(&self) -> Option<(usize, f64)> {
        self.power_db
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Per-bin average of `|h|²` across CIRs, in dB.
pub fn compute_pdp(cirs: &[Cir]) -> Result<Pdp> {
    let Some(first) = cirs.first() else {
        return domain("cannot average an empty CIR list");
    };
    if cirs
        .iter()
        .any(|c| c.len() != first.len() || c.delay_bin_s != first.delay_bin_s)
    {
        return domain("CIRs are on different delay grids");
    }
    let mut acc = vec![0.0; first.len()];
    for cir in cirs {
        for (a, t) in acc.iter_mut().zip(&cir.taps) {
            *a += t.norm_sqr();
        }
    }
    let k = cirs.len() as f64;
    Ok(Pdp {
        power_db: acc.into_iter().map(|p| power_to_db(p / k).max(MIN_POWER_DB)).collect(),
        delay_bin_s: first.delay_bin_s,
        averages: cirs.len(),
    })
}

/// Signed DFT frequency index of bin `m` in an `n`-point transform.
fn signed_bin(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Frequency response of `taps` on an `n`-point DFT grid at `sample_rate_hz`.
///
/// Fractional delays are band-limited periodic shifts. For even `n` the
/// Nyquist bin uses the real part of the phase ramp so that real signals
/// stay real.
fn channel_response(taps: &[ChannelTap], n: usize, sample_rate_hz: f64) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for tap in taps {
        let shift = tap.delay_s * sample_rate_hz;
        for (m, hm) in h.iter_mut().enumerate() {
            let phase = if n.is_multiple_of(2) && m == n / 2 {
                Complex64::new((PI * shift).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -2.0 * PI * signed_bin(m, n) * shift / n as f64)
            };
            *hm += tap.amplitude * phase;
        }
    }
    h
}

fn check_delays(taps: &[ChannelTap], n: usize, sample_rate_hz: f64) -> Result<()> {
    let max = n as f64 / sample_rate_hz;
    for tap in taps {
        if !(tap.delay_s >= 0.0 && tap.delay_s < max) {
            return domain(format!(
                "tap delay {:.4e} s outside the unambiguous range [0, {max:.4e}) s",
                tap.delay_s
            ));
        }
    }
    Ok(())
}

/// Adds circularly-symmetric white Gaussian noise of `noise_floor_dbm` per
/// sample. A floor of `-inf` leaves the signal untouched.
pub fn add_noise<R: Rng + ?Sized>(signal: &mut [Complex64], noise_floor_dbm: f64, rng: &mut R) {
    if noise_floor_dbm == f64::NEG_INFINITY {
        return;
    }
    let sigma = (db_to_power(noise_floor_dbm) / 2.0).sqrt();
    for s in signal.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(re * sigma, im * sigma);
    }
}

/// Passes one period of a periodic waveform through a tapped delay line
/// and adds receiver noise.
pub fn apply_channel<R: Rng + ?Sized>(
    waveform: &[Complex64],
    taps: &[ChannelTap],
    sample_rate_hz: f64,
    noise_floor_dbm: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let n = waveform.len();
    if n == 0 {
        return domain("empty waveform");
    }
    check_delays(taps, n, sample_rate_hz)?;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec = waveform.to_vec();
    fwd.process(&mut spec);
    let mut out = filter_spectrum(&spec, taps, sample_rate_hz, inv.as_ref());
    add_noise(&mut out, noise_floor_dbm, rng);
    Ok(out)
}

fn filter_spectrum(
    spectrum: &[Complex64],
    taps: &[ChannelTap],
    sample_rate_hz: f64,
    inverse: &dyn Fft<f64>,
) -> Vec<Complex64> {
    let n = spectrum.len();
    let h = channel_response(taps, n, sample_rate_hz);
    let mut out: Vec<Complex64> = spectrum.iter().zip(&h).map(|(s, h)| s * h).collect();
    inverse.process(&mut out);
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// A configured sounder with its reference waveform and FFT plans.
#[derive(Clone)]
pub struct Sounder {
    config: SounderConfig,
    waveform: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    energy: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Sounder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sounder")
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Sounder {
    pub fn new(config: SounderConfig) -> Result<Self> {
        config.validate()?;
        let chips = generate_zc(config.zc_length, config.zc_root)?;
        let taps = rrc_taps(config.rrc_rolloff, config.rrc_span_symbols, config.oversample)?;
        let n = config.waveform_len();
        let os = config.oversample;

        // Circular convolution of the zero-stuffed chips with the centred
        // RRC filter.
        let centre = (taps.len() - 1) / 2;
        let mut waveform = vec![Complex64::new(0.0, 0.0); n];
        for (c, chip) in chips.iter().enumerate() {
            let pos = c * os;
            for (k, h) in taps.iter().enumerate() {
                let idx = (pos + n * (1 + taps.len() / n) + k - centre) % n;
                waveform[idx] += chip * *h;
            }
        }
        let mean_power = waveform.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        let scale = mean_power.sqrt().recip();
        waveform.iter_mut().for_each(|v| *v *= scale);

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut spectrum = waveform.clone();
        forward.process(&mut spectrum);
        let energy = n as f64;
        Ok(Self {
            config,
            waveform,
            spectrum,
            energy,
            forward,
            inverse,
        })
    }

    pub fn config(&self) -> &SounderConfig {
        &self.config
    }

    /// One period of the transmitted waveform (unit mean power).
    pub fn waveform(&self) -> &[Complex64] {
        &self.waveform
    }

    /// Received period for the given channel, with configured noise.
    pub fn apply_channel<R: Rng + ?Sized>(&self, taps: &[ChannelTap], rng: &mut R) -> Result<Vec<Complex64>> {
        check_delays(taps, self.waveform.len(), self.config.sample_rate_hz)?;
        let mut out = filter_spectrum(&self.spectrum, taps, self.config.sample_rate_hz, self.inverse.as_ref());
        add_noise(&mut out, self.config.noise_floor_dbm, rng);
        Ok(out)
    }

    /// Circular cross-correlation against the reference waveform, scaled so
    /// that a unit zero-delay channel gives 1 at bin 0, decimated to the
    /// chip-spaced grid.
    pub fn estimate_cir(&self, rx: &[Complex64]) -> Result<Cir> {
        let n = self.waveform.len();
        if rx.len() != n {
            return domain(format!("received {} samples, expected {n}", rx.len()));
        }
        let mut buf = rx.to_vec();
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s.conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / (n as f64 * self.energy);
        let taps = buf.iter().step_by(self.config.oversample).map(|v| v * scale).collect();
        Ok(Cir {
            taps,
            delay_bin_s: self.config.delay_bin_s(),
        })
    }

    /// Runs `pdp_averages` independent soundings of the channel and
    /// averages them.
    pub fn sound<R: Rng + ?Sized>(&self, taps: &[ChannelTap], rng: &mut R) -> Result<Pdp> {
        check_delays(taps, self.waveform.len(), self.config.sample_rate_hz)?;
        let clean = filter_spectrum(&self.spectrum, taps, self.config.sample_rate_hz, self.inverse.as_ref());
        if self.config.is_noiseless() {
            let mut pdp = compute_pdp(&[self.estimate_cir(&clean)?])?;
            pdp.averages = self.config.pdp_averages;
            return Ok(pdp);
        }
        let cirs = (0..self.config.pdp_averages)
            .map(|_| {
                let mut rx = clean.clone();
                add_noise(&mut rx, self.config.noise_floor_dbm, rng);
                self.estimate_cir(&rx)
            })
            .collect::<Result<Vec<_>>>()?;
        compute_pdp(&cirs)
    }
}

/// Free-function form of [`Sounder::estimate_cir`].
pub fn estimate_cir(rx_waveform: &[Complex64], config: &SounderConfig) -> Result<Cir> {
    Sounder::new(config.clone())?.estimate_cir(rx_waveform)
}
