use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Root-raised-cosine FIR taps, symmetric, unit energy.
///
/// The filter spans `span_symbols` symbols at `samples_per_symbol`, giving
/// `span_symbols * samples_per_symbol + 1` taps centred on the peak.
pub fn rrc_taps(rolloff: f64, span_symbols: usize, samples_per_symbol: usize) -> Result<Vec<f64>> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return domain(format!("RRC rolloff must lie in (0, 1], got {rolloff}"));
    }
    if span_symbols < 2 {
        return domain(format!("RRC span must be at least 2 symbols, got {span_symbols}"));
    }
    if samples_per_symbol < 1 {
        return domain("RRC needs at least one sample per symbol");
    }
    let len = span_symbols * samples_per_symbol + 1;
    let centre = (len - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..len)
        .map(|i| rrc_impulse((i as f64 - centre) / samples_per_symbol as f64, rolloff))
        .collect();
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let scale = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| *t *= scale);
    Ok(taps)
}

/// Continuous RRC impulse response at `t` symbols (unnormalised).
fn rrc_impulse(t: f64, beta: f64) -> f64 {
    const EPS: f64 = 1e-12;
    if t.abs() < EPS {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let singular = 1.0 / (4.0 * beta);
    if (t.abs() - singular).abs() < EPS {
        let arg = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn symmetric_and_unit_energy() {
        let taps = rrc_taps(0.22, 48, 2).unwrap();
        let n = taps.len();
        assert_eq!(n, 97);
        for k in 0..n {
            assert!((taps[k] - taps[n - 1 - k]).abs() < 1e-15);
        }
        let e: f64 = taps.iter().map(|t| t * t).sum();
        assert!((e - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_points_are_finite() {
        // 1/(4β) = 1 symbol lands exactly on a tap for β = 0.25.
        let taps = rrc_taps(0.25, 8, 4).unwrap();
        assert!(taps.iter().all(|t| t.is_finite()));
        let taps = rrc_taps(1.0, 4, 4).unwrap();
        assert!(taps.iter().all(|t| t.is_finite()));
    }

    #[test]
    fn cascade_is_nyquist() {
        for (beta, sps) in [(0.22, 2), (0.22, 4), (0.35, 2), (0.5, 8)] {
            let h = rrc_taps(beta, 48, sps).unwrap();
            let g = convolve(&h, &h);
            let c = g.len() / 2;
            assert!((g[c] - 1.0).abs() < 1e-9);
            let leak = (1..)
                .map(|k| k * sps)
                .take_while(|&o| o <= c)
                .map(|o| g[c + o].abs().max(g[c - o].abs()))
                .fold(0.0, f64::max);
            assert!(leak <= 1e-3, "beta {beta} sps {sps}: leakage {leak}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(rrc_taps(0.0, 8, 2).is_err());
        assert!(rrc_taps(1.5, 8, 2).is_err());
        assert!(rrc_taps(0.2, 1, 2).is_err());
        assert!(rrc_taps(0.2, 8, 0).is_err());
    }
}
