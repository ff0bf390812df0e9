use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence of the given length and root.
///
/// `x[n] = exp(-jπ·u·n²/N)` for even `N` and `exp(-jπ·u·n(n+1)/N)` for odd
/// `N`. The root must be coprime with the length.
pub fn generate_zc(length: usize, root: u64) -> Result<Vec<Complex64>> {
    if length == 0 {
        return domain("Zadoff-Chu length must be positive");
    }
    let n_len = length as u64;
    if root == 0 || gcd(root, n_len) != 1 {
        return domain(format!("Zadoff-Chu root {root} is not coprime with length {length}"));
    }
    let parity = n_len % 2;
    // Reduce the phase argument modulo 2N in integers to keep precision for
    // long sequences.
    let modulus = 2 * n_len;
    let root = root % modulus;
    Ok((0..n_len)
        .map(|n| {
            let quad = (n % modulus) * ((n + parity) % modulus) % modulus;
            let k = (root as u128 * quad as u128 % modulus as u128) as f64;
            Complex64::from_polar(1.0, -PI * k / n_len as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_four_by_formula() {
        let x = generate_zc(4, 1).unwrap();
        let expected = [0.0, -PI / 4.0, -PI, -9.0 * PI / 4.0].map(|p| Complex64::from_polar(1.0, p));
        for (a, b) in x.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_modulus_and_ideal_autocorrelation() {
        let x = generate_zc(2048, 1).unwrap();
        assert!(x.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        let n = x.len();
        for lag in [1usize, 2, 3, 100, 1024, 2047] {
            let acc: Complex64 = (0..n).map(|i| x[i] * x[(i + lag) % n].conj()).sum();
            assert!(acc.norm() / n as f64 <= 1e-9, "lag {lag}: {}", acc.norm());
        }
    }

    #[test]
    fn odd_length_sequence() {
        let x = generate_zc(63, 5).unwrap();
        let n = x.len();
        for lag in 1..n {
            let acc: Complex64 = (0..n).map(|i| x[i] * x[(i + lag) % n].conj()).sum();
            assert!(acc.norm() / n as f64 <= 1e-9);
        }
    }

    #[test]
    fn rejects_non_coprime_root() {
        assert!(generate_zc(2048, 2).is_err());
        assert!(generate_zc(2048, 0).is_err());
        assert!(generate_zc(0, 1).is_err());
    }
}
