//! Small special-function helpers (real Γ via a Lanczos approximation).

use std::f64::consts::PI;

/// Lanczos (g = 7, 9-term) coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_C: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Γ(x) for real x (poles at non-positive integers return NaN/±∞ naturally).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection Γ(x)Γ(1−x) = π / sin(πx).
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_C[0];
        for (i, c) in LANCZOS_C.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-12);
        // Γ(1/4) = 3.6256099082219083...
        assert_relative_eq!(gamma(0.25), 3.6256099082219083, max_relative = 1e-11);
        // Reflection branch: Γ(−0.5) = −2√π
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-11);
    }
}
