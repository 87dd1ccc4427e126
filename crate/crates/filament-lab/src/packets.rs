//! Gaussian packet sums with closed-form free evolution and Fourier data.
//!
//! A packet is A·e^{−β(x−x₀)² + ik₀x} with Re β > 0 (β may be complex, so
//! chirped Gaussians are included).  Sums of packets are closed under the
//! free flow e^{it∂²}, complex conjugation, and the transform convention
//! f̂(ξ) = (1/2π)∫e^{−ixξ}f dx:
//!
//! ```text
//! e^{it∂²}[A e^{−β(x−x₀)²+ik₀x}]
//!     = A e^{ik₀x − ik₀²t} (1+4iβt)^{−1/2} e^{−β(x−x₀−2k₀t)²/(1+4iβt)},
//! f̂(ξ) = A/(2√(πβ)) · e^{i(k₀−ξ)x₀} e^{−(ξ−k₀)²/(4β)}.
//! ```
//!
//! These exact formulas make packet sums the reference family for testing
//! discrete propagators and transforms.

use crate::error::{Error, Result};
use crate::fourier::{ComplexField, SpatialGrid};
use crate::C64;

/// A·e^{−β(x−x₀)² + ik₀x}, Re β > 0.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianPacket {
    pub amp: C64,
    pub beta: C64,
    pub x0: f64,
    pub k0: f64,
}

impl GaussianPacket {
    pub fn new(amp: C64, beta: C64, x0: f64, k0: f64) -> Result<Self> {
        if !(beta.re > 0.0) {
            return Err(Error::invalid(format!(
                "packet width parameter needs Re β > 0, got {beta}"
            )));
        }
        Ok(GaussianPacket { amp, beta, x0, k0 })
    }

    pub fn eval(&self, x: f64) -> C64 {
        let d = x - self.x0;
        self.amp * (-self.beta * d * d + C64::new(0.0, self.k0 * x)).exp()
    }

    /// Exact e^{it∂²} image (both signs of t).
    pub fn free_evolved(&self, t: f64) -> GaussianPacket {
        let denom = C64::new(1.0, 0.0) + 4.0 * crate::I * self.beta * t;
        let phase = C64::from_polar(1.0, -self.k0 * self.k0 * t);
        GaussianPacket {
            amp: self.amp * phase / denom.sqrt(),
            beta: self.beta / denom,
            x0: self.x0 + 2.0 * self.k0 * t,
            k0: self.k0,
        }
    }

    /// f̂(ξ) under the 1/2π-forward convention.
    pub fn ft(&self, xi: f64) -> C64 {
        let pi = std::f64::consts::PI;
        let d = xi - self.k0;
        self.amp / (2.0 * (pi * self.beta).sqrt())
            * (C64::new(0.0, -d * self.x0) - d * d / (4.0 * self.beta)).exp()
    }

    pub fn conj(&self) -> GaussianPacket {
        GaussianPacket {
            amp: self.amp.conj(),
            beta: self.beta.conj(),
            x0: self.x0,
            k0: -self.k0,
        }
    }

    /// Multiplies by the chirp e^{iσx²} (closed under the family when the
    /// resulting Re β stays positive).
    pub fn chirped(&self, sigma: f64) -> GaussianPacket {
        // e^{iσx²}·e^{−β(x−x₀)²} = e^{−(β−iσ)(x−x₀)²}·e^{2iσx₀x}·e^{−iσx₀²}.
        GaussianPacket {
            amp: self.amp * C64::from_polar(1.0, -sigma * self.x0 * self.x0),
            beta: self.beta - crate::I * sigma,
            x0: self.x0,
            k0: self.k0 + 2.0 * sigma * self.x0,
        }
    }
}

/// A finite sum of Gaussian packets.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct PacketSum {
    pub terms: Vec<GaussianPacket>,
}

impl PacketSum {
    pub fn new(terms: Vec<GaussianPacket>) -> Self {
        PacketSum { terms }
    }

    /// Single real Gaussian amplitude·e^{−x²} — the workhorse test datum.
    pub fn unit_gaussian(amplitude: f64) -> Self {
        PacketSum::new(vec![GaussianPacket {
            amp: C64::new(amplitude, 0.0),
            beta: C64::new(1.0, 0.0),
            x0: 0.0,
            k0: 0.0,
        }])
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.terms.iter().map(|p| p.eval(x)).sum()
    }

    pub fn free_evolved(&self, t: f64) -> PacketSum {
        PacketSum::new(self.terms.iter().map(|p| p.free_evolved(t)).collect())
    }

    pub fn ft(&self, xi: f64) -> C64 {
        self.terms.iter().map(|p| p.ft(xi)).sum()
    }

    pub fn conj(&self) -> PacketSum {
        PacketSum::new(self.terms.iter().map(|p| p.conj()).collect())
    }

    /// Multiplies every term by e^{iσx²} (Re β is untouched, so the family
    /// is closed under chirps).
    pub fn chirped(&self, sigma: f64) -> PacketSum {
        PacketSum::new(self.terms.iter().map(|p| p.chirped(sigma)).collect())
    }

    pub fn scaled(&self, factor: C64) -> PacketSum {
        PacketSum::new(
            self.terms
                .iter()
                .map(|p| GaussianPacket { amp: factor * p.amp, ..*p })
                .collect(),
        )
    }

    /// Exact ∫|u|²dx via pairwise complex Gaussian integrals.
    pub fn l2_norm_sq(&self) -> f64 {
        let pi = std::f64::consts::PI;
        let mut total = C64::new(0.0, 0.0);
        for p in &self.terms {
            for q in &self.terms {
                let qc = q.conj();
                // ∫ exp(−p2·x² + q1·x + c0) dx = √(π/p2)·exp(q1²/4p2 + c0).
                let p2 = p.beta + qc.beta;
                let q1 = 2.0 * p.beta * p.x0 + 2.0 * qc.beta * qc.x0
                    + C64::new(0.0, p.k0 + qc.k0);
                let c0 = -p.beta * p.x0 * p.x0 - qc.beta * qc.x0 * qc.x0;
                total += p.amp * qc.amp * (pi / p2).sqrt() * (q1 * q1 / (4.0 * p2) + c0).exp();
            }
        }
        total.re
    }

    /// Samples the sum onto a grid with a time tag.
    pub fn sample(&self, grid: SpatialGrid, time: f64) -> Result<ComplexField> {
        ComplexField::from_fn(grid, time, |x| self.eval(x))
    }

    /// Radius beyond which every term is below `tiny` in modulus.
    pub fn support_radius(&self, tiny: f64) -> f64 {
        self.terms
            .iter()
            .map(|p| {
                let amp = p.amp.norm().max(1.0);
                p.x0.abs() + ((amp / tiny).ln() / p.beta.re).sqrt()
            })
            .fold(1.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier;
    use crate::oracle;
    use approx::assert_abs_diff_eq;

    fn test_sum() -> PacketSum {
        PacketSum::new(vec![
            GaussianPacket::new(C64::new(1.0, 0.3), C64::new(1.0, 0.2), -0.7, 1.5).unwrap(),
            GaussianPacket::new(C64::new(0.4, -0.2), C64::new(0.5, 0.0), 1.1, -0.8).unwrap(),
        ])
    }

    /// Closed-form free evolution equals the spectral propagator applied to
    /// the sampled packet.
    #[test]
    fn free_evolution_matches_spectral_propagator() {
        let sum = test_sum();
        let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let sampled = sum.sample(grid, 0.0).unwrap();
        for &t in &[0.3, -0.2, 1.7] {
            let spectral =
                fourier::apply_multiplier(&sampled, |xi| C64::from_polar(1.0, -xi * xi * t));
            let exact = sum.free_evolved(t);
            for (j, v) in spectral.iter().enumerate() {
                let x = grid.x(j);
                assert!(
                    (v - exact.eval(x)).norm() < 1e-10,
                    "t = {t}, x = {x}: {:?}",
                    v - exact.eval(x)
                );
            }
        }
    }

    /// Closed-form transform equals direct quadrature.
    #[test]
    fn ft_matches_quadrature() {
        let sum = test_sum();
        for &xi in &[0.0, 0.9, -2.3, 4.0] {
            let direct = oracle::trapezoid_c64(
                |x| sum.eval(x) * C64::from_polar(1.0, -x * xi),
                -30.0,
                30.0,
                8192,
            ) / (2.0 * std::f64::consts::PI);
            let exact = sum.ft(xi);
            assert_abs_diff_eq!(exact.re, direct.re, epsilon = 1e-12);
            assert_abs_diff_eq!(exact.im, direct.im, epsilon = 1e-12);
        }
    }

    /// Exact L² norm agrees with the discrete norm and is conserved by the
    /// free flow.
    #[test]
    fn l2_norm_exact_and_conserved() {
        let sum = test_sum();
        let grid = SpatialGrid::symmetric(40.0, 2048).unwrap();
        let discrete = sum.sample(grid, 0.0).unwrap().norm_l2();
        let exact = sum.l2_norm_sq().sqrt();
        assert_abs_diff_eq!(discrete, exact, epsilon = 1e-10);
        for &t in &[0.5, 3.0] {
            assert_abs_diff_eq!(sum.free_evolved(t).l2_norm_sq().sqrt(), exact, epsilon = 1e-12);
        }
    }

    /// Chirp multiplication is exact: e^{iσx²}·sum evaluated pointwise.
    #[test]
    fn chirp_is_pointwise_exact() {
        let sum = test_sum();
        let chirped = sum.chirped(-0.35);
        for k in 0..40 {
            let x = -4.0 + 0.2 * k as f64;
            let expected = sum.eval(x) * C64::from_polar(1.0, -0.35 * x * x);
            assert!((chirped.eval(x) - expected).norm() < 1e-13);
        }
    }
}
