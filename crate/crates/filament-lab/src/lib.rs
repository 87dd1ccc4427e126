//! Numerical laboratory for self-similar solutions of the 1D cubic Schrödinger
//! equation and their vortex-filament counterparts.
//!
//! The library is organized around one object: the self-similar profile f of
//!
//! ```text
//!     i u_t + u_xx + (u/2)(|u|² − A/t) = 0,      u(t,x) = e^{ix²/4t} f(x/√t) / √t ,
//! ```
//!
//! which solves the profile equation f″ + i(x/2) f′ + (f/2)(|f|² − A) = 0, and its
//! geometric twin Γ, the arclength profile of a self-similar binormal-flow filament
//! X(t,x) = e^{(𝒜/2) log t} √t Γ(x/√t).  The modules:
//!
//! * [`ode`] — adaptive Dormand–Prince 5(4) integration with dense output.
//! * [`profile`] — the profile ODEs (curve and complex forms), conservation law,
//!   cross identities, and tail asymptotics.
//! * [`shooting`] — the one-parameter shooting problem selecting the zero-phase
//!   profile, and the principal-value pairing of u at t → 0.
//! * [`fourier`] — spectral grid utilities under the convention
//!   f̂(ξ) = (1/2π)∫ e^{−ixξ} f(x) dx with prefactor-free inversion.
//! * [`packets`] — closed-form Gaussian wave packets (free evolution and Fourier
//!   transform known analytically); the scattering data family.
//! * [`transforms`] — free propagator, pseudo-conformal involution, modified
//!   asymptotic states, the oscillatory kernel A_t(ξ), and inequality probes.
//! * [`evolution`] — split-step solvers for the v- and w-equations, decay fits,
//!   and the log-phase obstruction demonstration.
//! * [`wave_operator`] — the Duhamel fixed point (wave operator) for the final
//!   data problem, with Y-norm accounting and the I₁/I₂ decomposition.
//! * [`filament`] — self-similar filaments, parallel frames, Hasimoto
//!   reconstruction, spiral limits at t → 0, and Procrustes comparison.
//! * [`experiments`] — configuration-driven experiment runners behind the
//!   `filament-lab` CLI.
//!
//! Reference implementations used to validate the fast paths (fixed-step
//! integrators, brute-force quadratures) live in [`oracle`].

pub mod error;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod profile;
pub mod shooting;
pub mod fourier;
pub mod packets;
pub mod transforms;
pub mod evolution;
pub mod wave_operator;
pub mod filament;
pub mod experiments;
pub mod io;

#[cfg(test)]
pub(crate) mod testsupport;

pub use error::{Error, Result};

/// Complex double; the scalar type of every field in the crate.
pub type C64 = num_complex::Complex64;

/// i as a `C64` constant.
pub const I: C64 = C64::new(0.0, 1.0);
