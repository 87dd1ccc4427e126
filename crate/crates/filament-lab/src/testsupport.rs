//! Shared, lazily built fixtures for tests that need integrated profiles.
//!
//! Building a profile table is the expensive part of many tests, so the
//! fixtures are computed once per test binary and borrowed everywhere.

use std::sync::OnceLock;

use crate::profile::{
    default_fit_window, extract_asymptotics, integrate_gamma, integrate_profile_f_opts,
    odd_profile_data, AsymptoticData, GammaParams, ProfileSolution,
};
use crate::shooting::shoot_lambda;

pub(crate) struct ProfileFixture {
    pub sol: ProfileSolution,
    pub asym: AsymptoticData,
}

fn build_profile(a: f64, lambda: f64, half_length: f64) -> ProfileFixture {
    let params = GammaParams::odd(a, lambda).expect("fixture parameters are valid");
    let curve = integrate_gamma(&params, 60.0, 1e-8).expect("fixture curve integrates");
    let (big_a, f0, df0) = odd_profile_data(a, lambda);
    // 256 samples/unit keeps the table's Hermite interpolation error below
    // 1e−6 even where the profile's quadratic phase advances fastest.
    let sol = integrate_profile_f_opts(big_a, f0, df0, half_length, 1e-8, 256)
        .expect("fixture profile integrates");
    let asym = extract_asymptotics(&curve, &sol, default_fit_window(60.0))
        .expect("fixture asymptotics extract");
    ProfileFixture { sol, asym }
}

/// Odd profile at a = 1 shot so that the log-phase correction α vanishes;
/// table half-length 120 (covers |x|/√t for grid half-width 40 down to
/// t = 1/9).
pub(crate) fn shot_profile() -> &'static ProfileFixture {
    static CELL: OnceLock<ProfileFixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let shot = shoot_lambda(1.0, 1e-8).expect("fixture shot converges");
        build_profile(1.0, shot.lambda_a, 120.0)
    })
}

/// Odd profile at a = 1, λ = 0.3 — deliberately away from the shot root so
/// that α ≠ 0; table half-length 120.
pub(crate) fn generic_profile() -> &'static ProfileFixture {
    static CELL: OnceLock<ProfileFixture> = OnceLock::new();
    CELL.get_or_init(|| build_profile(1.0, 0.3, 120.0))
}
