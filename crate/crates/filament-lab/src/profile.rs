//! Self-similar profile ODEs: the curve form and the complex form.
//!
//! Curve form (arclength profile of a self-similar binormal-flow filament):
//!
//! ```text
//!     Γ″(x) = ½ ((I + 𝒜)Γ(x)) × Γ′(x),        𝒜 = [[0,−a,0],[a,0,0],[0,0,0]] ,
//! ```
//!
//! integrated from x = 0 with |Γ′(0)| = 1 (arclength normalization; Γ(0) is
//! unconstrained).  Complex form (the Schrödinger profile):
//!
//! ```text
//!     f″ + i (x/2) f′ + (f/2)(|f|² − A) = 0 ,
//! ```
//!
//! with the pointwise conservation law |f′|² + ¼(|f|² − A)² = E(0).  The two
//! are linked by the Hasimoto dictionary: with T = Γ′ and c = |Γ″|,
//!
//! ```text
//!     A = a T₃(0) + |(I+𝒜)Γ(0)|²/4 ,   |f|² = −a T₃ + A ,   |f′|² = (a²/4)(1 − T₃²).
//! ```
//!
//! Two data families cover the studied solutions:
//! * odd:   Γ(0) = 0, Γ′(0) = (0, √(1−λ²), λ)  →  A = aλ, f(0) = 0,
//!   |f′(0)|² = (a²/4)(1−λ²), E(0) = a²/4;
//! * mixed: Γ(0) = (2c₀/√(1+a²), 0, 0), Γ′(0) = (0, 0, ±1)  →  A = ±a + c₀²,
//!   |f(0)|² = c₀², f′(0) = 0.
//!
//! Both f and Γ approach their limits with an O(1/|x|) *oscillatory* (chirped)
//! tail, so raw windowed fits of |f|² or T₃ stall near 1e−4.  The extractor
//! here uses exact consequences of the ODE instead.  With m = |f|²,
//! q = Re(f̄f′), r = Im(f̄f′), p = |f′|², the system closes as m′ = 2q,
//! r′ = −(x/2)q, q′ = p + (x/2)r − m(m−A)/2, and two rounds of integration by
//! parts give the *filtered amplitude*
//!
//! ```text
//!     m̃ = |f|² + (4/x) r + (8/x³) q
//!       = |f|²_∞ + smooth O(1/x²) + chirp O(1/x⁵) ,
//! ```
//!
//! so fitting m̃ against {1, 1/x², 1/x³} recovers |f|²_∞ to ~1e−8 from
//! moderate windows.  On the curve side the same quantity is reconstructed
//! from T₃ alone via q = −a T₃′/2 and
//! r(x) = r(0) + (a/4)(x T₃(x) − ∫₀ˣ T₃), r(0) = det(Γ′,Γ″,Γ‴)(0).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::{C64, I};

/// Default sample spacing: samples per unit of arclength.
pub const DEFAULT_SAMPLES_PER_UNIT: usize = 64;

/// Unit-tangent tolerance for curve initial data.
const UNIT_TANGENT_TOL: f64 = 1e-10;

/// Energy residual beyond `ENERGY_FLAG_FACTOR`·tol·(1+E0) marks a solution invalid.
const ENERGY_FLAG_FACTOR: f64 = 100.0;

/// The integrator runs below the requested tol so that the *global* drift over
/// tail-length intervals stays within the 100·tol conservation budget
/// (per-step control alone lets the drift accumulate past it).  The step count
/// grows like L² — the oscillation frequency is x/2 — so the margin tightens
/// quadratically with the half-length; 72/L² reproduces the factor 1/50
/// calibrated on L = 60.
const INTERNAL_TOL_SCALE: f64 = 72.0;
const INTERNAL_TOL_FACTOR_MAX: f64 = 0.02;

fn internal_opts(tol: f64, half_length: f64) -> OdeOptions {
    let factor = (INTERNAL_TOL_SCALE / (half_length * half_length)).min(INTERNAL_TOL_FACTOR_MAX);
    OdeOptions::with_tol((tol * factor).max(5e-15))
}

/// Two-sided fit agreement required of the tail estimators, relative to scale.
const SIDE_MISMATCH_TOL: f64 = 1e-4;

/// Fit-window retry widening factor (toward the origin) before giving up.
const WINDOW_WIDEN: f64 = 0.75;

// ---------------------------------------------------------------------------
// Parameters and solution containers
// ---------------------------------------------------------------------------

/// Which sign the mixed family's vertical initial tangent takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Initial data for the curve profile ODE.
#[derive(Debug, Clone)]
pub struct GammaParams {
    pub a: f64,
    pub gamma0: Vector3<f64>,
    pub tangent0: Vector3<f64>,
}

impl GammaParams {
    /// General data; rejects non-unit initial tangents.
    pub fn new(a: f64, gamma0: Vector3<f64>, tangent0: Vector3<f64>) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::invalid("a must be finite"));
        }
        if (tangent0.norm() - 1.0).abs() > UNIT_TANGENT_TOL {
            return Err(Error::invalid(format!(
                "initial tangent must be unit length (|Γ'(0)| = {:.3e})",
                tangent0.norm()
            )));
        }
        Ok(GammaParams { a, gamma0, tangent0 })
    }

    /// Odd family: Γ(0) = 0, Γ′(0) = (0, √(1−λ²), λ); requires |λ| ≤ 1.
    pub fn odd(a: f64, lambda: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda must lie in [-1, 1], got {lambda}")));
        }
        GammaParams::new(
            a,
            Vector3::zeros(),
            Vector3::new(0.0, (1.0 - lambda * lambda).sqrt(), lambda),
        )
    }

    /// Mixed family: Γ(0) = (2c₀/√(1+a²), 0, 0), Γ′(0) = (0, 0, ±1).
    pub fn mixed(a: f64, c0: f64, branch: Branch) -> Result<Self> {
        GammaParams::new(
            a,
            Vector3::new(2.0 * c0 / (1.0 + a * a).sqrt(), 0.0, 0.0),
            Vector3::new(0.0, 0.0, branch.sign()),
        )
    }
}

/// Sampled curve profile on a uniform symmetric arclength grid.
#[derive(Debug, Clone)]
pub struct CurveProfile {
    /// Arclength samples, uniform and symmetric about 0.
    pub s: Vec<f64>,
    pub gamma: Vec<Vector3<f64>>,
    pub tangent: Vec<Vector3<f64>>,
    /// |Γ″| at each sample.
    pub curvature: Vec<f64>,
    pub a: f64,
    pub params: GammaParams,
}

/// Sampled complex profile on a uniform symmetric grid.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub x: Vec<f64>,
    pub f: Vec<C64>,
    pub fprime: Vec<C64>,
    /// The constant A of the profile equation.
    pub big_a: f64,
    /// E(0) = |f′(0)|² + ¼(|f(0)|² − A)².
    pub e0: f64,
    /// Largest observed drift of the conserved quantity over the samples.
    pub energy_residual: f64,
}

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

#[inline]
fn i_plus_a(a: f64, g: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(g.x - a * g.y, a * g.x + g.y, g.z)
}

/// Γ″ = ½ ((I+𝒜)Γ) × T.
#[inline]
pub fn gamma_second(a: f64, gamma: &Vector3<f64>, tangent: &Vector3<f64>) -> Vector3<f64> {
    0.5 * i_plus_a(a, gamma).cross(tangent)
}

/// Γ‴ = ½ (𝒜T) × T + ½ ((I+𝒜)Γ) × Γ″   (using (I+𝒜)T × T = 𝒜T × T).
#[inline]
fn gamma_third(a: f64, gamma: &Vector3<f64>, tangent: &Vector3<f64>) -> Vector3<f64> {
    let at = Vector3::new(-a * tangent.y, a * tangent.x, 0.0);
    let g2 = gamma_second(a, gamma, tangent);
    0.5 * at.cross(tangent) + 0.5 * i_plus_a(a, gamma).cross(&g2)
}

fn curve_rhs(a: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |_x, y, dy| {
        let gamma = Vector3::new(y[0], y[1], y[2]);
        let tangent = Vector3::new(y[3], y[4], y[5]);
        let g2 = gamma_second(a, &gamma, &tangent);
        dy[0] = tangent.x;
        dy[1] = tangent.y;
        dy[2] = tangent.z;
        dy[3] = g2.x;
        dy[4] = g2.y;
        dy[5] = g2.z;
    }
}

fn profile_rhs(big_a: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |x, y, dy| {
        let f = C64::new(y[0], y[1]);
        let fp = C64::new(y[2], y[3]);
        let fpp = -I * (x / 2.0) * fp - 0.5 * f * (f.norm_sqr() - big_a);
        dy[0] = fp.re;
        dy[1] = fp.im;
        dy[2] = fpp.re;
        dy[3] = fpp.im;
    }
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

fn symmetric_grid(half_length: f64, samples_per_unit: usize) -> (usize, f64) {
    let ds = 1.0 / samples_per_unit as f64;
    let n_half = (half_length * samples_per_unit as f64).ceil() as usize;
    (n_half, ds)
}

/// Integrates the curve profile out to ±`half_length` with the default sample
/// density.
pub fn integrate_gamma(params: &GammaParams, half_length: f64, tol: f64) -> Result<CurveProfile> {
    integrate_gamma_opts(params, half_length, tol, DEFAULT_SAMPLES_PER_UNIT)
}

/// As [`integrate_gamma`] with explicit sample density (samples per unit s).
pub fn integrate_gamma_opts(
    params: &GammaParams,
    half_length: f64,
    tol: f64,
    samples_per_unit: usize,
) -> Result<CurveProfile> {
    validate_tol_and_length(half_length, tol)?;
    let (n_half, ds) = symmetric_grid(half_length, samples_per_unit);
    let a = params.a;

    // a = 0 with Γ(0) ∥ Γ′(0) (the odd family's straight line): Γ = Γ0 + x T0
    // solves the equation exactly; skip the integrator.
    let straight = a == 0.0 && params.gamma0.cross(&params.tangent0).norm() == 0.0;

    let y0: Vec<f64> = params
        .gamma0
        .iter()
        .chain(params.tangent0.iter())
        .copied()
        .collect();

    let sample_half = |sign: f64| -> Result<Vec<Vec<f64>>> {
        let xs: Vec<f64> = (0..=n_half).map(|j| sign * j as f64 * ds).collect();
        if straight {
            return Ok(xs
                .iter()
                .map(|&x| {
                    let g = params.gamma0 + x * params.tangent0;
                    vec![g.x, g.y, g.z, params.tangent0.x, params.tangent0.y, params.tangent0.z]
                })
                .collect());
        }
        let opts = internal_opts(tol, half_length);
        let sol = ode::integrate(curve_rhs(a), 0.0, &y0, sign * n_half as f64 * ds, &xs, &opts)?;
        Ok(sol.samples)
    };

    let pos = sample_half(1.0)?;
    let neg = sample_half(-1.0)?;

    let total = 2 * n_half + 1;
    let mut s = Vec::with_capacity(total);
    let mut gamma = Vec::with_capacity(total);
    let mut tangent = Vec::with_capacity(total);
    let mut curvature = Vec::with_capacity(total);
    for j in (1..=n_half).rev() {
        push_curve_sample(&neg[j], -(j as f64) * ds, &mut s, &mut gamma, &mut tangent, &mut curvature, a);
    }
    for (j, y) in pos.iter().enumerate() {
        push_curve_sample(y, j as f64 * ds, &mut s, &mut gamma, &mut tangent, &mut curvature, a);
    }

    Ok(CurveProfile {
        s,
        gamma,
        tangent,
        curvature,
        a,
        params: params.clone(),
    })
}

fn push_curve_sample(
    y: &[f64],
    s_val: f64,
    s: &mut Vec<f64>,
    gamma: &mut Vec<Vector3<f64>>,
    tangent: &mut Vec<Vector3<f64>>,
    curvature: &mut Vec<f64>,
    a: f64,
) {
    let g = Vector3::new(y[0], y[1], y[2]);
    let t = Vector3::new(y[3], y[4], y[5]);
    curvature.push(gamma_second(a, &g, &t).norm());
    s.push(s_val);
    gamma.push(g);
    tangent.push(t);
}

/// Integrates the complex profile equation out to ±`half_length` with the
/// default sample density.
pub fn integrate_profile_f(
    big_a: f64,
    f0: C64,
    df0: C64,
    half_length: f64,
    tol: f64,
) -> Result<ProfileSolution> {
    integrate_profile_f_opts(big_a, f0, df0, half_length, tol, DEFAULT_SAMPLES_PER_UNIT)
}

/// As [`integrate_profile_f`] with explicit sample density.
pub fn integrate_profile_f_opts(
    big_a: f64,
    f0: C64,
    df0: C64,
    half_length: f64,
    tol: f64,
    samples_per_unit: usize,
) -> Result<ProfileSolution> {
    validate_tol_and_length(half_length, tol)?;
    let (n_half, ds) = symmetric_grid(half_length, samples_per_unit);
    let e0 = df0.norm_sqr() + 0.25 * (f0.norm_sqr() - big_a) * (f0.norm_sqr() - big_a);
    let y0 = [f0.re, f0.im, df0.re, df0.im];

    let opts = internal_opts(tol, half_length);
    let sample_half = |sign: f64| -> Result<Vec<Vec<f64>>> {
        let xs: Vec<f64> = (0..=n_half).map(|j| sign * j as f64 * ds).collect();
        let sol = ode::integrate(profile_rhs(big_a), 0.0, &y0, sign * n_half as f64 * ds, &xs, &opts)?;
        Ok(sol.samples)
    };
    let pos = sample_half(1.0)?;
    let neg = sample_half(-1.0)?;

    let total = 2 * n_half + 1;
    let mut x = Vec::with_capacity(total);
    let mut f = Vec::with_capacity(total);
    let mut fprime = Vec::with_capacity(total);
    for j in (1..=n_half).rev() {
        x.push(-(j as f64) * ds);
        f.push(C64::new(neg[j][0], neg[j][1]));
        fprime.push(C64::new(neg[j][2], neg[j][3]));
    }
    for (j, y) in pos.iter().enumerate() {
        x.push(j as f64 * ds);
        f.push(C64::new(y[0], y[1]));
        fprime.push(C64::new(y[2], y[3]));
    }

    let mut sol = ProfileSolution {
        x,
        f,
        fprime,
        big_a,
        e0,
        energy_residual: 0.0,
    };
    sol.energy_residual = energy_residual(&sol);
    let allowed = ENERGY_FLAG_FACTOR * tol * (1.0 + e0);
    if sol.energy_residual > allowed {
        return Err(Error::ConservationViolation {
            residual: sol.energy_residual,
            allowed,
        });
    }
    Ok(sol)
}

fn validate_tol_and_length(half_length: f64, tol: f64) -> Result<()> {
    if !(half_length > 0.0) {
        return Err(Error::invalid("half_length must be positive"));
    }
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::invalid(format!("tol must lie in [1e-13, 1e-6], got {tol:e}")));
    }
    Ok(())
}

/// Largest drift of |f′|² + ¼(|f|² − A)² from E(0) over the samples.
pub fn energy_residual(sol: &ProfileSolution) -> f64 {
    sol.f
        .iter()
        .zip(&sol.fprime)
        .map(|(f, fp)| {
            let m = f.norm_sqr() - sol.big_a;
            (fp.norm_sqr() + 0.25 * m * m - sol.e0).abs()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Initial-data dictionaries
// ---------------------------------------------------------------------------

/// Complex-profile initial data matched to the odd curve family:
/// A = aλ, f(0) = 0, f′(0) = (a/2)√(1−λ²) (real phase representative).
pub fn odd_profile_data(a: f64, lambda: f64) -> (f64, C64, C64) {
    (
        a * lambda,
        C64::new(0.0, 0.0),
        C64::new(0.5 * a * (1.0 - lambda * lambda).sqrt(), 0.0),
    )
}

/// Complex-profile initial data matched to the mixed curve family:
/// A = ±a + c₀², f(0) = c₀, f′(0) = 0.
pub fn mixed_profile_data(a: f64, c0: f64, branch: Branch) -> (f64, C64, C64) {
    (branch.sign() * a + c0 * c0, C64::new(c0, 0.0), C64::new(0.0, 0.0))
}

/// A = a T₃(0) + |(I+𝒜)Γ(0)|²/4 from curve initial data alone.
pub fn hasimoto_a(params: &GammaParams) -> f64 {
    params.a * params.tangent0.z + i_plus_a(params.a, &params.gamma0).norm_squared() / 4.0
}

// ---------------------------------------------------------------------------
// Cross identities
// ---------------------------------------------------------------------------

/// Residuals of the Hasimoto identities between a curve and a profile.
#[derive(Debug, Clone, Copy)]
pub struct KeyIdentityResiduals {
    /// sup | |f|² − (−a T₃ + A) |
    pub amplitude: f64,
    /// sup | |f′|² − (a²/4)(1 − T₃²) |
    pub derivative: f64,
    /// Whether the profile had to be resampled onto the curve grid.
    pub resampled: bool,
}

/// Evaluates both identity residuals over the common grid.  If the grids
/// differ, the profile is resampled onto the curve grid by Hermite
/// interpolation and the report is flagged.
pub fn key_identity_residuals(
    curve: &CurveProfile,
    sol: &ProfileSolution,
    a: f64,
) -> Result<KeyIdentityResiduals> {
    let same_grid = curve.s.len() == sol.x.len()
        && curve
            .s
            .iter()
            .zip(&sol.x)
            .all(|(s, x)| (s - x).abs() < 1e-12);
    let big_a = sol.big_a;
    let mut amplitude = 0.0f64;
    let mut derivative = 0.0f64;
    for (j, &s) in curve.s.iter().enumerate() {
        let (f, fp) = if same_grid {
            (sol.f[j], sol.fprime[j])
        } else {
            (sol.eval_f(s)?, sol.eval_fprime(s)?)
        };
        let t3 = curve.tangent[j].z;
        amplitude = amplitude.max((f.norm_sqr() - (-a * t3 + big_a)).abs());
        derivative = derivative.max((fp.norm_sqr() - 0.25 * a * a * (1.0 - t3 * t3)).abs());
    }
    Ok(KeyIdentityResiduals {
        amplitude,
        derivative,
        resampled: !same_grid,
    })
}

// ---------------------------------------------------------------------------
// Interpolation (cubic Hermite on the uniform sample grids)
// ---------------------------------------------------------------------------

#[inline]
fn hermite_weights(theta: f64) -> (f64, f64, f64, f64) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + theta,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn locate(xs: &[f64], x: f64) -> Result<(usize, f64, f64)> {
    let x0 = xs[0];
    let h = xs[1] - xs[0];
    let last = *xs.last().unwrap();
    if x < x0 - 1e-9 || x > last + 1e-9 {
        return Err(Error::OutOfRange {
            requested: x,
            lo: x0,
            hi: last,
        });
    }
    let k = (((x - x0) / h).floor() as isize).clamp(0, xs.len() as isize - 2) as usize;
    let theta = ((x - xs[k]) / h).clamp(0.0, 1.0);
    Ok((k, theta, h))
}

impl ProfileSolution {
    /// f(x) by cubic Hermite interpolation (uses the stored derivative).
    pub fn eval_f(&self, x: f64) -> Result<C64> {
        let (k, theta, h) = locate(&self.x, x)?;
        let (h00, h10, h01, h11) = hermite_weights(theta);
        Ok(self.f[k] * h00
            + self.fprime[k] * (h * h10)
            + self.f[k + 1] * h01
            + self.fprime[k + 1] * (h * h11))
    }

    /// f′(x) by cubic Hermite interpolation; the needed f″ at the nodes comes
    /// from the ODE itself.
    pub fn eval_fprime(&self, x: f64) -> Result<C64> {
        let (k, theta, h) = locate(&self.x, x)?;
        let (h00, h10, h01, h11) = hermite_weights(theta);
        let fpp_k = self.fpp(k);
        let fpp_k1 = self.fpp(k + 1);
        Ok(self.fprime[k] * h00
            + fpp_k * (h * h10)
            + self.fprime[k + 1] * h01
            + fpp_k1 * (h * h11))
    }

    /// f″ at sample index `k` from the profile equation.
    #[inline]
    pub fn fpp(&self, k: usize) -> C64 {
        let f = self.f[k];
        let fp = self.fprime[k];
        -I * (self.x[k] / 2.0) * fp - 0.5 * f * (f.norm_sqr() - self.big_a)
    }

    /// Covered range.
    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

impl CurveProfile {
    /// Γ(s) by cubic Hermite interpolation (derivative = tangent).
    pub fn eval_gamma(&self, s: f64) -> Result<Vector3<f64>> {
        let (k, theta, h) = locate(&self.s, s)?;
        let (h00, h10, h01, h11) = hermite_weights(theta);
        Ok(self.gamma[k] * h00
            + self.tangent[k] * (h * h10)
            + self.gamma[k + 1] * h01
            + self.tangent[k + 1] * (h * h11))
    }

    /// Γ′(s) by cubic Hermite interpolation (derivative = Γ″ from the ODE).
    pub fn eval_tangent(&self, s: f64) -> Result<Vector3<f64>> {
        let (k, theta, h) = locate(&self.s, s)?;
        let (h00, h10, h01, h11) = hermite_weights(theta);
        let g2k = gamma_second(self.a, &self.gamma[k], &self.tangent[k]);
        let g2k1 = gamma_second(self.a, &self.gamma[k + 1], &self.tangent[k + 1]);
        Ok(self.tangent[k] * h00 + g2k * (h * h10) + self.tangent[k + 1] * h01 + g2k1 * (h * h11))
    }

    /// Curvature |Γ″|(s) by linear interpolation of the sampled values.
    pub fn eval_curvature(&self, s: f64) -> Result<f64> {
        let (k, theta, _) = locate(&self.s, s)?;
        Ok(self.curvature[k] * (1.0 - theta) + self.curvature[k + 1] * theta)
    }

    /// The vertical tangent component series T₃.
    pub fn t3_series(&self) -> Vec<f64> {
        self.tangent.iter().map(|t| t.z).collect()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }
}

// ---------------------------------------------------------------------------
// Tail asymptotics
// ---------------------------------------------------------------------------

/// A positive interval [lo, hi] of |x| used for tail fits.
#[derive(Debug, Clone, Copy)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FitWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 < lo && lo < hi) {
            return Err(Error::invalid(format!("bad fit window [{lo}, {hi}]")));
        }
        Ok(FitWindow { lo, hi })
    }
}

/// Default tail window for a profile integrated to ±L: [0.6 L, 0.95 L].
pub fn default_fit_window(half_length: f64) -> FitWindow {
    FitWindow {
        lo: 0.6 * half_length,
        hi: 0.95 * half_length,
    }
}

/// Everything the far-field expansion
/// f ≈ |f|_∞ e^{ic±} e^{iφ₂} + (2i|f′|_∞ e^{id±}/x) e^{iφ₃},
/// φ₂ = δ log|x|, φ₃ = −x²/4 − α log|x|, knows about a profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileAsymptotics {
    pub f_inf: f64,
    pub fp_inf: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    /// δ = |f|²_∞ − A.
    pub delta: f64,
    /// α = 2|f|²_∞ − A (zero exactly for the shot profiles).
    pub alpha: f64,
    /// RMS residual of the two-term phase fit, worse of the two sides.
    pub phase_fit_residual: f64,
    /// |two-sided |f|²_∞ estimates' difference|.
    pub side_mismatch: f64,
    /// | |E| − 1 | of the fitted complex amplitudes (unit-circle deviation).
    pub amp_unit_dev: f64,
}

/// Curve-side tail fit of T₃.
#[derive(Debug, Clone, Copy)]
pub struct T3Fit {
    pub t3_inf: f64,
    pub side_mismatch: f64,
    pub fit_residual: f64,
}

/// Joint asymptotic data of a matched (curve, profile) pair.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticData {
    pub f_inf: f64,
    pub fp_inf: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub t3_inf: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Residual of |f|²_∞ = −a T₃(∞) + A between the two independent fits.
    pub cross_residual: f64,
}

/// Least-squares fit of samples `(x_j, y_j)` against the basis
/// {1, 1/x², 1/x³}; returns the constant term and the RMS residual.
fn fit_inverse_powers(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for (&x, &y) in xs.iter().zip(ys) {
        let b = Vector3::new(1.0, 1.0 / (x * x), 1.0 / (x * x * x));
        ata += b * b.transpose();
        atb += b * y;
    }
    let coef = ata.lu().solve(&atb).unwrap_or_else(|| Vector3::new(f64::NAN, 0.0, 0.0));
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let model = coef[0] + coef[1] / (x * x) + coef[2] / (x * x * x);
        ss += (y - model) * (y - model);
    }
    (coef[0], (ss / xs.len() as f64).sqrt())
}

fn window_indices(xs: &[f64], window: FitWindow, side: f64) -> Vec<usize> {
    xs.iter()
        .enumerate()
        .filter(|(_, &x)| {
            let v = side * x;
            v >= window.lo && v <= window.hi
        })
        .map(|(j, _)| j)
        .collect()
}

/// Tail estimate of |f|²_∞ on one side via the filtered quantity
/// m̃ = |f|² + (4/x)·Im(f̄ f′) + (8/x³)·Re(f̄ f′).
fn side_f_inf_sq(sol: &ProfileSolution, window: FitWindow, side: f64) -> Result<(f64, f64)> {
    let idx = window_indices(&sol.x, window, side);
    if idx.len() < 8 {
        return Err(Error::invalid(format!(
            "fit window [{}, {}] contains too few samples",
            window.lo, window.hi
        )));
    }
    let xs: Vec<f64> = idx.iter().map(|&j| sol.x[j]).collect();
    let ys: Vec<f64> = idx
        .iter()
        .map(|&j| {
            let x = sol.x[j];
            let ffp = sol.f[j].conj() * sol.fprime[j];
            sol.f[j].norm_sqr() + 4.0 / x * ffp.im + 8.0 / (x * x * x) * ffp.re
        })
        .collect();
    Ok(fit_inverse_powers(&xs, &ys))
}

/// Phase fit on one side: least squares over complex amplitudes (E_c, E_d) of
/// f ≈ E_c·f_inf e^{iφ₂} + E_d·(2i fp_inf/x) e^{iφ₃}.  Returns
/// (arg E_c, arg E_d, rms residual, worst unit-circle deviation).
fn side_phases(
    sol: &ProfileSolution,
    window: FitWindow,
    side: f64,
    f_inf: f64,
    fp_inf: f64,
    delta: f64,
    alpha: f64,
) -> (f64, f64, f64, f64) {
    let idx = window_indices(&sol.x, window, side);
    let have_c = f_inf > 1e-8;
    let have_d = fp_inf > 1e-8;
    let basis = |x: f64| -> (C64, C64) {
        let lx = x.abs().ln();
        let phi2 = delta * lx;
        let phi3 = -x * x / 4.0 - alpha * lx;
        (
            C64::from_polar(f_inf, phi2),
            C64::from_polar(2.0 * fp_inf / x.abs(), phi3 + std::f64::consts::FRAC_PI_2)
                * if x < 0.0 { -1.0 } else { 1.0 },
        )
    };
    // Note: the 2i|f′|∞ e^{id}/x term carries the sign of 1/x on the negative
    // side; fold |x| and the sign into the basis so E_d keeps |E_d| ≈ 1.
    let mut ata = Matrix2::<C64>::zeros();
    let mut atb = Vector2::<C64>::zeros();
    for &j in &idx {
        let (u, w) = basis(sol.x[j]);
        let y = sol.f[j];
        ata[(0, 0)] += u.conj() * u;
        ata[(0, 1)] += u.conj() * w;
        ata[(1, 0)] += w.conj() * u;
        ata[(1, 1)] += w.conj() * w;
        atb[0] += u.conj() * y;
        atb[1] += w.conj() * y;
    }
    let (ec, ed) = if have_c && have_d {
        let det = ata[(0, 0)] * ata[(1, 1)] - ata[(0, 1)] * ata[(1, 0)];
        (
            (atb[0] * ata[(1, 1)] - ata[(0, 1)] * atb[1]) / det,
            (ata[(0, 0)] * atb[1] - ata[(1, 0)] * atb[0]) / det,
        )
    } else if have_c {
        (atb[0] / ata[(0, 0)], C64::new(1.0, 0.0))
    } else if have_d {
        (C64::new(1.0, 0.0), atb[1] / ata[(1, 1)])
    } else {
        (C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    };
    let mut ss = 0.0;
    for &j in &idx {
        let (u, w) = basis(sol.x[j]);
        let model = ec * u * (have_c as u8 as f64) + ed * w * (have_d as u8 as f64);
        ss += (sol.f[j] - model).norm_sqr();
    }
    let rms = (ss / idx.len() as f64).sqrt();
    let unit_dev = (if have_c { (ec.norm() - 1.0).abs() } else { 0.0 })
        .max(if have_d { (ed.norm() - 1.0).abs() } else { 0.0 });
    (ec.arg(), ed.arg(), rms, unit_dev)
}

/// Extracts |f|_∞, |f′|_∞ and the four limit phases from a profile alone.
///
/// If the two-sided amplitude fits disagree beyond tolerance the window is
/// widened once (toward the origin) before the mismatch is reported as a
/// failure.
pub fn profile_asymptotics(sol: &ProfileSolution, window: FitWindow) -> Result<ProfileAsymptotics> {
    let attempt = |win: FitWindow| -> Result<ProfileAsymptotics> {
        let (lp, _) = side_f_inf_sq(sol, win, 1.0)?;
        let (lm, _) = side_f_inf_sq(sol, win, -1.0)?;
        let mismatch = (lp - lm).abs();
        let f_inf_sq = (0.5 * (lp + lm)).max(0.0);
        let f_inf = f_inf_sq.sqrt();
        let delta = f_inf_sq - sol.big_a;
        let alpha = 2.0 * f_inf_sq - sol.big_a;
        let fp_inf = (sol.e0 - 0.25 * delta * delta).max(0.0).sqrt();
        let (c_plus, d_plus, r_p, ud_p) = side_phases(sol, win, 1.0, f_inf, fp_inf, delta, alpha);
        let (c_minus, d_minus, r_m, ud_m) = side_phases(sol, win, -1.0, f_inf, fp_inf, delta, alpha);
        Ok(ProfileAsymptotics {
            f_inf,
            fp_inf,
            c_plus,
            c_minus,
            d_plus,
            d_minus,
            delta,
            alpha,
            phase_fit_residual: r_p.max(r_m),
            side_mismatch: mismatch,
            amp_unit_dev: ud_p.max(ud_m),
        })
    };
    let first = attempt(window)?;
    let scale = 1.0 + first.f_inf * first.f_inf;
    if first.side_mismatch < SIDE_MISMATCH_TOL * scale {
        return Ok(first);
    }
    let widened = FitWindow {
        lo: WINDOW_WIDEN * window.lo,
        hi: window.hi,
    };
    let second = attempt(widened)?;
    if second.side_mismatch < SIDE_MISMATCH_TOL * scale {
        return Ok(second);
    }
    Err(Error::FitFailed {
        residual: second.side_mismatch,
        threshold: SIDE_MISMATCH_TOL * scale,
        context: "two-sided |f|²_∞ estimates disagree".into(),
    })
}

/// Curve-side estimate of T₃(∞) using the reconstructed filtered quantity.
///
/// With m = A − a T₃ and r′ = −(x/2)(m′/2), the curve data alone determine
/// r(x) = r(0) + (a/4)(x T₃ − ∫₀ˣ T₃), r(0) = det(Γ′,Γ″,Γ‴)(0), and the
/// filtered T̃₃ = T₃ − 4r/(a x) + 4T₃′/x³ converges with an O(1/x²) smooth
/// trend and O(1/x⁵) chirp residue (the profile-side m̃ mapped through the
/// Hasimoto identity, q = −a T₃′/2).
pub fn curve_t3_inf(curve: &CurveProfile, window: FitWindow) -> Result<T3Fit> {
    let a = curve.a;
    if a == 0.0 {
        return Err(Error::invalid("curve_t3_inf requires a != 0"));
    }
    let n = curve.s.len();
    let center = n / 2; // s = 0 by construction
    let h = curve.s[1] - curve.s[0];
    let t3: Vec<f64> = curve.tangent.iter().map(|t| t.z).collect();
    // T₃′ at the nodes from the ODE (for the Euler–Maclaurin end correction).
    let t3p: Vec<f64> = (0..n)
        .map(|j| gamma_second(a, &curve.gamma[j], &curve.tangent[j]).z)
        .collect();
    // Cumulative ∫₀ˢ T₃ with fourth-order end-corrected trapezoid sums.
    let mut cumint = vec![0.0; n];
    for j in center + 1..n {
        cumint[j] = cumint[j - 1] + 0.5 * h * (t3[j - 1] + t3[j]);
    }
    for j in (0..center).rev() {
        cumint[j] = cumint[j + 1] - 0.5 * h * (t3[j] + t3[j + 1]);
    }
    let corr = |j: usize| -> f64 {
        // ∫₀^{s_j} T₃ ≈ trapz + h²/12 (T₃′(0) − T₃′(s_j)), oriented.
        let sgn = if curve.s[j] >= 0.0 { 1.0 } else { -1.0 };
        cumint[j] + sgn * h * h / 12.0 * (t3p[center] - t3p[j])
    };
    let r0 = {
        let g2 = gamma_second(a, &curve.gamma[center], &curve.tangent[center]);
        let g3 = gamma_third(a, &curve.gamma[center], &curve.tangent[center]);
        curve.tangent[center].dot(&g2.cross(&g3))
    };
    let fit_side = |side: f64| -> Result<(f64, f64)> {
        let idx = window_indices(&curve.s, window, side);
        if idx.len() < 8 {
            return Err(Error::invalid("fit window contains too few curve samples"));
        }
        let xs: Vec<f64> = idx.iter().map(|&j| curve.s[j]).collect();
        let ys: Vec<f64> = idx
            .iter()
            .map(|&j| {
                let s = curve.s[j];
                let r = r0 + 0.25 * a * (s * t3[j] - corr(j));
                t3[j] - 4.0 * r / (a * s) + 4.0 * t3p[j] / (s * s * s)
            })
            .collect();
        Ok(fit_inverse_powers(&xs, &ys))
    };
    let (tp, rp) = fit_side(1.0)?;
    let (tm, rm) = fit_side(-1.0)?;
    Ok(T3Fit {
        t3_inf: 0.5 * (tp + tm),
        side_mismatch: (tp - tm).abs(),
        fit_residual: rp.max(rm),
    })
}

/// Joint asymptotics of a matched pair, cross-checking the Hasimoto identity
/// at infinity.
pub fn extract_asymptotics(
    curve: &CurveProfile,
    sol: &ProfileSolution,
    window: FitWindow,
) -> Result<AsymptoticData> {
    let pa = profile_asymptotics(sol, window)?;
    let t3 = curve_t3_inf(curve, window)?;
    let cross = (pa.f_inf * pa.f_inf - (-curve.a * t3.t3_inf + sol.big_a)).abs();
    Ok(AsymptoticData {
        f_inf: pa.f_inf,
        fp_inf: pa.fp_inf,
        c_plus: pa.c_plus,
        c_minus: pa.c_minus,
        d_plus: pa.d_plus,
        d_minus: pa.d_minus,
        t3_inf: t3.t3_inf,
        delta: pa.delta,
        alpha: pa.alpha,
        cross_residual: cross,
    })
}

/// Envelope power-law fit of | |f|² − |f|²_∞ | over the window: partitions the
/// window into bins, takes the per-bin max (the chirp envelope), and fits
/// log(envelope) against log|x|.  Returns the fitted decay power (≈ 1).
pub fn tail_decay_exponent(sol: &ProfileSolution, f_inf: f64, window: FitWindow) -> Result<f64> {
    let idx = window_indices(&sol.x, window, 1.0);
    if idx.len() < 64 {
        return Err(Error::invalid("window too small for envelope fit"));
    }
    let nbins = 12;
    let per = idx.len() / nbins;
    let mut lx = Vec::new();
    let mut le = Vec::new();
    for b in 0..nbins {
        let chunk = &idx[b * per..((b + 1) * per).min(idx.len())];
        let env = chunk
            .iter()
            .map(|&j| (sol.f[j].norm_sqr() - f_inf * f_inf).abs())
            .fold(0.0f64, f64::max);
        if env > 0.0 {
            let mid = sol.x[chunk[chunk.len() / 2]];
            lx.push(mid.ln());
            le.push(env.ln());
        }
    }
    if lx.len() < 4 {
        return Err(Error::FitFailed {
            residual: f64::NAN,
            threshold: 0.0,
            context: "envelope identically zero".into(),
        });
    }
    // Simple 1D regression slope.
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = le.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&le).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-10;

    #[test]
    fn odd_lambda_one_is_vertical_line() {
        // Γ_{a,1}(x) = (0,0,x): the tangent locks at e₃ and curvature vanishes.
        let params = GammaParams::odd(2.0, 1.0).unwrap();
        let curve = integrate_gamma(&params, 20.0, TOL).unwrap();
        for (j, &s) in curve.s.iter().enumerate() {
            let expect = Vector3::new(0.0, 0.0, s);
            assert!((curve.gamma[j] - expect).norm() < 1e-8, "at s = {s}");
            assert!(curve.curvature[j] < 1e-8);
        }
    }

    #[test]
    fn curve_matches_independent_rk4_at_endpoint() {
        let a = 1.0;
        let lambda = 0.5;
        let params = GammaParams::odd(a, lambda).unwrap();
        let curve = integrate_gamma(&params, 30.0, TOL / 10.0).unwrap();
        let y0: Vec<f64> = params
            .gamma0
            .iter()
            .chain(params.tangent0.iter())
            .copied()
            .collect();
        let (oracle_end, drift) =
            oracle::rk4_converged(curve_rhs(a), 0.0, &y0, 30.0, 1e-11, 60_000);
        assert!(drift < 1e-10, "oracle did not converge: {drift:e}");
        let j_end = curve.s.len() - 1;
        for c in 0..3 {
            assert_abs_diff_eq!(curve.gamma[j_end][c], oracle_end[c], epsilon = 1e-8);
            assert_abs_diff_eq!(curve.tangent[j_end][c], oracle_end[3 + c], epsilon = 1e-8);
        }
    }

    #[test]
    fn profile_matches_independent_rk4_at_endpoint() {
        let (big_a, f0, df0) = odd_profile_data(1.0, 0.5);
        let sol = integrate_profile_f(big_a, f0, df0, 30.0, TOL / 10.0).unwrap();
        let y0 = [f0.re, f0.im, df0.re, df0.im];
        let (oracle_end, drift) =
            oracle::rk4_converged(profile_rhs(big_a), 0.0, &y0, 30.0, 1e-11, 60_000);
        assert!(drift < 1e-10);
        let j = sol.x.len() - 1;
        assert_abs_diff_eq!(sol.f[j].re, oracle_end[0], epsilon = 1e-8);
        assert_abs_diff_eq!(sol.f[j].im, oracle_end[1], epsilon = 1e-8);
        assert_abs_diff_eq!(sol.fprime[j].re, oracle_end[2], epsilon = 1e-8);
        assert_abs_diff_eq!(sol.fprime[j].im, oracle_end[3], epsilon = 1e-8);
    }

    #[test]
    fn odd_family_energy_is_a_squared_over_four() {
        for &(a, lambda) in &[(0.5, -0.5), (1.0, 0.3), (3.0, 0.9)] {
            let (big_a, f0, df0) = odd_profile_data(a, lambda);
            let sol = integrate_profile_f(big_a, f0, df0, 25.0, TOL).unwrap();
            assert_abs_diff_eq!(sol.e0, a * a / 4.0, epsilon = 1e-14);
            assert!(sol.energy_residual < 1e-8, "residual {:e}", sol.energy_residual);
        }
    }

    #[test]
    fn odd_profile_is_odd_function() {
        let (big_a, f0, df0) = odd_profile_data(1.5, 0.4);
        let sol = integrate_profile_f(big_a, f0, df0, 20.0, TOL).unwrap();
        let n = sol.x.len();
        for j in 0..n {
            let k = n - 1 - j;
            assert!((sol.f[j] + sol.f[k]).norm() < 1e-8, "f not odd at {}", sol.x[j]);
        }
    }

    #[test]
    fn mixed_profile_is_even_function() {
        let (big_a, f0, df0) = mixed_profile_data(1.0, 0.8, Branch::Plus);
        let sol = integrate_profile_f(big_a, f0, df0, 20.0, TOL).unwrap();
        let n = sol.x.len();
        for j in 0..n {
            let k = n - 1 - j;
            assert!((sol.f[j] - sol.f[k]).norm() < 1e-8);
        }
    }

    #[test]
    fn hasimoto_a_matches_family_formulas() {
        let odd = GammaParams::odd(2.0, 0.7).unwrap();
        assert_abs_diff_eq!(hasimoto_a(&odd), 2.0 * 0.7, epsilon = 1e-13);
        let up = GammaParams::mixed(3.0, 1.8, Branch::Plus).unwrap();
        assert_abs_diff_eq!(hasimoto_a(&up), 3.0 + 1.8 * 1.8, epsilon = 1e-12);
        let down = GammaParams::mixed(3.0, 0.4, Branch::Minus).unwrap();
        assert_abs_diff_eq!(hasimoto_a(&down), -3.0 + 0.16, epsilon = 1e-12);
    }

    #[test]
    fn key_identities_hold_on_matched_pair() {
        let a = 1.0;
        let lambda = 0.4;
        let params = GammaParams::odd(a, lambda).unwrap();
        let curve = integrate_gamma(&params, 25.0, TOL).unwrap();
        let (big_a, f0, df0) = odd_profile_data(a, lambda);
        let sol = integrate_profile_f(big_a, f0, df0, 25.0, TOL).unwrap();
        let res = key_identity_residuals(&curve, &sol, a).unwrap();
        assert!(!res.resampled);
        assert!(res.amplitude < 1e-7, "amplitude identity {:e}", res.amplitude);
        assert!(res.derivative < 1e-7, "derivative identity {:e}", res.derivative);
    }

    #[test]
    fn constant_profile_asymptotics_are_exact() {
        // f ≡ c₀ solves the equation when A = c₀²; the filtered estimator is
        // then exactly constant.
        let c0 = 0.8;
        let sol = integrate_profile_f(c0 * c0, C64::new(c0, 0.0), C64::new(0.0, 0.0), 40.0, TOL)
            .unwrap();
        let asym = profile_asymptotics(&sol, default_fit_window(40.0)).unwrap();
        assert_abs_diff_eq!(asym.f_inf, c0, epsilon = 1e-9);
        assert!(asym.fp_inf < 1e-6);
        assert_abs_diff_eq!(asym.alpha, c0 * c0, epsilon = 1e-8);
    }

    #[test]
    fn filtered_estimator_is_window_stable() {
        // The headline accuracy claim behind the shooting criteria: moving the
        // fit window changes |f|²_∞ by well under the 1e−6 α-residual budget.
        let (big_a, f0, df0) = odd_profile_data(1.0, 0.5);
        let sol = integrate_profile_f(big_a, f0, df0, 75.0, TOL).unwrap();
        let w1 = FitWindow::new(30.0, 50.0).unwrap();
        let w2 = FitWindow::new(45.0, 70.0).unwrap();
        let a1 = profile_asymptotics(&sol, w1).unwrap();
        let a2 = profile_asymptotics(&sol, w2).unwrap();
        assert!(
            (a1.f_inf * a1.f_inf - a2.f_inf * a2.f_inf).abs() < 5e-7,
            "window sensitivity {:e}",
            (a1.f_inf * a1.f_inf - a2.f_inf * a2.f_inf).abs()
        );
    }

    #[test]
    fn curve_and_profile_tail_limits_agree() {
        let a = 1.0;
        let lambda = 0.5;
        let params = GammaParams::odd(a, lambda).unwrap();
        let curve = integrate_gamma(&params, 60.0, TOL).unwrap();
        let (big_a, f0, df0) = odd_profile_data(a, lambda);
        let sol = integrate_profile_f(big_a, f0, df0, 60.0, TOL).unwrap();
        let data = extract_asymptotics(&curve, &sol, default_fit_window(60.0)).unwrap();
        assert!(
            data.cross_residual < 1e-6,
            "|f|²_∞ vs −aT₃(∞)+A residual {:e}",
            data.cross_residual
        );
        // Conservation transfer: |f′|²_∞ = (a²/4)(1 − T₃(∞)²).
        let fp_sq = 0.25 * a * a * (1.0 - data.t3_inf * data.t3_inf);
        assert_abs_diff_eq!(data.fp_inf * data.fp_inf, fp_sq, epsilon = 1e-6);
    }

    #[test]
    fn two_term_expansion_reconstructs_far_tail() {
        let (big_a, f0, df0) = odd_profile_data(1.0, 0.5);
        let sol = integrate_profile_f(big_a, f0, df0, 60.0, TOL).unwrap();
        let asym = profile_asymptotics(&sol, default_fit_window(60.0)).unwrap();
        // On [40, 55] the two-term model should track f to O(1/x²).
        let mut worst = 0.0f64;
        for (j, &x) in sol.x.iter().enumerate() {
            if !(40.0..55.0).contains(&x) {
                continue;
            }
            let lx = x.ln();
            let main = C64::from_polar(asym.f_inf, asym.c_plus + asym.delta * lx);
            let osc = C64::from_polar(
                2.0 * asym.fp_inf / x,
                asym.d_plus - x * x / 4.0 - asym.alpha * lx + std::f64::consts::FRAC_PI_2,
            );
            worst = worst.max((sol.f[j] - main - osc).norm());
        }
        assert!(worst < 5e-3, "two-term tail error {worst:e}");
        assert!(asym.phase_fit_residual < 5e-3);
        assert!(asym.amp_unit_dev < 5e-2);
    }

    #[test]
    fn tail_envelope_decays_like_one_over_x() {
        let (big_a, f0, df0) = odd_profile_data(1.0, 0.5);
        let sol = integrate_profile_f(big_a, f0, df0, 60.0, TOL).unwrap();
        let asym = profile_asymptotics(&sol, default_fit_window(60.0)).unwrap();
        let p = tail_decay_exponent(&sol, asym.f_inf, default_fit_window(60.0)).unwrap();
        assert!((0.8..1.2).contains(&p), "fitted power {p}");
    }

    #[test]
    fn non_unit_tangent_is_rejected() {
        let r = GammaParams::new(1.0, Vector3::zeros(), Vector3::new(0.0, 0.0, 1.1));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }
}
