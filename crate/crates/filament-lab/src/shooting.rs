//! Shooting construction for the zero-phase-correction profile family.
//!
//! For a ≠ 0 the odd curve data Γ(0) = 0, Γ′(0) = (0, √(1−λ²), λ) generate a
//! one-parameter family of curve profiles.  The scalar map
//!
//! ```text
//! F_a(λ) = 2·T₃(∞) − λ,        T₃(0) = λ,
//! ```
//!
//! is continuous with F_a(−1) = −1 and F_a(1) = 1 (the data with λ = ±1 give
//! straight vertical lines, so T₃ ≡ ±1), hence it crosses zero at some
//! λ_a ∈ (−1, 1).  At a crossing the matched complex profile f satisfies
//! 2|f|²_∞ = A_a = a·λ_a, i.e. the logarithmic phase-correction exponent
//! α = 2|f|²_∞ − A vanishes, and the rescaled field
//! u_f(t,x) = e^{ix²/4t} f(x/√t)/√t converges distributionally as t → 0⁺ to
//! z₀·pv(1/x) with modulus
//!
//! ```text
//! |z₀| = 2|f′|_∞ = |a|·√(1 − λ_a²/4) ∈ [√3/2·|a|, |a|).
//! ```
//!
//! The module provides the map [`f_a`], the root solve [`shoot_lambda`]
//! (sign-change scan plus bracketed bisection with secant acceleration) and
//! the distributional pairing probe [`pv_pairing`], which measures
//! P(t) = ∫ u_f(t,x)·φ(x) dx against the principal-value target for test
//! functions φ from a small built-in family.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::{
    default_fit_window, integrate_gamma, integrate_profile_f, odd_profile_data,
    profile_asymptotics, AsymptoticData, GammaParams, ProfileSolution,
};
use crate::quad;
use crate::{C64, I};

/// Half-length of the curve and profile integrations behind [`f_a`] and
/// [`shoot_lambda`].  The tail-fit window is the default window for this
/// length, i.e. [36, 57].
pub const SHOOT_HALF_LENGTH: f64 = 60.0;

/// Number of nodes in the sign-change scan of F_a over [−1, 1].
pub const SCAN_POINTS: usize = 41;

/// Smallest shooting tolerance the root loop accepts.  Below this the
/// tail-fit bias of F_a is comparable to the requested residual and the
/// stopping test would chatter.
pub const MIN_SHOOT_TOL: f64 = 1e-10;

const MAX_REFINE_ITERS: usize = 200;

/// Exclusion radii for the principal-value quadrature; Richardson
/// extrapolation over these three levels removes the O(ε) and O(ε³) terms.
const PV_EPSILONS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Absolute tolerance of the inner quadratures in the pairing probe.
const PAIRING_QUAD_TOL: f64 = 1e-9;

/// Outcome of the λ-shoot for one value of a.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ShootingResult {
    /// Helical-frame rotation rate of the curve equation.
    pub a: f64,
    /// Root of F_a in (−1, 1); equals T₃(0) of the shot curve.
    pub lambda_a: f64,
    /// Amplitude parameter A_a = a·λ_a of the matched profile equation.
    #[serde(rename = "A_a")]
    pub big_a: f64,
    /// |z₀| = 2|f′|_∞ = |a|·√(1 − λ_a²/4).
    pub z0_modulus: f64,
    /// |2|f|²_∞ − A_a| recomputed through an independent profile
    /// integration; small values confirm the vanishing phase correction.
    pub alpha_residual: f64,
    /// F_a evaluations spent refining brackets (scan excluded).
    pub iterations: usize,
}

/// Evaluates F_a(λ) = 2·T₃(∞) − λ for odd curve data.
///
/// `tol` controls the inner curve integration; the asymptotic value T₃(∞)
/// comes from the filtered tail fit on the default window.
pub fn f_a(a: f64, lambda: f64, tol: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::invalid("f_a requires a ≠ 0"));
    }
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!(
            "f_a requires λ ∈ [−1, 1], got {lambda}"
        )));
    }
    let params = GammaParams::odd(a, lambda)?;
    let curve = integrate_gamma(&params, SHOOT_HALF_LENGTH, tol)?;
    let fit = crate::profile::curve_t3_inf(&curve, default_fit_window(SHOOT_HALF_LENGTH))?;
    Ok(2.0 * fit.t3_inf - lambda)
}

/// Samples F_a on a uniform grid over [−1, 1]; evaluations run in parallel.
pub fn scan_f_a(a: f64, tol: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::invalid("scan needs at least 2 points"));
    }
    let lambdas: Vec<f64> = (0..points)
        .map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64)
        .collect();
    let values = lambdas
        .par_iter()
        .map(|&l| f_a(a, l, tol))
        .collect::<Result<Vec<f64>>>()?;
    Ok(lambdas.into_iter().zip(values).collect())
}

/// Finds λ_a with |F_a(λ_a)| ≤ `tol` and assembles the [`ShootingResult`].
///
/// A scan over [`SCAN_POINTS`] nodes locates every sign change; each bracket
/// is refined by bisection with secant acceleration.  If several roots are
/// present the one with smallest |λ| is returned (the others are logged).
/// The α-residual is recomputed from a fresh profile integration with the
/// matched data f(0) = 0, f′(0) = (a/2)·√(1−λ_a²), A = a·λ_a.
pub fn shoot_lambda(a: f64, tol: f64) -> Result<ShootingResult> {
    if a == 0.0 {
        return Err(Error::invalid("shoot_lambda requires a ≠ 0"));
    }
    if !(tol >= MIN_SHOOT_TOL) {
        return Err(Error::invalid(format!(
            "shooting tolerance must be ≥ {MIN_SHOOT_TOL}, got {tol}"
        )));
    }
    let scan = scan_f_a(a, tol, SCAN_POINTS)?;
    let mut brackets = Vec::new();
    for pair in scan.windows(2) {
        let (l0, v0) = pair[0];
        let (l1, v1) = pair[1];
        if v0 == 0.0 {
            brackets.push((l0, l0, v0, v0));
        } else if v0 * v1 < 0.0 {
            brackets.push((l0, l1, v0, v1));
        }
    }
    if brackets.is_empty() {
        let samples = scan
            .iter()
            .map(|(l, v)| format!("F({l:+.3}) = {v:+.3e}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::NoBracket {
            lo: -1.0,
            hi: 1.0,
            context: format!("no sign change of F_{a} on the scan grid: {samples}"),
        });
    }
    if brackets.len() > 1 {
        log::warn!(
            "F_{a} changes sign {} times on the scan grid; keeping the root with smallest |λ|",
            brackets.len()
        );
    }
    let mut iterations = 0usize;
    let mut roots = Vec::new();
    for (lo, hi, f_lo, f_hi) in brackets {
        let root = if lo == hi {
            lo
        } else {
            refine_bracket(a, tol, lo, hi, f_lo, f_hi, &mut iterations)?
        };
        roots.push(root);
    }
    roots.sort_by(|p, q| p.abs().total_cmp(&q.abs()));
    let lambda_a = roots[0];
    for extra in &roots[1..] {
        log::warn!("additional F_{a} root at λ = {extra:+.8}");
    }

    let big_a = a * lambda_a;
    let z0_modulus = a.abs() * (1.0 - lambda_a * lambda_a / 4.0).sqrt();
    let (_, f0, df0) = odd_profile_data(a, lambda_a);
    let sol = integrate_profile_f(big_a, f0, df0, SHOOT_HALF_LENGTH, tol)?;
    let asym = profile_asymptotics(&sol, default_fit_window(SHOOT_HALF_LENGTH))?;
    Ok(ShootingResult {
        a,
        lambda_a,
        big_a,
        z0_modulus,
        alpha_residual: asym.alpha.abs(),
        iterations,
    })
}

/// Bisection with secant acceleration inside a confirmed bracket.
/// The secant candidate is used only while it stays strictly inside the
/// current bracket; otherwise the midpoint is taken, so convergence is
/// guaranteed even though F comes from noisy tail fits.
fn refine_bracket(
    a: f64,
    tol: f64,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    f_hi: f64,
    iterations: &mut usize,
) -> Result<f64> {
    let mut prev = (lo, f_lo);
    let mut cur = (hi, f_hi);
    for _ in 0..MAX_REFINE_ITERS {
        let (x0, v0) = prev;
        let (x1, v1) = cur;
        let secant_ok = (v1 - v0).abs() > f64::MIN_POSITIVE;
        let mut cand = if secant_ok {
            x1 - v1 * (x1 - x0) / (v1 - v0)
        } else {
            0.5 * (lo + hi)
        };
        let pad = 0.01 * (hi - lo);
        if !(cand > lo + pad && cand < hi - pad) {
            cand = 0.5 * (lo + hi);
        }
        let f_cand = f_a(a, cand, tol)?;
        *iterations += 1;
        if f_cand.abs() <= tol {
            return Ok(cand);
        }
        if f_cand.signum() == f_lo.signum() {
            lo = cand;
            f_lo = f_cand;
        } else {
            hi = cand;
        }
        prev = cur;
        cur = (cand, f_cand);
        if hi - lo < 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            // The bracket collapsed to floating-point resolution but |F|
            // still exceeds tol: the tail-fit bias dominates.  Refuse rather
            // than return a value violating the contract.
            return Err(Error::Diverged(format!(
                "shooting bracket collapsed at λ = {:.16} with |F| = {:.3e} > tol = {tol:.3e}",
                0.5 * (lo + hi),
                f_cand.abs()
            )));
        }
    }
    Err(Error::MaxStepsExceeded {
        at: 0.5 * (lo + hi),
        steps: MAX_REFINE_ITERS,
    })
}

/// Test functions for the distributional pairing probe.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// φ(x) = p(x)·e^{−x²} with polynomial coefficients in ascending powers.
    GaussianPoly { coeffs: Vec<f64> },
    /// Smooth compactly supported bump exp(w²/((x−c)² − w²)) on |x−c| < w.
    Bump { center: f64, width: f64 },
}

impl TestFunction {
    /// φ(x) = x·e^{−x²}, the simplest odd member of the family.
    pub fn odd_gaussian() -> Self {
        TestFunction::GaussianPoly {
            coeffs: vec![0.0, 1.0],
        }
    }

    /// φ(x) = x³·e^{−x²}, an independent odd member used for consistency checks.
    pub fn cubic_gaussian() -> Self {
        TestFunction::GaussianPoly {
            coeffs: vec![0.0, 0.0, 0.0, 1.0],
        }
    }

    /// φ(x) = x⁵·e^{−x²}, a third odd member.
    pub fn quintic_gaussian() -> Self {
        TestFunction::GaussianPoly {
            coeffs: vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        }
    }

    /// Centered bump of unit half-width (even).
    pub fn bump() -> Self {
        TestFunction::Bump {
            center: 0.0,
            width: 1.0,
        }
    }

    /// Bump shifted away from the origin; pv(φ/x) ≠ 0 even though φ ≥ 0.
    pub fn shifted_bump(center: f64) -> Self {
        TestFunction::Bump {
            center,
            width: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::GaussianPoly { coeffs } => {
                let mut p = 0.0;
                for &c in coeffs.iter().rev() {
                    p = p * x + c;
                }
                p * (-x * x).exp()
            }
            TestFunction::Bump { center, width } => {
                let u = (x - center) / width;
                if u.abs() < 1.0 {
                    (1.0 / (u * u - 1.0)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius R such that φ is numerically negligible outside [−R, R].
    pub fn support_radius(&self) -> f64 {
        match self {
            // e^{−64} ≈ 1.6e−28 swamps any polynomial factor in use.
            TestFunction::GaussianPoly { .. } => 8.0,
            TestFunction::Bump { center, width } => center.abs() + width.abs(),
        }
    }
}

/// pv ∫ φ(x)/x dx by symmetric-exclusion quadrature.
///
/// For each exclusion radius ε the integral ∫_{ε}^{R} (φ(x) − φ(−x))/x dx is
/// evaluated adaptively; the exact value differs from it by
/// 2φ′(0)·ε + O(ε³), so two Richardson levels over [`PV_EPSILONS`] leave an
/// O(ε⁴) error, far below the quadrature tolerance.
pub fn pv_integral(phi: &TestFunction) -> Result<f64> {
    let r = phi.support_radius();
    let mut levels = [0.0f64; 3];
    for (slot, &eps) in levels.iter_mut().zip(PV_EPSILONS.iter()) {
        *slot = quad::integrate_real(
            |x| (phi.eval(x) - phi.eval(-x)) / x,
            eps,
            r,
            PAIRING_QUAD_TOL,
        )?;
    }
    // PV_EPSILONS halves between levels: first pass removes the O(ε) term,
    // second the O(ε³) remainder.
    let first = [
        2.0 * levels[1] - levels[0],
        2.0 * levels[2] - levels[1],
    ];
    Ok((8.0 * first[1] - first[0]) / 7.0)
}

/// Pairing of the rescaled field against one test function across a sequence
/// of times, with the principal-value target and the fitted z₀.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairingReport {
    /// Times at which the pairing integral was resolvable, ascending.
    pub t: Vec<f64>,
    /// P(t) = ∫ u_f(t,x)·φ(x) dx.
    pub pairing: Vec<C64>,
    /// pv ∫ φ(x)/x dx.
    pub pv_phi: f64,
    /// P₀, the t → 0⁺ extrapolation of P(t).
    pub limit: C64,
    /// P₀ / pv(φ/x); zero when pv(φ/x) = 0.
    pub fitted_z0: C64,
    /// z₀·pv(φ/x), the distributional limit of P(t) as t → 0⁺.
    pub target: C64,
    /// Coefficient of √t in the extrapolation fit.
    pub sqrt_t_slope: C64,
    /// |P(t) − target| per entry of `t`.
    pub deviation: Vec<f64>,
    /// Root-mean-square residual of the extrapolation fit.
    pub fit_residual: f64,
}

/// Computes P(t) = ∫ u_f(t,x)·φ(x) dx for each t and extrapolates t → 0⁺.
///
/// After x = √t·y the pairing becomes ∫ e^{iy²/4} f(y)·φ(√t·y) dy, so a time
/// is resolvable only when the profile table covers the rescaled support,
/// i.e. √t·L ≥ R_φ.  Unresolvable times are dropped; if fewer than four
/// survive the call refuses with the resolvable range.
///
/// The limit is approached at rate √t, but the √t coefficient itself drifts
/// slowly (log-phase mixing of the profile tail), so the extrapolation model
/// P(t) ≈ P₀ + c₁√t + c₂t is reliable only on a *deep, narrow* window —
/// t spanning roughly one decade with √t·sup|c₁| well below the accuracy
/// goal.  With the default profile half-lengths this means t ≈ 1e−4…2e−3.
/// z₀ = P₀/pv(φ/x) whenever the principal value is nonzero.
pub fn pv_pairing(
    sol: &ProfileSolution,
    asym: &AsymptoticData,
    phi: &TestFunction,
    t_sequence: &[f64],
) -> Result<PairingReport> {
    if asym.alpha.abs() > 1e-3 {
        return Err(Error::invalid(format!(
            "pv_pairing needs the α ≈ 0 family; got α = {:.3e}",
            asym.alpha
        )));
    }
    if t_sequence.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("pairing times must be positive"));
    }
    let (_, hi) = sol.range();
    let r_phi = phi.support_radius();
    let t_min_resolvable = (r_phi / hi).powi(2);
    let mut times: Vec<f64> = t_sequence.to_vec();
    times.sort_by(f64::total_cmp);
    let resolved: Vec<f64> = times
        .iter()
        .copied()
        .filter(|&t| t >= t_min_resolvable * (1.0 - 1e-12))
        .collect();
    if resolved.len() < 4 {
        return Err(Error::OutOfRange {
            requested: times[0],
            lo: t_min_resolvable,
            hi: f64::INFINITY,
        });
    }
    if resolved.len() < times.len() {
        log::warn!(
            "dropped {} pairing times below the resolvable t ≥ {:.3e}",
            times.len() - resolved.len(),
            t_min_resolvable
        );
    }

    let pairing = resolved
        .par_iter()
        .map(|&t| pairing_at(sol, phi, t))
        .collect::<Result<Vec<C64>>>()?;

    // Least squares for P(t) ≈ P₀ + c₁√t + c₂t, written in the scaled
    // variable s = √(t/t_max) ∈ (0, 1] so the normal equations stay well
    // conditioned.  The matrix is real symmetric; the complex right-hand
    // side is solved per component.
    let t_max = *resolved.last().expect("nonempty");
    let s: Vec<f64> = resolved.iter().map(|t| (t / t_max).sqrt()).collect();
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb_re = Vector3::<f64>::zeros();
    let mut atb_im = Vector3::<f64>::zeros();
    for (sk, p) in s.iter().zip(&pairing) {
        let cols = [1.0, *sk, sk * sk];
        for i in 0..3 {
            for j in 0..3 {
                ata[(i, j)] += cols[i] * cols[j];
            }
            atb_re[i] += cols[i] * p.re;
            atb_im[i] += cols[i] * p.im;
        }
    }
    let chol = ata.cholesky().ok_or_else(|| Error::FitFailed {
        residual: f64::NAN,
        threshold: 0.0,
        context: "degenerate extrapolation design matrix (need ≥ 3 distinct times)".into(),
    })?;
    let cre = chol.solve(&atb_re);
    let cim = chol.solve(&atb_im);
    let coeff = [
        C64::new(cre[0], cim[0]),
        C64::new(cre[1], cim[1]),
        C64::new(cre[2], cim[2]),
    ];
    let limit = coeff[0];
    let slope = coeff[1] / t_max.sqrt();
    let fit_residual = (s
        .iter()
        .zip(&pairing)
        .map(|(sk, p)| (p - coeff[0] - coeff[1] * *sk - coeff[2] * sk * sk).norm_sqr())
        .sum::<f64>()
        / resolved.len() as f64)
        .sqrt();

    let pv_phi = pv_integral(phi)?;
    let (fitted_z0, target) = if pv_phi.abs() > 1e-9 {
        (limit / pv_phi, limit)
    } else {
        (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    };
    let deviation = pairing.iter().map(|p| (p - target).norm()).collect();
    Ok(PairingReport {
        t: resolved,
        pairing,
        pv_phi,
        limit,
        fitted_z0,
        target,
        sqrt_t_slope: slope,
        deviation,
        fit_residual,
    })
}

/// One pairing integral, P(t) = ∫ e^{iy²/4} f(y)·φ(√t·y) dy over the
/// rescaled support.
fn pairing_at(sol: &ProfileSolution, phi: &TestFunction, t: f64) -> Result<C64> {
    let (_, hi) = sol.range();
    let y_max = (phi.support_radius() / t.sqrt()).min(hi);
    quad::integrate_c64(
        |y| {
            let f = sol
                .eval_f(y)
                .expect("pairing integrand stays inside the profile table");
            (I * (y * y / 4.0)).exp() * f * phi.eval(t.sqrt() * y)
        },
        -y_max,
        y_max,
        PAIRING_QUAD_TOL,
    )
}
