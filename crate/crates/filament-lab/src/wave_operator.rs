//! The scattering fixed point: prescribing the radiation content at large
//! time and solving backwards for the frame field that carries it.
//!
//! In the frame variables the field is split as
//!
//! ```text
//!     v(t) = v_f(t) + e^{i(α/2)log t} ( z₊(t) + z(t) ),      z₊(t) = e^{it∂²} u₊ ,
//! ```
//!
//! where v_f(t,x) = conj f(x/√t) is the profile background, u₊ is the
//! prescribed asymptotic datum, and the remainder z is the unknown.  Writing
//! the frame equation for z and inverting the free flow with the condition
//! that z vanishes at the far end turns the PDE into an integral equation
//! z = Bz,
//!
//! ```text
//!     (Bz)(t) = (i/2) ∫_t^T e^{i(t−τ)∂²} { F₀(z₊) − F₁(z) − N(z + z₊) }(τ) dτ/τ ,
//!
//!     F₀(w) = 2(|v_f|² − f∞²)·w + v_f²·e^{−iα log τ}·conj w        (source)
//!     F₁(w) = the same bilinear form                                (linear in z)
//!     N(w)  = 2 v_f e^{−i(α/2)log τ}|w|² + conj(v_f) e^{i(α/2)log τ} w² + |w|²w ,
//! ```
//!
//! with α = 2f∞² − A.  All coefficients inside the integral are evaluated at
//! the integration time τ — the form that is exactly the Duhamel rewrite of
//! the differential equation, so the fixed point can be cross-checked against
//! the forward split-step solver.  The upper limit T is a finite horizon
//! (T ≥ 100·t₀); its effect is measured by doubling studies, not assumed.
//!
//! # Quadrature
//!
//! The integrand oscillates in τ like e^{±2iτξ²} for ξ in the active band, so
//! a fixed grid in τ would need a resolution proportional to the square of
//! the bandwidth.  Everything here is therefore accumulated in the
//! *interaction picture*: the integrand is mapped to Ψ(τ) = e^{−iτ∂²}F(τ)/τ
//! on the Fourier bins, where the propagator phases appear explicitly as
//! e^{iτξ²} factors and are evaluated exactly at every quadrature node.  The
//! output at a grid node t_k is then e^{it_k∂²}·(i/2)·Σ of the panel
//! integrals to the right of t_k — one pass produces Bz on the whole time
//! grid.
//!
//! Within a panel, composite Simpson is used with the subinterval count tied
//! to the phase-resolution criterion Ω·Δτ ≤ θ, Ω = 2ξ_c² + 2, where ξ_c is
//! the measured spectral bandwidth of the datum — tripled when cubic
//! products are large enough to matter at the error budget, padded for the
//! coefficient width — and θ ≤ ½ rad.  Every panel also produces an embedded coarse
//! (half-resolution) Simpson value from the same evaluations; the Richardson
//! difference is the error estimate.  Panels over budget are refined once;
//! if the total estimate still exceeds the budget the call fails loudly
//! rather than return a silently degraded integral.
//!
//! The z-dependence between grid nodes is linearly interpolated *in the
//! interaction picture*: z(σ) ≈ e^{iσ∂²}·lerp(e^{−iτ∂²}z(τ)), so the fast
//! free-flow oscillation is exact and only the slowly varying residue is
//! interpolated.  The resulting fixed point is the exact fixed point of this
//! discretized operator; its distance to the continuum one is controlled by
//! the node density (`nodes_per_decade`) and checked externally against the
//! forward solver.
//!
//! On a periodic grid the coefficients are applied pointwise (never through
//! the spectrum), so the computed fixed point solves the *torus* version of
//! the integral equation.  The comparison with the forward solver is
//! consistent because that solver approximates the same torus problem.  One
//! consequence deserves emphasis: on the line the resonant coupling
//! 2(|v_f|² − f∞²)·z₊ dies out because the radiation escapes to |x| ~ τ
//! where the coefficient decays like (x/√τ)⁻², but a periodic box traps the
//! wave over the profile core, so each doubling of the horizon adds a
//! non-decaying (rotating) kick of size ~ c·ln 2·‖u₊‖ and the T → ∞ limit
//! of the torus operator drifts logarithmically.  The horizon t_max is
//! therefore part of the problem statement, all cross-checks are run at
//! matching horizons, and the window-by-window drift is bounded in the
//! tests by the explicit resonant ceiling.  Agreement with the free-space
//! object additionally requires the box to dwarf the translation and
//! spreading of u₊ over the window, which the kernel-decomposition test
//! arranges explicitly.
//!
//! # Norms and iteration
//!
//! Contraction is tracked in the weighted norm
//! ‖z‖_Y = sup_t t^ν‖z(t)‖_{L²} + sup_t t^ν‖z‖_{L⁴((t,T),L∞)} (the time-L⁴
//! tail is a trapezoid sum over the grid nodes).  Picard iteration starts
//! from z = 0; increments that grow for [`DIVERGENCE_STREAK`] consecutive
//! steps, leave the configured ball by a factor of [`BALL_ESCAPE_FACTOR`],
//! or turn non-finite abort with the increment trace in the error.
//!
//! # Kernel form of the source
//!
//! Replacing v_f² in the source term by its modulus-one far-field model
//! f∞²e^{−2iδ log|x/√τ|}m(x) (δ = f∞² − A, m the one-sided phase pair)
//! makes the τ-integral explicit: in Fourier variables it is carried by the
//! oscillatory kernel ∫ e^{2iτξ²} τ^{−1−i(δ+α)} dτ, and the source integral
//! splits into a kernel part I₁ and a chirp-error part I₂ (a Duhamel
//! integral of the Fresnel remainder).  [`decompose_i1_i2`] evaluates both
//! and the direct quadrature of the same term, so the identity
//! I₁ + I₂ = direct is a machine check of every phase convention involved,
//! and the t^{−γ/4} decay of I₁ against the weighted norm of u₊ is measured
//! by [`i1_decade_scan`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{EquationTag, Trajectory};
use crate::fourier::{self, ComplexField, SpatialGrid};
use crate::profile::{AsymptoticData, ProfileSolution};
use crate::transforms::{self, MultiplierSpec};
use crate::{C64, I};

// ---------------------------------------------------------------------------
// Tunables
// ---------------------------------------------------------------------------

/// Maximum propagator phase advance (radians) per Simpson subinterval; the
/// embedded error estimate guards the choice.
const PHASE_PER_SUBINTERVAL: f64 = 0.5;
/// Relative spectral mass allowed beyond the measured bandwidth cutoff.
/// Iterates carry a cubic cascade at 3× the datum band whose relative mass
/// scales like the fourth power of the iterate's amplitude; the threshold
/// sits low enough to resolve the first cascade of small-ball iterates but
/// high enough not to chase the (negligible) second cascade toward the
/// Nyquist cap, which would inflate the subinterval counts by orders of
/// magnitude.  Content the cutoff skips is still audited by the embedded
/// error estimate.
const BANDWIDTH_TAIL_MASS: f64 = 1e-11;
/// Safety factor applied to the measured bandwidth.
const BANDWIDTH_SAFETY: f64 = 1.1;
/// Lower bound on the bandwidth estimate (also covers the slow, non-spectral
/// phases: envelope 1/τ and the α·log τ rotations).
const MIN_BANDWIDTH: f64 = 1.0;
/// Additive band margin for the profile coefficients, whose pointwise
/// multiplication widens the integrand's spectrum by a few inverse lengths.
const COEFF_BAND_PAD: f64 = 3.0;
/// Subintervals per panel are a multiple of four so that the embedded
/// half-resolution Simpson rule exists.
const BASE_SUBINTERVALS: usize = 4;
/// Refusal threshold for a single panel's subinterval count.
const MAX_SUBINTERVALS_PER_PANEL: usize = 1 << 19;
/// Doubling passes granted to panels whose embedded error estimate exceeds
/// their share of the budget before the whole quadrature is declared failed.
const REFINEMENT_ROUNDS: usize = 2;
/// Minimum horizon/t₀ ratio: shorter horizons bias the tail integrals at the
/// percent level and invalidate doubling studies.
const HORIZON_FACTOR_MIN: f64 = 100.0;
/// Consecutive non-contracting increments treated as divergence.
const DIVERGENCE_STREAK: usize = 3;
/// Y-norm excursion beyond the configured ball treated as divergence.
const BALL_ESCAPE_FACTOR: f64 = 1e3;
/// Relative tolerance when matching an input trajectory's nodes to the
/// configured time grid.
const NODE_MATCH_TOL: f64 = 1e-9;
/// |δ + α| below which the oscillatory kernel exponent is degenerate and the
/// kernel split is refused.
const MIN_KERNEL_EXPONENT: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Parameters of the fixed-point construction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WaveOpConfig {
    /// Left end of the time window (≥ 1; the construction lives at large t).
    pub t0: f64,
    /// Finite horizon standing in for t = ∞ (≥ 100·t0).
    pub t_max: f64,
    /// Decay exponent of the Y-norm weights (0 < ν ≤ γ/4).
    pub nu: f64,
    /// Spatial-weight exponent of the datum norm ‖u₊‖_{L²(|x|^γ)} (0 < γ < 1).
    pub gamma: f64,
    /// Radius of the iteration ball in the Y-norm.
    pub ball_radius: f64,
    /// Stop when a Picard increment falls below this Y-norm size.
    pub picard_tol: f64,
    /// Relative budget for the embedded quadrature error estimate.
    pub quad_tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Output/quadrature panel density of the geometric time grid.
    pub nodes_per_decade: usize,
}

impl WaveOpConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t0: f64,
        t_max: f64,
        nu: f64,
        gamma: f64,
        ball_radius: f64,
        picard_tol: f64,
        quad_tol: f64,
        max_iter: usize,
        nodes_per_decade: usize,
    ) -> Result<Self> {
        for (name, v) in [
            ("t0", t0),
            ("t_max", t_max),
            ("nu", nu),
            ("gamma", gamma),
            ("ball_radius", ball_radius),
            ("picard_tol", picard_tol),
            ("quad_tol", quad_tol),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if t0 < 1.0 {
            return Err(Error::invalid(format!(
                "the fixed point is built at large time; t0 must be ≥ 1, got {t0}"
            )));
        }
        if t_max < HORIZON_FACTOR_MIN * t0 {
            return Err(Error::invalid(format!(
                "horizon t_max = {t_max} must be ≥ {HORIZON_FACTOR_MIN}·t0 = {}",
                HORIZON_FACTOR_MIN * t0
            )));
        }
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if !(0.0 < nu && nu <= gamma / 4.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "nu must lie in (0, gamma/4] = (0, {}], got {nu}",
                gamma / 4.0
            )));
        }
        if !(ball_radius > 0.0) {
            return Err(Error::invalid(format!("ball_radius must be > 0, got {ball_radius}")));
        }
        if !(picard_tol > 0.0) || !(quad_tol > 0.0) {
            return Err(Error::invalid("tolerances must be > 0"));
        }
        if max_iter == 0 {
            return Err(Error::invalid("max_iter must be ≥ 1"));
        }
        if !(4..=512).contains(&nodes_per_decade) {
            return Err(Error::invalid(format!(
                "nodes_per_decade must lie in [4, 512], got {nodes_per_decade}"
            )));
        }
        Ok(WaveOpConfig {
            t0,
            t_max,
            nu,
            gamma,
            ball_radius,
            picard_tol,
            quad_tol,
            max_iter,
            nodes_per_decade,
        })
    }
}

/// Geometric nodes lo·10^{k/npd} with the last node forced to hi exactly.
fn geometric_nodes(lo: f64, hi: f64, nodes_per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n_full = (decades * nodes_per_decade as f64 - 1e-9).floor().max(0.0) as usize;
    let mut times: Vec<f64> = (0..=n_full)
        .map(|k| lo * 10f64.powf(k as f64 / nodes_per_decade as f64))
        .collect();
    times[0] = lo;
    if *times.last().unwrap() < hi * (1.0 - 1e-12) {
        times.push(hi);
    } else {
        *times.last_mut().unwrap() = hi;
    }
    times
}

/// The time grid shared by the iterates, the quadrature panels, and the
/// output of [`apply_b`].
pub fn output_time_grid(cfg: &WaveOpConfig) -> Vec<f64> {
    geometric_nodes(cfg.t0, cfg.t_max, cfg.nodes_per_decade)
}

// ---------------------------------------------------------------------------
// Y-norm
// ---------------------------------------------------------------------------

/// The two weighted suprema making up the iteration norm, and their sum.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct YNormReport {
    /// sup_k t_k^ν ‖z(t_k)‖_{L²}.
    pub l2_sup: f64,
    /// sup_k t_k^ν (∫_{t_k}^{T} ‖z‖_∞⁴ dτ)^{1/4} by trapezoid on the grid.
    pub l4_linf_sup: f64,
    /// The norm: the sum of the two suprema.
    pub total: f64,
}

/// Evaluates the iteration norm of a trajectory with weight exponent ν.
pub fn y_norm(traj: &Trajectory, nu: f64) -> Result<YNormReport> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(Error::invalid(format!("nu must be finite and ≥ 0, got {nu}")));
    }
    if traj.times[0] <= 0.0 {
        return Err(Error::invalid("Y-norm weights need t > 0"));
    }
    let n = traj.len();
    let sup4: Vec<f64> = traj.fields.iter().map(|f| f.norm_linf().powi(4)).collect();
    // Right-cumulative trapezoid of ‖z‖_∞⁴.
    let mut tail = vec![0.0; n];
    for k in (0..n - 1).rev() {
        let h = traj.times[k + 1] - traj.times[k];
        tail[k] = tail[k + 1] + 0.5 * h * (sup4[k] + sup4[k + 1]);
    }
    let mut l2_sup = 0.0f64;
    let mut l4_sup = 0.0f64;
    for k in 0..n {
        let w = traj.times[k].powf(nu);
        l2_sup = l2_sup.max(w * traj.fields[k].norm_l2());
        l4_sup = l4_sup.max(w * tail[k].powf(0.25));
    }
    Ok(YNormReport {
        l2_sup,
        l4_linf_sup: l4_sup,
        total: l2_sup + l4_sup,
    })
}

// ---------------------------------------------------------------------------
// Pointwise right-hand-side pieces
// ---------------------------------------------------------------------------

fn check_pointwise_args(w: &ComplexField, v_background: &ComplexField, t: f64) -> Result<()> {
    if w.grid != v_background.grid {
        return Err(Error::GridMismatch(
            "field and background must share one grid".into(),
        ));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("coefficient time must be > 0, got {t}")));
    }
    Ok(())
}

fn bilinear_form(
    w: &ComplexField,
    v_background: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
) -> Result<ComplexField> {
    check_pointwise_args(w, v_background, t)?;
    let f_inf_sq = asym.f_inf * asym.f_inf;
    let rot = C64::from_polar(1.0, -asym.alpha * t.ln());
    let values = w
        .values
        .iter()
        .zip(&v_background.values)
        .map(|(&w_j, &v)| 2.0 * (v.norm_sqr() - f_inf_sq) * w_j + v * v * rot * w_j.conj())
        .collect();
    ComplexField::new(w.grid, values, t)
}

/// Source coupling 2(|v_f|² − f∞²)·z₊ + v_f²·e^{−iα log t}·conj z₊, applied
/// to the free wave z₊.
pub fn source_f0(
    z_plus: &ComplexField,
    v_background: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
) -> Result<ComplexField> {
    bilinear_form(z_plus, v_background, asym, t)
}

/// The same bilinear coupling applied to the unknown z (it enters Bz with the
/// opposite sign).
pub fn linear_f1(
    z: &ComplexField,
    v_background: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
) -> Result<ComplexField> {
    bilinear_form(z, v_background, asym, t)
}

/// Quadratic-and-cubic terms
/// 2 v_f e^{−i(α/2)log t}|u|² + conj(v_f) e^{i(α/2)log t} u² + |u|²u.
pub fn nlt(
    u: &ComplexField,
    v_background: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
) -> Result<ComplexField> {
    check_pointwise_args(u, v_background, t)?;
    let half_rot = C64::from_polar(1.0, -0.5 * asym.alpha * t.ln());
    let values = u
        .values
        .iter()
        .zip(&v_background.values)
        .map(|(&u_j, &v)| {
            let sq = u_j.norm_sqr();
            2.0 * v * half_rot * sq + v.conj() * half_rot.conj() * u_j * u_j + sq * u_j
        })
        .collect();
    ComplexField::new(u.grid, values, t)
}

/// One row of F₀(z₊) − F₁(z) − N(z + z₊) at time τ; `z_row = None` means the
/// zero iterate.  This is the hot path of [`apply_b`]; the public pieces
/// above are its tested reference.
fn total_rhs_row(
    vf: &[C64],
    f_inf_sq: f64,
    alpha: f64,
    tau: f64,
    z_row: Option<&[C64]>,
    zp_row: &[C64],
) -> Vec<C64> {
    let rot = C64::from_polar(1.0, -alpha * tau.ln());
    let half_rot = C64::from_polar(1.0, -0.5 * alpha * tau.ln());
    (0..vf.len())
        .map(|j| {
            let v = vf[j];
            let zp = zp_row[j];
            let z = z_row.map_or(C64::new(0.0, 0.0), |r| r[j]);
            let u = z + zp;
            let d = zp - z;
            let linear = 2.0 * (v.norm_sqr() - f_inf_sq) * d + v * v * rot * d.conj();
            let sq = u.norm_sqr();
            let cubic = 2.0 * v * half_rot * sq + v.conj() * half_rot.conj() * u * u + sq * u;
            linear - cubic
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Panel quadrature in the interaction picture
// ---------------------------------------------------------------------------

/// Work and error accounting of one quadrature pass.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct QuadratureStats {
    pub panels: usize,
    pub subintervals: usize,
    pub refined_panels: usize,
    /// Sum of the per-panel Richardson estimates (field-L² equivalent units).
    pub error_estimate: f64,
    /// quad_tol · Σ‖panel integral‖ — what the estimate is held against.
    pub error_budget: f64,
}

/// L²-equivalent norm of a vector of Fourier bins (Parseval with the 1/n of
/// the inverse transform).
fn bins_l2(bins: &[C64], dx: f64) -> f64 {
    (dx / bins.len() as f64 * bins.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Smallest |ξ| cutoff keeping all but [`BANDWIDTH_TAIL_MASS`] of the
/// spectral mass, with safety factor and floor applied.
fn bandwidth_cutoff(bins: &[C64], grid: &SpatialGrid) -> f64 {
    let total: f64 = bins.iter().map(|c| c.norm_sqr()).sum();
    if total <= 0.0 {
        return MIN_BANDWIDTH;
    }
    let mut by_xi: Vec<(f64, f64)> = bins
        .iter()
        .enumerate()
        .map(|(k, c)| (grid.xi(k).abs(), c.norm_sqr()))
        .collect();
    by_xi.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut tail = 0.0;
    let mut cut = by_xi.last().unwrap().0;
    for &(xi, mass) in by_xi.iter().rev() {
        tail += mass;
        if tail > BANDWIDTH_TAIL_MASS * total {
            break;
        }
        cut = xi;
    }
    (cut * BANDWIDTH_SAFETY).max(MIN_BANDWIDTH)
}

fn simpson_weight(i: usize, s: usize) -> f64 {
    if i == 0 || i == s {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson on [a, b] with s subintervals (s ≡ 0 mod 4) together
/// with the embedded s/2 rule from the even-index evaluations.
fn simpson_pair<F>(eval: &F, panel: usize, a: f64, b: f64, s: usize) -> Result<(Vec<C64>, Vec<C64>)>
where
    F: Fn(usize, f64) -> Result<Vec<C64>> + Sync,
{
    let h = (b - a) / s as f64;
    let mut fine: Vec<C64> = Vec::new();
    let mut coarse: Vec<C64> = Vec::new();
    for i in 0..=s {
        let sigma = if i == s { b } else { a + i as f64 * h };
        let psi = eval(panel, sigma)?;
        if fine.is_empty() {
            fine = vec![C64::new(0.0, 0.0); psi.len()];
            coarse = vec![C64::new(0.0, 0.0); psi.len()];
        }
        let wf = simpson_weight(i, s) * h / 3.0;
        for (acc, &v) in fine.iter_mut().zip(&psi) {
            *acc += wf * v;
        }
        if i % 2 == 0 {
            let wc = simpson_weight(i / 2, s / 2) * 2.0 * h / 3.0;
            for (acc, &v) in coarse.iter_mut().zip(&psi) {
                *acc += wc * v;
            }
        }
    }
    Ok((fine, coarse))
}

/// Integrates Ψ over every panel [nodes[k], nodes[k+1]] with the
/// phase-resolution subinterval count, embedded error control, and one round
/// of refinement.  Returns the per-panel integrals in node order.
fn integrate_panels<F>(
    nodes: &[f64],
    omega: f64,
    quad_tol: f64,
    dx: f64,
    label: &str,
    eval: &F,
) -> Result<(Vec<Vec<C64>>, QuadratureStats)>
where
    F: Fn(usize, f64) -> Result<Vec<C64>> + Sync,
{
    let n_panels = nodes.len() - 1;
    let sub_count = |a: f64, b: f64| -> Result<usize> {
        let s = BASE_SUBINTERVALS
            * ((omega * (b - a) / (BASE_SUBINTERVALS as f64 * PHASE_PER_SUBINTERVAL)).ceil()
                as usize)
                .max(1);
        if s > MAX_SUBINTERVALS_PER_PANEL {
            return Err(Error::invalid(format!(
                "{label}: panel [{a}, {b}] needs {s} subintervals at bandwidth-rate Ω = {omega:.3e}; \
                 reduce the horizon, the bandwidth, or the panel length"
            )));
        }
        Ok(s)
    };

    struct Panel {
        j: Vec<C64>,
        err: f64,
        subintervals: usize,
        refined: bool,
    }
    let run_panel = |p: usize, s: usize| -> Result<(Vec<C64>, f64, usize)> {
        let (a, b) = (nodes[p], nodes[p + 1]);
        let (fine, coarse) = simpson_pair(eval, p, a, b, s)?;
        let diff: Vec<C64> = fine.iter().zip(&coarse).map(|(f, c)| f - c).collect();
        let err = bins_l2(&diff, dx) / 15.0;
        Ok((fine, err, s))
    };

    let mut panels: Vec<Panel> = (0..n_panels)
        .into_par_iter()
        .map(|p| {
            let s = sub_count(nodes[p], nodes[p + 1])?;
            let (j, err, subintervals) = run_panel(p, s)?;
            Ok(Panel { j, err, subintervals, refined: false })
        })
        .collect::<Result<Vec<Panel>>>()?;

    for _round in 0..REFINEMENT_ROUNDS {
        let scale: f64 = panels.iter().map(|p| bins_l2(&p.j, dx)).sum();
        let per_panel = quad_tol * scale / n_panels as f64;
        let over: Vec<usize> = (0..n_panels)
            .filter(|&p| {
                panels[p].err > per_panel
                    && 2 * panels[p].subintervals <= MAX_SUBINTERVALS_PER_PANEL
            })
            .collect();
        if over.is_empty() {
            break;
        }
        let refined: Vec<(usize, Panel)> = over
            .par_iter()
            .map(|&p| {
                let s = 2 * panels[p].subintervals;
                let (j, err, subintervals) = run_panel(p, s)?;
                Ok((p, Panel { j, err, subintervals, refined: true }))
            })
            .collect::<Result<Vec<_>>>()?;
        for (p, panel) in refined {
            panels[p] = panel;
        }
    }

    let scale: f64 = panels.iter().map(|p| bins_l2(&p.j, dx)).sum();
    let budget = quad_tol * scale;
    let total_err: f64 = panels.iter().map(|p| p.err).sum();
    // Written as a negated ≤ so that a NaN estimate also fails loudly.
    if !(total_err <= budget) {
        return Err(Error::FitFailed {
            residual: total_err,
            threshold: budget,
            context: format!(
                "{label}: embedded quadrature estimate after {REFINEMENT_ROUNDS} refinements"
            ),
        });
    }
    let stats = QuadratureStats {
        panels: n_panels,
        subintervals: panels.iter().map(|p| p.subintervals).sum(),
        refined_panels: panels.iter().filter(|p| p.refined).count(),
        error_estimate: total_err,
        error_budget: budget,
    };
    Ok((panels.into_iter().map(|p| p.j).collect(), stats))
}

// ---------------------------------------------------------------------------
// The operator B
// ---------------------------------------------------------------------------

fn require_initial_tag(u_plus: &ComplexField) -> Result<()> {
    if u_plus.time.abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "asymptotic datum must be tagged t = 0, got {}",
            u_plus.time
        )));
    }
    Ok(())
}

fn check_profile_cover(sol: &ProfileSolution, grid: &SpatialGrid, t0: f64) -> Result<()> {
    let (lo, hi) = sol.range();
    let sqrt_t0 = t0.sqrt();
    if grid.x_min / sqrt_t0 < lo || grid.x_max / sqrt_t0 > hi {
        return Err(Error::invalid(format!(
            "profile table covers [{lo}, {hi}] but the grid needs arguments up to ±{:.3}",
            grid.x_max.abs().max(grid.x_min.abs()) / sqrt_t0
        )));
    }
    Ok(())
}

fn is_zero_field(f: &ComplexField) -> bool {
    f.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
}

/// Zero trajectory on the configured grid — the Picard starting point.
pub fn zero_iterate(grid: SpatialGrid, cfg: &WaveOpConfig) -> Result<Trajectory> {
    let times = output_time_grid(cfg);
    let fields = times.iter().map(|&t| ComplexField::zeros(grid, t)).collect();
    Trajectory::new(times, fields, EquationTag::ZEquation)
}

/// One application of the integral operator: z ↦ Bz on the configured time
/// grid.  The input trajectory must live on [`output_time_grid`].
pub fn apply_b(
    z: &Trajectory,
    u_plus: &ComplexField,
    sol: &ProfileSolution,
    asym: &AsymptoticData,
    cfg: &WaveOpConfig,
) -> Result<(Trajectory, QuadratureStats)> {
    require_initial_tag(u_plus)?;
    if z.equation != EquationTag::ZEquation {
        return Err(Error::invalid("apply_b expects the integral-equation unknown"));
    }
    let grid = z.grid();
    if grid != u_plus.grid {
        return Err(Error::GridMismatch("iterate and datum must share one grid".into()));
    }
    let nodes = output_time_grid(cfg);
    if z.times.len() != nodes.len()
        || z.times
            .iter()
            .zip(&nodes)
            .any(|(a, b)| (a - b).abs() > NODE_MATCH_TOL * b)
    {
        return Err(Error::invalid(
            "iterate must live on the configured geometric time grid",
        ));
    }
    check_profile_cover(sol, &grid, cfg.t0)?;

    let all_zero = is_zero_field(u_plus) && z.fields.iter().all(is_zero_field);
    if all_zero {
        let out = zero_iterate(grid, cfg)?;
        return Ok((out, QuadratureStats::default()));
    }

    let n = grid.n;
    let xi_sq: Vec<f64> = (0..n).map(|k| grid.xi(k) * grid.xi(k)).collect();
    let u_hat = fourier::dft(&u_plus.values);

    // Interaction-picture residues of the iterate at the nodes.
    let zero_it = z.fields.iter().all(is_zero_field);
    let phi: Vec<Vec<C64>> = z
        .fields
        .iter()
        .zip(&nodes)
        .map(|(f, &t)| {
            let mut hat = fourier::dft(&f.values);
            for (k, v) in hat.iter_mut().enumerate() {
                *v *= C64::from_polar(1.0, t * xi_sq[k]);
            }
            hat
        })
        .collect();

    // Resolution rate: the datum band (a clean, compactly-measured
    // spectrum), tripled when cubic products can matter at the quadrature
    // budget, plus the coefficient margin.  Iterate spectra are deliberately
    // not consulted — spectral leakage from the non-periodic coefficients
    // gives them algebraic tails whose mass would drag any threshold to the
    // Nyquist cap, while their amplitude stays below the error budget; the
    // embedded estimate audits the choice either way.
    let xi_u = bandwidth_cutoff(&u_hat, &grid);
    let sup_inf = z
        .fields
        .iter()
        .map(|f| f.norm_linf())
        .fold(u_plus.norm_linf(), f64::max);
    let linear_scale = (asym.f_inf * asym.f_inf).max(1e-12);
    let cascade = if sup_inf * sup_inf >= cfg.quad_tol * linear_scale {
        3.0
    } else {
        1.0
    };
    let xi_c = (cascade * xi_u + COEFF_BAND_PAD).min(grid.xi_max());
    let omega = 2.0 * xi_c * xi_c + 2.0;

    let f_inf_sq = asym.f_inf * asym.f_inf;
    let alpha = asym.alpha;
    let eval = |panel: usize, sigma: f64| -> Result<Vec<C64>> {
        let sqrt_sigma = sigma.sqrt();
        let vf_row: Vec<C64> = (0..n)
            .map(|j| sol.eval_f(grid.x(j) / sqrt_sigma).map(|c| c.conj()))
            .collect::<Result<Vec<C64>>>()?;
        let zp_row = {
            let bins: Vec<C64> = u_hat
                .iter()
                .enumerate()
                .map(|(k, &v)| v * C64::from_polar(1.0, -sigma * xi_sq[k]))
                .collect();
            fourier::idft(&bins)
        };
        let z_combined;
        let z_row: Option<&[C64]> = if zero_it {
            None
        } else {
            let (ta, tb) = (nodes[panel], nodes[panel + 1]);
            let w = (sigma - ta) / (tb - ta);
            let bins: Vec<C64> = phi[panel]
                .iter()
                .zip(&phi[panel + 1])
                .enumerate()
                .map(|(k, (&p0, &p1))| {
                    ((1.0 - w) * p0 + w * p1) * C64::from_polar(1.0, -sigma * xi_sq[k])
                })
                .collect();
            z_combined = fourier::idft(&bins);
            Some(&z_combined)
        };
        let f_row = total_rhs_row(&vf_row, f_inf_sq, alpha, sigma, z_row, &zp_row);
        let mut hat = fourier::dft(&f_row);
        for (k, v) in hat.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, sigma * xi_sq[k]) / sigma;
        }
        Ok(hat)
    };

    let (panel_js, stats) =
        integrate_panels(&nodes, omega, cfg.quad_tol, grid.dx, "apply_b", &eval)?;

    // Suffix sums: S_k = Σ_{p ≥ k} J_p, output (i/2)·e^{it_k∂²}S_k.
    let mut suffix = vec![C64::new(0.0, 0.0); n];
    let mut fields_rev: Vec<ComplexField> = Vec::with_capacity(nodes.len());
    for k in (0..nodes.len()).rev() {
        if k < nodes.len() - 1 {
            for (acc, v) in suffix.iter_mut().zip(&panel_js[k]) {
                *acc += v;
            }
        }
        let bins: Vec<C64> = suffix
            .iter()
            .enumerate()
            .map(|(kk, &s)| 0.5 * I * s * C64::from_polar(1.0, -nodes[k] * xi_sq[kk]))
            .collect();
        fields_rev.push(ComplexField::new(grid, fourier::idft(&bins), nodes[k])?);
    }
    fields_rev.reverse();
    let out = Trajectory::new(nodes, fields_rev, EquationTag::ZEquation)?;
    Ok((out, stats))
}

// ---------------------------------------------------------------------------
// Picard iteration
// ---------------------------------------------------------------------------

/// One Picard step's bookkeeping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PicardIteration {
    /// ‖z_{k+1} − z_k‖_Y.
    pub delta_y: f64,
    /// delta_y ratio to the previous step (None on the first step).
    pub ratio: Option<f64>,
    /// ‖z_{k+1}‖_Y.
    pub y_total: f64,
}

/// Iteration trace and convergence verdict.
#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    pub iterations: Vec<PicardIteration>,
    pub converged: bool,
    /// ‖B z* − z*‖_Y computed with one extra operator application.
    pub fixed_point_residual_y: f64,
    /// Largest iterate norm seen, against the configured ball.
    pub max_y: f64,
    pub within_ball: bool,
    /// Quadrature accounting of the last operator application.
    pub last_quadrature: QuadratureStats,
}

/// Growth watchdog: consecutive non-contracting increments, ball escape, or
/// non-finite norms abort the iteration with the increment trace.
struct DivergenceMonitor {
    escape: f64,
    streak: usize,
    deltas: Vec<f64>,
}

impl DivergenceMonitor {
    fn new(escape: f64) -> Self {
        DivergenceMonitor { escape, streak: 0, deltas: Vec::new() }
    }

    fn trace(&self) -> String {
        self.deltas
            .iter()
            .map(|d| format!("{d:.3e}"))
            .collect::<Vec<_>>()
            .join(" → ")
    }

    /// Records one increment; returns the contraction ratio when defined.
    fn observe(&mut self, delta_y: f64, y_total: f64) -> Result<Option<f64>> {
        let prev = self.deltas.last().copied();
        self.deltas.push(delta_y);
        if !delta_y.is_finite() || !y_total.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite Y-norm; increments {}",
                self.trace()
            )));
        }
        if y_total > self.escape {
            return Err(Error::Diverged(format!(
                "iterate norm {y_total:.3e} left the ball by ×{BALL_ESCAPE_FACTOR:.0e}; increments {}",
                self.trace()
            )));
        }
        let ratio = match prev {
            Some(p) if p > 0.0 => Some(delta_y / p),
            _ => None,
        };
        match ratio {
            Some(r) if r >= 1.0 => self.streak += 1,
            Some(_) => self.streak = 0,
            None => {}
        }
        if self.streak >= DIVERGENCE_STREAK {
            return Err(Error::Diverged(format!(
                "{DIVERGENCE_STREAK} consecutive non-contracting increments: {}",
                self.trace()
            )));
        }
        Ok(ratio)
    }
}

fn trajectory_diff(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    let fields = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(fa, fb)| {
            let values = fa
                .values
                .iter()
                .zip(&fb.values)
                .map(|(x, y)| x - y)
                .collect();
            ComplexField::new(fa.grid, values, fa.time)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(a.times.clone(), fields, a.equation)
}

/// Picard iteration z_{k+1} = B z_k from z₀ = 0 until the Y-increment drops
/// below `picard_tol`.  The returned residual is computed honestly with one
/// extra application of B to the accepted iterate.
pub fn picard_solve(
    u_plus: &ComplexField,
    sol: &ProfileSolution,
    asym: &AsymptoticData,
    cfg: &WaveOpConfig,
) -> Result<(Trajectory, PicardReport)> {
    let mut z = zero_iterate(u_plus.grid, cfg)?;
    let mut monitor = DivergenceMonitor::new(BALL_ESCAPE_FACTOR * cfg.ball_radius);
    let mut iterations = Vec::new();
    let mut max_y = 0.0f64;
    for _ in 0..cfg.max_iter {
        let (z_next, _stats) = apply_b(&z, u_plus, sol, asym, cfg)?;
        let delta_y = y_norm(&trajectory_diff(&z_next, &z)?, cfg.nu)?.total;
        let y_total = y_norm(&z_next, cfg.nu)?.total;
        let ratio = monitor.observe(delta_y, y_total)?;
        iterations.push(PicardIteration { delta_y, ratio, y_total });
        max_y = max_y.max(y_total);
        if y_total > cfg.ball_radius {
            log::warn!(
                "picard_solve: iterate norm {y_total:.3e} exceeds the configured ball {:.3e}",
                cfg.ball_radius
            );
        }
        z = z_next;
        if delta_y < cfg.picard_tol {
            let (bz, last_quadrature) = apply_b(&z, u_plus, sol, asym, cfg)?;
            let fixed_point_residual_y =
                y_norm(&trajectory_diff(&bz, &z)?, cfg.nu)?.total;
            let report = PicardReport {
                iterations,
                converged: true,
                fixed_point_residual_y,
                max_y,
                within_ball: max_y <= cfg.ball_radius,
                last_quadrature,
            };
            return Ok((z, report));
        }
    }
    Err(Error::Diverged(format!(
        "no convergence in {} iterations; increments {}",
        cfg.max_iter,
        monitor.trace()
    )))
}

/// Recomposes the frame field v = v_f + e^{i(α/2)log t}(z₊ + z) from a
/// z-trajectory, for comparison against the forward split-step solver.
pub fn fixed_point_v_trajectory(
    z: &Trajectory,
    u_plus: &ComplexField,
    sol: &ProfileSolution,
    asym: &AsymptoticData,
) -> Result<Trajectory> {
    if z.equation != EquationTag::ZEquation {
        return Err(Error::invalid("expected the integral-equation unknown"));
    }
    let fields = z
        .times
        .iter()
        .zip(&z.fields)
        .map(|(&t, zf)| {
            let tilde = transforms::build_tilde_vf(asym, sol, u_plus, t)?;
            let phase = C64::from_polar(1.0, 0.5 * asym.alpha * t.ln());
            let values = tilde
                .values
                .iter()
                .zip(&zf.values)
                .map(|(a, b)| a + phase * b)
                .collect();
            ComplexField::new(zf.grid, values, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(z.times.clone(), fields, EquationTag::VEquation)
}

// ---------------------------------------------------------------------------
// Kernel decomposition of the source term
// ---------------------------------------------------------------------------

/// Fourier bins of a field in the analytic convention
/// f̂(ξ) = (1/2π)∫e^{−ixξ}f dx, in DFT bin order.
fn paper_hat_bins(field: &ComplexField) -> Vec<C64> {
    let g = &field.grid;
    let factor = g.dx / (2.0 * std::f64::consts::PI);
    fourier::dft(&field.values)
        .iter()
        .enumerate()
        .map(|(k, v)| factor * C64::from_polar(1.0, -g.x_min * g.xi(k)) * v)
        .collect()
}

/// Inverse of [`paper_hat_bins`].
fn field_from_paper_hat(grid: SpatialGrid, hat: &[C64], time: f64) -> Result<ComplexField> {
    let factor = 2.0 * std::f64::consts::PI / grid.dx;
    let bins: Vec<C64> = hat
        .iter()
        .enumerate()
        .map(|(k, v)| factor * C64::from_polar(1.0, grid.x_min * grid.xi(k)) * v)
        .collect();
    ComplexField::new(grid, fourier::idft(&bins), time)
}

/// DFT bin carrying −ξ(k); the Nyquist bin (whose mirror is not represented)
/// maps to itself.
fn flip_bin(k: usize, n: usize) -> usize {
    (n - k) % n
}

/// Finite-horizon oscillatory kernel ∫_t^{t_max} e^{2iτξ²} τ^{−1−iδ̃} dτ with
/// δ̃ = δ + α; the ξ = 0 bin has the exact closed form.
fn horizon_kernel(xi: f64, t: f64, t_max: f64, delta_tilde: f64) -> Result<C64> {
    if xi == 0.0 {
        let rot = |tau: f64| C64::from_polar(1.0, -delta_tilde * tau.ln());
        return Ok((rot(t) - rot(t_max)) / (I * delta_tilde));
    }
    Ok(transforms::kernel_at(xi, t, delta_tilde)? - transforms::kernel_at(xi, t_max, delta_tilde)?)
}

fn kernel_exponent(asym: &AsymptoticData) -> Result<f64> {
    let delta_tilde = asym.delta + asym.alpha;
    if delta_tilde.abs() < MIN_KERNEL_EXPONENT {
        return Err(Error::invalid(format!(
            "kernel exponent δ + α = {delta_tilde:.3e} is degenerate; the kernel split needs |δ + α| ≥ {MIN_KERNEL_EXPONENT}"
        )));
    }
    Ok(delta_tilde)
}

/// Kernel part of the source integral: in the analytic convention
///
/// ```text
///     I₁(t,x) = f∞² e^{−2iδ log 2} ∫ e^{ixξ} e^{−itξ²} e^{−2iδ log|ξ|} m(−ξ)
///               · conj(û₊(−ξ)) · K_{t,T}(ξ) dξ ,
/// ```
///
/// with K the finite-horizon kernel of exponent δ + α.  The ξ = 0 bin takes
/// the mean side phase with the log factor dropped, matching the convention
/// of the spectral matching operator.
pub fn i1_field(
    u_plus: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
    t_max: f64,
) -> Result<ComplexField> {
    require_initial_tag(u_plus)?;
    if !(t > 0.0) || !(t_max > t) {
        return Err(Error::invalid(format!(
            "kernel window needs 0 < t < t_max, got [{t}, {t_max}]"
        )));
    }
    let delta_tilde = kernel_exponent(asym)?;
    let delta = asym.delta;
    let g = u_plus.grid;
    let n = g.n;
    let hat = paper_hat_bins(u_plus);
    let prefactor =
        asym.f_inf * asym.f_inf * C64::from_polar(1.0, -2.0 * delta * 2f64.ln());
    let m_minus = |xi: f64| -> C64 {
        if xi > 0.0 {
            C64::from_polar(1.0, -2.0 * asym.c_minus)
        } else if xi < 0.0 {
            C64::from_polar(1.0, -2.0 * asym.c_plus)
        } else {
            C64::from_polar(1.0, -(asym.c_plus + asym.c_minus))
        }
    };
    let theta: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let xi = g.xi(k);
            let conj_hat = hat[flip_bin(k, n)].conj();
            if conj_hat.norm_sqr() == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            let kernel = horizon_kernel(xi, t, t_max, delta_tilde)?;
            let log_phase = if xi == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, -2.0 * delta * xi.abs().ln())
            };
            Ok(prefactor
                * C64::from_polar(1.0, -t * xi * xi)
                * log_phase
                * m_minus(xi)
                * conj_hat
                * kernel)
        })
        .collect::<Result<Vec<C64>>>()?;
    field_from_paper_hat(g, &theta, t)
}

/// ‖I₁(t)‖_{L²} · t^{γ/4} / ‖u₊‖_{L²(|x|^γ)} over a set of times — the
/// fitted-constant scan of the kernel decay bound.
pub fn i1_decade_scan(
    u_plus: &ComplexField,
    asym: &AsymptoticData,
    gamma: f64,
    ts: &[f64],
    t_max: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let weighted = u_plus.norm_l2_weighted(gamma);
    if !(weighted > 0.0) {
        return Err(Error::invalid("datum has zero weighted norm"));
    }
    ts.iter()
        .map(|&t| {
            let i1 = i1_field(u_plus, asym, t, t_max)?;
            Ok((t, i1.norm_l2() * t.powf(gamma / 4.0) / weighted))
        })
        .collect()
}

/// The three labeled evaluations of the far-field source integral at one
/// time: kernel part, chirp-error part, and the direct quadrature of the
/// same integral.  Up to discretization, `direct = i1 + i2`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub t: f64,
    pub i1: ComplexField,
    pub i2: ComplexField,
    pub direct: ComplexField,
}

/// Splits the far-field source integral
///
/// ```text
///     ∫_t^T e^{i(t−τ)∂²} [ v²_{f,∞}(τ,·) e^{−iα log τ} conj z₊(τ) ] dτ/τ ,
///     v²_{f,∞}(τ,x) = f∞² e^{−2iδ log|x/√τ|} m(x) ,
/// ```
///
/// into the kernel part [`i1_field`] and the Fresnel-remainder Duhamel
/// integral
///
/// ```text
///     I₂ = −√(πi) f∞² e^{−2iδ log 2} ∫_t^T e^{i(t−τ)∂²}
///            [ e^{−ix²/4τ} · ĝ_τ(−x/2τ) ] e^{−iα log τ} dτ/τ^{3/2+iδ} ,
///     g_τ(y) = conj(T_δ u₊)(y) · (e^{−iy²/4τ} − 1)
///              − conj(T_δ[ u₊ · (e^{i(·)²/4τ} − 1) ])(y) ,
/// ```
///
/// where T_δ is the spectral matching operator and ĝ is evaluated off-grid
/// by the chirp-z transform.  The two chirp factors in g_τ do not cancel —
/// T_δ does not commute with multiplication — and their difference (a
/// multiplier/chirp commutator applied to u₊) is exactly what makes
/// `i1 + i2 = direct` an identity rather than a leading-order statement.
/// Both terms separately obey the same chirp-smallness bound, so dropping
/// the second would still give the right decay rate, just not the identity.
/// The direct term is integrated with the same interaction-picture panel
/// quadrature as the operator itself.
pub fn decompose_i1_i2(
    u_plus: &ComplexField,
    asym: &AsymptoticData,
    t: f64,
    cfg: &WaveOpConfig,
) -> Result<Decomposition> {
    require_initial_tag(u_plus)?;
    if !(t >= cfg.t0 * (1.0 - 1e-12)) || !(t < cfg.t_max) {
        return Err(Error::invalid(format!(
            "decomposition time {t} must lie in [t0, t_max) = [{}, {})",
            cfg.t0, cfg.t_max
        )));
    }
    let delta_tilde = kernel_exponent(asym)?;
    let delta = asym.delta;
    let alpha = asym.alpha;
    let f_inf_sq = asym.f_inf * asym.f_inf;
    let g = u_plus.grid;
    let n = g.n;
    let xi_sq: Vec<f64> = (0..n).map(|k| grid_xi_sq(&g, k)).collect();
    let u_hat = fourier::dft(&u_plus.values);
    let xi_c = (bandwidth_cutoff(&u_hat, &g) + COEFF_BAND_PAD).min(g.xi_max());
    let omega = 2.0 * xi_c * xi_c + 2.0;
    let nodes = geometric_nodes(t, cfg.t_max, cfg.nodes_per_decade);

    // Side phases of m(x) by the sign of x; x = 0 takes the mean with the log
    // factor dropped (same convention as the spectral matching operator).
    let m_side = |x: f64| -> C64 {
        if x > 0.0 {
            C64::from_polar(1.0, -2.0 * asym.c_plus)
        } else if x < 0.0 {
            C64::from_polar(1.0, -2.0 * asym.c_minus)
        } else {
            C64::from_polar(1.0, -(asym.c_plus + asym.c_minus))
        }
    };

    // Direct quadrature of the far-field source term.
    let direct_eval = |_panel: usize, tau: f64| -> Result<Vec<C64>> {
        let zp_conj: Vec<C64> = {
            let bins: Vec<C64> = u_hat
                .iter()
                .enumerate()
                .map(|(k, &v)| v * C64::from_polar(1.0, -tau * xi_sq[k]))
                .collect();
            fourier::idft(&bins).iter().map(|v| v.conj()).collect()
        };
        let log_rot = C64::from_polar(1.0, -alpha * tau.ln());
        let sqrt_tau = tau.sqrt();
        let row: Vec<C64> = (0..n)
            .map(|j| {
                let x = g.x(j);
                let coeff = if x == 0.0 {
                    f_inf_sq * m_side(0.0)
                } else {
                    f_inf_sq
                        * C64::from_polar(1.0, -2.0 * delta * (x.abs() / sqrt_tau).ln())
                        * m_side(x)
                };
                coeff * log_rot * zp_conj[j]
            })
            .collect();
        let mut hat = fourier::dft(&row);
        for (k, v) in hat.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, tau * xi_sq[k]) / tau;
        }
        Ok(hat)
    };
    let (direct_js, _) =
        integrate_panels(&nodes, omega, cfg.quad_tol, g.dx, "decompose/direct", &direct_eval)?;

    // Chirp-error Duhamel integral.
    let spec = MultiplierSpec::from_asymptotics(asym);
    let conj_t: Vec<C64> = transforms::apply_tdelta(u_plus, &spec)
        .values
        .iter()
        .map(|v| v.conj())
        .collect();
    let i2_eval = |_panel: usize, tau: f64| -> Result<Vec<C64>> {
        // Chirped datum u₊·(e^{iy²/4τ} − 1), pushed through the matching
        // multiplier before conjugation: the second half of the commutator.
        let chirped = ComplexField::new(
            g,
            (0..n)
                .map(|j| {
                    let y = g.x(j);
                    let chirp = C64::from_polar(1.0, y * y / (4.0 * tau));
                    u_plus.values[j] * (chirp - C64::new(1.0, 0.0))
                })
                .collect(),
            0.0,
        )?;
        let t_chirped = transforms::apply_tdelta(&chirped, &spec);
        let q = ComplexField::new(
            g,
            (0..n)
                .map(|j| {
                    let y = g.x(j);
                    let chirp = C64::from_polar(1.0, -y * y / (4.0 * tau));
                    conj_t[j] * (chirp - C64::new(1.0, 0.0)) - t_chirped.values[j].conj()
                })
                .collect(),
            0.0,
        )?;
        // ĝ at the uniform off-grid frequencies −x_j/2τ.
        let hat_q = fourier::continuum_ft_uniform(&q, -g.x_min / (2.0 * tau), -g.dx / (2.0 * tau), n);
        let row: Vec<C64> = (0..n)
            .map(|j| {
                let x = g.x(j);
                C64::from_polar(1.0, -x * x / (4.0 * tau)) * hat_q[j]
            })
            .collect();
        let weight = C64::from_polar(tau.powf(-1.5), -delta_tilde * tau.ln());
        let mut hat = fourier::dft(&row);
        for (k, v) in hat.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, tau * xi_sq[k]) * weight;
        }
        Ok(hat)
    };
    let (i2_js, _) =
        integrate_panels(&nodes, omega, cfg.quad_tol, g.dx, "decompose/i2", &i2_eval)?;

    let assemble = |panel_js: &[Vec<C64>], scale: C64| -> Result<ComplexField> {
        let mut total = vec![C64::new(0.0, 0.0); n];
        for j in panel_js {
            for (acc, v) in total.iter_mut().zip(j) {
                *acc += v;
            }
        }
        let bins: Vec<C64> = total
            .iter()
            .enumerate()
            .map(|(k, &s)| scale * s * C64::from_polar(1.0, -t * xi_sq[k]))
            .collect();
        ComplexField::new(g, fourier::idft(&bins), t)
    };

    let sqrt_pi_i = C64::new(0.0, std::f64::consts::PI).sqrt();
    let pre = f_inf_sq * C64::from_polar(1.0, -2.0 * delta * 2f64.ln());
    let direct = assemble(&direct_js, C64::new(1.0, 0.0))?;
    let i2 = assemble(&i2_js, -sqrt_pi_i * pre)?;
    let i1 = i1_field(u_plus, asym, t, cfg.t_max)?;
    Ok(Decomposition { t, i1, i2, direct })
}

fn grid_xi_sq(grid: &SpatialGrid, k: usize) -> f64 {
    let xi = grid.xi(k);
    xi * xi
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packets::{GaussianPacket, PacketSum};
    use crate::quad;
    use crate::testsupport::{generic_profile, shot_profile};

    fn show(m: &str) {
        eprintln!("    [wave_operator] {m}");
    }

    fn small_cfg() -> WaveOpConfig {
        WaveOpConfig::new(1.0, 100.0, 0.125, 0.5, 1.0, 1e-8, 1e-4, 12, 8).unwrap()
    }

    fn gaussian_datum(grid: SpatialGrid, amp: f64, beta: f64, k0: f64) -> ComplexField {
        let packet = GaussianPacket::new(C64::new(amp, 0.0), C64::new(beta, 0.0), 0.0, k0)
            .unwrap();
        PacketSum::new(vec![packet]).sample(grid, 0.0).unwrap()
    }

    #[test]
    fn config_grid_and_trivial_paths() {
        // Parameter screens.
        assert!(WaveOpConfig::new(0.5, 100.0, 0.1, 0.5, 1.0, 1e-8, 1e-4, 8, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 50.0, 0.1, 0.5, 1.0, 1e-8, 1e-4, 8, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 100.0, 0.1, 1.2, 1.0, 1e-8, 1e-4, 8, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 100.0, 0.2, 0.5, 1.0, 1e-8, 1e-4, 8, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 100.0, 0.1, 0.5, -1.0, 1e-8, 1e-4, 8, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 100.0, 0.1, 0.5, 1.0, 1e-8, 1e-4, 0, 8).is_err());
        assert!(WaveOpConfig::new(1.0, 100.0, 0.1, 0.5, 1.0, 1e-8, 1e-4, 8, 2).is_err());

        let cfg = small_cfg();
        let grid_times = output_time_grid(&cfg);
        assert_eq!(grid_times[0], 1.0);
        assert_eq!(*grid_times.last().unwrap(), 100.0);
        assert!(grid_times.windows(2).all(|w| w[1] > w[0]));
        let ratio = grid_times[1] / grid_times[0];
        assert!((ratio - 10f64.powf(1.0 / 8.0)).abs() < 1e-12);

        // Zero datum, zero iterate: B0 = 0, Picard converges immediately.
        let fx = shot_profile();
        let grid = SpatialGrid::symmetric(20.0, 256).unwrap();
        let u0 = ComplexField::zeros(grid, 0.0);
        let z0 = zero_iterate(grid, &cfg).unwrap();
        let (bz, stats) = apply_b(&z0, &u0, &fx.sol, &fx.asym, &cfg).unwrap();
        assert!(bz.fields.iter().all(is_zero_field));
        assert_eq!(stats.subintervals, 0);
        let (z_star, report) = picard_solve(&u0, &fx.sol, &fx.asym, &cfg).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations.len(), 1);
        assert_eq!(report.fixed_point_residual_y, 0.0);
        assert!(z_star.fields.iter().all(is_zero_field));
        assert_eq!(y_norm(&z_star, cfg.nu).unwrap().total, 0.0);

        // Pointwise trivia: zero inputs give zero outputs.
        let vf = transforms::sample_vf(&fx.sol, grid, 2.0).unwrap();
        let zed = ComplexField::zeros(grid, 2.0);
        assert_eq!(source_f0(&zed, &vf, &fx.asym, 2.0).unwrap().norm_l2(), 0.0);
        assert_eq!(nlt(&zed, &vf, &fx.asym, 2.0).unwrap().norm_l2(), 0.0);

        // Mismatched iterate grid is refused.
        let other = SpatialGrid::symmetric(10.0, 256).unwrap();
        let z_other = zero_iterate(other, &cfg).unwrap();
        assert!(apply_b(&z_other, &u0, &fx.sol, &fx.asym, &cfg).is_err());
    }

    #[test]
    fn pointwise_ops_match_hand_expansion() {
        let fx = generic_profile();
        let grid = SpatialGrid::symmetric(6.0, 256).unwrap();
        let t = 2.3;
        let vf = transforms::sample_vf(&fx.sol, grid, t).unwrap();
        let w = ComplexField::from_fn(grid, t, |x| {
            C64::new((0.7 * x).sin() * 0.3, (0.4 * x).cos() * 0.2)
        })
        .unwrap();
        let z = ComplexField::from_fn(grid, t, |x| {
            C64::new(0.1 * (-x * x / 9.0).exp(), 0.05 * x.signum())
        })
        .unwrap();

        let f0 = source_f0(&w, &vf, &fx.asym, t).unwrap();
        let f1 = linear_f1(&z, &vf, &fx.asym, t).unwrap();
        let nl = nlt(&w, &vf, &fx.asym, t).unwrap();

        // Hand expansion through polar forms, written independently.
        let f_inf_sq = fx.asym.f_inf * fx.asym.f_inf;
        let alpha = fx.asym.alpha;
        for &j in &[3usize, 97, 200] {
            let v = vf.values[j];
            let (r, phi) = (v.norm(), v.arg());
            let wj = w.values[j];
            let expect_f0 = C64::from_polar(2.0 * (r * r - f_inf_sq) * wj.norm(), wj.arg())
                + C64::from_polar(r * r * wj.norm(), 2.0 * phi - alpha * t.ln() - wj.arg());
            assert!((f0.values[j] - expect_f0).norm() <= 1e-13 * (1.0 + expect_f0.norm()));

            let zj = z.values[j];
            let expect_f1 = C64::from_polar(2.0 * (r * r - f_inf_sq) * zj.norm(), zj.arg())
                + C64::from_polar(r * r * zj.norm(), 2.0 * phi - alpha * t.ln() - zj.arg());
            assert!((f1.values[j] - expect_f1).norm() <= 1e-13 * (1.0 + expect_f1.norm()));

            let a = wj.norm();
            let expect_nl = C64::from_polar(2.0 * r * a * a, phi - 0.5 * alpha * t.ln())
                + C64::from_polar(r * a * a, 2.0 * wj.arg() - phi + 0.5 * alpha * t.ln())
                + C64::from_polar(a * a * a, wj.arg());
            assert!((nl.values[j] - expect_nl).norm() <= 1e-13 * (1.0 + expect_nl.norm()));
        }

        // The fused row equals F₀(z₊) − F₁(z) − N(z + z₊) built from the
        // public pieces.
        let u = ComplexField::new(
            grid,
            w.values
                .iter()
                .zip(&z.values)
                .map(|(a, b)| a + b)
                .collect(),
            t,
        )
        .unwrap();
        let nl_u = nlt(&u, &vf, &fx.asym, t).unwrap();
        let fused = total_rhs_row(
            &vf.values,
            f_inf_sq,
            alpha,
            t,
            Some(&z.values),
            &w.values,
        );
        for j in 0..grid.n {
            let expect = f0.values[j] - f1.values[j] - nl_u.values[j];
            assert!((fused[j] - expect).norm() <= 1e-14 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn y_norm_closed_forms() {
        let grid = SpatialGrid::symmetric(20.0, 256).unwrap();
        let nu = 0.2;
        let times = geometric_nodes(1.0, 100.0, 16);
        // z(t) = t^{−ν} p(x) with ‖p‖_L² = 1.
        let p = {
            let raw = ComplexField::from_fn(grid, 0.0, |x| C64::new((-x * x).exp(), 0.0)).unwrap();
            let norm = raw.norm_l2();
            ComplexField::new(grid, raw.values.iter().map(|v| v / norm).collect(), 0.0).unwrap()
        };
        let p_sup = p.norm_linf();
        let fields: Vec<ComplexField> = times
            .iter()
            .map(|&t| {
                ComplexField::new(
                    grid,
                    p.values.iter().map(|v| v * t.powf(-nu)).collect(),
                    t,
                )
                .unwrap()
            })
            .collect();
        let traj = Trajectory::new(times.clone(), fields, EquationTag::ZEquation).unwrap();
        let report = y_norm(&traj, nu).unwrap();
        assert!((report.l2_sup - 1.0).abs() <= 1e-12);
        assert!((report.total - report.l2_sup - report.l4_linf_sup).abs() == 0.0);
        // Closed-form tail ∫_t^100 τ^{−4ν}‖p‖∞⁴ dτ, weighted and maximized
        // over the same nodes the trapezoid version sees.
        let closed = times
            .iter()
            .map(|&t| {
                t.powf(nu)
                    * (p_sup.powi(4) / (1.0 - 4.0 * nu)
                        * (100f64.powf(1.0 - 4.0 * nu) - t.powf(1.0 - 4.0 * nu)))
                    .powf(0.25)
            })
            .fold(0.0f64, f64::max);
        let got = report.l4_linf_sup;
        let rel = (got - closed).abs() / closed;
        show(&format!("L⁴ tail trapezoid vs closed form: rel = {rel:.3e}"));
        assert!(rel <= 5e-3, "trapezoid tail off by {rel:.3e}");

        // A single nonzero final node: the trapezoid tail is exactly the one
        // adjacent half-panel, weighted at the last node where it is seen.
        let mut fields2: Vec<ComplexField> =
            times.iter().map(|&t| ComplexField::zeros(grid, t)).collect();
        let last = times.len() - 1;
        fields2[last] =
            ComplexField::new(grid, p.values.clone(), times[last]).unwrap();
        let traj2 = Trajectory::new(times.clone(), fields2, EquationTag::ZEquation).unwrap();
        let r2 = y_norm(&traj2, nu).unwrap();
        let half_panel = 0.5 * (times[last] - times[last - 1]) * p_sup.powi(4);
        let expect_l4 = times[last - 1].powf(nu) * half_panel.powf(0.25);
        assert!((r2.l4_linf_sup - expect_l4).abs() <= 1e-12 * expect_l4);
        assert!((r2.l2_sup - times[last].powf(nu)).abs() <= 1e-12);

        // Zero trajectory: zero norm.
        let z0 = zero_iterate(grid, &small_cfg()).unwrap();
        assert_eq!(y_norm(&z0, nu).unwrap().total, 0.0);
    }

    /// Constant profile f ≡ c₀ (|c₀|² = A): the coupling row collapses to
    /// v_f² e^{−iα log τ} conj z₊, and B(0) has the closed Fourier form
    /// (i/2)·c̄₀²·e^{−itξ²}·conj û₊(−ξ)·∫_t^T e^{2iτξ²}τ^{−1−iα}dτ, checked
    /// here against an independent adaptive quadrature of the kernel.
    #[test]
    fn apply_b_matches_constant_profile_closed_form() {
        let c0 = C64::from_polar(0.5, std::f64::consts::PI / 7.0);
        let big_a = c0.norm_sqr();
        let sol = crate::profile::integrate_profile_f(big_a, c0, C64::new(0.0, 0.0), 60.0, 1e-10)
            .unwrap();
        let asym = AsymptoticData {
            f_inf: c0.norm(),
            fp_inf: 0.0,
            c_plus: c0.arg(),
            c_minus: c0.arg(),
            d_plus: 0.0,
            d_minus: 0.0,
            t3_inf: 0.0,
            delta: 0.0,
            alpha: big_a,
            cross_residual: 0.0,
        };
        // The table must be constant to roundoff for the closed form to apply.
        assert!((sol.eval_f(37.0).unwrap() - c0).norm() < 1e-9);

        let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let amp = 1e-6; // keeps the cubic terms ~1e−12 relative
        let u_plus = gaussian_datum(grid, amp, 0.25, 0.0);
        let cfg = WaveOpConfig::new(1.0, 100.0, 0.125, 0.5, 1.0, 1e-8, 1e-5, 4, 12).unwrap();
        let z0 = zero_iterate(grid, &cfg).unwrap();
        let (bz, stats) = apply_b(&z0, &u_plus, &sol, &asym, &cfg).unwrap();
        show(&format!(
            "constant-profile quadrature: {} subintervals over {} panels, est {:.2e} ≤ budget {:.2e}",
            stats.subintervals, stats.panels, stats.error_estimate, stats.error_budget
        ));
        assert!(stats.error_estimate <= stats.error_budget);

        // Last node is the horizon: the tail integral is empty.
        assert_eq!(bz.fields.last().unwrap().norm_l2(), 0.0);

        // Independent closed form at two output nodes.  Bins carrying less
        // than 1e−13 of the peak datum amplitude are skipped: their kernel
        // integrals are expensive at large ξ and their contribution to the
        // L² comparison is below 1e−12.
        let hat = paper_hat_bins(&u_plus);
        let hat_max = hat.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let n = grid.n;
        for &node in &[0usize, bz.len() / 2] {
            let t_out = bz.times[node];
            let theta: Vec<C64> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let xi = grid.xi(k);
                    let conj_hat = hat[flip_bin(k, n)].conj();
                    if conj_hat.norm() < 1e-13 * hat_max {
                        return Ok(C64::new(0.0, 0.0));
                    }
                    let om = 2.0 * xi * xi;
                    // ∫ e^{iωτ}τ^{−1−iα}dτ in log coordinates, independently
                    // of the production kernel machinery.
                    let kernel = quad::integrate_c64(
                        |s| (I * (om * s.exp() - big_a * s)).exp(),
                        t_out.ln(),
                        100f64.ln(),
                        1e-11,
                    )?;
                    Ok(0.5
                        * I
                        * c0.conj()
                        * c0.conj()
                        * C64::from_polar(1.0, -t_out * xi * xi)
                        * conj_hat
                        * kernel)
                })
                .collect::<Result<Vec<C64>>>()
                .unwrap();
            let oracle = field_from_paper_hat(grid, &theta, t_out).unwrap();
            let rel = bz.fields[node].l2_distance(&oracle).unwrap() / oracle.norm_l2();
            show(&format!("closed-form match at t = {t_out:.3}: rel = {rel:.3e}"));
            // Measured: 2.7e−6 at t = 1, 1.6e−6 at t = 10 (panel Simpson vs
            // adaptive Gauss–Kronrod on every active bin).
            assert!(rel <= 1e-5, "constant-profile closed form missed: rel = {rel:.3e}");
        }
    }

    /// Horizon sensitivity on the periodic box.  The box traps the free
    /// wave over the profile core, where the coupling coefficient
    /// 2(|v_f|² − f∞²) tends to its central value instead of decaying, so
    /// each [T, 2T] window adds a non-vanishing resonant kick
    /// ≈ i·c·ln 2·z₊(t₀): the T → ∞ limit of the torus operator drifts
    /// logarithmically and the horizon is part of the problem statement.
    /// The window contribution is still rigidly bounded by the triangle
    /// inequality ‖Δ‖ ≤ ½·(2·sup|C| + f∞²)·ln 2·‖u₊‖_{L²}, which pins the
    /// ½ prefactor and the dτ/τ measure: dropping either would break the
    /// ceiling or the floor below.
    #[test]
    fn apply_b_horizon_window_obeys_resonant_bounds() {
        let fx = shot_profile();
        let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let u_plus = gaussian_datum(grid, 1e-3, 0.125, 2.0);

        let run = |t_max: f64| -> Trajectory {
            let cfg =
                WaveOpConfig::new(1.0, t_max, 0.125, 0.5, 1.0, 1e-8, 1e-5, 4, 12).unwrap();
            let z0 = zero_iterate(grid, &cfg).unwrap();
            apply_b(&z0, &u_plus, &fx.sol, &fx.asym, &cfg).unwrap().0
        };
        let outs: Vec<Trajectory> = [100.0, 200.0, 400.0].iter().map(|&t| run(t)).collect();
        let d1 = outs[0].fields[0].l2_distance(&outs[1].fields[0]).unwrap();
        let d2 = outs[1].fields[0].l2_distance(&outs[2].fields[0]).unwrap();

        let f_inf_sq = fx.asym.f_inf * fx.asym.f_inf;
        let sup_c = fx
            .sol
            .f
            .iter()
            .map(|f| (f.norm_sqr() - f_inf_sq).abs())
            .fold(0.0f64, f64::max);
        let ceiling = 0.5 * (2.0 * sup_c + f_inf_sq) * 2f64.ln() * u_plus.norm_l2();
        show(&format!(
            "horizon windows: ‖Δ‖ = {d1:.3e}, {d2:.3e} against resonant ceiling {ceiling:.3e}"
        ));
        // Measured: 1.7e−4 and 3.8e−4 under a 9.8e−4 ceiling — the drift
        // grows between windows as the wrapped wave sinks into the profile
        // core (x/√τ shrinks), and must neither vanish nor break the bound.
        for d in [d1, d2] {
            assert!(d <= 1.05 * ceiling, "window drift {d:.3e} breaks the ceiling {ceiling:.3e}");
            assert!(d >= 0.01 * ceiling, "window drift {d:.3e} implausibly small");
        }
    }

    /// Small datum, shot profile: the iteration contracts, converges, stays
    /// in the ball, and the accepted iterate is a genuine fixed point.  The
    /// first increment ratio measures the one-time turn-on of the quadratic
    /// and cubic terms (z₁ = B0 has none, z₂ sees them all), so only the
    /// subsequent ratios are held to the contraction bar.
    #[test]
    fn picard_contracts_on_small_data() {
        let fx = shot_profile();
        let grid = SpatialGrid::symmetric(40.0, 512).unwrap();
        let u_plus = gaussian_datum(grid, 1e-3, 0.125, 0.0);
        let cfg = WaveOpConfig::new(1.0, 100.0, 0.125, 0.5, 0.1, 1e-7, 1e-5, 16, 16).unwrap();
        let (z_star, report) = picard_solve(&u_plus, &fx.sol, &fx.asym, &cfg).unwrap();
        let trace: Vec<String> = report
            .iterations
            .iter()
            .map(|it| format!("Δ={:.2e}{}", it.delta_y, match it.ratio {
                Some(r) => format!(" (r={r:.2})"),
                None => String::new(),
            }))
            .collect();
        show(&format!("picard: {}", trace.join(", ")));
        show(&format!(
            "residual ‖Bz*−z*‖_Y = {:.3e}, max iterate Y = {:.3e}",
            report.fixed_point_residual_y, report.max_y
        ));
        assert!(report.converged);
        assert!(report.iterations.len() <= 14, "needed {} iterations", report.iterations.len());
        // Measured trace: ratios 0.70, 0.43, 0.43, 0.34, 0.30, 0.26, 0.23,
        // 0.21, 0.19 — monotone contraction after the turn-on step.
        let ratios: Vec<f64> = report.iterations.iter().filter_map(|it| it.ratio).collect();
        assert!(ratios.len() >= 3);
        assert!(ratios[0] < 0.8, "turn-on ratio {:.3} too large", ratios[0]);
        for &r in &ratios[1..] {
            assert!(r < 0.5, "contraction ratio {r:.3} ≥ 0.5");
        }
        assert!(*ratios.last().unwrap() < 0.35);
        assert!(report.within_ball);
        assert!(report.fixed_point_residual_y < 10.0 * cfg.picard_tol);
        assert!(y_norm(&z_star, cfg.nu).unwrap().total > 0.0);

        // The recomposed frame trajectory is finite and profile-dominated.
        let v_traj = fixed_point_v_trajectory(&z_star, &u_plus, &fx.sol, &fx.asym).unwrap();
        assert_eq!(v_traj.equation, EquationTag::VEquation);
        for f in &v_traj.fields {
            assert!(f.norm_l2().is_finite());
        }
    }

    /// A datum far above the smallness regime must abort with a divergence
    /// trace, not return garbage; the streak detector is unit-tested on
    /// synthetic traces.
    #[test]
    fn divergence_is_detected_and_reported() {
        // Synthetic traces through the monitor.
        let mut m = DivergenceMonitor::new(1e6);
        assert!(m.observe(1.0, 1.0).unwrap().is_none());
        assert_eq!(m.observe(1.1, 1.0).unwrap(), Some(1.1 / 1.0));
        assert!(m.observe(1.3, 1.0).is_ok());
        let err = m.observe(1.7, 1.0).unwrap_err();
        assert!(matches!(err, Error::Diverged(_)));
        assert!(err.to_string().contains("non-contracting"));

        let mut m2 = DivergenceMonitor::new(1e6);
        m2.observe(1.0, 1.0).unwrap();
        assert!(m2.observe(f64::NAN, 1.0).is_err());

        let mut m3 = DivergenceMonitor::new(10.0);
        assert!(matches!(m3.observe(1.0, 11.0), Err(Error::Diverged(_))));

        // Contracting-then-flat sequences are not flagged.
        let mut m4 = DivergenceMonitor::new(1e6);
        for d in [1.0, 0.5, 0.6, 0.3, 0.35, 0.2] {
            m4.observe(d, 1.0).unwrap();
        }

        // End to end: a datum ~10³× the smallness scale leaves the ball.
        let fx = shot_profile();
        let grid = SpatialGrid::symmetric(20.0, 256).unwrap();
        let u_plus = gaussian_datum(grid, 3.0, 0.125, 0.0);
        let cfg = WaveOpConfig::new(1.0, 100.0, 0.125, 0.5, 1e-4, 1e-10, 1e-3, 6, 6).unwrap();
        let err = picard_solve(&u_plus, &fx.sol, &fx.asym, &cfg).unwrap_err();
        show(&format!("oversized datum: {err}"));
        assert!(matches!(err, Error::Diverged(_)));
    }

    /// The kernel part is antilinear in the datum, and its L² size decays
    /// like t^{−γ/4} against the weighted datum norm across a decade.
    #[test]
    fn i1_kernel_part_antilinearity_and_decay() {
        let fx = generic_profile();
        let delta_tilde = fx.asym.delta + fx.asym.alpha;
        assert!(
            delta_tilde.abs() > 0.05,
            "fixture unusable: kernel exponent {delta_tilde:.3} too close to zero"
        );
        let grid = SpatialGrid::symmetric(40.0, 1024).unwrap();
        let u_plus = gaussian_datum(grid, 1.0, 0.25, 1.0);

        // Antilinearity: I₁[c·u₊] = conj(c)·I₁[u₊].
        let c = C64::new(0.3, -0.4);
        let scaled = ComplexField::new(
            grid,
            u_plus.values.iter().map(|v| c * v).collect(),
            0.0,
        )
        .unwrap();
        let base = i1_field(&u_plus, &fx.asym, 2.0, 1e4).unwrap();
        let got = i1_field(&scaled, &fx.asym, 2.0, 1e4).unwrap();
        let expect = ComplexField::new(
            grid,
            base.values.iter().map(|v| c.conj() * v).collect(),
            2.0,
        )
        .unwrap();
        let rel = got.l2_distance(&expect).unwrap() / expect.norm_l2();
        assert!(rel <= 1e-12, "antilinearity violated: rel = {rel:.3e}");

        // Decay scan across [1, 100] with a far horizon.
        let ts = transforms_logspace(1.0, 100.0, 9);
        let scan = i1_decade_scan(&u_plus, &fx.asym, 0.5, &ts, 1e4).unwrap();
        let cs: Vec<f64> = scan.iter().map(|&(_, c)| c).collect();
        show(&format!(
            "decay constants t^{{γ/4}}‖I₁‖/‖u₊‖_w: {}",
            cs.iter().map(|c| format!("{c:.3}")).collect::<Vec<_>>().join(", ")
        ));
        let max = cs.iter().fold(0.0f64, |a, &b| a.max(b));
        let min = cs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(max.is_finite() && min > 0.0);
        assert!(
            max / min <= 5.0,
            "fitted constant drifts by ×{:.2} across the decade",
            max / min
        );
    }

    fn transforms_logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi / lo).ln() / (n - 1) as f64;
        (0..n).map(|k| lo * (k as f64 * step).exp()).collect()
    }

    /// The kernel part plus the chirp-error part reconstruct the directly
    /// quadratured far-field source integral — one machine identity checking
    /// every phase convention in the decomposition.
    #[test]
    fn i1_plus_i2_matches_direct_quadrature() {
        let fx = generic_profile();
        // The kernel route reconstructs the free-space integral while the
        // direct quadrature lives on the torus, so the packet must stay
        // inside the box over the whole window: modulation k₀ = 0.5
        // translates it by 2k₀T = 100 and width β = 0.009 spreads it to
        // σ(100) ≈ 28, both well inside the 400-wide box.  The spectral
        // offset also keeps all but ~1e−6 of the mass away from the ξ = 0
        // bin, whose log phase is convention-dependent.
        let grid = SpatialGrid::symmetric(200.0, 4096).unwrap();
        let u_plus = gaussian_datum(grid, 1e-3, 0.009, 0.5);
        // The side-phase jump of the coefficient at x = 0 leaks conjugate
        // content beyond the band-limited resolution rate, and the folded
        // chirp integrand of the remainder term is broadband near τ = t;
        // both cap the achievable quadrature near a few 1e−3 relative —
        // still an order under the comparison bar, so the budget is set
        // accordingly.
        let cfg = WaveOpConfig::new(1.0, 100.0, 0.125, 0.5, 1.0, 1e-8, 5e-3, 4, 12).unwrap();
        // Measured 1.533e−2 ≈ 3× the quadrature tolerance — the budgets of
        // the three assembled integrals stacking, so the 2e−2 bar below is
        // 4× the tolerance rather than an independent constant.  Dropping the
        // commutator half of the chirp remainder moves this to 1.1e0: the
        // identity genuinely exercises it.
        let dec = decompose_i1_i2(&u_plus, &fx.asym, 1.0, &cfg).unwrap();
        let sum = ComplexField::new(
            grid,
            dec.i1
                .values
                .iter()
                .zip(&dec.i2.values)
                .map(|(a, b)| a + b)
                .collect(),
            dec.t,
        )
        .unwrap();
        let rel = sum.l2_distance(&dec.direct).unwrap() / dec.direct.norm_l2();
        show(&format!(
            "decomposition identity: ‖I₁+I₂−direct‖/‖direct‖ = {rel:.3e} (‖I₁‖ = {:.3e}, ‖I₂‖ = {:.3e}, ‖direct‖ = {:.3e})",
            dec.i1.norm_l2(),
            dec.i2.norm_l2(),
            dec.direct.norm_l2()
        ));
        assert!(rel <= 2e-2, "decomposition identity violated: rel = {rel:.3e}");

        // Zero datum: all three parts vanish.
        let zero = ComplexField::zeros(grid, 0.0);
        let dz = decompose_i1_i2(&zero, &fx.asym, 1.0, &cfg).unwrap();
        assert_eq!(dz.i1.norm_l2(), 0.0);
        assert_eq!(dz.direct.norm_l2(), 0.0);
        assert_eq!(dz.i2.norm_l2(), 0.0);
    }
}
