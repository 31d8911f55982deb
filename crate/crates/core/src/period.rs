//! Period quantities of the planar geodesic: the half-period σ, the turning
//! angle Θ, the normalized period map Per = Θ/π, the (s,t) half-periods,
//! and the level-set solver for γ.

use crate::error::{Error, Result};
use crate::param::ParamPoint;
use crate::quad::endpoint_singular;
use crate::rootfind::brent;

/// Below this distance from α = 1 the closed forms replace the quadrature.
const ALPHA_ONE_CUTOFF: f64 = 1e-8;
/// Double-root cutoff for the t half-period.
const DOUBLE_ROOT_CUTOFF: f64 = 1e-10;

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodData {
    /// Half-period of the planar geodesic in v.
    pub sigma: f64,
    /// Turning angle per half-period, in (-π, π).
    pub theta: f64,
    /// Θ/π, in (-1, 0] for γ ≥ 1.
    pub per: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct STPeriods {
    pub l_half: f64,
    /// Infinite when the t-oscillation degenerates (double negative root of
    /// q, or the root at 0 for α = β).
    pub m_half: f64,
}

impl STPeriods {
    pub fn m_is_infinite(&self) -> bool {
        self.m_half.is_infinite()
    }
}

fn alpha_effective(alpha: f64) -> f64 {
    if alpha >= 1.0 {
        alpha
    } else {
        1.0 / alpha
    }
}

/// S(β,γ) = 1 + (β + 1/β)γ² + γ⁴, the common radicand of the α = 1 closed
/// forms.
fn closed_form_radicand(beta: f64, gamma: f64) -> f64 {
    1.0 + (beta + 1.0 / beta) * gamma * gamma + gamma.powi(4)
}

pub fn per_closed_form_alpha1(beta: f64, gamma: f64) -> f64 {
    (1.0 - gamma * gamma) / closed_form_radicand(beta, gamma).sqrt()
}

pub fn sigma_closed_form_alpha1(beta: f64, gamma: f64) -> f64 {
    2.0 * std::f64::consts::PI * gamma / closed_form_radicand(beta, gamma).sqrt()
}

/// The period map Per(α,β,γ) = Θ/π.
pub fn per_map(p: &ParamPoint) -> Result<f64> {
    per_map_tol(p, DEFAULT_QUAD_TOL)
}

pub fn per_map_tol(p: &ParamPoint, tol: f64) -> Result<f64> {
    let alpha = alpha_effective(p.alpha);
    if (alpha - 1.0).abs() < ALPHA_ONE_CUTOFF {
        return Ok(per_closed_form_alpha1(p.beta, p.gamma));
    }
    let (beta, gamma) = (p.beta, p.gamma);
    let rho0 = 1.0 / (alpha * gamma);
    let rho1 = alpha / gamma;
    let theta = endpoint_singular(
        rho0,
        rho1,
        |x| x - 1.0 / x,
        |x| (x + beta * gamma) * (x + gamma / beta),
        tol,
    )?;
    Ok(theta / std::f64::consts::PI)
}

/// The v half-period σ(α,β,γ).
pub fn sigma_period(p: &ParamPoint) -> Result<f64> {
    sigma_period_tol(p, DEFAULT_QUAD_TOL)
}

pub fn sigma_period_tol(p: &ParamPoint, tol: f64) -> Result<f64> {
    let alpha = alpha_effective(p.alpha);
    if (alpha - 1.0).abs() < ALPHA_ONE_CUTOFF {
        return Ok(sigma_closed_form_alpha1(p.beta, p.gamma));
    }
    let (beta, gamma) = (p.beta, p.gamma);
    let rho0 = 1.0 / (alpha * gamma);
    let rho1 = alpha / gamma;
    endpoint_singular(
        rho0,
        rho1,
        |_| 2.0,
        |x| (x + beta * gamma) * (x + gamma / beta),
        tol,
    )
}

pub fn period_data(p: &ParamPoint) -> Result<PeriodData> {
    let per = per_map(p)?;
    let sigma = sigma_period(p)?;
    Ok(PeriodData {
        sigma,
        theta: per * std::f64::consts::PI,
        per,
    })
}

/// Solve Per(α, β, γ_c) = c for γ_c. Monotonicity of Per in γ guarantees a
/// unique root; the bracket is grown geometrically from γ = 1.
pub fn gamma_level(c: f64, alpha: f64, beta: f64) -> Result<f64> {
    gamma_level_tol(c, alpha, beta, DEFAULT_ROOT_TOL)
}

pub fn gamma_level_tol(c: f64, alpha: f64, beta: f64, root_tol: f64) -> Result<f64> {
    if !(c > -1.0 && c <= 0.0) {
        return Err(Error::domain("gamma_level: c must lie in (-1, 0]"));
    }
    if c == 0.0 {
        return Ok(1.0);
    }
    let per_at = |g: f64| -> Result<f64> {
        per_map(&ParamPoint::new(alpha, beta, g)?)
    };
    let mut hi = 2.0;
    let mut per_hi = per_at(hi)?;
    let mut grow = 0;
    while per_hi > c {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::numeric("gamma_level: bracket growth failed", per_hi - c));
        }
        per_hi = per_at(hi)?;
    }
    let f = |g: f64| per_at(g).unwrap_or(f64::NAN) - c;
    brent(f, 1.0, hi, root_tol)
}

/// Half-periods of the separated (s, t) system.
pub fn st_half_periods(p: &ParamPoint) -> Result<STPeriods> {
    st_half_periods_tol(p, DEFAULT_QUAD_TOL)
}

pub fn st_half_periods_tol(p: &ParamPoint, tol: f64) -> Result<STPeriods> {
    if p.gamma <= 1.0 {
        return Err(Error::domain("st_half_periods requires gamma > 1"));
    }
    let c = p.cubic();
    let (r1, r2, r3) = (c.r1, c.r2, c.r3);
    // L = ∫_1^{r3} dx / sqrt((x-1)(r3-x) · x·h(x)), h(x) = (x-r1)(x-r2)
    let l_half = endpoint_singular(
        1.0,
        r3,
        |_| 1.0,
        |x| x * (x - r1) * (x - r2),
        tol,
    )?;
    // M diverges logarithmically when the lower endpoint is a double root of
    // the radicand: r1 = r2 (α = 1 or β = 1), or r2 = 0 (α = β).
    let m_half = if (r2 - r1).abs() < DOUBLE_ROOT_CUTOFF || r2.abs() < DOUBLE_ROOT_CUTOFF {
        f64::INFINITY
    } else {
        // M = ∫_{r2}^0 dx / sqrt((x-r2)(0-x) · (1-x)(r3-x)(x-r1))
        endpoint_singular(
            r2,
            0.0,
            |_| 1.0,
            |x| (1.0 - x) * (r3 - x) * (x - r1),
            tol,
        )?
    };
    if m_half.is_finite() && l_half >= m_half {
        return Err(Error::Consistency(format!(
            "st_half_periods: expected L < M, got L = {l_half}, M = {m_half}"
        )));
    }
    Ok(STPeriods { l_half, m_half })
}
