//! The Hamiltonian (y, z) system, its first integrals, the Jacobi-separated
//! (s, t) oracle, and the roots u₁ (first return of y to zero) and τ (first
//! y = z crossing).

use crate::error::{Error, Result};
use crate::ode::{integrate, DenseSolution};
use crate::param::ParamPoint;
use crate::period::{st_half_periods_tol, STPeriods};
use crate::rootfind::first_sign_change;

pub const DEFAULT_ODE_TOL: f64 = 1e-11;
const U1_SCAN_SAMPLES: usize = 4000;

/// State of the (y, z) system at one value of u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YZState {
    pub u: f64,
    pub y: f64,
    pub z: f64,
    pub y_prime: f64,
    pub z_prime: f64,
}

/// Dense solution of the (y, z) system on [-u_max, u_max], with the located
/// root u₁ and, when requested, τ.
#[derive(Debug, Clone)]
pub struct YZTrajectory {
    forward: DenseSolution<4>,
    backward: DenseSolution<4>,
    pub point: ParamPoint,
    pub a_hat: f64,
    pub u_max: f64,
    /// First positive zero of y (present when γ > 1).
    pub u1: Option<f64>,
}

impl YZTrajectory {
    pub fn state(&self, u: f64) -> YZState {
        let s = if u >= 0.0 {
            self.forward.eval(u)
        } else {
            self.backward.eval(u)
        };
        YZState {
            u,
            y: s[0],
            z: s[1],
            y_prime: s[2],
            z_prime: s[3],
        }
    }

    pub fn initial_state(&self) -> YZState {
        self.state(0.0)
    }

    /// z ≡ 0 structurally (α = β makes z'(0) = 0 and z = 0 invariant).
    pub fn z_identically_zero(&self) -> bool {
        self.point.alpha_eq_beta()
    }
}

fn yz_rhs(a_hat: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |_, s| {
        let (y, z, yp, zp) = (s[0], s[1], s[2], s[3]);
        let w = y * y - z * z;
        [
            yp,
            zp,
            (a_hat - 1.0) * y - 2.0 * y * w,
            a_hat * z - 2.0 * z * w,
        ]
    }
}

pub fn initial_conditions(p: &ParamPoint) -> [f64; 4] {
    let k = p.constants();
    [
        0.0,
        0.0,
        0.5 * (k.a + k.b) * k.c,
        0.5 * (k.b - k.a) * (k.c * k.c + 1.0).sqrt(),
    ]
}

/// Integrate the (y, z) system over [-u_max, u_max] and locate u₁.
pub fn integrate_yz(p: &ParamPoint, u_max: f64, tol: f64) -> Result<YZTrajectory> {
    if !(u_max > 0.0 && tol > 0.0) {
        return Err(Error::domain("integrate_yz: u_max and tol must be positive"));
    }
    let a_hat = p.constants().a_hat;
    let y0 = initial_conditions(p);
    let rhs = yz_rhs(a_hat);
    let forward = integrate(&rhs, 0.0, y0, u_max, tol, tol)?;
    let backward = integrate(&rhs, 0.0, y0, -u_max, tol, tol)?;
    let mut traj = YZTrajectory {
        forward,
        backward,
        point: *p,
        a_hat,
        u_max,
        u1: None,
    };
    if p.gamma > 1.0 {
        traj.u1 = find_u1(&traj).ok();
    }
    Ok(traj)
}

/// Default integration window: 1.2 · u(2L) estimated from the separated
/// system, which guarantees the u₁ bracket exists.
pub fn default_u_max(p: &ParamPoint, tol: f64) -> Result<f64> {
    let est = st_oracle(p, STOracleSpan::FullSPeriod, 64, tol)?;
    Ok(1.2 * est.path.last().map(|s| s.u_of_lambda).unwrap_or(1.0))
}

/// First integrals h, k of the system, evaluated at one state.
pub fn first_integrals(state: &YZState, a_hat: f64) -> (f64, f64) {
    let (y, z, yp, zp) = (state.y, state.z, state.y_prime, state.z_prime);
    let w = y * y - z * z;
    let h = yp * yp - zp * zp - (a_hat - 1.0) * y * y + a_hat * z * z + w * w;
    let k = (z * yp - y * zp).powi(2) + zp * zp + z * z * (w - a_hat);
    (h, k)
}

/// First positive zero of y, located on the dense output and polished.
pub fn find_u1(traj: &YZTrajectory) -> Result<f64> {
    if traj.point.gamma <= 1.0 {
        return Err(Error::domain("find_u1 requires gamma > 1"));
    }
    let y_at = |u: f64| traj.state(u).y;
    match first_sign_change(y_at, 0.0, traj.u_max, U1_SCAN_SAMPLES, 1e-12)? {
        Some(u1) => Ok(u1),
        None => Err(Error::numeric(
            "find_u1: no sign change of y before u_max",
            traj.u_max,
        )),
    }
}

/// First u in (0, u₁] with y(u) = z(u). Requires the point to lie in W.
pub fn find_tau(traj: &YZTrajectory, p: &ParamPoint) -> Result<f64> {
    let m = p.membership();
    if !m.in_w {
        return Err(Error::domain(format!(
            "find_tau: point ({}, {}, {}) not in W (L = {})",
            p.alpha, p.beta, p.gamma, m.l_aux
        )));
    }
    let u1 = traj
        .u1
        .ok_or_else(|| Error::domain("find_tau: trajectory has no u1"))?;
    if traj.z_identically_zero() {
        return Ok(u1);
    }
    let phi = |u: f64| {
        let s = traj.state(u);
        s.y - s.z
    };
    match first_sign_change(phi, 0.0, u1, U1_SCAN_SAMPLES, 1e-12)? {
        Some(tau) => Ok(tau),
        None => {
            // φ(u₁) = -z(u₁) has the opposite sign of φ near 0; a missing
            // crossing indicates a tolerance problem, not a domain issue.
            Err(Error::numeric("find_tau: no y = z crossing in (0, u1]", phi(u1)))
        }
    }
}

/// A sample of the separated system path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct STState {
    pub lambda: f64,
    pub s: f64,
    pub t: f64,
    pub u_of_lambda: f64,
}

#[derive(Debug, Clone)]
pub struct STPath {
    pub path: Vec<STState>,
    pub periods: STPeriods,
    pub r2: f64,
    pub r3: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum STOracleSpan {
    /// λ from 0 to 2L (one full s-oscillation, i.e. u from 0 to u₁).
    FullSPeriod,
    /// Explicit λ endpoint.
    Lambda(f64),
}

/// Integrate the separated system in the desingularized angular variables
/// s = 1 + (r₃-1)sin²θ, t = r₂ sin²χ, for which the turning points are
/// regular. Returns `samples`+1 states uniformly spaced in λ.
pub fn st_oracle(p: &ParamPoint, span: STOracleSpan, samples: usize, tol: f64) -> Result<STPath> {
    if p.gamma <= 1.0 {
        return Err(Error::domain("st_oracle requires gamma > 1"));
    }
    let cubic = p.cubic();
    let (r1, r2, r3) = (cubic.r1, cubic.r2, cubic.r3);
    let periods = st_half_periods_tol(p, tol.min(1e-12))?;
    let lambda_max = match span {
        STOracleSpan::FullSPeriod => 2.0 * periods.l_half,
        STOracleSpan::Lambda(l) => l,
    };
    let t_active = !p.alpha_eq_beta();
    // state: [θ, χ, u]
    let rhs = move |_: f64, st: &[f64; 3]| {
        let s = 1.0 + (r3 - 1.0) * st[0].sin().powi(2);
        let t = if t_active { r2 * st[1].sin().powi(2) } else { 0.0 };
        let dtheta = 0.5 * (s * (s - r1) * (s - r2)).max(0.0).sqrt();
        let dchi = if t_active {
            0.5 * ((1.0 - t) * (r3 - t) * (t - r1)).max(0.0).sqrt()
        } else {
            0.0
        };
        [dtheta, dchi, 0.5 * (s - t)]
    };
    let sol = integrate(rhs, 0.0, [0.0, 0.0, 0.0], lambda_max, tol, tol)?;
    let mut path = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let lambda = lambda_max * i as f64 / samples as f64;
        let st = sol.eval(lambda);
        let s = 1.0 + (r3 - 1.0) * st[0].sin().powi(2);
        let t = if t_active { r2 * st[1].sin().powi(2) } else { 0.0 };
        path.push(STState {
            lambda,
            s,
            t,
            u_of_lambda: st[2],
        });
    }
    Ok(STPath {
        path,
        periods,
        r2,
        r3,
    })
}

impl STPath {
    /// Map a sample back to (|y|, |z|) through y² = (s-1)(1-t), z² = s·(-t).
    pub fn yz_magnitudes(&self, st: &STState) -> (f64, f64) {
        let y2 = ((st.s - 1.0) * (1.0 - st.t)).max(0.0);
        let z2 = (st.s * (-st.t)).max(0.0);
        (y2.sqrt(), z2.sqrt())
    }
}

/// Polished root of s(λ) = r₃, i.e. θ = π/2, for cross-checks of L.
pub fn u_at_lambda(p: &ParamPoint, lambda: f64, tol: f64) -> Result<f64> {
    let path = st_oracle(p, STOracleSpan::Lambda(lambda), 1, tol)?;
    Ok(path.path[1].u_of_lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::period::gamma_level;

    fn pt(a: f64, b: f64, g: f64) -> ParamPoint {
        ParamPoint::new(a, b, g).unwrap()
    }

    #[test]
    fn z_vanishes_when_alpha_eq_beta() {
        let p = pt(1.4, 1.4, 1.8);
        let traj = integrate_yz(&p, 3.0, 1e-11).unwrap();
        for i in 0..=60 {
            let u = 3.0 * i as f64 / 60.0;
            assert!(traj.state(u).z.abs() < 1e-11);
        }
    }

    #[test]
    fn first_integrals_hand_value() {
        // (1,1,√3): h = y'(0)² = 1/3, k = 0
        let p = pt(1.0, 1.0, 3.0_f64.sqrt());
        let traj = integrate_yz(&p, 2.0, 1e-11).unwrap();
        let (h, k) = first_integrals(&traj.initial_state(), traj.a_hat);
        assert!((h - 1.0 / 3.0).abs() < 1e-12, "h = {h}");
        assert!(k.abs() < 1e-12, "k = {k}");
    }

    #[test]
    fn first_integrals_conserved() {
        let g = gamma_level(-0.5, 1.0, 2.0).unwrap();
        let p = pt(1.0, 2.0, g);
        let tol = 1e-11;
        let traj = integrate_yz(&p, 4.0, tol).unwrap();
        let (h0, k0) = first_integrals(&traj.initial_state(), traj.a_hat);
        for i in 1..=80 {
            let u = 4.0 * i as f64 / 80.0;
            let (h, k) = first_integrals(&traj.state(u), traj.a_hat);
            assert!((h - h0).abs() < 10.0 * tol, "h drift at u={u}");
            assert!((k - k0).abs() < 10.0 * tol, "k drift at u={u}");
        }
    }

    #[test]
    fn u1_matches_separated_system() {
        let g = gamma_level(-0.5, 1.0, 2.0).unwrap();
        let p = pt(1.0, 2.0, g);
        let u_est = default_u_max(&p, 1e-11).unwrap();
        let traj = integrate_yz(&p, u_est, 1e-11).unwrap();
        let u1 = traj.u1.unwrap();
        let st = st_oracle(&p, STOracleSpan::FullSPeriod, 16, 1e-11).unwrap();
        let u_2l = st.path.last().unwrap().u_of_lambda;
        assert!((u1 - u_2l).abs() < 1e-7, "u1 = {u1}, u(2L) = {u_2l}");
    }

    #[test]
    fn u1_alpha_eq_beta_reparametrization() {
        // α = β: u1 = (1/2) ∫ s dλ over [0, 2L], which is exactly what the
        // augmented u-equation integrates when t ≡ 0.
        let p = pt(1.3, 1.3, 1.9);
        let u_est = default_u_max(&p, 1e-11).unwrap();
        let traj = integrate_yz(&p, u_est, 1e-11).unwrap();
        let st = st_oracle(&p, STOracleSpan::FullSPeriod, 16, 1e-11).unwrap();
        assert!((traj.u1.unwrap() - st.path.last().unwrap().u_of_lambda).abs() < 1e-7);
    }

    #[test]
    fn tau_equals_u1_for_alpha_eq_beta() {
        let p = pt(1.3, 1.3, 1.9);
        let traj = integrate_yz(&p, default_u_max(&p, 1e-11).unwrap(), 1e-11).unwrap();
        let tau = find_tau(&traj, &p).unwrap();
        assert_eq!(tau, traj.u1.unwrap());
    }

    #[test]
    fn tau_interior_for_beta_above_alpha() {
        let g = gamma_level(-0.5, 1.0, 2.0).unwrap();
        let p = pt(1.0, 2.0, g);
        let traj = integrate_yz(&p, default_u_max(&p, 1e-11).unwrap(), 1e-11).unwrap();
        let tau = find_tau(&traj, &p).unwrap();
        let u1 = traj.u1.unwrap();
        assert!(tau > 0.0 && tau < u1);
        let s = traj.state(tau);
        assert!((s.y - s.z).abs() < 1e-10);
        // y > z strictly inside (0, τ)
        for i in 1..40 {
            let u = tau * i as f64 / 40.0;
            let s = traj.state(u);
            assert!(s.y - s.z > -1e-12);
        }
    }

    #[test]
    fn outside_w_y_below_z_near_zero() {
        // C² <= (A-B)²/(4AB): y - z < 0 for small u > 0
        let p = pt(1.0, 6.0, 1.05);
        assert!(!p.membership().in_w);
        let traj = integrate_yz(&p, 0.5, 1e-11).unwrap();
        for &u in &[1e-3, 5e-3, 1e-2] {
            let s = traj.state(u);
            assert!(s.y < s.z, "y >= z at u = {u}");
        }
        assert!(find_tau(&traj, &p).is_err());
    }

    #[test]
    fn s_reaches_r3_at_half_period() {
        let g = gamma_level(-0.5, 1.0, 2.0).unwrap();
        let p = pt(1.0, 2.0, g);
        let st = st_oracle(&p, STOracleSpan::FullSPeriod, 2, 1e-11).unwrap();
        // midpoint of [0, 2L] is λ = L where s = r3
        assert!((st.path[1].s - st.r3).abs() < 1e-8);
        assert!((st.path[2].s - 1.0).abs() < 1e-8);
    }
}
