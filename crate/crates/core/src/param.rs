//! Parameter-domain bookkeeping: derived constants, the quartic `p`, the
//! cubic `q`, region membership and the free-boundary discriminant.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point (α, β, γ) of the parameter space. γ = 1 is the planar-curvature-line
/// boundary case; operations that need γ > 1 reject it individually.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ParamPoint {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::domain("parameters must be finite"));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::domain("alpha and beta must be positive"));
        }
        if gamma < 1.0 {
            return Err(Error::domain("gamma must be >= 1"));
        }
        Ok(ParamPoint { alpha, beta, gamma })
    }

    /// True on the base domain α ≥ 1, β ≥ 1, γ ≥ 1.
    pub fn in_base_domain(&self) -> bool {
        self.alpha >= 1.0 && self.beta >= 1.0 && self.gamma >= 1.0
    }

    pub fn constants(&self) -> DerivedConstants {
        derive_constants(self)
    }

    pub fn quartic(&self) -> QuarticData {
        quartic(self)
    }

    pub fn cubic(&self) -> CubicData {
        cubic(self)
    }

    pub fn membership(&self) -> RegionMembership {
        region_membership(self)
    }

    /// Structural degeneracy flags: special cases are decided on the
    /// parameters, never by comparing floating-point roots.
    pub fn alpha_is_one(&self) -> bool {
        self.alpha == 1.0
    }

    pub fn alpha_eq_beta(&self) -> bool {
        self.alpha == self.beta
    }
}

/// A = (α + 1/α)/2, B = (β + 1/β)/2, C = (γ - 1/γ)/2 and â = 1 - AB + C².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_hat: f64,
}

pub fn derive_constants(p: &ParamPoint) -> DerivedConstants {
    let a = 0.5 * (p.alpha + 1.0 / p.alpha);
    let b = 0.5 * (p.beta + 1.0 / p.beta);
    let c = 0.5 * (p.gamma - 1.0 / p.gamma);
    DerivedConstants {
        a,
        b,
        c,
        a_hat: 1.0 - a * b + c * c,
    }
}

/// The quartic p(x) = -(x - α/γ)(x - 1/(αγ))(x + βγ)(x + γ/β) in monomial
/// form, together with its roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticData {
    /// Coefficients `[c0, c1, c2, c3, c4]` of c0 + c1 x + ... + c4 x^4.
    pub coeffs: [f64; 5],
    /// Smallest positive root, 1/(αγ).
    pub rho0: f64,
    /// Largest positive root, α/γ.
    pub rho1: f64,
    /// Negative roots -βγ and -γ/β.
    pub neg_roots: [f64; 2],
    /// ρ0 = ρ1 structurally (α = 1).
    pub double_positive_root: bool,
}

pub fn quartic(p: &ParamPoint) -> QuarticData {
    let (alpha, beta, gamma) = (p.alpha, p.beta, p.gamma);
    let rho0 = 1.0 / (alpha * gamma);
    let rho1 = alpha / gamma;
    let n0 = beta * gamma;
    let n1 = gamma / beta;
    // p(x) = -(x^2 - (ρ0+ρ1)x + ρ0ρ1)(x^2 + (n0+n1)x + n0 n1)
    // The products ρ0ρ1 = 1/γ² and n0 n1 = γ² are formed from γ directly so
    // that the constant coefficient is -1 at the coefficient level.
    let s_pos = rho0 + rho1;
    let s_neg = n0 + n1;
    let p_pos = 1.0 / (gamma * gamma);
    let p_neg = gamma * gamma;
    let coeffs = [
        -1.0,
        -(p_pos * s_neg - p_neg * s_pos),
        -(p_pos + p_neg - s_pos * s_neg),
        -(s_neg - s_pos),
        -1.0,
    ];
    QuarticData {
        coeffs,
        rho0: rho0.min(rho1),
        rho1: rho0.max(rho1),
        neg_roots: [-n0, -n1],
        double_positive_root: alpha == 1.0,
    }
}

impl QuarticData {
    /// Horner evaluation of p(x).
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]
    }

    /// Derivative p'(x).
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]
    }
}

/// The cubic q(x) = -(x - r3)(x² - (1 - AB)x + (A - B)²/4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicData {
    /// Coefficients `[c0, c1, c2, c3]`.
    pub coeffs: [f64; 4],
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// r1 = r2 structurally (α = 1 or β = 1).
    pub degenerate: bool,
}

pub fn cubic(p: &ParamPoint) -> CubicData {
    let k = p.constants();
    let r3 = k.c * k.c + 1.0;
    // h(x) = x² - (1-AB) x + (A-B)²/4, discriminant (A²-1)(B²-1) >= 0
    let sum = 1.0 - k.a * k.b;
    let prod = 0.25 * (k.a - k.b) * (k.a - k.b);
    let disc = ((k.a * k.a - 1.0) * (k.b * k.b - 1.0)).max(0.0);
    let sq = disc.sqrt();
    let r1 = 0.5 * (sum - sq);
    // For α = β the product vanishes and r2 must be exactly 0.
    let r2 = if p.alpha_eq_beta() { 0.0 } else { 0.5 * (sum + sq) };
    // q(x) = -(x - r3)(x² - sum·x + prod)
    let coeffs = [-(-r3 * prod), -(prod + r3 * sum), -(-sum - r3), -1.0];
    CubicData {
        coeffs,
        r1,
        r2,
        r3,
        degenerate: p.alpha == 1.0 || p.beta == 1.0,
    }
}

impl CubicData {
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
    }
}

/// Region flags and the auxiliary discriminant L = C² - (A-B)²/(4AB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMembership {
    pub in_o: bool,
    pub in_w: bool,
    pub l_aux: f64,
}

pub fn region_membership(p: &ParamPoint) -> RegionMembership {
    let k = p.constants();
    let l_aux = k.c * k.c - (k.a - k.b) * (k.a - k.b) / (4.0 * k.a * k.b);
    let in_o = p.in_base_domain();
    let in_w = p.beta >= p.alpha && p.alpha >= 1.0 && l_aux > 0.0;
    RegionMembership { in_o, in_w, l_aux }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: f64, b: f64, g: f64) -> ParamPoint {
        ParamPoint::new(a, b, g).unwrap()
    }

    #[test]
    fn constants_identity_point() {
        let k = pt(1.0, 1.0, 1.0).constants();
        assert_eq!((k.a, k.b, k.c, k.a_hat), (1.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn constants_hand_values() {
        let k = pt(1.0, 1.0, 2.0).constants();
        assert_eq!(k.a, 1.0);
        assert_eq!(k.b, 1.0);
        assert!((k.c - 0.75).abs() < 1e-15);
        assert!((k.a_hat - 0.5625).abs() < 1e-15);

        let k = pt(2.0, 1.0, 1.0).constants();
        assert_eq!(k.a, 1.25);
        assert_eq!(k.b, 1.0);
        assert_eq!(k.c, 0.0);
        assert!((k.a_hat + 0.25).abs() < 1e-15);
    }

    #[test]
    fn constants_invariant_under_inversion() {
        let k1 = pt(3.0, 0.5, 2.0).constants();
        let k2 = pt(1.0 / 3.0, 2.0, 2.0).constants();
        assert!((k1.a - k2.a).abs() < 1e-15);
        assert!((k1.b - k2.b).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(ParamPoint::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(ParamPoint::new(0.0, 1.0, 1.0).is_err());
        assert!(ParamPoint::new(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn quartic_constant_term_exact() {
        for &(a, b, g) in &[(1.0, 1.0, 1.0), (2.0, 3.0, 1.5), (1.3, 0.7, 4.0)] {
            let q = pt(a, b, g).quartic();
            assert_eq!(q.eval(0.0), -1.0);
        }
    }

    #[test]
    fn quartic_double_root_at_alpha_one() {
        let q = pt(1.0, 2.0, 3.0).quartic();
        assert!(q.double_positive_root);
        assert_eq!(q.rho0, q.rho1);
        assert!((q.rho0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quartic_roots_hand_values() {
        let q = pt(2.0, 1.0, 2.0).quartic();
        assert!((q.rho0 - 0.25).abs() < 1e-15);
        assert!((q.rho1 - 1.0).abs() < 1e-15);
        // evaluation at the stated roots vanishes within 1e-12 of the
        // largest coefficient
        let cmax = q.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for r in [q.rho0, q.rho1, q.neg_roots[0], q.neg_roots[1]] {
            assert!(q.eval(r).abs() < 1e-12 * cmax.max(1.0), "p({r}) != 0");
        }
    }

    #[test]
    fn cubic_structure() {
        // (1,1,sqrt(3)): q(x) = -(x - 4/3) x²
        let c = pt(1.0, 1.0, 3.0_f64.sqrt()).cubic();
        assert!((c.r3 - 4.0 / 3.0).abs() < 1e-15);
        assert!(c.r1.abs() < 1e-15 && c.r2.abs() < 1e-15);

        // Vieta on h(x) for (1,2,2): r1 r2 = (A-B)²/4
        let c = pt(1.0, 2.0, 2.0).cubic();
        assert!((c.r1 * c.r2 - 0.015625).abs() < 1e-14);
        // r3 = C² + 1 and q(r3) = 0
        let k = pt(1.0, 2.0, 2.0).constants();
        assert_eq!(c.r3, k.c * k.c + 1.0);
        assert!(c.eval(c.r3).abs() < 1e-12);
    }

    #[test]
    fn cubic_sign_between_roots() {
        for &(a, b, g) in &[(1.2, 2.0, 1.8), (1.0, 3.0, 2.5), (2.0, 2.0, 1.4)] {
            let c = pt(a, b, g).cubic();
            let lo = c.r2.max(0.0);
            for i in 1..20 {
                let x = lo + (c.r3 - lo) * i as f64 / 20.0;
                assert!(c.eval(x) > 0.0, "q({x}) <= 0 at ({a},{b},{g})");
            }
        }
    }

    #[test]
    fn membership_and_l_aux() {
        // α = β kills the subtracted term: L = C² exactly
        let m = pt(1.7, 1.7, 2.0).membership();
        let k = pt(1.7, 1.7, 2.0).constants();
        assert_eq!(m.l_aux, k.c * k.c);
        assert!(m.in_w);

        // (1,1,√3) → L = 1/3
        let m = pt(1.0, 1.0, 3.0_f64.sqrt()).membership();
        assert!((m.l_aux - 1.0 / 3.0).abs() < 1e-15);

        // B large at fixed C drives L negative
        let m = pt(1.0, 50.0, 3.0_f64.sqrt()).membership();
        assert!(m.l_aux < 0.0);
        assert!(!m.in_w);
    }

    #[test]
    fn w_points_have_gamma_above_one() {
        for &(a, b, g) in &[(1.0, 1.5, 1.5), (1.2, 1.2, 2.0), (1.1, 2.0, 1.7)] {
            let m = pt(a, b, g).membership();
            if m.in_w {
                assert!(g > 1.0);
            }
        }
    }
}
