//! The annulus family pipeline: the level-set arc Υ, the bracket roots β₁
//! and β*, continuation of the free-boundary condition u* = τ in the
//! parameter μ = α - 1, and assembly of the rescaled annulus model.

use crate::dynamics::find_tau;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::param::ParamPoint;
use crate::period::{gamma_level_tol, per_map};
use crate::rootfind::{brent, first_sign_change};
use crate::surface::{SurfaceContext, SurfacePatch, SurfaceTols};

const BETA1_SCAN: usize = 64;
const BETA_STAR_SCAN: usize = 24;
/// |u* - τ| at an accepted family point.
const MATCH_TOL: f64 = 1e-8;
/// Corrector bracket growth attempts around the predicted β.
const BRACKET_ATTEMPTS: usize = 10;
/// Consecutive μ-step halvings before the continuation truncates.
const MAX_HALVINGS: usize = 3;
/// Boundary rows must sit on one sphere to this fraction of its radius.
const BOUNDARY_SPHERE_TOL: f64 = 1e-6;

/// The arc Υ(β) = (1, β, γ) on the level set Per = -1/n.
pub fn upsilon(n: u32, beta: f64) -> Result<ParamPoint> {
    upsilon_tol(n, beta, 1e-12)
}

pub fn upsilon_tol(n: u32, beta: f64, root_tol: f64) -> Result<ParamPoint> {
    if n < 2 {
        return Err(Error::domain("upsilon: n must be at least 2"));
    }
    if beta < 1.0 {
        return Err(Error::domain("upsilon: beta must be at least 1"));
    }
    let c = -1.0 / n as f64;
    let gamma = gamma_level_tol(c, 1.0, beta, root_tol)?;
    ParamPoint::new(1.0, beta, gamma)
}

/// L(Υ(β)), the discriminant whose sign delimits the region where the
/// y = z crossing time τ exists.
pub fn l_aux_on_upsilon(n: u32, beta: f64) -> Result<f64> {
    Ok(upsilon(n, beta)?.membership().l_aux)
}

/// The end of the admissible arc: the root β₁ > 1 of L(Υ(β)) = 0. L is
/// positive at β = 1 and tends to -∞, so a sign change exists.
pub fn find_beta1(n: u32) -> Result<f64> {
    let f = |b: f64| l_aux_on_upsilon(n, b).unwrap_or(f64::NAN);
    let at_one = f(1.0);
    if !(at_one > 0.0) {
        return Err(Error::Consistency(format!(
            "find_beta1: L(Upsilon(1)) = {at_one}, expected positive"
        )));
    }
    let mut hi = 2.0;
    let mut grow = 0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 40 {
            return Err(Error::numeric("find_beta1: no sign change found", hi));
        }
    }
    match first_sign_change(f, 1.0, hi, BETA1_SCAN, 1e-13)? {
        Some(b1) => Ok(b1),
        None => Err(Error::numeric("find_beta1: scan missed the root", hi)),
    }
}

/// One solved point of the family curve.
#[derive(Debug, Clone, Copy)]
pub struct FamilyPoint {
    pub n: u32,
    /// μ = α - 1.
    pub mu: f64,
    pub param: ParamPoint,
    pub u_star: f64,
    pub tau: f64,
    pub sigma: f64,
    pub per: f64,
}

/// Free-boundary mismatch f = u* - τ at (α, β) on the Per = -1/n level set,
/// together with the fully solved point.
pub fn match_residual(
    n: u32,
    alpha: f64,
    beta: f64,
    tols: SurfaceTols,
) -> Result<(f64, FamilyPoint)> {
    let c = -1.0 / n as f64;
    let gamma = gamma_level_tol(c, alpha, beta, tols.root)?;
    let p = ParamPoint::new(alpha, beta, gamma)?;
    let ctx = SurfaceContext::new(&p, tols)?;
    let tau = find_tau(&ctx.traj, &p)?;
    let fp = FamilyPoint {
        n,
        mu: alpha - 1.0,
        param: p,
        u_star: ctx.u_star,
        tau,
        sigma: ctx.periods.sigma,
        per: per_map(&p)?,
    };
    Ok((ctx.u_star - tau, fp))
}

/// The rotational starting point: the root β* of f(β) = u*(Υ(β)) - τ(Υ(β))
/// on (1, β₁). f < 0 at β = 1 and turns positive before β₁ (τ collapses).
pub fn find_beta_star(n: u32) -> Result<f64> {
    find_beta_star_tol(n, SurfaceTols::default())
}

pub fn find_beta_star_tol(n: u32, tols: SurfaceTols) -> Result<f64> {
    let beta1 = find_beta1(n)?;
    let f = |b: f64| match match_residual(n, 1.0, b, tols) {
        Ok((r, _)) => r,
        Err(_) => f64::NAN,
    };
    let lo = 1.0;
    let f_lo = f(lo);
    if !(f_lo < 0.0) {
        return Err(Error::Consistency(format!(
            "find_beta_star: f(1) = {f_lo}, expected negative"
        )));
    }
    // scan toward β₁; τ shrinks to 0 there so f turns positive inside
    let hi = lo + 0.999 * (beta1 - lo);
    let mut scan = Vec::with_capacity(BETA_STAR_SCAN + 1);
    let mut prev_b = lo;
    let mut prev_f = f_lo;
    scan.push((prev_b, prev_f));
    for i in 1..=BETA_STAR_SCAN {
        let b = lo + (hi - lo) * i as f64 / BETA_STAR_SCAN as f64;
        let fb = f(b);
        scan.push((b, fb));
        if fb.is_finite() && prev_f.is_finite() && prev_f < 0.0 && fb >= 0.0 {
            let root = brent(&f, prev_b, b, 1e-12)?;
            let res = f(root);
            if res.abs() > MATCH_TOL {
                return Err(Error::numeric("find_beta_star: residual too large", res));
            }
            return Ok(root);
        }
        prev_b = b;
        prev_f = fb;
    }
    Err(Error::Numeric {
        what: format!("find_beta_star: no sign change on (1, beta1); scan {scan:?}"),
        achieved: prev_f,
    })
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub points: Vec<FamilyPoint>,
    /// Set when the corrector stopped converging before the end of the
    /// requested μ list; `points` is the maximal verified prefix.
    pub truncated: Option<String>,
}

/// Continue the family curve along the given μ values (starting at 0,
/// increasing). Secant predictor in β, bracketed 1-D corrector; the μ step
/// to the next requested value is halved up to three times on failure.
pub fn continue_family(n: u32, mu_list: &[f64], tols: SurfaceTols) -> Result<ContinuationResult> {
    if mu_list.is_empty() || mu_list[0] != 0.0 {
        return Err(Error::domain("continue_family: mu list must start at 0"));
    }
    if mu_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("continue_family: mu list must increase"));
    }
    let beta_star = find_beta_star_tol(n, tols)?;
    let (res0, fp0) = match_residual(n, 1.0, beta_star, tols)?;
    if res0.abs() > MATCH_TOL {
        return Err(Error::numeric("continue_family: mu = 0 residual", res0));
    }
    let mut points = vec![fp0];
    // predictor history: (μ, β)
    let mut hist: Vec<(f64, f64)> = vec![(0.0, beta_star)];

    for &mu in &mu_list[1..] {
        match advance_to(n, mu, &mut hist, tols, 0) {
            Ok(fp) => points.push(fp),
            Err(e) => {
                return Ok(ContinuationResult {
                    points,
                    truncated: Some(format!("stopped before mu = {mu}: {e}")),
                });
            }
        }
    }
    Ok(ContinuationResult {
        points,
        truncated: None,
    })
}

fn advance_to(
    n: u32,
    mu: f64,
    hist: &mut Vec<(f64, f64)>,
    tols: SurfaceTols,
    depth: usize,
) -> Result<FamilyPoint> {
    match solve_at_mu(n, mu, hist, tols) {
        Ok(fp) => Ok(fp),
        Err(e) if depth < MAX_HALVINGS => {
            // insert a midpoint to shorten the predictor step, then retry
            let last_mu = hist.last().unwrap().0;
            let mid = 0.5 * (last_mu + mu);
            advance_to(n, mid, hist, tols, depth + 1)?;
            advance_to(n, mu, hist, tols, depth + 1).map_err(|_| e)
        }
        Err(e) => Err(e),
    }
}

fn solve_at_mu(
    n: u32,
    mu: f64,
    hist: &mut Vec<(f64, f64)>,
    tols: SurfaceTols,
) -> Result<FamilyPoint> {
    let alpha = 1.0 + mu;
    let predicted = match hist.len() {
        1 => hist[0].1,
        _ => {
            let (m0, b0) = hist[hist.len() - 2];
            let (m1, b1) = hist[hist.len() - 1];
            if m1 > m0 {
                b1 + (b1 - b0) * (mu - m1) / (m1 - m0)
            } else {
                b1
            }
        }
    };
    let f = |b: f64| match match_residual(n, alpha, b, tols) {
        Ok((r, _)) => r,
        Err(_) => f64::NAN,
    };
    // grow a bracket around the prediction
    let mut delta = (predicted - hist.last().unwrap().1).abs().max(1e-4);
    let mut bracket = None;
    for _ in 0..BRACKET_ATTEMPTS {
        let (lo, hi) = ((predicted - delta).max(alpha), predicted + delta);
        let (flo, fhi) = (f(lo), f(hi));
        if flo.is_finite() && fhi.is_finite() && flo * fhi <= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        delta *= 2.0;
    }
    let (lo, hi) =
        bracket.ok_or_else(|| Error::numeric("continuation corrector: no bracket", predicted))?;
    let beta = brent(&f, lo, hi, 1e-12)?;
    let (res, fp) = match_residual(n, alpha, beta, tols)?;
    if res.abs() > MATCH_TOL {
        return Err(Error::numeric("continuation corrector residual", res));
    }
    hist.push((mu, beta));
    Ok(fp)
}

/// A constructed annulus: the rescaled patch plus the data needed to verify
/// it against the original (unscaled) H = 1/2 surface.
pub struct AnnulusModel {
    pub fp: FamilyPoint,
    pub ctx: SurfaceContext,
    /// Rescaled into the closed unit ball; boundary rows on the unit sphere.
    pub patch: SurfacePatch,
    /// Boundary sphere of the unscaled patch.
    pub boundary_center: Vec3,
    pub boundary_radius: f64,
    /// H of the rescaled annulus: R/2, since the H = 1/2 surface is scaled
    /// by 1/R.
    pub h_rescaled: f64,
    /// Neck radius of the unscaled surface; rotational (μ = 0) models only.
    pub necksize_unscaled: Option<f64>,
}

impl AnnulusModel {
    pub fn is_rotational(&self) -> bool {
        self.fp.param.alpha_is_one()
    }

    /// Map a point of the unscaled surface into rescaled coordinates.
    pub fn rescale_point(&self, q: Vec3) -> Vec3 {
        (q - self.boundary_center) / self.boundary_radius
    }
}

/// Build the rescaled annulus over [-u*, u*] × [0, 2nσ].
pub fn assemble_annulus(fp: &FamilyPoint, nu: usize, nv: usize) -> Result<AnnulusModel> {
    assemble_annulus_tol(fp, nu, nv, SurfaceTols::default())
}

pub fn assemble_annulus_tol(
    fp: &FamilyPoint,
    nu: usize,
    nv: usize,
    tols: SurfaceTols,
) -> Result<AnnulusModel> {
    let ctx = SurfaceContext::new(&fp.param, tols)?;
    if (ctx.u_star - fp.u_star).abs() > 1e-8 {
        return Err(Error::Consistency(format!(
            "assemble_annulus: u* mismatch {} vs {}",
            ctx.u_star, fp.u_star
        )));
    }
    let mut patch = ctx.build_patch(fp.n, nu, nv)?;

    let sphere = ctx.sphere_data_at(ctx.u_star);
    // the common boundary sphere is centered on the symmetry line at height 0
    let center = Vec3 {
        x: sphere.center.x,
        y: sphere.center.y,
        z: 0.0,
    };
    let radius = sphere.radius;
    let mut sphere_residual: f64 = 0.0;
    for iu in [0, nu - 1] {
        for iv in 0..=nv {
            let d = patch.pos[patch.idx(iu, iv)].dist(center);
            sphere_residual = sphere_residual.max((d - radius).abs());
        }
    }
    if sphere_residual > BOUNDARY_SPHERE_TOL * radius {
        return Err(Error::Consistency(format!(
            "assemble_annulus: boundary rows off the sphere by {sphere_residual} (R = {radius})"
        )));
    }

    let necksize_unscaled = if fp.param.alpha_is_one() {
        // neck = the u = 0 circle; measure its radius about the axis
        let mid = (nu - 1) / 2;
        let mut acc = 0.0;
        for iv in 0..nv {
            let q = patch.pos[patch.idx(mid, iv)];
            acc += ((q.x - center.x).powi(2) + (q.y - center.y).powi(2)).sqrt();
        }
        Some(acc / nv as f64)
    } else {
        None
    };

    patch.rescale(center, radius);
    Ok(AnnulusModel {
        fp: *fp,
        ctx,
        patch,
        boundary_center: center,
        boundary_radius: radius,
        h_rescaled: radius / 2.0,
        necksize_unscaled,
    })
}
