//! Independent checks of the constructed annulus: free boundary, symmetry
//! group, rotation index, embeddedness, mean curvature, spherical curvature
//! lines, and the sinh-Gordon residual of the conformal factor.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::AnnulusModel;
use crate::geom::{vec3, Vec3};
use crate::mesh::TriMesh;
use crate::surface::OmegaField;

/// Analytic-accuracy checks (closure, spheres, free boundary).
pub const TOL_ANALYTIC: f64 = 1e-6;
/// Mesh symmetry residual (normalized Hausdorff).
pub const TOL_SYMMETRY: f64 = 1e-5;
/// Discretization-limited curvature checks (relative).
pub const TOL_DISCRETE: f64 = 0.02;
/// Total turning angle of the central geodesic (absolute, radians).
pub const TOL_TURNING: f64 = 1e-4;
/// sinh-Gordon finite-difference residual (max norm).
pub const TOL_SINH_GORDON: f64 = 1e-5;
/// An asymmetry probe must exceed this to count as a definite failure.
const ASYMMETRY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: String,
}

impl Verdict {
    pub fn new(name: &str, residual: f64, tolerance: f64, details: String) -> Verdict {
        Verdict {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            details,
        }
    }

    fn failed(name: &str, tolerance: f64, details: String) -> Verdict {
        Verdict {
            name: name.into(),
            residual: f64::INFINITY,
            tolerance,
            pass: false,
            details,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeomTols {
    pub analytic: f64,
    pub symmetry: f64,
    pub discrete: f64,
    pub turning: f64,
    pub sinh_gordon: f64,
}

impl Default for GeomTols {
    fn default() -> Self {
        GeomTols {
            analytic: TOL_ANALYTIC,
            symmetry: TOL_SYMMETRY,
            discrete: TOL_DISCRETE,
            turning: TOL_TURNING,
            sinh_gordon: TOL_SINH_GORDON,
        }
    }
}

/// Boundary rows on the unit sphere, met orthogonally.
pub fn check_free_boundary(model: &AnnulusModel) -> Verdict {
    check_free_boundary_tol(model, TOL_ANALYTIC)
}

pub fn check_free_boundary_tol(model: &AnnulusModel, tol: f64) -> Verdict {
    let patch = &model.patch;
    let mut res: f64 = 0.0;
    for iu in [0, patch.nu - 1] {
        for iv in 0..patch.nv {
            let idx = patch.idx(iu, iv);
            let q = patch.pos[idx];
            let n = patch.normal[idx];
            res = res.max((q.norm() - 1.0).abs());
            res = res.max(n.dot(q).abs());
        }
    }
    Verdict::new(
        "free_boundary",
        res,
        tol,
        "max of | |q|-1 | and |<N,q>| over boundary rows".into(),
    )
}

// spatial hash for nearest-vertex queries

struct PointGrid<'a> {
    pts: &'a [Vec3],
    cell: f64,
    map: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl<'a> PointGrid<'a> {
    fn build(pts: &'a [Vec3], cell: f64) -> PointGrid<'a> {
        let mut map: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            map.entry(Self::key(*p, cell)).or_default().push(i as u32);
        }
        PointGrid { pts, cell, map }
    }

    fn key(p: Vec3, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// Distance to the nearest stored point; gives up (returning the best
    /// found so far, possibly infinity) once the search radius exceeds `cap`.
    fn nearest(&self, q: Vec3, cap: f64) -> f64 {
        let (cx, cy, cz) = Self::key(q, self.cell);
        let mut best = f64::INFINITY;
        let mut k: i64 = 0;
        loop {
            for dx in -k..=k {
                for dy in -k..=k {
                    for dz in -k..=k {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != k {
                            continue;
                        }
                        if let Some(ids) = self.map.get(&(cx + dx, cy + dy, cz + dz)) {
                            for &i in ids {
                                best = best.min(q.dist(self.pts[i as usize]));
                            }
                        }
                    }
                }
            }
            // points in unvisited cells are farther than k * cell
            if best <= k as f64 * self.cell {
                return best;
            }
            if k as f64 * self.cell > cap {
                return best;
            }
            k += 1;
        }
    }
}

fn reflect_plane(q: Vec3, m: Vec3) -> Vec3 {
    q - m * (2.0 * q.dot(m))
}

fn rotate_z(q: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    vec3(c * q.x - s * q.y, s * q.x + c * q.y, q.z)
}

/// One-sided-both-ways Hausdorff distance of the transformed vertex set to
/// the original, normalized by diameter. `inv` is the inverse transform.
fn hausdorff_residual<F, G>(
    grid: &PointGrid,
    pts: &[Vec3],
    diam: f64,
    stride: usize,
    cap: f64,
    t: F,
    inv: G,
) -> f64
where
    F: Fn(Vec3) -> Vec3,
    G: Fn(Vec3) -> Vec3,
{
    let mut worst: f64 = 0.0;
    for p in pts.iter().step_by(stride.max(1)) {
        worst = worst.max(grid.nearest(t(*p), cap));
        worst = worst.max(grid.nearest(inv(*p), cap));
        if worst > cap {
            break;
        }
    }
    worst / diam
}

/// Reflections through x3 = 0 and the n construction vertical planes; the
/// 2π/n rotation; plus either the rotational-invariance probe (μ = 0) or
/// the π/n asymmetry probe (μ > 0).
pub fn check_symmetry(model: &AnnulusModel, seed: u64) -> Verdict {
    check_symmetry_tol(model, seed, TOL_SYMMETRY)
}

pub fn check_symmetry_tol(model: &AnnulusModel, seed: u64, tol: f64) -> Verdict {
    let patch = &model.patch;
    let n = model.fp.n as usize;
    let pts: Vec<Vec3> = {
        let mut v = Vec::with_capacity(patch.nu * patch.nv);
        for iu in 0..patch.nu {
            for iv in 0..patch.nv {
                v.push(patch.pos[patch.idx(iu, iv)]);
            }
        }
        v
    };
    let diam = patch.diameter();
    let grid = PointGrid::build(&pts, diam / 200.0);
    let cap = 0.1 * diam;

    let mut residual: f64 = 0.0;
    let mut details = Vec::new();

    // x3 = 0 reflection
    let r = hausdorff_residual(
        &grid,
        &pts,
        diam,
        1,
        cap,
        |q| vec3(q.x, q.y, -q.z),
        |q| vec3(q.x, q.y, -q.z),
    );
    details.push(format!("x3_reflection={r:.3e}"));
    residual = residual.max(r);

    // n vertical planes: the v = 0 plane direction, stepped by π/n
    let mid = (patch.nu - 1) / 2;
    let q0 = patch.pos[patch.idx(mid, 0)];
    let theta0 = q0.y.atan2(q0.x);
    for k in 0..n {
        let ang = theta0 + k as f64 * std::f64::consts::PI / n as f64;
        // plane contains the z-axis and direction ang; normal is horizontal
        let m = vec3(-ang.sin(), ang.cos(), 0.0);
        let r = hausdorff_residual(
            &grid,
            &pts,
            diam,
            1,
            cap,
            |q| reflect_plane(q, m),
            |q| reflect_plane(q, m),
        );
        details.push(format!("plane_{k}={r:.3e}"));
        residual = residual.max(r);
    }

    // 2π/n rotation about the axis
    let rot = 2.0 * std::f64::consts::PI / n as f64;
    let r = hausdorff_residual(
        &grid,
        &pts,
        diam,
        1,
        cap,
        |q| rotate_z(q, rot),
        |q| rotate_z(q, -rot),
    );
    details.push(format!("rot_2pi_n={r:.3e}"));
    residual = residual.max(r);

    let mut pass = residual <= tol;

    if model.is_rotational() {
        // μ = 0: invariance under arbitrary rotations, tested against the
        // per-row circles (sampling is not rotation-aligned)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for probe in 0..3 {
            let ang = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
            let mut worst: f64 = 0.0;
            for iu in 0..patch.nu {
                // circle of this row: mean height and axis distance
                let (mut zc, mut rc) = (0.0, 0.0);
                for iv in 0..patch.nv {
                    let q = patch.pos[patch.idx(iu, iv)];
                    zc += q.z;
                    rc += q.x.hypot(q.y);
                }
                zc /= patch.nv as f64;
                rc /= patch.nv as f64;
                for iv in 0..patch.nv {
                    let q = rotate_z(patch.pos[patch.idx(iu, iv)], ang);
                    let d = (q.x.hypot(q.y) - rc).hypot(q.z - zc);
                    worst = worst.max(d);
                }
            }
            let worst = worst / diam;
            details.push(format!("rot_probe_{probe}({ang:.3})={worst:.3e}"));
            if worst > tol {
                pass = false;
            }
            residual = residual.max(worst);
        }
    } else {
        // μ > 0: rotation by π/n must NOT be a symmetry
        let half = std::f64::consts::PI / n as f64;
        let r = hausdorff_residual(
            &grid,
            &pts,
            diam,
            17,
            cap,
            |q| rotate_z(q, half),
            |q| rotate_z(q, -half),
        );
        details.push(format!("rot_pi_n={r:.3e} (must exceed {ASYMMETRY_FLOOR})"));
        if r <= ASYMMETRY_FLOOR {
            pass = false;
        }
    }

    Verdict {
        name: "symmetry".into(),
        residual,
        tolerance: tol,
        pass,
        details: details.join(", "),
    }
}

/// Rotation index of the u = 0 closed geodesic: total tangent turning over
/// one v-period must be -2π (index -1).
pub fn check_rotation_index(model: &AnnulusModel) -> Verdict {
    check_rotation_index_tol(model, TOL_TURNING)
}

pub fn check_rotation_index_tol(model: &AnnulusModel, tol: f64) -> Verdict {
    let patch = &model.patch;
    let mid = (patch.nu - 1) / 2;
    let nv = patch.nv;
    let mut dirs = Vec::with_capacity(nv);
    for iv in 0..nv {
        let a = patch.pos[patch.idx(mid, iv)];
        let b = patch.pos[patch.idx(mid, (iv + 1) % nv)];
        let d = b - a;
        let len = d.x.hypot(d.y);
        if len < 1e-14 {
            return Verdict::failed("rotation_index", tol, format!("zero tangent at iv={iv}"));
        }
        dirs.push((d.x / len, d.y / len));
    }
    let mut total = 0.0;
    for i in 0..nv {
        let (x0, y0) = dirs[i];
        let (x1, y1) = dirs[(i + 1) % nv];
        total += (x0 * y1 - y0 * x1).atan2(x0 * x1 + y0 * y1);
    }
    let index = (total / (2.0 * std::f64::consts::PI)).round() as i64;
    let residual = (total + 2.0 * std::f64::consts::PI).abs();
    let mut v = Verdict::new(
        "rotation_index",
        residual,
        tol,
        format!("total turning {total:.9}, integer index {index}"),
    );
    if index != -1 {
        v.pass = false;
    }
    v
}

/// No pair of non-adjacent triangles intersects.
pub fn check_embedded(model: &AnnulusModel, mesh: &TriMesh) -> Verdict {
    let _ = model;
    let hits = mesh.self_intersections(32);
    Verdict::new(
        "embedded",
        hits.len() as f64,
        0.0,
        if hits.is_empty() {
            "no non-adjacent triangle intersections".into()
        } else {
            format!("intersecting pairs (first {}): {:?}", hits.len(), hits)
        },
    )
}

/// Discrete mean curvature (cotangent Laplacian) against the declared H.
pub fn check_mean_curvature(model: &AnnulusModel, mesh: &TriMesh) -> Verdict {
    check_mean_curvature_tol(model, mesh, TOL_DISCRETE)
}

pub fn check_mean_curvature_tol(model: &AnnulusModel, mesh: &TriMesh, tol: f64) -> Verdict {
    let h_declared = model.h_rescaled;
    if (h_declared - model.boundary_radius / 2.0).abs() > 1e-14 {
        return Verdict::failed("mean_curvature", tol, "declared H is not R/2".into());
    }
    match discrete_mean_curvature_spread(model, mesh, h_declared) {
        Ok((spread, count)) => Verdict::new(
            "mean_curvature",
            spread,
            tol,
            format!("max relative deviation over {count} interior vertices"),
        ),
        Err(e) => Verdict::failed("mean_curvature", tol, e.to_string()),
    }
}

/// Max relative deviation of the cotangent-formula mean curvature from
/// `h_ref` over interior vertices. Also used for refinement probes.
pub fn discrete_mean_curvature_spread(
    model: &AnnulusModel,
    mesh: &TriMesh,
    h_ref: f64,
) -> Result<(f64, usize)> {
    let nv_count = mesh.vertices.len();
    let mut lap = vec![Vec3::ZERO; nv_count];
    let mut area = vec![0.0f64; nv_count];
    for f in &mesh.faces {
        let (ia, ib, ic) = (f[0] as usize, f[1] as usize, f[2] as usize);
        let (a, b, c) = (mesh.vertices[ia], mesh.vertices[ib], mesh.vertices[ic]);
        let double_area = (b - a).cross(c - a).norm();
        if double_area < 1e-300 {
            return Err(Error::Mesh("degenerate triangle".into()));
        }
        let third = double_area / 6.0;
        area[ia] += third;
        area[ib] += third;
        area[ic] += third;
        // cot at each corner = dot / |cross| of the adjacent edges
        let cot = |p: Vec3, q: Vec3, r: Vec3| {
            let (u, v) = (q - p, r - p);
            u.dot(v) / double_area
        };
        let (ca, cb, cc) = (cot(a, b, c), cot(b, a, c), cot(c, a, b));
        // edge (b,c) is opposite a, etc.
        lap[ib] = lap[ib] + (c - b) * ca;
        lap[ic] = lap[ic] + (b - c) * ca;
        lap[ia] = lap[ia] + (c - a) * cb;
        lap[ic] = lap[ic] + (a - c) * cb;
        lap[ia] = lap[ia] + (b - a) * cc;
        lap[ib] = lap[ib] + (a - b) * cc;
    }
    // interior vertices: all u rows except the two boundary rows
    let patch = &model.patch;
    let mut spread: f64 = 0.0;
    let mut count = 0usize;
    for iu in 1..patch.nu - 1 {
        for iv in 0..patch.nv {
            let i = iu * patch.nv + iv;
            let h = lap[i].norm() / (4.0 * area[i]);
            spread = spread.max((h - h_ref).abs() / h_ref);
            count += 1;
        }
    }
    Ok((spread, count))
}

/// Every u-line lies on its analytic sphere (or plane for u = 0) with a
/// constant intersection angle; centers collinear on the vertical axis.
pub fn check_spherical_lines(model: &AnnulusModel) -> Verdict {
    check_spherical_lines_tol(model, TOL_ANALYTIC)
}

pub fn check_spherical_lines_tol(model: &AnnulusModel, tol: f64) -> Verdict {
    let patch = &model.patch;
    let mid = (patch.nu - 1) / 2;
    let rr = model.boundary_radius;
    let mut res: f64 = 0.0;
    let mut center_dev: f64 = 0.0;
    let mut boundary_cos: f64 = 0.0;
    let rows: Vec<usize> = (0..patch.nu).step_by(8).chain([patch.nu - 1]).collect();
    for &iu in &rows {
        let u = patch.u_grid[iu];
        if iu == mid {
            // plane case: the line lies in x3 = 0 and meets it orthogonally
            for iv in 0..patch.nv {
                let idx = patch.idx(mid, iv);
                res = res.max(patch.pos[idx].z.abs());
                res = res.max(patch.normal[idx].z.abs());
            }
            continue;
        }
        let sd = model.ctx.sphere_data_at(u);
        if sd.is_planar() {
            continue;
        }
        let center = model.rescale_point(sd.center);
        let radius = sd.radius / rr;
        center_dev = center_dev.max(center.x.hypot(center.y) - 0.0);
        let mut cos_min = f64::INFINITY;
        let mut cos_max = f64::NEG_INFINITY;
        for iv in 0..patch.nv {
            let idx = patch.idx(iu, iv);
            let q = patch.pos[idx];
            let d = q.dist(center);
            res = res.max((d - radius).abs() / radius);
            let cos = patch.normal[idx].dot((q - center) / d);
            cos_min = cos_min.min(cos);
            cos_max = cos_max.max(cos);
            if iu == 0 || iu == patch.nu - 1 {
                boundary_cos = boundary_cos.max(cos.abs());
            }
        }
        res = res.max(cos_max - cos_min);
    }
    // center deviation relative to axis must be tighter than the line test
    let center_tol = 1e-7;
    let mut v = Verdict::new(
        "spherical_lines",
        res,
        tol,
        format!(
            "line residual {res:.3e}, center axis deviation {center_dev:.3e}, \
             boundary |cos| {boundary_cos:.3e}"
        ),
    );
    if center_dev > center_tol || boundary_cos > tol {
        v.pass = false;
    }
    v
}

/// Max-norm finite-difference residual of Δω + sinh ω cosh ω on the field
/// grid (4th-order stencils; v wraps periodically, u trimmed by two rows).
pub fn sinh_gordon_residual(field: &OmegaField) -> f64 {
    let nu = field.u_grid.len();
    let cols = field.v_grid.len();
    let nv = cols - 1; // last column duplicates the seam
    let hu = field.u_grid[1] - field.u_grid[0];
    let hv = field.v_grid[1] - field.v_grid[0];
    let at = |iu: usize, iv: usize| field.omega[iu * cols + iv.rem_euclid(nv)];
    let mut worst: f64 = 0.0;
    for iu in 2..nu - 2 {
        for iv in 0..nv {
            let d2u = (-at(iu - 2, iv) + 16.0 * at(iu - 1, iv) - 30.0 * at(iu, iv)
                + 16.0 * at(iu + 1, iv)
                - at(iu + 2, iv))
                / (12.0 * hu * hu);
            let d2v = (-at(iu, iv + nv - 2) + 16.0 * at(iu, iv + nv - 1) - 30.0 * at(iu, iv)
                + 16.0 * at(iu, iv + 1)
                - at(iu, iv + 2))
                / (12.0 * hv * hv);
            let w = at(iu, iv);
            worst = worst.max((d2u + d2v + w.sinh() * w.cosh()).abs());
        }
    }
    worst
}

pub fn check_sinh_gordon(model: &AnnulusModel, nu: usize, nv: usize) -> Result<Verdict> {
    check_sinh_gordon_tol(model, nu, nv, TOL_SINH_GORDON)
}

pub fn check_sinh_gordon_tol(
    model: &AnnulusModel,
    nu: usize,
    nv: usize,
    tol: f64,
) -> Result<Verdict> {
    let field = model.ctx.omega_field(model.fp.n, nu, nv)?;
    let res = sinh_gordon_residual(&field);
    Ok(Verdict::new(
        "sinh_gordon",
        res,
        tol,
        format!("max-norm FD residual on {nu}x{nv} grid"),
    ))
}

/// The mean curvature vector (H N with H = 1/2 in the unscaled model)
/// points away from the symmetry axis along the u = 0 geodesic.
pub fn mean_curvature_outward(model: &AnnulusModel) -> bool {
    let patch = &model.patch;
    let mid = (patch.nu - 1) / 2;
    for iv in 0..patch.nv {
        let idx = patch.idx(mid, iv);
        let q = patch.pos[idx];
        let radial = vec3(q.x, q.y, 0.0);
        if patch.normal[idx].dot(radial) <= 0.0 {
            return false;
        }
    }
    true
}

/// All standard checks on one model.
pub fn run_all(model: &AnnulusModel, mesh: &TriMesh, tols: GeomTols, seed: u64) -> Vec<Verdict> {
    let mut out = vec![
        check_free_boundary_tol(model, tols.analytic),
        check_symmetry_tol(model, seed, tols.symmetry),
        check_rotation_index_tol(model, tols.turning),
        check_embedded(model, mesh),
        check_mean_curvature_tol(model, mesh, tols.discrete),
        check_spherical_lines_tol(model, tols.analytic),
    ];
    let sg = check_sinh_gordon_tol(model, model.patch.nu, model.patch.nv, tols.sinh_gordon)
        .unwrap_or_else(|e| Verdict::failed("sinh_gordon", tols.sinh_gordon, e.to_string()));
    out.push(sg);
    out
}
