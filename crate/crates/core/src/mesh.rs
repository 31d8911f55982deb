//! Triangle mesh support: triangulation of a surface patch with a welded
//! v-seam, OBJ/PLY export, OBJ re-import, a manifold edge check, and
//! self-intersection detection (AABB tree broad phase, exact-orientation
//! narrow phase).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{vec3, Vec3};
use crate::surface::SurfacePatch;

/// Seam weld refusal threshold, as a fraction of the patch diameter.
const WELD_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Triangulate a patch. The duplicated seam column is dropped and faces
    /// wrap around in v; refuses if the seam does not close.
    pub fn from_patch(patch: &SurfacePatch) -> Result<TriMesh> {
        let (nu, nv) = (patch.nu, patch.nv);
        let diam = patch.diameter();
        if patch.closure_residual > WELD_TOL * diam {
            return Err(Error::Mesh(format!(
                "seam closure residual {} exceeds {} of diameter {}",
                patch.closure_residual, WELD_TOL, diam
            )));
        }
        let mut vertices = Vec::with_capacity(nu * nv);
        for iu in 0..nu {
            for iv in 0..nv {
                vertices.push(patch.pos[patch.idx(iu, iv)]);
            }
        }
        let vid = |iu: usize, iv: usize| (iu * nv + iv % nv) as u32;
        let mut faces = Vec::with_capacity((nu - 1) * nv * 2);
        for iu in 0..nu - 1 {
            for iv in 0..nv {
                let a = vid(iu, iv);
                let b = vid(iu + 1, iv);
                let c = vid(iu + 1, iv + 1);
                let d = vid(iu, iv + 1);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Ok(TriMesh { vertices, faces })
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_obj(path: &Path) -> Result<TriMesh> {
        let file = std::fs::File::open(path)?;
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut coords = [0.0f64; 3];
                    for c in coords.iter_mut() {
                        *c = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| Error::Parse(format!("obj line {}", lineno + 1)))?;
                    }
                    vertices.push(vec3(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let mut idx = [0u32; 3];
                    for v in idx.iter_mut() {
                        let tok = it
                            .next()
                            .ok_or_else(|| Error::Parse(format!("obj line {}", lineno + 1)))?;
                        let first = tok.split('/').next().unwrap_or(tok);
                        let one_based: u32 = first
                            .parse()
                            .map_err(|_| Error::Parse(format!("obj line {}", lineno + 1)))?;
                        *v = one_based
                            .checked_sub(1)
                            .ok_or_else(|| Error::Parse("obj index 0".into()))?;
                    }
                    faces.push(idx);
                }
                _ => {}
            }
        }
        Ok(TriMesh { vertices, faces })
    }

    /// Binary little-endian PLY with double-precision coordinates.
    pub fn write_ply(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(
            out,
            "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
             property double x\nproperty double y\nproperty double z\n\
             element face {}\nproperty list uchar uint vertex_indices\nend_header\n",
            self.vertices.len(),
            self.faces.len()
        )?;
        for v in &self.vertices {
            out.write_all(&v.x.to_le_bytes())?;
            out.write_all(&v.y.to_le_bytes())?;
            out.write_all(&v.z.to_le_bytes())?;
        }
        for f in &self.faces {
            out.write_all(&[3u8])?;
            for &i in f {
                out.write_all(&i.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_ply(path: &Path) -> Result<TriMesh> {
        let mut file = std::fs::File::open(path)?;
        let mut data = Vec::new();
        file.read_to_end(&mut data)?;
        let header_end = data
            .windows(11)
            .position(|w| w == b"end_header\n")
            .ok_or_else(|| Error::Parse("ply: no end_header".into()))?
            + 11;
        let header = std::str::from_utf8(&data[..header_end])
            .map_err(|_| Error::Parse("ply: bad header".into()))?;
        let mut nv = 0usize;
        let mut nf = 0usize;
        for line in header.lines() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() == 3 && toks[0] == "element" {
                let count = toks[2]
                    .parse()
                    .map_err(|_| Error::Parse("ply: bad element count".into()))?;
                match toks[1] {
                    "vertex" => nv = count,
                    "face" => nf = count,
                    _ => {}
                }
            }
        }
        let mut pos = header_end;
        let take_f64 = |data: &[u8], pos: &mut usize| -> Result<f64> {
            let b: [u8; 8] = data
                .get(*pos..*pos + 8)
                .and_then(|s| s.try_into().ok())
                .ok_or_else(|| Error::Parse("ply: truncated".into()))?;
            *pos += 8;
            Ok(f64::from_le_bytes(b))
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x = take_f64(&data, &mut pos)?;
            let y = take_f64(&data, &mut pos)?;
            let z = take_f64(&data, &mut pos)?;
            vertices.push(vec3(x, y, z));
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let cnt = *data
                .get(pos)
                .ok_or_else(|| Error::Parse("ply: truncated".into()))?;
            pos += 1;
            if cnt != 3 {
                return Err(Error::Parse("ply: non-triangle face".into()));
            }
            let mut f = [0u32; 3];
            for v in f.iter_mut() {
                let b: [u8; 4] = data
                    .get(pos..pos + 4)
                    .and_then(|s| s.try_into().ok())
                    .ok_or_else(|| Error::Parse("ply: truncated".into()))?;
                pos += 4;
                *v = u32::from_le_bytes(b);
            }
            faces.push(f);
        }
        Ok(TriMesh { vertices, faces })
    }

    /// Maximum number of faces sharing one undirected edge (2 = manifold).
    pub fn max_edge_valence(&self) -> usize {
        let mut edges: std::collections::HashMap<(u32, u32), usize> =
            std::collections::HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *edges.entry(key).or_insert(0) += 1;
            }
        }
        edges.values().copied().max().unwrap_or(0)
    }

    /// Pairs of intersecting non-adjacent triangles (adjacency = any shared
    /// vertex index). Returns at most `limit` pairs.
    pub fn self_intersections(&self, limit: usize) -> Vec<(u32, u32)> {
        let tree = AabbTree::build(self);
        let mut out = Vec::new();
        let mut candidates = Vec::new();
        for t in 0..self.faces.len() {
            candidates.clear();
            tree.query(self, t, &mut candidates);
            let f1 = self.faces[t];
            for &o in &candidates {
                if o <= t {
                    continue;
                }
                let f2 = self.faces[o];
                if f1.iter().any(|a| f2.contains(a)) {
                    continue;
                }
                let t1 = [
                    self.vertices[f1[0] as usize],
                    self.vertices[f1[1] as usize],
                    self.vertices[f1[2] as usize],
                ];
                let t2 = [
                    self.vertices[f2[0] as usize],
                    self.vertices[f2[1] as usize],
                    self.vertices[f2[2] as usize],
                ];
                if tri_tri_intersect(&t1, &t2) {
                    out.push((t as u32, o as u32));
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
        out
    }
}

// broad phase: flat AABB tree over triangle index ranges

struct AabbNode {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: (start, count) into `order`; internal: children at
    /// (2i+1, 2i+2)-style explicit indices.
    children: Option<(usize, usize)>,
    start: usize,
    count: usize,
}

pub struct AabbTree {
    nodes: Vec<AabbNode>,
    order: Vec<usize>,
}

const LEAF_SIZE: usize = 8;

impl AabbTree {
    pub fn build(mesh: &TriMesh) -> AabbTree {
        let n = mesh.faces.len();
        let boxes: Vec<(Vec3, Vec3, Vec3)> = mesh
            .faces
            .iter()
            .map(|f| {
                let a = mesh.vertices[f[0] as usize];
                let b = mesh.vertices[f[1] as usize];
                let c = mesh.vertices[f[2] as usize];
                let lo = a.min_coords(b).min_coords(c);
                let hi = a.max_coords(b).max_coords(c);
                (lo, hi, (lo + hi) * 0.5)
            })
            .collect();
        let mut tree = AabbTree {
            nodes: Vec::new(),
            order: (0..n).collect(),
        };
        if n > 0 {
            tree.build_node(&boxes, 0, n);
        }
        tree
    }

    fn build_node(&mut self, boxes: &[(Vec3, Vec3, Vec3)], start: usize, count: usize) -> usize {
        let mut lo = boxes[self.order[start]].0;
        let mut hi = boxes[self.order[start]].1;
        for &t in &self.order[start..start + count] {
            lo = lo.min_coords(boxes[t].0);
            hi = hi.max_coords(boxes[t].1);
        }
        let idx = self.nodes.len();
        self.nodes.push(AabbNode {
            lo,
            hi,
            children: None,
            start,
            count,
        });
        if count > LEAF_SIZE {
            let ext = hi - lo;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let key = |t: usize| boxes[t].2.as_array()[axis];
            self.order[start..start + count]
                .sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap());
            let half = count / 2;
            let left = self.build_node(boxes, start, half);
            let right = self.build_node(boxes, start + half, count - half);
            self.nodes[idx].children = Some((left, right));
        }
        idx
    }

    /// Indices of triangles whose AABB overlaps that of triangle `t`.
    pub fn query(&self, mesh: &TriMesh, t: usize, out: &mut Vec<usize>) {
        if self.nodes.is_empty() {
            return;
        }
        let f = mesh.faces[t];
        let a = mesh.vertices[f[0] as usize];
        let b = mesh.vertices[f[1] as usize];
        let c = mesh.vertices[f[2] as usize];
        let lo = a.min_coords(b).min_coords(c);
        let hi = a.max_coords(b).max_coords(c);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.lo.x > hi.x
                || node.lo.y > hi.y
                || node.lo.z > hi.z
                || node.hi.x < lo.x
                || node.hi.y < lo.y
                || node.hi.z < lo.z
            {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => out.extend_from_slice(&self.order[node.start..node.start + node.count]),
            }
        }
    }
}

// narrow phase: exact-orientation triangle-triangle test

fn orient(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    robust::orient3d(
        robust::Coord3D {
            x: a.x,
            y: a.y,
            z: a.z,
        },
        robust::Coord3D {
            x: b.x,
            y: b.y,
            z: b.z,
        },
        robust::Coord3D {
            x: c.x,
            y: c.y,
            z: c.z,
        },
        robust::Coord3D {
            x: d.x,
            y: d.y,
            z: d.z,
        },
    )
}

/// Segment (a,b) against triangle (p,q,r), general position: the segment
/// endpoints straddle the plane and (a,b) passes inside the three edge
/// planes.
fn segment_crosses_triangle(a: Vec3, b: Vec3, p: Vec3, q: Vec3, r: Vec3) -> bool {
    let sa = orient(p, q, r, a);
    let sb = orient(p, q, r, b);
    if sa * sb > 0.0 || (sa == 0.0 && sb == 0.0) {
        // same strict side, or coplanar (handled by the caller's 2-D test)
        return false;
    }
    let s1 = orient(a, b, p, q);
    let s2 = orient(a, b, q, r);
    let s3 = orient(a, b, r, p);
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

fn coplanar_overlap(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    // project onto the dominant axis of the common plane normal
    let n = (t1[1] - t1[0]).cross(t1[2] - t1[0]);
    let (ax, ay) = if n.x.abs() >= n.y.abs() && n.x.abs() >= n.z.abs() {
        (1, 2)
    } else if n.y.abs() >= n.z.abs() {
        (0, 2)
    } else {
        (0, 1)
    };
    let p2 = |v: Vec3| {
        let a = v.as_array();
        robust::Coord {
            x: a[ax],
            y: a[ay],
        }
    };
    let o2 = |a: Vec3, b: Vec3, c: Vec3| robust::orient2d(p2(a), p2(b), p2(c));
    let seg_seg = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| {
        let d1 = o2(c, d, a);
        let d2 = o2(c, d, b);
        let d3 = o2(a, b, c);
        let d4 = o2(a, b, d);
        d1 * d2 < 0.0 && d3 * d4 < 0.0
    };
    for i in 0..3 {
        for j in 0..3 {
            if seg_seg(t1[i], t1[(i + 1) % 3], t2[j], t2[(j + 1) % 3]) {
                return true;
            }
        }
    }
    let inside = |t: &[Vec3; 3], v: Vec3| {
        let d1 = o2(t[0], t[1], v);
        let d2 = o2(t[1], t[2], v);
        let d3 = o2(t[2], t[0], v);
        (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) || (d1 < 0.0 && d2 < 0.0 && d3 < 0.0)
    };
    inside(t1, t2[0]) || inside(t2, t1[0])
}

pub fn tri_tri_intersect(t1: &[Vec3; 3], t2: &[Vec3; 3]) -> bool {
    let d: Vec<f64> = t2.iter().map(|&v| orient(t1[0], t1[1], t1[2], v)).collect();
    if d.iter().all(|&s| s > 0.0) || d.iter().all(|&s| s < 0.0) {
        return false;
    }
    if d.iter().all(|&s| s == 0.0) {
        return coplanar_overlap(t1, t2);
    }
    let e: Vec<f64> = t1.iter().map(|&v| orient(t2[0], t2[1], t2[2], v)).collect();
    if e.iter().all(|&s| s > 0.0) || e.iter().all(|&s| s < 0.0) {
        return false;
    }
    for i in 0..3 {
        let (a, b) = (t1[i], t1[(i + 1) % 3]);
        if segment_crosses_triangle(a, b, t2[0], t2[1], t2[2]) {
            return true;
        }
        let (a, b) = (t2[i], t2[(i + 1) % 3]);
        if segment_crosses_triangle(a, b, t1[0], t1[1], t1[2]) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Vec3; 3] {
        [
            Vec3::from_array(a),
            Vec3::from_array(b),
            Vec3::from_array(c),
        ]
    }

    #[test]
    fn tri_tri_basic_cases() {
        let base = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        // pierces through the interior
        let cross = tri([0.2, 0.2, -0.5], [0.3, 0.2, 0.5], [0.2, 0.3, 0.5]);
        assert!(tri_tri_intersect(&base, &cross));
        // clearly above
        let above = tri([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        assert!(!tri_tri_intersect(&base, &above));
        // crossing planes but far apart in-plane
        let aside = tri([5.0, 5.0, -1.0], [6.0, 5.0, 1.0], [5.0, 6.0, 1.0]);
        assert!(!tri_tri_intersect(&base, &aside));
        // coplanar overlapping
        let cop = tri([0.1, 0.1, 0.0], [0.9, 0.1, 0.0], [0.1, 0.9, 0.0]);
        assert!(tri_tri_intersect(&base, &cop));
        // coplanar disjoint
        let cop2 = tri([2.0, 2.0, 0.0], [3.0, 2.0, 0.0], [2.0, 3.0, 0.0]);
        assert!(!tri_tri_intersect(&base, &cop2));
    }

    #[test]
    fn torus_mesh_no_self_intersections() {
        // embedded torus of revolution
        let (nu, nv) = (24, 48);
        let mut vertices = Vec::new();
        for iu in 0..nu {
            let a = 2.0 * std::f64::consts::PI * iu as f64 / nu as f64;
            for iv in 0..nv {
                let b = 2.0 * std::f64::consts::PI * iv as f64 / nv as f64;
                let r = 2.0 + 0.5 * a.cos();
                vertices.push(vec3(r * b.cos(), r * b.sin(), 0.5 * a.sin()));
            }
        }
        let mut faces = Vec::new();
        for iu in 0..nu {
            for iv in 0..nv {
                let id = |u: usize, v: usize| ((u % nu) * nv + v % nv) as u32;
                faces.push([id(iu, iv), id(iu + 1, iv), id(iu + 1, iv + 1)]);
                faces.push([id(iu, iv), id(iu + 1, iv + 1), id(iu, iv + 1)]);
            }
        }
        let mesh = TriMesh { vertices, faces };
        assert_eq!(mesh.max_edge_valence(), 2);
        assert!(mesh.self_intersections(10).is_empty());
    }

    #[test]
    fn pinched_mesh_reports_intersections() {
        // figure-eight cross-section: the tube passes through itself
        let (nu, nv) = (16, 64);
        let mut vertices = Vec::new();
        for iu in 0..nu {
            let a = 2.0 * std::f64::consts::PI * iu as f64 / nu as f64;
            for iv in 0..nv {
                let b = 2.0 * std::f64::consts::PI * iv as f64 / nv as f64;
                // lemniscate-like path in the xz-plane swept in y
                let cx = b.sin();
                let cz = 0.5 * (2.0 * b).sin();
                vertices.push(vec3(
                    cx + 0.1 * a.cos(),
                    0.1 * a.sin(),
                    cz + 0.1 * a.cos() * 0.3,
                ));
            }
        }
        let mut faces = Vec::new();
        for iu in 0..nu {
            for iv in 0..nv {
                let id = |u: usize, v: usize| ((u % nu) * nv + v % nv) as u32;
                faces.push([id(iu, iv), id(iu + 1, iv), id(iu + 1, iv + 1)]);
                faces.push([id(iu, iv), id(iu + 1, iv + 1), id(iu, iv + 1)]);
            }
        }
        let mesh = TriMesh { vertices, faces };
        assert!(!mesh.self_intersections(10).is_empty());
    }

    #[test]
    fn obj_round_trip() {
        let mesh = TriMesh {
            vertices: vec![
                vec3(0.0, 0.0, 0.0),
                vec3(1.0, 0.125, -3.5e-7),
                vec3(0.1, 0.2, 0.30000000000000004),
            ],
            faces: vec![[0, 1, 2]],
        };
        let dir = std::env::temp_dir().join("cmcaf_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.obj");
        mesh.write_obj(&p).unwrap();
        let back = TriMesh::read_obj(&p).unwrap();
        assert_eq!(back.faces, mesh.faces);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert_eq!(a.as_array(), b.as_array());
        }
    }

    #[test]
    fn ply_round_trip() {
        let mesh = TriMesh {
            vertices: vec![
                vec3(0.0, -1.0, 2.0),
                vec3(1.0e-12, 0.125, 3.5),
                vec3(0.1, 0.2, 0.3),
            ],
            faces: vec![[0, 1, 2], [2, 1, 0]],
        };
        let dir = std::env::temp_dir().join("cmcaf_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("t.ply");
        mesh.write_ply(&p).unwrap();
        let back = TriMesh::read_ply(&p).unwrap();
        assert_eq!(back.faces, mesh.faces);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            assert_eq!(a.as_array(), b.as_array());
        }
    }
}
