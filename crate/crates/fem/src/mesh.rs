//! Graded 2-D triangulations of the validation domains.
//!
//! Generators cover the cusp domain {0 < y < 1, 0 < x < y^gamma} (gamma = 1
//! is the Lipschitz reference wedge), the unit square, axis-aligned
//! rectangles, the unit disc, and annuli. Every generator emits
//! counterclockwise triangles, conforming strips, and coarse boundary labels,
//! and `TriMesh::audit` re-checks all of that after the fact.
//!
//! Cusp meshes are built from horizontal rows: uniform spacing `h` while the
//! domain is at least one cell wide, then geometrically shrinking rows toward
//! the tip. The tip itself is truncated at `y_min` (at most h^2) instead of
//! emitting sliver triangles of vanishing area; the truncation height and the
//! grading parameters are recorded on the mesh. Inside the graded band the
//! domain is narrower than one cell, so triangles there are deliberately
//! anisotropic (long in y) and exempt from the min-angle audit.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::FemError;

/// Quality floor enforced outside the graded band near a cusp tip.
pub const MIN_ANGLE_DEG: f64 = 15.0;

/// Hard floor for the tip truncation height, protecting against triangle
/// areas anywhere near the denormal range even for extreme exponents.
const MIN_TIP_HEIGHT: f64 = 1e-8;

/// Coarse label for a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Left,
    Right,
    Top,
    Bottom,
    /// The curved side x = y^gamma of a cusp domain.
    Curve,
    /// Inner circle of an annulus.
    Inner,
    /// Outer circle of a disc or annulus.
    Outer,
    /// Assigned when a mesh is read back from text (the format carries no
    /// labels).
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Vertex pair, directed so the domain lies on its left.
    pub verts: [usize; 2],
    pub tag: BoundaryTag,
}

/// Grading metadata for meshes with a refined band near the cusp tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradingInfo {
    /// Geometric row-height ratio inside the graded band.
    pub ratio: f64,
    /// Number of graded rows actually emitted.
    pub levels: usize,
    /// Truncation height of the cusp tip (0 when nothing was truncated).
    pub y_min: f64,
    /// Rows below this height belong to the graded band.
    pub graded_below: f64,
}

impl GradingInfo {
    pub fn none() -> Self {
        GradingInfo { ratio: 1.0, levels: 0, y_min: 0.0, graded_below: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_tags: Vec<BoundaryEdge>,
    pub grading: GradingInfo,
}

/// Findings of a successful `TriMesh::audit`.
#[derive(Debug, Clone, Copy)]
pub struct MeshAudit {
    /// Worst corner angle outside the graded band, in degrees.
    pub min_angle_deg: f64,
    /// Worst corner angle inside the graded band (informational).
    pub min_angle_graded_deg: f64,
    pub boundary_edge_count: usize,
}

fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn tri_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        0.5 * signed_area2(self.vertices[i], self.vertices[j], self.vertices[k])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.tri_area(t)).sum()
    }

    /// Full structural check: index validity, strictly positive orientation,
    /// conforming edges (each undirected edge in at most two triangles, each
    /// directed edge in at most one), agreement between the stored boundary
    /// labels and the actual hull, and the min-angle floor outside the
    /// graded band.
    pub fn audit(&self) -> Result<MeshAudit, FemError> {
        let audit = self.audit_structure()?;
        if audit.min_angle_deg < MIN_ANGLE_DEG - 1e-9 {
            return Err(FemError::Mesh(format!(
                "min angle {:.2} deg below {MIN_ANGLE_DEG} outside the graded band",
                audit.min_angle_deg
            )));
        }
        Ok(audit)
    }

    /// The structural half of `audit`: every check except the min-angle
    /// floor. Meshes read back from text lose their grading metadata, so
    /// re-imports are validated with this weaker form.
    pub fn audit_structure(&self) -> Result<MeshAudit, FemError> {
        let nv = self.vertices.len();
        if nv < 3 || self.triangles.is_empty() {
            return Err(FemError::Mesh("mesh has no triangles".into()));
        }
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        let mut min_angle = f64::INFINITY;
        let mut min_angle_graded = f64::INFINITY;
        for (t, tri) in self.triangles.iter().enumerate() {
            let [i, j, k] = *tri;
            if i >= nv || j >= nv || k >= nv {
                return Err(FemError::Mesh(format!("triangle {t} references a missing vertex")));
            }
            if i == j || j == k || k == i {
                return Err(FemError::Mesh(format!("triangle {t} repeats a vertex")));
            }
            let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
            if signed_area2(a, b, c) <= 0.0 {
                return Err(FemError::Mesh(format!(
                    "triangle {t} is degenerate or clockwise (signed area {})",
                    0.5 * signed_area2(a, b, c)
                )));
            }
            for (u, v) in [(i, j), (j, k), (k, i)] {
                let key = (u.min(v), u.max(v));
                let slot = edges.entry(key).or_insert(0);
                // Bit 0 marks the (min->max) direction, bit 1 the reverse;
                // seeing a direction twice means a duplicated or flipped
                // neighbor.
                let bit = if u < v { 1 } else { 2 };
                if *slot & bit != 0 {
                    return Err(FemError::Mesh(format!(
                        "edge ({u}, {v}) appears twice with the same orientation"
                    )));
                }
                *slot |= bit;
            }
            let exempt = self.grading.levels > 0
                && a[1].max(b[1]).max(c[1]) <= self.grading.graded_below + 1e-12;
            let worst = tri_min_angle_deg(a, b, c);
            if exempt {
                min_angle_graded = min_angle_graded.min(worst);
            } else {
                min_angle = min_angle.min(worst);
            }
        }
        let boundary_edge_count = edges.values().filter(|&&m| m == 1 || m == 2).count();
        if !self.boundary_tags.is_empty() && self.boundary_tags.len() != boundary_edge_count {
            return Err(FemError::Mesh(format!(
                "{} boundary labels for {} hull edges",
                self.boundary_tags.len(),
                boundary_edge_count
            )));
        }
        Ok(MeshAudit { min_angle_deg: min_angle, min_angle_graded_deg: min_angle_graded, boundary_edge_count })
    }

    /// Plain-text export: `n_vertices n_triangles`, vertex lines `x y`,
    /// triangle lines `i j k` (0-based). Coordinates use the shortest
    /// round-trip decimal form, so a read-back is bit exact.
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Reads the plain-text format back. Boundary labels and grading
    /// metadata are not part of the format; edges are relabeled
    /// `Unlabeled` and the grading is reset.
    pub fn read_text<R: BufRead>(r: R) -> Result<TriMesh, FemError> {
        let bad = |line: usize, what: &str| FemError::Mesh(format!("mesh text line {line}: {what}"));
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let header = header.map_err(|e| bad(1, &e.to_string()))?;
        let mut it = header.split_whitespace();
        let nv: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(1, "expected `n_vertices n_triangles`"))?;
        let nt: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(1, "expected `n_vertices n_triangles`"))?;
        let mut vertices = Vec::with_capacity(nv);
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nv {
            let (idx, line) = lines.next().ok_or_else(|| bad(nv + 1, "vertex list truncated"))?;
            let line = line.map_err(|e| bad(idx + 1, &e.to_string()))?;
            let mut it = line.split_whitespace().map(|s| s.parse::<f64>());
            match (it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y))) => vertices.push([x, y]),
                _ => return Err(bad(idx + 1, "expected `x y`")),
            }
        }
        for _ in 0..nt {
            let (idx, line) =
                lines.next().ok_or_else(|| bad(nv + nt + 1, "triangle list truncated"))?;
            let line = line.map_err(|e| bad(idx + 1, &e.to_string()))?;
            let mut it = line.split_whitespace().map(|s| s.parse::<usize>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), Some(Ok(k))) => triangles.push([i, j, k]),
                _ => return Err(bad(idx + 1, "expected `i j k`")),
            }
        }
        let mesh = finish(vertices, triangles, GradingInfo::none(), |_, _| BoundaryTag::Unlabeled)?;
        mesh.audit_structure()?;
        Ok(mesh)
    }
}

fn tri_min_angle_deg(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let mut worst = f64::INFINITY;
    for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
        let u = [q[0] - p[0], q[1] - p[1]];
        let v = [r[0] - p[0], r[1] - p[1]];
        let nu = u[0].hypot(u[1]);
        let nv = v[0].hypot(v[1]);
        if nu == 0.0 || nv == 0.0 {
            return 0.0;
        }
        let cos = ((u[0] * v[0] + u[1] * v[1]) / (nu * nv)).clamp(-1.0, 1.0);
        worst = worst.min(cos.acos().to_degrees());
    }
    worst
}

/// Collects hull edges (used by exactly one triangle), directed as they
/// appear in their triangle, sorted for reproducibility.
fn hull_edges(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut edges: HashMap<(usize, usize), (u32, [usize; 2])> = HashMap::new();
    for tri in triangles {
        let [i, j, k] = *tri;
        for (u, v) in [(i, j), (j, k), (k, i)] {
            let e = edges.entry((u.min(v), u.max(v))).or_insert((0, [u, v]));
            e.0 += 1;
        }
    }
    let mut hull: Vec<[usize; 2]> =
        edges.into_values().filter(|(c, _)| *c == 1).map(|(_, d)| d).collect();
    hull.sort_unstable();
    hull
}

fn finish(
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    grading: GradingInfo,
    mut tag: impl FnMut([f64; 2], [f64; 2]) -> BoundaryTag,
) -> Result<TriMesh, FemError> {
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= vertices.len() {
                return Err(FemError::Mesh(format!("triangle {t} references a missing vertex")));
            }
        }
    }
    let boundary_tags = hull_edges(&triangles)
        .into_iter()
        .map(|[u, v]| BoundaryEdge { verts: [u, v], tag: tag(vertices[u], vertices[v]) })
        .collect();
    Ok(TriMesh { vertices, triangles, boundary_tags, grading })
}

/// Triangulates the strip between two x-monotone horizontal vertex rows by a
/// left-to-right sweep: always advance the cursor whose next vertex is
/// further left. Columns that happen to align vertically get paired in
/// lockstep, so a row-length mismatch is absorbed where the rows actually
/// diverge (at the slanted end) rather than smeared into sheared cells.
fn stitch_rows(
    triangles: &mut Vec<[usize; 3]>,
    vertices: &[[f64; 2]],
    top: &[usize],
    bot: &[usize],
) {
    let (mut i, mut j) = (0usize, 0usize);
    while i + 1 < top.len() || j + 1 < bot.len() {
        let take_top = if i + 1 >= top.len() {
            false
        } else if j + 1 >= bot.len() {
            true
        } else {
            vertices[top[i + 1]][0] <= vertices[bot[j + 1]][0]
        };
        if take_top {
            triangles.push([top[i + 1], top[i], bot[j]]);
            i += 1;
        } else {
            triangles.push([bot[j], bot[j + 1], top[i]]);
            j += 1;
        }
    }
}

/// Graded triangulation of the cusp domain {0 < y < 1, 0 < x < y^gamma1}.
///
/// Row heights track the boundary slope: a strip descends by
/// h / max(1, d(y^gamma1)/dy), so the curved side recedes by at most one cell
/// width per strip and the hull-adjacent angles stay near atan(1 / gamma1).
/// Once the domain is narrower than one cell the rows shrink geometrically
/// (ratio 1/2) for up to `grading_levels` rows. The tip is truncated at the
/// last graded row, never lower than h^2, and the truncation height is
/// recorded in `grading.y_min`. With gamma1 = 1 this builds the Lipschitz
/// reference wedge below the diagonal.
pub fn mesh_cusp_2d(gamma1: f64, h: f64, grading_levels: usize) -> Result<TriMesh, FemError> {
    if !gamma1.is_finite() || gamma1 < 1.0 {
        return Err(FemError::Mesh(format!("cusp exponent must be >= 1, got {gamma1}")));
    }
    check_h(h)?;
    let width = |y: f64| y.powf(gamma1);
    let slope = |y: f64| gamma1 * y.powf(gamma1 - 1.0);

    // Row heights, top (y = 1) first: slope-graded steps down to the height
    // where the domain is one cell wide, geometric steps below.
    let y_switch = h.powf(1.0 / gamma1).min(1.0);
    let mut ys = vec![1.0];
    loop {
        let y = *ys.last().unwrap();
        if y <= y_switch {
            break;
        }
        let step = (h / slope(y).max(1.0)).max(h / 64.0);
        let next = if y - 1.5 * step <= y_switch { y_switch } else { y - step };
        ys.push(next);
    }
    let ratio = 0.5_f64;
    let floor = (h * h).max(MIN_TIP_HEIGHT);
    let mut levels = 0usize;
    while levels < grading_levels {
        let next = ys.last().unwrap() * ratio;
        if next < floor {
            break;
        }
        ys.push(next);
        levels += 1;
    }
    let y_min = *ys.last().unwrap();

    let mut vertices = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(ys.len());
    for &y in &ys {
        let w = width(y);
        let m = ((w / h).round() as usize).max(1);
        let mut row = Vec::with_capacity(m + 1);
        for i in 0..=m {
            row.push(vertices.len());
            vertices.push([w * (i as f64 / m as f64), y]);
        }
        rows.push(row);
    }
    let mut triangles = Vec::new();
    for pair in rows.windows(2) {
        stitch_rows(&mut triangles, &vertices, &pair[0], &pair[1]);
    }

    let grading = GradingInfo { ratio, levels, y_min, graded_below: y_switch };
    finish(vertices, triangles, grading, |a, b| {
        if a[0] == 0.0 && b[0] == 0.0 {
            BoundaryTag::Left
        } else if a[1] == 1.0 && b[1] == 1.0 {
            BoundaryTag::Top
        } else if a[1] == y_min && b[1] == y_min {
            BoundaryTag::Bottom
        } else {
            BoundaryTag::Curve
        }
    })
}

fn check_h(h: f64) -> Result<(), FemError> {
    if !(h > 0.0 && h < 0.5) {
        return Err(FemError::Mesh(format!("mesh size h must lie in (0, 0.5), got {h}")));
    }
    Ok(())
}

/// Uniform triangulation of the axis-aligned rectangle [0, w] x [0, d].
pub fn mesh_rect(w: f64, d: f64, h: f64) -> Result<TriMesh, FemError> {
    if !(w > 0.0 && d > 0.0) || !w.is_finite() || !d.is_finite() {
        return Err(FemError::Mesh(format!("rectangle sides must be positive, got {w} x {d}")));
    }
    check_h(h)?;
    let mx = ((w / h).ceil() as usize).max(1);
    let my = ((d / h).ceil() as usize).max(1);
    let mut vertices = Vec::with_capacity((mx + 1) * (my + 1));
    for j in 0..=my {
        for i in 0..=mx {
            vertices.push([w * (i as f64 / mx as f64), d * (j as f64 / my as f64)]);
        }
    }
    let at = |i: usize, j: usize| j * (mx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * mx * my);
    for j in 0..my {
        for i in 0..mx {
            let (v00, v10, v01, v11) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    finish(vertices, triangles, GradingInfo::none(), |a, b| {
        if a[1] == 0.0 && b[1] == 0.0 {
            BoundaryTag::Bottom
        } else if a[1] == d && b[1] == d {
            BoundaryTag::Top
        } else if a[0] == 0.0 && b[0] == 0.0 {
            BoundaryTag::Left
        } else {
            BoundaryTag::Right
        }
    })
}

/// Uniform triangulation of the unit square.
pub fn mesh_square(h: f64) -> Result<TriMesh, FemError> {
    mesh_rect(1.0, 1.0, h)
}

/// Triangulates the annular strip between two concentric vertex rings by
/// merging them in angular order (fractions compared exactly as integer
/// cross-products). `inner` may be a single hub vertex, which produces the
/// center fan of a disc.
fn stitch_rings(triangles: &mut Vec<[usize; 3]>, inner: &[usize], outer: &[usize]) {
    let (ma, mb) = (inner.len(), outer.len());
    if ma == 1 {
        for j in 0..mb {
            triangles.push([outer[j], outer[(j + 1) % mb], inner[0]]);
        }
        return;
    }
    let (mut i, mut j) = (0usize, 0usize);
    while i < ma || j < mb {
        let take_outer = if j == mb {
            false
        } else if i == ma {
            true
        } else {
            (j + 1) * ma <= (i + 1) * mb
        };
        if take_outer {
            triangles.push([outer[j % mb], outer[(j + 1) % mb], inner[i % ma]]);
            j += 1;
        } else {
            triangles.push([inner[(i + 1) % ma], inner[i % ma], outer[j % mb]]);
            i += 1;
        }
    }
}

fn ring_vertices(vertices: &mut Vec<[f64; 2]>, radius: f64, count: usize) -> Vec<usize> {
    let mut ring = Vec::with_capacity(count);
    for k in 0..count {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (count as f64);
        ring.push(vertices.len());
        vertices.push([radius * theta.cos(), radius * theta.sin()]);
    }
    ring
}

/// Polar triangulation of the unit disc. The boundary polygon has exactly
/// ceil(2 pi / h) vertices; interior rings are spaced `h` apart with
/// proportionally fewer vertices.
pub fn mesh_disc(h: f64) -> Result<TriMesh, FemError> {
    check_h(h)?;
    let rings = ((1.0 / h).ceil() as usize).max(2);
    let boundary_count = (2.0 * std::f64::consts::PI / h).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..=rings {
        let r = j as f64 / rings as f64;
        let count = if j == rings {
            boundary_count
        } else {
            ((boundary_count as f64 * r).ceil() as usize).max(6)
        };
        let ring = ring_vertices(&mut vertices, r, count);
        ring_ids.push(ring);
    }
    let mut triangles = Vec::new();
    for pair in ring_ids.windows(2) {
        stitch_rings(&mut triangles, &pair[0], &pair[1]);
    }
    finish(vertices, triangles, GradingInfo::none(), |_, _| BoundaryTag::Outer)
}

/// Polar triangulation of the annulus r_inner <= |x| <= r_outer.
pub fn mesh_annulus(r_inner: f64, r_outer: f64, h: f64) -> Result<TriMesh, FemError> {
    if !(r_inner > 0.0 && r_outer > r_inner) {
        return Err(FemError::Mesh(format!(
            "annulus radii must satisfy 0 < inner < outer, got {r_inner}, {r_outer}"
        )));
    }
    check_h(h)?;
    let rings = (((r_outer - r_inner) / h).ceil() as usize).max(1);
    let mut vertices = Vec::new();
    let mut ring_ids: Vec<Vec<usize>> = Vec::with_capacity(rings + 1);
    for j in 0..=rings {
        let r = r_inner + (r_outer - r_inner) * (j as f64 / rings as f64);
        let count = ((2.0 * std::f64::consts::PI * r / h).ceil() as usize).max(8);
        ring_ids.push(ring_vertices(&mut vertices, r, count));
    }
    let mut triangles = Vec::new();
    for pair in ring_ids.windows(2) {
        stitch_rings(&mut triangles, &pair[0], &pair[1]);
    }
    let (lo, hi) = (r_inner * 1.000001, r_outer * 0.999999);
    finish(vertices, triangles, GradingInfo::none(), |a, b| {
        if a[0].hypot(a[1]) < lo && b[0].hypot(b[1]) < lo {
            BoundaryTag::Inner
        } else if a[0].hypot(a[1]) > hi && b[0].hypot(b[1]) > hi {
            BoundaryTag::Outer
        } else {
            BoundaryTag::Unlabeled
        }
    })
}
