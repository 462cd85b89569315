//! Nodal scalar fields and the L^p functionals used by the descent solvers.
//!
//! Integrals are evaluated by edge-midpoint quadrature, which is exact for
//! quadratic integrands on each triangle. At p = 2 the discrete norms
//! therefore agree exactly with the consistent-mass inner product, so the
//! Rayleigh descent and the matrix-pencil eigensolve minimize the same
//! discrete object.

use std::io::{BufRead, Write};

use crate::assembly::TriGeom;
use crate::error::FemError;
use crate::mesh::TriMesh;

/// One real value per mesh vertex (P1 nodal coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Wraps nodal values after checking they match the mesh.
    pub fn for_mesh(mesh: &TriMesh, values: Vec<f64>) -> Result<ScalarField, FemError> {
        if values.len() != mesh.n_vertices() {
            return Err(FemError::Mesh(format!(
                "field has {} values for a mesh with {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(FemError::Mesh(format!("field contains a non-finite value {v}")));
        }
        Ok(ScalarField { values })
    }

    pub fn constant(mesh: &TriMesh, value: f64) -> ScalarField {
        ScalarField { values: vec![value; mesh.n_vertices()] }
    }

    /// One value per line, vertex order, shortest round-trip decimals.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<(), FemError> {
        for v in &self.values {
            writeln!(w, "{v}").map_err(|e| FemError::Mesh(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Vec<f64>, FemError> {
        let mut values = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line.map_err(|e| FemError::Mesh(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| FemError::Mesh(format!("field line {}: bad number {t:?}", idx + 1)))?;
            values.push(v);
        }
        Ok(values)
    }
}

/// Quadrature weights, one per triangle edge midpoint (3 per triangle, in
/// triangle order). Depends only on the geometry, so solvers compute it once.
pub(crate) fn midpoint_weights(geoms: &[TriGeom]) -> Vec<f64> {
    let mut w = Vec::with_capacity(3 * geoms.len());
    for g in geoms {
        let wt = g.area / 3.0;
        w.extend_from_slice(&[wt, wt, wt]);
    }
    w
}

/// Field values at the same midpoints, overwriting `out`.
pub(crate) fn midpoint_values(mesh: &TriMesh, u: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.reserve(3 * mesh.triangles.len());
    for tri in &mesh.triangles {
        for l in 0..3 {
            out.push(0.5 * (u[tri[l]] + u[tri[(l + 1) % 3]]));
        }
    }
}

/// Σ w |v − c|^p over the midpoint samples.
pub(crate) fn offset_p_norm(values: &[f64], weights: &[f64], c: f64, p: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - c).abs().powf(p))
        .sum()
}

/// Gradient of `offset_p_norm` with respect to the nodal values, holding c
/// fixed, accumulated into `out` (zeroed first).
pub(crate) fn offset_p_grad(
    mesh: &TriMesh,
    values: &[f64],
    weights: &[f64],
    c: f64,
    p: f64,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for l in 0..3 {
            let s = 3 * t + l;
            let m = values[s] - c;
            if m == 0.0 {
                continue;
            }
            let g = 0.5 * weights[s] * p * m.abs().powf(p - 2.0) * m;
            out[tri[l]] += g;
            out[tri[(l + 1) % 3]] += g;
        }
    }
}

/// The unique c minimizing Σ w |v − c|^p for p > 1: safeguarded Newton on
/// the strictly decreasing derivative, bracketed by the sample range.
pub fn weighted_p_center(values: &[f64], weights: &[f64], p: f64, hint: Option<f64>) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        return if lo.is_finite() { lo } else { 0.0 };
    }
    let eval = |c: f64| {
        let mut g = 0.0;
        let mut dg = 0.0;
        for (&v, &w) in values.iter().zip(weights) {
            let r = v - c;
            let a = r.abs();
            if a > 0.0 {
                g += w * a.powf(p - 1.0) * r.signum();
                dg += w * a.powf(p - 2.0);
            }
        }
        (g, -(p - 1.0) * dg)
    };
    let mut c = match hint {
        Some(h) if h > lo && h < hi => h,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let (g, dg) = eval(c);
        if g == 0.0 {
            return c;
        }
        // The derivative is decreasing, so a positive value means the root
        // lies to the right.
        if g > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let newton = c - g / dg;
        c = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    0.5 * (lo + hi)
}

fn check_field(mesh: &TriMesh, field: &ScalarField, p: f64) -> Result<(), FemError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(FemError::Unsupported(format!("exponent p must be > 1, got {p}")));
    }
    if field.values.len() != mesh.n_vertices() {
        return Err(FemError::Mesh(format!(
            "field has {} values for a mesh with {} vertices",
            field.values.len(),
            mesh.n_vertices()
        )));
    }
    Ok(())
}

/// The constant c minimizing ∫ |f − c|^p over the meshed domain.
pub fn p_mean(field: &ScalarField, mesh: &TriMesh, p: f64) -> Result<f64, FemError> {
    check_field(mesh, field, p)?;
    let geoms = crate::assembly::tri_geoms(mesh);
    let weights = midpoint_weights(&geoms);
    let mut values = Vec::new();
    midpoint_values(mesh, &field.values, &mut values);
    Ok(weighted_p_center(&values, &weights, p, None))
}

/// ‖f‖_{L^p} = (∫ |f|^p)^{1/p} by the same quadrature.
pub fn lp_norm(field: &ScalarField, mesh: &TriMesh, p: f64) -> Result<f64, FemError> {
    check_field(mesh, field, p)?;
    let geoms = crate::assembly::tri_geoms(mesh);
    let weights = midpoint_weights(&geoms);
    let mut values = Vec::new();
    midpoint_values(mesh, &field.values, &mut values);
    Ok(offset_p_norm(&values, &weights, 0.0, p).powf(1.0 / p))
}
