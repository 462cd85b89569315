//! Variational p-capacity of condensers: nodal values pinned to 0 and 1 on
//! the plates, `∫|∇u|^p` minimized over the free vertices. p = 2 reduces to
//! one linear solve; other p run a damped Newton iteration warm-started from
//! the harmonic solution. Includes the quasiconformal transfer check that
//! compares pullback and original capacities against the analytic
//! distortion bound.

use nb_core::{CuspMap, CuspProfile, NbError};

use crate::assembly::{
    assemble_p1, p_dirichlet_energy, p_dirichlet_grad, tri_geoms, vertex_adjacency, Csr,
};
use crate::error::FemError;
use crate::fields::ScalarField;
use crate::mesh::{mesh_cusp_2d, TriMesh};
use crate::solver::{dot, pcg};

const GRAD_TOL: f64 = 1e-8;
const MAX_NEWTON_ITERS: usize = 200;
/// Relative mesh tolerance granted on top of the analytic distortion bound.
pub const TRANSFER_MESH_TOL: f64 = 0.02;

/// One closed region of a condenser plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plate {
    Disc { center: [f64; 2], radius: f64 },
    Rect { corner0: [f64; 2], corner1: [f64; 2] },
    Ring { center: [f64; 2], inner: f64, outer: f64 },
}

impl Plate {
    pub fn contains(&self, pt: [f64; 2]) -> bool {
        match *self {
            Plate::Disc { center, radius } => {
                (pt[0] - center[0]).hypot(pt[1] - center[1]) <= radius
            }
            Plate::Rect { corner0, corner1 } => {
                let (x0, x1) = (corner0[0].min(corner1[0]), corner0[0].max(corner1[0]));
                let (y0, y1) = (corner0[1].min(corner1[1]), corner0[1].max(corner1[1]));
                pt[0] >= x0 && pt[0] <= x1 && pt[1] >= y0 && pt[1] <= y1
            }
            Plate::Ring { center, inner, outer } => {
                let r = (pt[0] - center[0]).hypot(pt[1] - center[1]);
                r >= inner && r <= outer
            }
        }
    }
}

/// The two plates, each a union of closed regions.
#[derive(Debug, Clone, PartialEq)]
pub struct CondenserSpec {
    pub plate0: Vec<Plate>,
    pub plate1: Vec<Plate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Free,
    Plate0,
    Plate1,
}

impl CondenserSpec {
    fn classify(&self, mesh: &TriMesh) -> Result<Vec<Role>, FemError> {
        let roles: Vec<Role> = mesh
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let in0 = self.plate0.iter().any(|p| p.contains(v));
                let in1 = self.plate1.iter().any(|p| p.contains(v));
                match (in0, in1) {
                    (true, true) => Err(FemError::Condenser(format!(
                        "plates overlap at vertex {i} ({}, {})",
                        v[0], v[1]
                    ))),
                    (true, false) => Ok(Role::Plate0),
                    (false, true) => Ok(Role::Plate1),
                    (false, false) => Ok(Role::Free),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(roles)
    }
}

fn check_roles(mesh: &TriMesh, roles: &[Role]) -> Result<(usize, usize), FemError> {
    let n0 = roles.iter().filter(|r| **r == Role::Plate0).count();
    let n1 = roles.iter().filter(|r| **r == Role::Plate1).count();
    if n0 == 0 || n1 == 0 {
        return Err(FemError::Condenser(format!(
            "each plate must cover at least one vertex (plate0: {n0}, plate1: {n1})"
        )));
    }
    // Every connected component that touches a plate must touch both,
    // otherwise the variational problem degenerates there.
    let adj = vertex_adjacency(mesh);
    let mut component = vec![usize::MAX; roles.len()];
    let mut n_comp = 0;
    for start in 0..roles.len() {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = n_comp;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if component[w] == usize::MAX {
                    component[w] = n_comp;
                    stack.push(w);
                }
            }
        }
        n_comp += 1;
    }
    let mut has = vec![(false, false); n_comp];
    for (v, role) in roles.iter().enumerate() {
        match role {
            Role::Plate0 => has[component[v]].0 = true,
            Role::Plate1 => has[component[v]].1 = true,
            Role::Free => {}
        }
    }
    if let Some(c) = has.iter().position(|&(a, b)| a != b) {
        return Err(FemError::Condenser(format!(
            "mesh component {c} touches only one plate; the condenser does not separate it"
        )));
    }
    Ok((n0, n1))
}

#[derive(Debug, Clone)]
pub struct CapacityReport {
    pub value: f64,
    pub p: f64,
    /// Euclidean norm of the energy gradient over the free vertices at the
    /// returned minimizer.
    pub grad_norm: f64,
    pub iterations: usize,
    pub pinned0: usize,
    pub pinned1: usize,
    pub field: ScalarField,
}

/// p-capacity of the condenser on the meshed domain.
pub fn capacity_p(mesh: &TriMesh, cond: &CondenserSpec, p: f64) -> Result<CapacityReport, FemError> {
    let roles = cond.classify(mesh)?;
    capacity_from_roles(mesh, &roles, p)
}

fn capacity_from_roles(mesh: &TriMesh, roles: &[Role], p: f64) -> Result<CapacityReport, FemError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(FemError::Unsupported(format!("exponent p must be > 1, got {p}")));
    }
    mesh.audit_structure()?;
    let (n0, n1) = check_roles(mesh, roles)?;
    let (k, _) = assemble_p1(mesh)?;
    let geoms = tri_geoms(mesh);

    // Harmonic (p = 2) solution first: the answer for p = 2, the starting
    // point otherwise.
    let mut u: Vec<f64> = roles
        .iter()
        .map(|r| match r {
            Role::Plate0 => 0.0,
            Role::Plate1 => 1.0,
            Role::Free => 0.5,
        })
        .collect();
    let (harmonic, lin_iters) = solve_linear(&k, roles, &u)?;
    u = harmonic;

    let free: Vec<bool> = roles.iter().map(|r| *r == Role::Free).collect();
    let mut g = vec![0.0; u.len()];
    let free_grad_norm = |g: &mut Vec<f64>, u: &[f64], p: f64| -> f64 {
        p_dirichlet_grad(mesh, &geoms, u, p, g);
        let mut s = 0.0;
        for i in 0..g.len() {
            if free[i] {
                s += g[i] * g[i];
            } else {
                g[i] = 0.0;
            }
        }
        s.sqrt()
    };

    if p == 2.0 {
        let gn = free_grad_norm(&mut g, &u, 2.0);
        return Ok(CapacityReport {
            value: p_dirichlet_energy(mesh, &geoms, &u, 2.0),
            p,
            grad_norm: gn,
            iterations: lin_iters,
            pinned0: n0,
            pinned1: n1,
            field: ScalarField { values: u },
        });
    }

    // Damped Newton on the convex p-energy. First-order descent stalls well
    // above the target tolerance here, while the true Hessian (a weighted
    // stiffness matrix on the same sparsity pattern) restores quadratic
    // convergence from the harmonic start. Weights are clamped away from the
    // degenerate |∇u| → 0 regime, which only occurs on cells the minimizer
    // leaves constant anyway.
    let (free_of, free_list) = index_free(roles);
    let nf = free_list.len();
    let mut energy = p_dirichlet_energy(mesh, &geoms, &u, p);
    let mut gn = free_grad_norm(&mut g, &u, p);
    let mut dir = vec![0.0; u.len()];
    let mut trial = vec![0.0; u.len()];
    let mut iterations = 0usize;

    for _ in 0..MAX_NEWTON_ITERS {
        if gn < GRAD_TOL {
            break;
        }
        iterations += 1;
        let h = hessian_csr(mesh, &geoms, &k, &u, p);
        let (hff, rhs) = reduce_free(&h, &g, &free_of, &free_list);
        let diag: Vec<f64> = hff.diag().iter().map(|&d| d.max(1e-300)).collect();
        let inner_tol = (0.05 * gn.sqrt()).clamp(1e-12, 1e-2);
        let newton = pcg(&hff, &diag, &rhs, &vec![0.0; nf], inner_tol, 40 * nf.max(100));
        dir.iter_mut().for_each(|d| *d = 0.0);
        match newton {
            Ok((d, _)) => {
                for (fi, &i) in free_list.iter().enumerate() {
                    dir[i] = d[fi];
                }
            }
            // An inner stall still leaves a usable descent direction.
            Err(_) => {
                for (fi, &i) in free_list.iter().enumerate() {
                    dir[i] = rhs[fi] / diag[fi];
                }
            }
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            for (fi, &i) in free_list.iter().enumerate() {
                dir[i] = rhs[fi] / diag[fi];
            }
            slope = dot(&g, &dir);
        }
        // Once the predicted decrease sinks below the roundoff floor of the
        // energy sum, the Armijo comparison is noise; backtrack on the
        // gradient norm instead, which stays computable at this scale.
        if -slope <= 1e-13 * energy.abs().max(1e-300) {
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                for i in 0..u.len() {
                    trial[i] = u[i] + t * dir[i];
                }
                let gn_new = free_grad_norm(&mut g, &trial, p);
                if gn_new < gn {
                    u.copy_from_slice(&trial);
                    energy = p_dirichlet_energy(mesh, &geoms, &u, p);
                    gn = gn_new;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..u.len() {
                trial[i] = u[i] + t * dir[i];
            }
            let cand = p_dirichlet_energy(mesh, &geoms, &trial, p);
            if cand <= energy + 1e-4 * t * slope {
                u.copy_from_slice(&trial);
                energy = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        gn = free_grad_norm(&mut g, &u, p);
    }
    if gn < GRAD_TOL {
        return Ok(CapacityReport {
            value: energy,
            p,
            grad_norm: gn,
            iterations,
            pinned0: n0,
            pinned1: n1,
            field: ScalarField { values: u },
        });
    }
    Err(FemError::DescentNotConverged { grad_norm: gn, iters: iterations })
}

fn index_free(roles: &[Role]) -> (Vec<usize>, Vec<usize>) {
    let mut free_of = vec![usize::MAX; roles.len()];
    let mut free_list = Vec::new();
    for (i, r) in roles.iter().enumerate() {
        if *r == Role::Free {
            free_of[i] = free_list.len();
            free_list.push(i);
        }
    }
    (free_of, free_list)
}

/// Hessian of `∫|∇u|^p` on the stiffness sparsity pattern. Per triangle the
/// block is A·p·|g|^{p−2}·(∇λ_a·∇λ_b) + A·p·(p−2)·|g|^{p−4}·(g·∇λ_a)(g·∇λ_b)
/// with g = ∇u; the squared norm is clamped below so the weights stay finite
/// for p < 2 and positive for p > 2.
fn hessian_csr(mesh: &TriMesh, geoms: &[crate::assembly::TriGeom], k: &Csr, u: &[f64], p: f64) -> Csr {
    let mut h = Csr {
        n: k.n,
        indptr: k.indptr.clone(),
        indices: k.indices.clone(),
        data: vec![0.0; k.data.len()],
    };
    let norms2: Vec<f64> = mesh
        .triangles
        .iter()
        .zip(geoms)
        .map(|(tri, geom)| {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for l in 0..3 {
                gx += u[tri[l]] * geom.grad[l][0];
                gy += u[tri[l]] * geom.grad[l][1];
            }
            gx * gx + gy * gy
        })
        .collect();
    // For p < 2 the weight grows as |∇u| → 0; that growth is genuine
    // curvature which keeps constant-state cells firmly in place, so the
    // clamp only guards against division by zero. For p > 2 the weight
    // vanishes instead, and a higher floor keeps the system invertible.
    let floor_rel = if p < 2.0 { 1e-16 } else { 1e-8 };
    let floor = norms2.iter().cloned().fold(0.0_f64, f64::max) * floor_rel + 1e-300;
    for ((tri, geom), &norm2) in mesh.triangles.iter().zip(geoms).zip(&norms2) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for l in 0..3 {
            gx += u[tri[l]] * geom.grad[l][0];
            gy += u[tri[l]] * geom.grad[l][1];
        }
        let clamped = norm2.max(floor);
        let weight = p * clamped.powf(0.5 * p - 1.0);
        let rank1 = if norm2 >= floor { weight * (p - 2.0) / clamped } else { 0.0 };
        let q: [f64; 3] = std::array::from_fn(|l| gx * geom.grad[l][0] + gy * geom.grad[l][1]);
        for a in 0..3 {
            let row = tri[a];
            let lo = h.indptr[row];
            let hi = h.indptr[row + 1];
            for b in 0..3 {
                let dot_ab =
                    geom.grad[a][0] * geom.grad[b][0] + geom.grad[a][1] * geom.grad[b][1];
                let v = geom.area * (weight * dot_ab + rank1 * q[a] * q[b]);
                let pos = lo + h.indices[lo..hi].binary_search(&tri[b]).expect("pattern");
                h.data[pos] += v;
            }
        }
    }
    h
}

/// Restricts a symmetric operator to the free vertices and negates the
/// matching gradient entries into a right-hand side.
fn reduce_free(h: &Csr, g: &[f64], free_of: &[usize], free_list: &[usize]) -> (Csr, Vec<f64>) {
    let nf = free_list.len();
    let mut indptr = Vec::with_capacity(nf + 1);
    let mut indices = Vec::new();
    let mut data = Vec::new();
    indptr.push(0);
    for &i in free_list {
        for idx in h.indptr[i]..h.indptr[i + 1] {
            let j = h.indices[idx];
            if free_of[j] != usize::MAX {
                indices.push(free_of[j]);
                data.push(h.data[idx]);
            }
        }
        indptr.push(indices.len());
    }
    let rhs: Vec<f64> = free_list.iter().map(|&i| -g[i]).collect();
    (Csr { n: nf, indptr, indices, data }, rhs)
}

/// Solves the pinned harmonic problem K_ff u_f = −K_fp u_p.
fn solve_linear(k: &Csr, roles: &[Role], pinned_values: &[f64]) -> Result<(Vec<f64>, usize), FemError> {
    let (free_of, free_list) = index_free(roles);
    let nf = free_list.len();
    let mut u: Vec<f64> = roles
        .iter()
        .zip(pinned_values)
        .map(|(r, &v)| match r {
            Role::Plate0 => 0.0,
            Role::Plate1 => 1.0,
            Role::Free => v,
        })
        .collect();
    if nf == 0 {
        return Ok((u, 0));
    }
    let mut indptr = Vec::with_capacity(nf + 1);
    let mut indices = Vec::new();
    let mut data = Vec::new();
    let mut rhs = vec![0.0; nf];
    indptr.push(0);
    for (fi, &i) in free_list.iter().enumerate() {
        for idx in k.indptr[i]..k.indptr[i + 1] {
            let j = k.indices[idx];
            let v = k.data[idx];
            match roles[j] {
                Role::Free => {
                    indices.push(free_of[j]);
                    data.push(v);
                }
                Role::Plate1 => rhs[fi] -= v,
                Role::Plate0 => {}
            }
        }
        indptr.push(indices.len());
    }
    let kff = Csr { n: nf, indptr, indices, data };
    let diag = kff.diag();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(FemError::Solve("pinned system has a non-positive diagonal".into()));
    }
    let x0: Vec<f64> = free_list.iter().map(|&i| u[i]).collect();
    let (x, iters) = pcg(&kff, &diag, &rhs, &x0, 1e-12, 40 * nf.max(100))?;
    for (fi, &i) in free_list.iter().enumerate() {
        u[i] = x[fi];
    }
    Ok((u, iters))
}

/// Outcome of the pullback-vs-original capacity comparison.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub a: f64,
    pub p: f64,
    pub gammas: Vec<f64>,
    pub h: f64,
    /// Analytic distortion bound sup |Dφ| / J^{1/p} on the model domain.
    pub k_sup: f64,
    pub cap_pullback: f64,
    pub cap_original: f64,
    /// cap_pullback^{1/p} / cap_original^{1/p}.
    pub ratio: f64,
    pub mesh_tol: f64,
    pub pass: bool,
}

/// Meshes both the model wedge and the cusp domain, pulls the plates back
/// through the power map, computes both capacities, and compares their
/// ratio against the analytic distortion bound (with a mesh tolerance).
pub fn capacity_transfer_check(
    profile: &CuspProfile,
    a: f64,
    p: f64,
    cond: &CondenserSpec,
    h: f64,
    grading_levels: usize,
) -> Result<TransferReport, FemError> {
    if profile.n != 2 {
        return Err(FemError::Unsupported(format!(
            "transfer check meshes 2D domains only, got n = {}",
            profile.n
        )));
    }
    let map = CuspMap::new(a, profile.clone())?;
    let k_sup = match map.distortion_sup(p) {
        Ok(k) => k,
        Err(NbError::Unbounded(msg)) => return Err(FemError::UnboundedDistortion(msg)),
        Err(e) => return Err(e.into()),
    };

    let gamma1 = profile.gammas[0];
    let mesh_cusp = mesh_cusp_2d(gamma1, h, grading_levels)?;
    let mesh_model = mesh_cusp_2d(1.0, h, grading_levels)?;

    let cap_original = capacity_p(&mesh_cusp, cond, p)?.value;

    // Classify model vertices by mapping them forward: x ∈ φ⁻¹(F) iff
    // φ(x) ∈ F. No geometric inversion is needed. Vertices may lie on the
    // closed boundary, where the power formulas still evaluate cleanly,
    // so the unchecked form is the right one.
    let roles: Vec<Role> = mesh_model
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let image = map.eval_unchecked(&[v[0], v[1]]);
            let pt = [image[0], image[1]];
            let in0 = cond.plate0.iter().any(|pl| pl.contains(pt));
            let in1 = cond.plate1.iter().any(|pl| pl.contains(pt));
            match (in0, in1) {
                (true, true) => Err(FemError::Condenser(format!(
                    "pulled-back plates overlap at model vertex {i}"
                ))),
                (true, false) => Ok(Role::Plate0),
                (false, true) => Ok(Role::Plate1),
                (false, false) => Ok(Role::Free),
            }
        })
        .collect::<Result<_, _>>()?;
    let cap_pullback = capacity_from_roles(&mesh_model, &roles, p)?.value;

    let ratio = cap_pullback.powf(1.0 / p) / cap_original.powf(1.0 / p);
    Ok(TransferReport {
        a,
        p,
        gammas: profile.gammas.clone(),
        h,
        k_sup,
        cap_pullback,
        cap_original,
        ratio,
        mesh_tol: TRANSFER_MESH_TOL,
        pass: ratio <= k_sup * (1.0 + TRANSFER_MESH_TOL),
    })
}

/// Radial closed form for the annulus condenser (inner disc vs outer rim).
/// Used as the oracle in tests; the p ≠ 2 branch degenerates to the
/// logarithmic one as p → 2.
pub fn annulus_capacity_oracle(rho: f64, r_outer: f64, p: f64) -> f64 {
    use std::f64::consts::PI;
    if p == 2.0 {
        2.0 * PI / (r_outer / rho).ln()
    } else {
        let alpha = (p - 2.0) / (p - 1.0);
        2.0 * PI
            * ((p - 2.0) / (p - 1.0)).abs().powf(p - 1.0)
            * (r_outer.powf(alpha) - rho.powf(alpha)).abs().powf(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mesh_annulus, GradingInfo};
    use approx::assert_relative_eq;

    fn annulus_condenser(outer_from: f64) -> CondenserSpec {
        CondenserSpec {
            plate0: vec![Plate::Disc { center: [0.0, 0.0], radius: 1.001 }],
            plate1: vec![Plate::Ring { center: [0.0, 0.0], inner: outer_from, outer: 2.001 }],
        }
    }

    #[test]
    fn harmonic_annulus_matches_log_oracle() {
        let mesh = mesh_annulus(1.0, 2.0, 0.05).unwrap();
        let report = capacity_p(&mesh, &annulus_condenser(1.999), 2.0).unwrap();
        let oracle = annulus_capacity_oracle(1.0, 2.0, 2.0);
        assert_relative_eq!(report.value, oracle, max_relative = 0.02);
        assert!(report.value >= oracle, "conforming minimization bounds from above");
    }

    #[test]
    fn cubic_exponent_annulus_matches_radial_oracle() {
        let mesh = mesh_annulus(1.0, 2.0, 0.05).unwrap();
        let report = capacity_p(&mesh, &annulus_condenser(1.999), 3.0).unwrap();
        assert!(report.grad_norm < 1e-8);
        assert_relative_eq!(
            report.value,
            annulus_capacity_oracle(1.0, 2.0, 3.0),
            max_relative = 0.02
        );
    }

    #[test]
    fn oracle_is_continuous_through_two() {
        let c2 = annulus_capacity_oracle(1.0, 2.0, 2.0);
        for p in [1.999, 2.001] {
            assert_relative_eq!(annulus_capacity_oracle(1.0, 2.0, p), c2, max_relative = 1e-2);
        }
    }

    #[test]
    fn closer_plates_raise_capacity() {
        let mesh = mesh_annulus(1.0, 2.0, 0.08).unwrap();
        let far = capacity_p(&mesh, &annulus_condenser(1.999), 2.0).unwrap();
        let near = capacity_p(&mesh, &annulus_condenser(1.7), 2.0).unwrap();
        assert!(near.value > far.value);
    }

    #[test]
    fn empty_plate_is_rejected() {
        let mesh = mesh_annulus(1.0, 2.0, 0.1).unwrap();
        let cond = CondenserSpec {
            plate0: vec![Plate::Disc { center: [10.0, 10.0], radius: 0.1 }],
            plate1: vec![Plate::Ring { center: [0.0, 0.0], inner: 1.999, outer: 2.001 }],
        };
        let err = capacity_p(&mesh, &cond, 2.0).unwrap_err();
        assert!(err.to_string().contains("at least one vertex"));
    }

    #[test]
    fn separated_components_are_rejected() {
        // Two disjoint unit right triangles; one plate in each.
        let mesh = TriMesh {
            vertices: vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [10.0, 0.0],
                [11.0, 0.0],
                [10.0, 1.0],
            ],
            triangles: vec![[0, 1, 2], [3, 4, 5]],
            boundary_tags: Vec::new(),
            grading: GradingInfo::none(),
        };
        let cond = CondenserSpec {
            plate0: vec![Plate::Disc { center: [0.0, 0.0], radius: 0.1 }],
            plate1: vec![Plate::Disc { center: [11.0, 0.0], radius: 0.1 }],
        };
        let err = capacity_p(&mesh, &cond, 2.0).unwrap_err();
        assert!(err.to_string().contains("touches only one plate"));
    }

    #[test]
    fn identity_map_transfer_is_exact() {
        let profile = CuspProfile::new(2, vec![1.0]).unwrap();
        let cond = CondenserSpec {
            plate0: vec![Plate::Rect { corner0: [0.0, 0.55], corner1: [1.0, 0.7] }],
            plate1: vec![Plate::Rect { corner0: [0.0, 0.85], corner1: [1.0, 0.95] }],
        };
        let report = capacity_transfer_check(&profile, 1.0, 2.0, &cond, 0.05, 10).unwrap();
        assert_eq!(report.k_sup, 1.0);
        assert_eq!(report.ratio, 1.0, "identity map must compare a mesh with itself");
        assert!(report.pass);
    }

    #[test]
    fn unbounded_distortion_is_a_precondition_error() {
        let profile = CuspProfile::new(2, vec![1.5]).unwrap();
        let cond = CondenserSpec {
            plate0: vec![Plate::Rect { corner0: [0.0, 0.55], corner1: [1.0, 0.7] }],
            plate1: vec![Plate::Rect { corner0: [0.0, 0.85], corner1: [1.0, 0.95] }],
        };
        let err = capacity_transfer_check(&profile, 0.4, 1.8, &cond, 0.05, 10).unwrap_err();
        assert!(matches!(err, FemError::UnboundedDistortion(_)), "got {err}");
    }

    #[test]
    fn finite_distortion_transfer_passes() {
        let profile = CuspProfile::new(2, vec![1.5]).unwrap();
        let cond = CondenserSpec {
            plate0: vec![Plate::Rect { corner0: [0.0, 0.55], corner1: [1.0, 0.7] }],
            plate1: vec![Plate::Rect { corner0: [0.0, 0.85], corner1: [1.0, 0.95] }],
        };
        let report = capacity_transfer_check(&profile, 0.25, 1.8, &cond, 0.05, 10).unwrap();
        assert_relative_eq!(report.k_sup, 2.5638714006578516, epsilon = 1e-12);
        assert!(report.pass, "ratio {} vs bound {}", report.ratio, report.k_sup);
        assert!(report.ratio > 0.0);
    }
}
