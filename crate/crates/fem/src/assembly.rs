//! P1 assembly on triangle meshes: stiffness and consistent mass in a shared
//! CSR pattern, plus the p-Dirichlet energy `∫|∇u|^p` and its gradient used
//! by the descent solvers.

use rayon::prelude::*;

use crate::error::FemError;
use crate::mesh::TriMesh;

/// Compressed sparse row matrix. Assembly always stores the full (symmetric)
/// pattern, so `matvec` needs no transpose handling.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// y = A x. Rows are accumulated in index order, so the result does not
    /// depend on thread count (this routine is serial by design).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for row in 0..self.n {
            let mut acc = 0.0;
            for idx in self.indptr[row]..self.indptr[row + 1] {
                acc += self.data[idx] * x[self.indices[idx]];
            }
            y[row] = acc;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for row in 0..self.n {
            for idx in self.indptr[row]..self.indptr[row + 1] {
                if self.indices[idx] == row {
                    d[row] = self.data[idx];
                }
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn same_pattern(&self, other: &Csr) -> bool {
        self.n == other.n && self.indptr == other.indptr && self.indices == other.indices
    }

    /// self + sigma * other, requiring an identical pattern.
    pub fn add_scaled(&self, sigma: f64, other: &Csr) -> Result<Csr, FemError> {
        if !self.same_pattern(other) {
            return Err(FemError::Solve("matrix patterns differ in add_scaled".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + sigma * b)
            .collect();
        Ok(Csr { n: self.n, indptr: self.indptr.clone(), indices: self.indices.clone(), data })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for row in 0..self.n {
            for idx in self.indptr[row]..self.indptr[row + 1] {
                m[(row, self.indices[idx])] = self.data[idx];
            }
        }
        m
    }
}

/// Area and the constant barycentric gradients of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriGeom {
    pub area: f64,
    /// grad[l] is the gradient of the hat function of local vertex l.
    pub grad: [[f64; 2]; 3],
}

pub fn tri_geometry(mesh: &TriMesh, t: usize) -> TriGeom {
    let [i, j, k] = mesh.triangles[t];
    let (a, b, c) = (mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    TriGeom {
        area: 0.5 * det,
        grad: [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ],
    }
}

/// Per-triangle geometry for the whole mesh, in triangle order.
pub fn tri_geoms(mesh: &TriMesh) -> Vec<TriGeom> {
    (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| tri_geometry(mesh, t))
        .collect()
}

/// Stiffness K and consistent mass M with natural (no-flux) boundary
/// handling: nothing is assembled on the boundary at all. Element
/// contributions are computed in parallel and merged in triangle order, so
/// the result is independent of thread count.
pub fn assemble_p1(mesh: &TriMesh) -> Result<(Csr, Csr), FemError> {
    let nv = mesh.n_vertices();
    if nv == 0 || mesh.triangles.is_empty() {
        return Err(FemError::Mesh("cannot assemble an empty mesh".into()));
    }
    let local: Vec<[(usize, usize, f64, f64); 9]> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let g = tri_geometry(mesh, t);
            let verts = mesh.triangles[t];
            let mut out = [(0usize, 0usize, 0.0f64, 0.0f64); 9];
            for li in 0..3 {
                for lj in 0..3 {
                    let k = g.area
                        * (g.grad[li][0] * g.grad[lj][0] + g.grad[li][1] * g.grad[lj][1]);
                    let m = g.area / 12.0 * if li == lj { 2.0 } else { 1.0 };
                    out[3 * li + lj] = (verts[li], verts[lj], k, m);
                }
            }
            out
        })
        .collect();

    let mut triplets: Vec<(usize, usize, f64, f64)> =
        local.into_iter().flatten().collect();
    triplets.sort_by_key(|&(r, c, _, _)| (r, c));

    let mut indptr = vec![0usize; nv + 1];
    let mut indices = Vec::new();
    let mut kdata = Vec::new();
    let mut mdata = Vec::new();
    for (r, c, k, m) in triplets {
        if !indices.is_empty() && indptr[r + 1] > indptr[r] && *indices.last().unwrap() == c
        {
            // Same (row, col) as the previous triplet: accumulate.
            let last = kdata.len() - 1;
            kdata[last] += k;
            mdata[last] += m;
        } else {
            indices.push(c);
            kdata.push(k);
            mdata.push(m);
        }
        indptr[r + 1] = indices.len();
    }
    // Rows of isolated vertices (none in audited meshes) stay empty.
    for r in 0..nv {
        if indptr[r + 1] < indptr[r] {
            indptr[r + 1] = indptr[r];
        }
    }
    let k = Csr { n: nv, indptr: indptr.clone(), indices: indices.clone(), data: kdata };
    let m = Csr { n: nv, indptr, indices, data: mdata };
    Ok((k, m))
}

/// ∫ |∇u|^p with the piecewise-constant P1 gradient.
pub fn p_dirichlet_energy(mesh: &TriMesh, geoms: &[TriGeom], u: &[f64], p: f64) -> f64 {
    let mut total = 0.0;
    for (t, g) in geoms.iter().enumerate() {
        let [i, j, k] = mesh.triangles[t];
        let gx = u[i] * g.grad[0][0] + u[j] * g.grad[1][0] + u[k] * g.grad[2][0];
        let gy = u[i] * g.grad[0][1] + u[j] * g.grad[1][1] + u[k] * g.grad[2][1];
        total += g.area * gx.hypot(gy).powf(p);
    }
    total
}

/// Gradient of `p_dirichlet_energy` with respect to the nodal values,
/// accumulated into `out` (which is zeroed first). Cells where ∇u vanishes
/// contribute nothing; for p > 1 that is the correct limit.
pub fn p_dirichlet_grad(mesh: &TriMesh, geoms: &[TriGeom], u: &[f64], p: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (t, g) in geoms.iter().enumerate() {
        let tri = mesh.triangles[t];
        let [i, j, k] = tri;
        let gx = u[i] * g.grad[0][0] + u[j] * g.grad[1][0] + u[k] * g.grad[2][0];
        let gy = u[i] * g.grad[0][1] + u[j] * g.grad[1][1] + u[k] * g.grad[2][1];
        let norm = gx.hypot(gy);
        if norm == 0.0 {
            continue;
        }
        let coeff = g.area * p * norm.powf(p - 2.0);
        for (l, &v) in tri.iter().enumerate() {
            out[v] += coeff * (gx * g.grad[l][0] + gy * g.grad[l][1]);
        }
    }
}

/// Vertex-to-vertex adjacency through triangle edges, for connectivity
/// checks.
pub(crate) fn vertex_adjacency(mesh: &TriMesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.n_vertices()];
    for tri in &mesh.triangles {
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{mesh_cusp_2d, mesh_square};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_triangle_matrices() {
        let mesh = TriMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_tags: Vec::new(),
            grading: crate::mesh::GradingInfo::none(),
        };
        let (k, m) = assemble_p1(&mesh).unwrap();
        let kd = k.to_dense();
        let md = m.to_dense();
        let k_ref = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let m_ref = [
            [1.0 / 12.0, 1.0 / 24.0, 1.0 / 24.0],
            [1.0 / 24.0, 1.0 / 12.0, 1.0 / 24.0],
            [1.0 / 24.0, 1.0 / 24.0, 1.0 / 12.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(kd[(i, j)], k_ref[i][j], epsilon = 1e-14);
                assert_abs_diff_eq!(md[(i, j)], m_ref[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mesh = mesh_cusp_2d(2.0, 0.1, 8).unwrap();
        let (k, _) = assemble_p1(&mesh).unwrap();
        let ones = vec![1.0; k.n];
        let mut y = vec![0.0; k.n];
        k.matvec(&ones, &mut y);
        let worst = y.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(worst < 1e-12, "K*1 should vanish, max entry {worst}");
    }

    #[test]
    fn mass_total_equals_area() {
        let mesh = mesh_cusp_2d(3.0, 0.1, 8).unwrap();
        let (_, m) = assemble_p1(&mesh).unwrap();
        let total: f64 = m.data.iter().sum();
        assert_relative_eq!(total, mesh.total_area(), epsilon = 1e-12);
    }

    #[test]
    fn stiffness_and_mass_share_pattern() {
        let mesh = mesh_square(0.25).unwrap();
        let (k, m) = assemble_p1(&mesh).unwrap();
        assert!(k.same_pattern(&m));
        let s = k.add_scaled(0.5, &m).unwrap();
        assert_relative_eq!(s.trace(), k.trace() + 0.5 * m.trace(), epsilon = 1e-12);
    }

    #[test]
    fn quadratic_energy_matches_stiffness_form() {
        let mesh = mesh_square(0.2).unwrap();
        let (k, _) = assemble_p1(&mesh).unwrap();
        let geoms = tri_geoms(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..k.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut ku = vec![0.0; k.n];
        k.matvec(&u, &mut ku);
        let quad: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        let energy = p_dirichlet_energy(&mesh, &geoms, &u, 2.0);
        assert_relative_eq!(energy, quad, epsilon = 1e-12);
    }

    #[test]
    fn energy_gradient_matches_finite_differences() {
        let mesh = mesh_cusp_2d(1.5, 0.25, 4).unwrap();
        let geoms = tri_geoms(&mesh);
        let n = mesh.n_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [1.6, 2.0, 3.2] {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut g = vec![0.0; n];
            p_dirichlet_grad(&mesh, &geoms, &u, p, &mut g);
            let h = 1e-6;
            for i in (0..n).step_by(3) {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (p_dirichlet_energy(&mesh, &geoms, &up, p)
                    - p_dirichlet_energy(&mesh, &geoms, &dn, p))
                    / (2.0 * h);
                assert_relative_eq!(g[i], fd, epsilon = 1e-7, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_connected() {
        let mesh = mesh_square(0.25).unwrap();
        let adj = vertex_adjacency(&mesh);
        for (i, list) in adj.iter().enumerate() {
            for &j in list {
                assert!(adj[j].contains(&i));
            }
        }
        assert!(adj.iter().all(|l| !l.is_empty()));
    }
}
