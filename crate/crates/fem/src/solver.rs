//! Linear solves behind the eigensolver and the p = 2 capacity problem:
//! dense Cholesky for small systems, Jacobi-preconditioned conjugate
//! gradients (warm-startable) for larger ones.

use crate::assembly::Csr;
use crate::error::FemError;

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) enum Factor {
    /// Cholesky of the symmetrically equilibrated matrix D^{-1/2} S D^{-1/2}
    /// together with the scaling D^{-1/2}. Equilibration keeps graded-mesh
    /// systems (tiny tip triangles, wildly scaled rows) well conditioned for
    /// the factorization.
    Dense { chol: nalgebra::Cholesky<f64, nalgebra::Dyn>, scale: Vec<f64> },
    Iterative { s: Csr, diag: Vec<f64> },
}

impl Factor {
    pub fn new(s: &Csr, dense: bool) -> Result<Factor, FemError> {
        let diag = s.diag();
        if diag.iter().any(|&d| !(d > 0.0)) {
            return Err(FemError::Solve("operator has a non-positive diagonal entry".into()));
        }
        if dense {
            let scale: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
            let mut dm = s.to_dense();
            for i in 0..s.n {
                for j in 0..s.n {
                    dm[(i, j)] *= scale[i] * scale[j];
                }
            }
            let chol = nalgebra::Cholesky::new(dm).ok_or_else(|| {
                FemError::Solve("shifted operator is not positive definite".into())
            })?;
            Ok(Factor::Dense { chol, scale })
        } else {
            Ok(Factor::Iterative { s: s.clone(), diag })
        }
    }

    /// Solves S x = rhs. `warm` seeds the iterative path and is ignored by
    /// the dense one.
    pub fn solve(&self, rhs: &[f64], warm: &[f64]) -> Result<Vec<f64>, FemError> {
        match self {
            Factor::Dense { chol, scale } => {
                let b = nalgebra::DVector::from_iterator(
                    rhs.len(),
                    rhs.iter().zip(scale).map(|(r, s)| r * s),
                );
                let z = chol.solve(&b);
                Ok(z.iter().zip(scale).map(|(z, s)| z * s).collect())
            }
            Factor::Iterative { s, diag } => {
                pcg(s, diag, rhs, warm, 1e-11, 40 * s.n.max(100)).map(|(x, _)| x)
            }
        }
    }
}

/// Jacobi-preconditioned CG on a symmetric positive definite matrix.
/// Entirely serial, so results are independent of thread count.
pub(crate) fn pcg(
    a: &Csr,
    diag: &[f64],
    b: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), FemError> {
    let n = a.n;
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            return Ok((x, it));
        }
        a.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(FemError::Solve(format!(
                "conjugate gradients broke down (p'Ap = {pq}); operator not positive definite?"
            )));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = dot(&r, &r).sqrt() / b_norm;
    Err(FemError::Solve(format!(
        "conjugate gradients stalled at relative residual {rel:.3e} after {max_iter} iterations"
    )))
}
