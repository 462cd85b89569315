//! Dense n×n matrices for Jacobians and their norms. The dimensions here are
//! tiny (the spatial dimension of a cusp domain), so a flat row-major vector
//! with LU and power iteration covers everything the pipeline needs.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMat {
    n: usize,
    data: Vec<f64>,
}

impl SmallMat {
    pub fn zeros(n: usize) -> Self {
        SmallMat { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f != 0.0 {
                    for j in col..n {
                        a[row * n + j] -= f * a[col * n + j];
                    }
                }
            }
        }
        det
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm: largest singular value, via power iteration
    /// on AᵀA. Deterministic start vector, relative tolerance 1e-12. For the
    /// matrix sizes in play this is exact to near machine precision.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        // v0 has all components nonzero and unequal so it is never orthogonal
        // to the dominant singular subspace in a way that survives rounding.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm0;
        }
        let mut av = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut prev = 0.0;
        for _ in 0..500 {
            // av = A v
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += self.get(i, j) * v[j];
                }
                av[i] = s;
            }
            let sigma2: f64 = av.iter().map(|x| x * x).sum();
            // w = Aᵀ av
            for j in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += self.get(i, j) * av[i];
                }
                w[j] = s;
            }
            let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if wn == 0.0 {
                return 0.0;
            }
            for j in 0..n {
                v[j] = w[j] / wn;
            }
            if (sigma2 - prev).abs() <= 1e-12 * sigma2.max(f64::MIN_POSITIVE) {
                return sigma2.sqrt();
            }
            prev = sigma2;
        }
        prev.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_identity_and_swap() {
        assert_eq!(SmallMat::identity(3).det(), 1.0);
        let mut m = SmallMat::zeros(2);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        assert_eq!(m.det(), -1.0);
    }

    #[test]
    fn det_matches_cofactor_3x3() {
        let mut m = SmallMat::zeros(3);
        let rows = [[2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [4.0, 0.0, 1.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        // cofactor expansion by hand
        let expect = 2.0 * (3.0 * 1.0 - (-1.0) * 0.0) - 1.0 * (0.0 - (-4.0)) + 0.5 * (0.0 - 12.0);
        assert!((m.det() - expect).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_diagonal() {
        let mut m = SmallMat::zeros(3);
        m.set(0, 0, 0.5);
        m.set(1, 1, -4.0);
        m.set(2, 2, 2.0);
        assert!((m.spectral_norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_below_frobenius() {
        let mut m = SmallMat::zeros(2);
        m.set(0, 0, 1.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 3.0);
        m.set(1, 1, 4.0);
        let s = m.spectral_norm();
        assert!(s <= m.frobenius() + 1e-12);
        // known value: largest singular value of [[1,2],[3,4]]
        assert!((s - 5.464985704219043).abs() < 1e-9);
    }
}
