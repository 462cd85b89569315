//! The explicit homeomorphism φ_a from the reference domain H_1 onto the
//! cusp H_g, together with its Jacobian matrix/determinant, pointwise
//! distortion bound, analytic inverse, and the distortion supremum that the
//! capacity transfer check needs.
//!
//! Componentwise, with x = (x_1, …, x_n) in H_1:
//!   φ_a(x)_i = (x_i / x_n) · x_n^{a γ_i}   for i < n,
//!   φ_a(x)_n = x_n^a,
//! so the differential is diagonal-plus-last-column and
//!   J(x, φ_a) = a · x_n^{aγ − n}.

use crate::domain::CuspProfile;
use crate::error::NbError;
use crate::mat::SmallMat;

/// Default margin used to keep evaluation points strictly inside the domain
/// (the formulas raise x_n to negative powers, so x_n must stay away
/// from 0).
pub const EPS_DOM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CuspMap {
    pub a: f64,
    pub profile: CuspProfile,
    /// Strictness margin for domain membership checks.
    pub eps_dom: f64,
}

impl CuspMap {
    pub fn new(a: f64, profile: CuspProfile) -> Result<Self, NbError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(NbError::InvalidProfile(format!("map parameter a = {a} must be positive")));
        }
        Ok(CuspMap { a, profile, eps_dom: EPS_DOM })
    }

    pub fn with_margin(mut self, eps: f64) -> Self {
        self.eps_dom = eps;
        self
    }

    fn n(&self) -> usize {
        self.profile.n
    }

    fn check_in_h1(&self, x: &[f64]) -> Result<(), NbError> {
        let n = self.n();
        if x.len() != n {
            return Err(NbError::OutsideDomain(format!(
                "point has {} coordinates, domain dimension is {n}",
                x.len()
            )));
        }
        let e = self.eps_dom;
        let xn = x[n - 1];
        if !(xn >= e && xn <= 1.0 - e) {
            return Err(NbError::OutsideDomain(format!(
                "x_n = {xn} not strictly inside (0,1) at margin {e}"
            )));
        }
        for (i, xi) in x[..n - 1].iter().enumerate() {
            if !(*xi >= e * xn && *xi <= (1.0 - e) * xn) {
                return Err(NbError::OutsideDomain(format!(
                    "x_{} = {xi} not strictly inside (0, x_n) at margin {e}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Forward map. Requires x strictly inside H_1.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NbError> {
        self.check_in_h1(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Forward map without membership checks; the caller guarantees
    /// 0 < x_n (the exponent formulas are evaluated as-is).
    pub fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let xn = x[n - 1];
        let mut y = Vec::with_capacity(n);
        for (xi, g) in x[..n - 1].iter().zip(&self.profile.gammas) {
            y.push(xi * xn.powf(self.a * g - 1.0));
        }
        y.push(xn.powf(self.a));
        y
    }

    /// Analytic inverse, by componentwise root extraction:
    /// x_n = y_n^{1/a}, then x_i = y_i · y_n^{(1 − a γ_i)/a}.
    /// Requires y strictly inside H_g.
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>, NbError> {
        let n = self.n();
        if y.len() != n {
            return Err(NbError::OutsideDomain(format!(
                "point has {} coordinates, domain dimension is {n}",
                y.len()
            )));
        }
        let e = self.eps_dom;
        let yn = y[n - 1];
        if !(yn >= e && yn <= 1.0 - e) {
            return Err(NbError::OutsideDomain(format!(
                "y_n = {yn} not strictly inside (0,1) at margin {e}"
            )));
        }
        Ok(self.inverse_unchecked(y))
    }

    /// Inverse without membership checks; caller guarantees 0 < y_n.
    pub fn inverse_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n();
        let yn = y[n - 1];
        let mut x = Vec::with_capacity(n);
        for (yi, g) in y[..n - 1].iter().zip(&self.profile.gammas) {
            x.push(yi * yn.powf((1.0 - self.a * g) / self.a));
        }
        x.push(yn.powf(1.0 / self.a));
        x
    }

    /// Jacobian determinant a · x_n^{aγ − n} (positive throughout H_1).
    pub fn jacobian_det(&self, x: &[f64]) -> Result<f64, NbError> {
        self.check_in_h1(x)?;
        Ok(self.jacobian_det_unchecked(x))
    }

    pub fn jacobian_det_unchecked(&self, x: &[f64]) -> f64 {
        let xn = x[self.n() - 1];
        self.a * xn.powf(self.a * self.profile.gamma_total - self.n() as f64)
    }

    /// Full Jacobian matrix: diagonal entries x_n^{aγ_i − 1}, last column
    /// (aγ_i − 1) x_i x_n^{aγ_i − 2}, corner a x_n^{a−1}.
    pub fn jacobian_matrix(&self, x: &[f64]) -> Result<SmallMat, NbError> {
        self.check_in_h1(x)?;
        Ok(self.jacobian_matrix_unchecked(x))
    }

    pub fn jacobian_matrix_unchecked(&self, x: &[f64]) -> SmallMat {
        let n = self.n();
        let a = self.a;
        let xn = x[n - 1];
        let mut m = SmallMat::zeros(n);
        for (i, g) in self.profile.gammas.iter().enumerate() {
            m.set(i, i, xn.powf(a * g - 1.0));
            m.set(i, n - 1, (a * g - 1.0) * x[i] * xn.powf(a * g - 2.0));
        }
        m.set(n - 1, n - 1, a * xn.powf(a - 1.0));
        m
    }

    /// Pointwise operator-norm bound
    /// |Dφ_a(x)| ≤ x_n^{a−1} sqrt( Σ (aγ_i − 1)² + (n−1) + a² ),
    /// i.e. x_n^{a−1} times the Frobenius norm of the rescaled differential —
    /// always an overestimate of the spectral norm, never below it.
    pub fn distortion_bound(&self, x: &[f64]) -> Result<f64, NbError> {
        self.check_in_h1(x)?;
        Ok(self.distortion_bound_unchecked(x))
    }

    pub fn distortion_bound_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let a = self.a;
        let xn = x[n - 1];
        let s: f64 = self
            .profile
            .gammas
            .iter()
            .map(|g| {
                let t = a * g - 1.0;
                t * t
            })
            .sum();
        xn.powf(a - 1.0) * (s + (n - 1) as f64 + a * a).sqrt()
    }

    /// Supremum of (|Dφ_a|^p / J)^{1/p} over H_1 — the constant in the
    /// capacity transfer inequality. Finite exactly when the x_n-exponent
    /// p(a−1) − (aγ − n) is nonnegative; otherwise the supremum blows up at
    /// the cusp tip and an error is returned.
    ///
    /// With x_i = u_i x_n, the differential factors as x_n^{a−1} B(u, x_n)
    /// where |B|'s entries are nonnegative powers of x_n scaled by u_i, so
    /// both factors of x_n^{e/p} |B| are maximized at the closure point
    /// x_n = 1. There, the singular values depend on the last-column entries
    /// only through |aγ_i − 1| u_i (flipping the sign of entry (i,n) is a
    /// diagonal similarity of BᵀB), which grow with each u_i, so the maximum
    /// over the cross-section sits at u = (1,…,1). One spectral norm
    /// evaluation is exact.
    pub fn distortion_sup(&self, p: f64) -> Result<f64, NbError> {
        let n = self.n();
        let a = self.a;
        let gamma = self.profile.gamma_total;
        let e = p * (a - 1.0) - (a * gamma - n as f64);
        if e < -1e-12 {
            return Err(NbError::Unbounded(format!(
                "distortion supremum is infinite: exponent p(a-1)-(a*gamma-n) = {e} is negative \
                 (a = {a}, gamma_total = {gamma}, p = {p})"
            )));
        }
        let mut b = SmallMat::zeros(n);
        for (i, g) in self.profile.gammas.iter().enumerate() {
            b.set(i, i, 1.0);
            b.set(i, n - 1, (a * g - 1.0).abs());
        }
        b.set(n - 1, n - 1, a);
        let sigma = b.spectral_norm();
        Ok(sigma / a.powf(1.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(a: f64, gammas: Vec<f64>) -> CuspMap {
        let n = gammas.len() + 1;
        CuspMap::new(a, CuspProfile::new(n, gammas).unwrap()).unwrap()
    }

    #[test]
    fn identity_map() {
        let m = map(1.0, vec![1.0, 1.0]);
        let x = [0.3, 0.1, 0.7];
        let y = m.eval(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((m.jacobian_det(&x).unwrap() - 1.0).abs() < 1e-15);
        let j = m.jacobian_matrix(&x).unwrap();
        for i in 0..3 {
            for k in 0..3 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((j.get(i, k) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hand_values() {
        // a=2, exponents (2,2): x=(0.25,0.25,0.5) -> (0.03125, 0.03125, 0.25)
        let m = map(2.0, vec![2.0, 2.0]);
        let y = m.eval(&[0.25, 0.25, 0.5]).unwrap();
        assert!((y[0] - 0.03125).abs() < 1e-15);
        assert!((y[1] - 0.03125).abs() < 1e-15);
        assert!((y[2] - 0.25).abs() < 1e-15);
        // determinant 2 * 0.5^{10-3} = 0.015625
        assert!((m.jacobian_det(&[0.25, 0.25, 0.5]).unwrap() - 0.015625).abs() < 1e-15);
        // distortion at x_n = 0.5: 0.5 * sqrt(9+9+2+4)
        let d = m.distortion_bound(&[0.25, 0.25, 0.5]).unwrap();
        assert!((d - 0.5 * 24.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn planar_jacobian() {
        // a=1.5, single exponent 3 (n=2): J = 1.5 * x_n^4 at x_n=0.8
        let m = map(1.5, vec![3.0]);
        let j = m.jacobian_det(&[0.4, 0.8]).unwrap();
        assert!((j - 1.5 * 0.8_f64.powi(4)).abs() < 1e-15);
        assert!((j - 0.6144).abs() < 1e-10);
    }

    #[test]
    fn boundary_rejected() {
        let m = map(2.0, vec![2.0, 2.0]);
        assert!(m.eval(&[0.1, 0.1, 0.0]).is_err());
        assert!(m.eval(&[0.1, 0.1, 1.0]).is_err());
        assert!(m.eval(&[0.2, 0.1, 0.15]).is_err()); // x_1 > x_n
        assert!(m.eval(&[0.1, 0.1]).is_err()); // wrong arity
    }

    #[test]
    fn inverse_round_trip() {
        let m = map(0.7, vec![1.5, 2.5]);
        let x = [0.2, 0.33, 0.41];
        let y = m.eval(&x).unwrap();
        let back = m.inverse(&y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_det_consistency() {
        let m = map(1.3, vec![2.0, 1.4]);
        let x = [0.1, 0.25, 0.6];
        let d1 = m.jacobian_matrix(&x).unwrap().det();
        let d2 = m.jacobian_det(&x).unwrap();
        assert!((d1 - d2).abs() <= 1e-12 * d2.abs());
    }

    #[test]
    fn distortion_dominates_spectral_norm() {
        let m = map(0.8, vec![2.2, 1.7]);
        for &xn in &[0.1, 0.4, 0.9] {
            let x = [0.3 * xn, 0.6 * xn, xn];
            let j = m.jacobian_matrix(&x).unwrap();
            assert!(j.spectral_norm() <= m.distortion_bound(&x).unwrap() + 1e-12);
        }
    }

    #[test]
    fn sup_constant_identity_is_one() {
        let m = map(1.0, vec![1.0]);
        assert!((m.distortion_sup(2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_constant_unbounded_case() {
        // single exponent 1.5 (gamma_total 2.5), p = 1.8, a = 0.4:
        // exponent 1.8*(-0.6) - (1.0 - 2) = -1.08 + 1 = -0.08 < 0
        let m = map(0.4, vec![1.5]);
        assert!(matches!(m.distortion_sup(1.8), Err(NbError::Unbounded(_))));
        // a = 0.25 is inside the finite range
        let m = map(0.25, vec![1.5]);
        assert!(m.distortion_sup(1.8).is_ok());
    }
}
