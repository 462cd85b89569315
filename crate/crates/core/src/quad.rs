//! Deterministic graded quadrature for the distortion and Jacobian
//! integrals on the reference wedge H_1, plus the singular 1-D integral
//! defining pi_p.
//!
//! Every integrand in scope behaves like a pure power of x_n near the
//! cusp axis, so the engine uses dyadic geometric cells toward 0 with a
//! fixed-order Gauss–Legendre rule per cell, then closes the series with
//! a measured-ratio geometric tail. For an exact power the extrapolation
//! is exact; for the perturbed powers that actually occur, the last cell
//! ratios are cross-checked and a precision error is raised if they
//! disagree while the tail still matters.

use crate::cuspmap::CuspMap;
use crate::error::NbError;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadSpec {
    /// Gauss–Legendre order per cell (and per cross-section axis).
    pub nodes_1d: usize,
    /// Number of dyadic cells toward the singular endpoint.
    pub levels: usize,
    /// Target relative error, also the negligibility threshold for the
    /// extrapolated tail.
    pub tol: f64,
}

impl QuadSpec {
    pub fn new(nodes_1d: usize, levels: usize, tol: f64) -> Result<Self, NbError> {
        if nodes_1d < 2 {
            return Err(NbError::Config(format!("nodes_1d = {nodes_1d} (need at least 2)")));
        }
        if levels < 1 {
            return Err(NbError::Config("levels must be at least 1".into()));
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(NbError::Config(format!("tol = {tol} (need a positive finite value)")));
        }
        Ok(QuadSpec { nodes_1d, levels, tol })
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { nodes_1d: 16, levels: 40, tol: 1e-8 }
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on the three-term recurrence. Nodes ascend.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let legendre = |x: f64| -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n.div_ceil(2) {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates f over (0, upper], grading dyadically toward 0.
///
/// Cell k covers [upper·2^{-k-1}, upper·2^{-k}]. Cells are evaluated
/// independently (in parallel) and summed smallest-first in a fixed
/// order. The part below the deepest cell is recovered by geometric
/// extrapolation from the measured decay ratio of the last cells:
/// a ratio ≥ 1 means the cell sums do not decay and the integral is
/// reported divergent; a drifting ratio with a non-negligible tail is
/// reported as a precision failure carrying both candidate totals.
pub fn integrate_graded<F>(f: F, upper: f64, spec: &QuadSpec) -> Result<f64, NbError>
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(upper > 0.0 && upper.is_finite());
    let (gx, gw) = gauss_legendre(spec.nodes_1d);
    let levels = spec.levels;
    let cells: Vec<f64> = (0..levels)
        .into_par_iter()
        .map(|k| {
            let hi = upper * (0.5f64).powi(k as i32);
            let lo = 0.5 * hi;
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut s = 0.0;
            for (x, w) in gx.iter().zip(&gw) {
                s += w * f(mid + half * x);
            }
            s * half
        })
        .collect();

    let mut sum = 0.0;
    for k in (0..levels).rev() {
        sum += cells[k];
    }
    if levels < 3 {
        // Too few cells to measure the decay; the plain sum is all we have.
        return Ok(sum);
    }
    let s2 = cells[levels - 1];
    let s1 = cells[levels - 2];
    let s0 = cells[levels - 3];
    if s2 == 0.0 || s1 == 0.0 {
        // The cell sums decayed below the floating-point floor; nothing
        // measurable remains past the deepest cell.
        return Ok(sum);
    }
    let r2 = s2 / s1;
    if r2 >= 1.0 || !r2.is_finite() {
        return Err(NbError::DivergentIntegral(format!(
            "cell sums do not decay toward the singular endpoint \
             (last ratio {r2:.6e} at level {levels})"
        )));
    }
    let tail2 = s2 * r2 / (1.0 - r2);
    if tail2.abs() > spec.tol * sum.abs() {
        // The tail matters, so the measured ratio must be trustworthy:
        // compare against the previous cell ratio.
        let r1 = s1 / s0;
        let drift = (r2 - r1).abs();
        if s0 == 0.0 || drift > 1e-6 * (1.0 - r2) + 1e-12 {
            let prev = if r1.is_finite() && r1 < 1.0 {
                sum + s2 * r1 / (1.0 - r1)
            } else {
                sum
            };
            return Err(NbError::Precision {
                prev,
                last: sum + tail2,
                message: format!(
                    "cell decay ratio drifted ({r1:.12} then {r2:.12}) while the \
                     extrapolated tail is above tolerance; increase levels"
                ),
            });
        }
    }
    Ok(sum + tail2)
}

/// Tensor Gauss–Legendre grid on the open unit cube (0,1)^d.
fn unit_cube_grid(d: usize, nodes_1d: usize) -> Vec<(Vec<f64>, f64)> {
    let (gx, gw) = gauss_legendre(nodes_1d);
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..d {
        let mut next = Vec::with_capacity(pts.len() * nodes_1d);
        for (u, w) in &pts {
            for (x, wx) in gx.iter().zip(&gw) {
                let mut u2 = u.clone();
                u2.push(0.5 * (x + 1.0));
                next.push((u2, w * 0.5 * wx));
            }
        }
        pts = next;
    }
    pts
}

/// Numerical value of the inner-distortion constant
/// K = (∫_{H_1} (|Dφ|^p / J)^{q/(p-q)} dx)^{(p-q)/(pq)},
/// with |Dφ| the pointwise spectral norm of the differential.
///
/// The wedge is sliced by x_n: with x_i = u_i·x_n the cross-section at
/// height x_n is the cube (0, x_n)^{n-1} of measure x_n^{n-1}, so the
/// outer integrand is a graded 1-D profile and the inner integral over u
/// is smooth and handled by a tensor rule.
pub fn k_pq_numeric(map: &CuspMap, p: f64, q: f64, spec: &QuadSpec) -> Result<f64, NbError> {
    if !(q > 1.0 && p > q) || !p.is_finite() {
        return Err(NbError::InvalidExponents(format!(
            "need 1 < q < p, got p = {p}, q = {q}"
        )));
    }
    let n = map.profile.n;
    let a = map.a;
    let gamma = map.profile.gamma_total;
    // Exponent of x_n in the full outer integrand, cross-section included.
    let e_tot = (n as f64 - p - a * (gamma - p)) * q / (p - q) + (n as f64 - 1.0);
    if e_tot <= -1.0 {
        return Err(NbError::DivergentIntegral(format!(
            "distortion integral diverges: x_n exponent {e_tot:.6} <= -1 \
             (a = {a}, gamma_total = {gamma}, p = {p}, q = {q})"
        )));
    }
    let upts = unit_cube_grid(n - 1, spec.nodes_1d);
    let pow = q / (p - q);
    let f = move |xn: f64| -> f64 {
        let mut x = vec![0.0; n];
        x[n - 1] = xn;
        let jac = map.jacobian_det_unchecked(&x);
        let mut s = 0.0;
        for (u, w) in &upts {
            for (xi, ui) in x[..n - 1].iter_mut().zip(u) {
                *xi = ui * xn;
            }
            let sig = map.jacobian_matrix_unchecked(&x).spectral_norm();
            s += w * (sig.powf(p) / jac).powf(pow);
        }
        s * xn.powi(n as i32 - 1)
    };
    let integral = integrate_graded(f, 1.0, spec)?;
    Ok(integral.powf((p - q) / (p * q)))
}

/// Numerical value of the Jacobian-integrability constant
/// M = (∫_{H_1} |J|^{r/(r-p)} dx)^{(r-p)/(rp)}.
pub fn m_rp_numeric(map: &CuspMap, r: f64, p: f64, spec: &QuadSpec) -> Result<f64, NbError> {
    if !(p > 1.0 && r > p) || !r.is_finite() {
        return Err(NbError::InvalidExponents(format!(
            "need 1 < p < r, got p = {p}, r = {r}"
        )));
    }
    let n = map.profile.n;
    let a = map.a;
    let gamma = map.profile.gamma_total;
    if a * gamma * r <= n as f64 * p {
        return Err(NbError::DivergentIntegral(format!(
            "Jacobian power integral diverges: a = {a} is not above np/(gamma*r) = {}",
            n as f64 * p / (gamma * r)
        )));
    }
    let pow = r / (r - p);
    let f = move |xn: f64| -> f64 {
        let mut x = vec![0.0; n];
        x[n - 1] = xn;
        map.jacobian_det_unchecked(&x).powf(pow) * xn.powi(n as i32 - 1)
    };
    let integral = integrate_graded(f, 1.0, spec)?;
    Ok(integral.powf((r - p) / (r * p)))
}

/// pi_p by direct quadrature of 2 ∫_0^{(p-1)^{1/p}} (1 - t^p/(p-1))^{-1/p} dt.
///
/// The substitution t = (p-1)^{1/p} s^{1/p} turns this into
/// (2 (p-1)^{1/p} / p) ∫_0^1 s^{1/p-1} (1-s)^{-1/p} ds, whose two endpoint
/// singularities are integrable powers; each half is graded toward its
/// endpoint.
pub fn pi_p_integral(p: f64, spec: &QuadSpec) -> Result<f64, NbError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(NbError::InvalidExponents(format!("need p > 1, got p = {p}")));
    }
    let t = (p - 1.0).powf(1.0 / p);
    let lo = integrate_graded(
        |s: f64| s.powf(1.0 / p - 1.0) * (1.0 - s).powf(-1.0 / p),
        0.5,
        spec,
    )?;
    let hi = integrate_graded(
        |w: f64| w.powf(-1.0 / p) * (1.0 - w).powf(1.0 / p - 1.0),
        0.5,
        spec,
    )?;
    Ok(2.0 * t / p * (lo + hi))
}

/// ∫_{H_1} J(x, φ_a) dx — the volume of the image cusp. Always equals
/// 1/gamma_total, which makes it a sharp self-test of the engine.
pub fn jacobian_total_mass(map: &CuspMap, spec: &QuadSpec) -> Result<f64, NbError> {
    let n = map.profile.n;
    let f = move |xn: f64| -> f64 {
        let mut x = vec![0.0; n];
        x[n - 1] = xn;
        map.jacobian_det_unchecked(&x) * xn.powi(n as i32 - 1)
    };
    integrate_graded(f, 1.0, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::CuspProfile;
    use approx::assert_relative_eq;

    fn map(a: f64, gammas: Vec<f64>) -> CuspMap {
        let n = gammas.len() + 1;
        CuspMap::new(a, CuspProfile::new(n, gammas).unwrap()).unwrap()
    }

    #[test]
    fn gl_two_point() {
        let (x, w) = gauss_legendre(2);
        let c = 1.0 / 3.0f64.sqrt();
        assert_relative_eq!(x[0], -c, max_relative = 1e-14);
        assert_relative_eq!(x[1], c, max_relative = 1e-14);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn gl_degree_exactness() {
        // 5 points integrate x^8 exactly on [-1,1]
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(s, 2.0 / 9.0, max_relative = 1e-13);
    }

    #[test]
    fn gl_weights_and_smooth_integral() {
        let (x, w) = gauss_legendre(16);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert_relative_eq!(s, 2.0 * 1.0f64.sin(), max_relative = 1e-15);
    }

    #[test]
    fn graded_handles_integrable_singularity() {
        let spec = QuadSpec::default();
        let v = integrate_graded(|x| x.powf(-0.5), 1.0, &spec).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn graded_polynomial_and_smooth() {
        let spec = QuadSpec::default();
        let v = integrate_graded(|x| x * x, 1.0, &spec).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-13);
        let e = integrate_graded(|x| x.exp(), 0.5, &spec).unwrap();
        assert_relative_eq!(e, 0.5f64.exp() - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn graded_near_harmonic() {
        // Exponent -0.999: 99.93% of the mass sits in the extrapolated
        // tail's regime, so this exercises the ratio estimate hard.
        let spec = QuadSpec::default();
        let v = integrate_graded(|x| x.powf(-0.999), 1.0, &spec).unwrap();
        assert_relative_eq!(v, 1000.0, max_relative = 1e-9);
    }

    #[test]
    fn graded_rejects_divergent() {
        let spec = QuadSpec::default();
        let r = integrate_graded(|x| 1.0 / x, 1.0, &spec);
        assert!(matches!(r, Err(NbError::DivergentIntegral(_))));
        let r = integrate_graded(|x| x.powf(-1.3), 1.0, &spec);
        assert!(matches!(r, Err(NbError::DivergentIntegral(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadSpec::new(1, 40, 1e-8).is_err());
        assert!(QuadSpec::new(16, 0, 1e-8).is_err());
        assert!(QuadSpec::new(16, 40, 0.0).is_err());
        assert!(QuadSpec::new(2, 1, 1e-3).is_ok());
    }

    #[test]
    fn k_identity_map_is_volume_power() {
        let spec = QuadSpec::default();
        // identity: |Dphi| = J = 1, so K = vol(H_1)^{(p-q)/(pq)}
        let k3 = k_pq_numeric(&map(1.0, vec![1.0, 1.0]), 2.0, 1.5, &spec).unwrap();
        assert_relative_eq!(k3, (1.0f64 / 3.0).powf(1.0 / 6.0), max_relative = 1e-10);
        let k2 = k_pq_numeric(&map(1.0, vec![1.0]), 2.0, 1.5, &spec).unwrap();
        assert_relative_eq!(k2, (1.0f64 / 2.0).powf(1.0 / 6.0), max_relative = 1e-10);
    }

    #[test]
    fn k_frozen_plane_cusp() {
        // Independently cross-checked value for a=0.6, single exponent 3,
        // p=2, q=1.2 (outer x_n exponent -0.8, so the tail matters).
        let spec = QuadSpec::default();
        let k = k_pq_numeric(&map(0.6, vec![3.0]), 2.0, 1.2, &spec).unwrap();
        assert_relative_eq!(k, 1.4335033443006637, max_relative = 2e-6);
    }

    #[test]
    fn k_self_convergence_in_levels() {
        let a = k_pq_numeric(
            &map(0.6, vec![3.0]),
            2.0,
            1.2,
            &QuadSpec::new(16, 40, 1e-8).unwrap(),
        )
        .unwrap();
        let b = k_pq_numeric(
            &map(0.6, vec![3.0]),
            2.0,
            1.2,
            &QuadSpec::new(16, 42, 1e-8).unwrap(),
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs());
    }

    #[test]
    fn k_blows_up_at_the_admissibility_edge() {
        // For the plane cusp with exponent 3 and (p,q)=(2,1.2) the integral
        // stays finite for a < 2/3 and the values grow without bound as a
        // approaches that edge.
        let spec = QuadSpec::default();
        let ks: Vec<f64> = [0.60, 0.63, 0.65, 0.66]
            .iter()
            .map(|&a| k_pq_numeric(&map(a, vec![3.0]), 2.0, 1.2, &spec).unwrap())
            .collect();
        for pair in ks.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        assert!(ks[3] > 2.0 * ks[0]);
        let past = k_pq_numeric(&map(0.68, vec![3.0]), 2.0, 1.2, &spec);
        assert!(matches!(past, Err(NbError::DivergentIntegral(_))));
    }

    #[test]
    fn k_rejects_bad_exponents() {
        let spec = QuadSpec::default();
        let m = map(0.5, vec![2.0, 2.0]);
        assert!(matches!(
            k_pq_numeric(&m, 1.5, 2.0, &spec),
            Err(NbError::InvalidExponents(_))
        ));
        assert!(matches!(
            k_pq_numeric(&m, 2.0, 1.0, &spec),
            Err(NbError::InvalidExponents(_))
        ));
    }

    #[test]
    fn m_matches_closed_values() {
        let spec = QuadSpec::default();
        let m1 = m_rp_numeric(&map(1.0, vec![1.0, 1.0]), 4.0, 2.0, &spec).unwrap();
        assert_relative_eq!(m1, (1.0f64 / 3.0).powf(0.25), max_relative = 1e-10);
        // gamma_total = 5 via (2,2), a = 0.55, p = 2, r = 5
        let m2 = m_rp_numeric(&map(0.55, vec![2.0, 2.0]), 5.0, 2.0, &spec).unwrap();
        assert_relative_eq!(m2, 0.5578625535268179, max_relative = 1e-9);
        // beta = 0 configuration: result is exactly a^{1/p}
        let m3 = m_rp_numeric(&map(0.4, vec![2.0, 2.0]), 4.0, 2.0, &spec).unwrap();
        assert_relative_eq!(m3, 0.4f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn m_divergent_at_threshold() {
        // a = np/(gamma r) exactly: excluded boundary
        let r = m_rp_numeric(&map(0.24, vec![2.0, 2.0]), 5.0, 2.0, &QuadSpec::default());
        assert!(matches!(r, Err(NbError::DivergentIntegral(_))));
        let r = m_rp_numeric(&map(0.2, vec![2.0, 2.0]), 5.0, 2.0, &QuadSpec::default());
        assert!(matches!(r, Err(NbError::DivergentIntegral(_))));
    }

    #[test]
    fn pi_integral_values() {
        let spec = QuadSpec::default();
        let v2 = pi_p_integral(2.0, &spec).unwrap();
        assert!((v2 - std::f64::consts::PI).abs() < 1e-10);
        let v4 = pi_p_integral(4.0, &spec).unwrap();
        assert_relative_eq!(v4, 2.923581388750121, max_relative = 1e-8);
        let v11 = pi_p_integral(1.1, &spec).unwrap();
        assert_relative_eq!(v11, 2.4995350865280876, max_relative = 1e-8);
    }

    #[test]
    fn jacobian_mass_is_inverse_gamma() {
        let spec = QuadSpec::default();
        let v = jacobian_total_mass(&map(0.7, vec![2.0, 2.0]), &spec).unwrap();
        assert_relative_eq!(v, 0.2, max_relative = 1e-10);
        let v = jacobian_total_mass(&map(0.6, vec![3.0]), &spec).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-10);
    }
}
