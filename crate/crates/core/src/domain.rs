//! Domain and exponent data model: anisotropic power cusps H_g, the
//! Lipschitz reference domain H_1, and the exponent bookkeeping that every
//! bound in the pipeline shares.
//!
//! H_g = { x : 0 < x_n < 1, 0 < x_i < x_n^{γ_i} } with Hölder exponents
//! γ_i ≥ 1; H_1 is the all-ones case. The aggregate exponent
//! γ = 1 + Σ γ_i controls every integrability condition downstream.

use crate::error::NbError;
use serde::Serialize;

/// An anisotropic power cusp: dimension n and the n−1 Hölder exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspProfile {
    pub n: usize,
    pub gammas: Vec<f64>,
    /// γ = 1 + Σ γ_i; always ≥ n, with equality exactly for the all-ones
    /// profile.
    pub gamma_total: f64,
}

impl CuspProfile {
    pub fn new(n: usize, gammas: Vec<f64>) -> Result<Self, NbError> {
        if n < 2 {
            return Err(NbError::InvalidProfile(format!("dimension n={n} must be at least 2")));
        }
        if gammas.len() != n - 1 {
            return Err(NbError::InvalidProfile(format!(
                "expected {} exponents for dimension {n}, got {}",
                n - 1,
                gammas.len()
            )));
        }
        for (i, g) in gammas.iter().enumerate() {
            if !(*g >= 1.0) || !g.is_finite() {
                return Err(NbError::InvalidProfile(format!(
                    "exponent gamma_{} = {g} is outside the admissible class (each must be >= 1)",
                    i + 1
                )));
            }
        }
        let gamma_total = 1.0 + gammas.iter().sum::<f64>();
        Ok(CuspProfile { n, gammas, gamma_total })
    }

    /// Sum of the Hölder exponents, Σ γ_i = γ − 1.
    pub fn gamma_sum(&self) -> f64 {
        self.gammas.iter().sum()
    }

    /// Σ γ_i².
    pub fn gamma_sq_sum(&self) -> f64 {
        self.gammas.iter().map(|g| g * g).sum()
    }

    /// Strict membership test for H_g (no margins; boundary excluded).
    pub fn contains_hg(&self, y: &[f64]) -> bool {
        if y.len() != self.n {
            return false;
        }
        let yn = y[self.n - 1];
        if !(yn > 0.0 && yn < 1.0) {
            return false;
        }
        self.gammas
            .iter()
            .zip(&y[..self.n - 1])
            .all(|(g, yi)| *yi > 0.0 && *yi < yn.powf(*g))
    }

    /// Strict membership test for the reference domain H_1 in this dimension.
    pub fn contains_h1(&self, x: &[f64]) -> bool {
        if x.len() != self.n {
            return false;
        }
        let xn = x[self.n - 1];
        if !(xn > 0.0 && xn < 1.0) {
            return false;
        }
        x[..self.n - 1].iter().all(|xi| *xi > 0.0 && *xi < xn)
    }
}

/// Exponent configuration for the composition-operator bound:
/// gradient integrability p on the cusp side, q on the reference side,
/// Poincaré target exponent r, and δ = 1/q − 1/r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentConfig {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub delta: f64,
}

impl ExponentConfig {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self, NbError> {
        if !(q > 1.0) {
            return Err(NbError::InvalidExponents(format!("q = {q} must exceed 1")));
        }
        if !(p > q) {
            return Err(NbError::InvalidExponents(format!("need q < p, got q = {q}, p = {p}")));
        }
        if !(r >= q) {
            return Err(NbError::InvalidExponents(format!("need r >= q, got r = {r}, q = {q}")));
        }
        let delta = 1.0 / q - 1.0 / r;
        Ok(ExponentConfig { p, q, r, delta })
    }

    /// Constraints that only make sense against a concrete profile:
    /// p < γ, and r below the Sobolev conjugate nq/(n−q) when q < n.
    pub fn check_against(&self, profile: &CuspProfile) -> Result<(), NbError> {
        let n = profile.n as f64;
        if !(self.p < profile.gamma_total) {
            return Err(NbError::InvalidExponents(format!(
                "need p < gamma_total, got p = {}, gamma_total = {}",
                self.p, profile.gamma_total
            )));
        }
        if self.q < n && !(self.r < n * self.q / (n - self.q)) {
            return Err(NbError::InvalidExponents(format!(
                "need r < nq/(n-q) = {}, got r = {}",
                n * self.q / (n - self.q),
                self.r
            )));
        }
        Ok(())
    }
}

/// Admissible interval for the map parameter a at given (profile, p, q).
/// Open in the underlying theory; endpoint values are stored so callers can
/// optimize over the closure and report when an optimum sits on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AInterval {
    pub lo: f64,
    pub hi: f64,
    pub nonempty: bool,
}

/// Endpoints of the admissible a-interval:
/// lo = max{ (n−p)/(γ−p), p(n−q)/(γq) }, hi = p(n−q)/(q(γ−p)).
pub fn admissible_a_interval(
    profile: &CuspProfile,
    p: f64,
    q: f64,
) -> Result<AInterval, NbError> {
    let n = profile.n as f64;
    let gamma = profile.gamma_total;
    if !(q > 1.0 && p > q) {
        return Err(NbError::InvalidExponents(format!(
            "need 1 < q < p, got q = {q}, p = {p}"
        )));
    }
    if !(p < gamma) {
        return Err(NbError::InvalidExponents(format!(
            "need p < gamma_total (division by gamma-p), got p = {p}, gamma_total = {gamma}"
        )));
    }
    let lo = ((n - p) / (gamma - p)).max(p * (n - q) / (gamma * q));
    let hi = p * (n - q) / (q * (gamma - p));
    Ok(AInterval { lo, hi, nonempty: lo < hi })
}

/// Volume of H_1 in dimension n: ∫_0^1 t^{n−1} dt = 1/n.
pub fn h1_volume(n: usize) -> f64 {
    assert!(n >= 2, "h1_volume requires n >= 2");
    1.0 / n as f64
}
