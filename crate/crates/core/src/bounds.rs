//! Closed-form constants and the assembled lower bound for the first
//! nontrivial Neumann eigenvalue μ_p of the p-Laplacian on anisotropic
//! cusp domains, plus the classical comparison bounds for nice domains.
//!
//! The composite bound factors through three constants: the distortion
//! constant K_{p,q} of the cusp map, the Jacobian-integrability constant
//! M_{r,p}, and the reference-domain Poincaré–Sobolev constant B_{r,q}.
//! Each has a closed form on the reference wedge H_1; `cusp_mu_lower`
//! searches the free exponents (q, r) and the map parameter a for the
//! best resulting bound.

use crate::domain::{admissible_a_interval, CuspProfile, ExponentConfig};
use crate::error::NbError;
use rayon::prelude::*;
use serde::Serialize;

/// Which distortion radicand to use.
///
/// `Simplified` drops the cross-term contribution 2(n−1) under the square
/// root; it is smaller when valid but its radicand can go negative.
/// `Corrected` keeps the term and is a true pointwise Frobenius bound on
/// the rescaled differential, hence always nonnegative… and always valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Simplified,
    Corrected,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Simplified => "simplified",
            Variant::Corrected => "corrected",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The quadratic under the square root of the distortion constant:
/// a²(Σγ_i² + 1) − 2aΣγ_i, plus 2(n−1) in the corrected variant.
pub fn radicand(a: f64, profile: &CuspProfile, variant: Variant) -> f64 {
    let base = a * a * (profile.gamma_sq_sum() + 1.0) - 2.0 * a * profile.gamma_sum();
    match variant {
        Variant::Simplified => base,
        Variant::Corrected => base + 2.0 * (profile.n as f64 - 1.0),
    }
}

/// Closed-form upper bound for the distortion constant K_{p,q} of the cusp
/// map with parameter a: a^{−1/p}·sqrt(radicand).
///
/// The bound dominates the quadrature value whenever the outer x_n-exponent
/// of the distortion integral is nonnegative, i.e. for a up to the cap
/// computed by [`k_validity_cap`]; past that the closed form can undercut
/// the true integral and must not be used as an upper bound.
pub fn k_pq_closed(
    a: f64,
    profile: &CuspProfile,
    p: f64,
    q: f64,
    variant: Variant,
) -> Result<f64, NbError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(NbError::InvalidProfile(format!("map parameter a = {a} must be positive")));
    }
    if !(q > 1.0 && p > q) {
        return Err(NbError::InvalidExponents(format!("need 1 < q < p, got q = {q}, p = {p}")));
    }
    if !(p < profile.gamma_total) {
        return Err(NbError::InvalidExponents(format!(
            "need p < gamma_total, got p = {p}, gamma_total = {}",
            profile.gamma_total
        )));
    }
    let rad = radicand(a, profile, variant);
    if rad < 0.0 {
        return Err(NbError::InvalidVariant(format!(
            "{variant} distortion radicand is negative ({rad}) at a = {a}; \
             only the corrected variant is defined here"
        )));
    }
    Ok(a.powf(-1.0 / p) * rad.sqrt())
}

/// Largest a for which the closed-form K_{p,q} is a certified upper bound
/// of the distortion integral: the x_n-exponent of the integrand (with the
/// cross-section factor) is nonnegative exactly for
/// a ≤ [p(n−1) − q(p−1)] / (q(γ−p)).
pub fn k_validity_cap(profile: &CuspProfile, p: f64, q: f64) -> f64 {
    let n = profile.n as f64;
    (p * (n - 1.0) - q * (p - 1.0)) / (q * (profile.gamma_total - p))
}

/// Exact value of the Jacobian-integrability constant
/// M_{r,p} = (∫_{H_1} J^{r/(r−p)} dx)^{(r−p)/(rp)}
///         = a^{1/p} · (1/(β+1))^{(r−p)/(rp)},
/// where β = (aγ − n)·r/(r−p) + n − 1 is the x_n-exponent of the integrand.
pub fn m_rp_exact(a: f64, profile: &CuspProfile, r: f64, p: f64) -> Result<f64, NbError> {
    if !(p > 1.0 && r > p) {
        return Err(NbError::InvalidExponents(format!("need 1 < p < r, got p = {p}, r = {r}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(NbError::InvalidProfile(format!("map parameter a = {a} must be positive")));
    }
    let n = profile.n as f64;
    let gamma = profile.gamma_total;
    if a * gamma * r <= n * p {
        return Err(NbError::DivergentIntegral(format!(
            "Jacobian power integral diverges: a = {a} is not above np/(gamma*r) = {}",
            n * p / (gamma * r)
        )));
    }
    let beta = (a * gamma - n) * r / (r - p) + n - 1.0;
    Ok(a.powf(1.0 / p) * (1.0 / (beta + 1.0)).powf((r - p) / (r * p)))
}

/// The often-quoted shortcut M_{r,p} ≤ a^{1/p}. Only a genuine upper bound
/// when the integrand exponent β is nonnegative (the unit-interval power
/// integral then has mass ≤ 1); exposed for comparison, never used in the
/// assembled bound.
pub fn m_rp_shortcut(a: f64, p: f64) -> f64 {
    a.powf(1.0 / p)
}

/// Volume of the unit ball in R^n (ω_2 = π, ω_3 = 4π/3), by the
/// two-step recurrence ω_n = (2π/n)·ω_{n−2}.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut even = 1.0; // ω_0
    let mut odd = 2.0; // ω_1
    if n == 0 {
        return even;
    }
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        if k % 2 == 0 {
            even *= 2.0 * std::f64::consts::PI / k as f64;
        } else {
            odd *= 2.0 * std::f64::consts::PI / k as f64;
        }
        k += 2;
    }
    if n % 2 == 0 {
        even
    } else {
        odd
    }
}

/// Poincaré–Sobolev constant bound for the reference wedge:
/// B_{r,q}(H_1) ≤ n·((1−δ)/(1/n−δ))^{1−δ}·ω_n^{1−1/n}·(1/(n+1)!)^{1/n−δ},
/// with δ = 1/q − 1/r ∈ [0, 1/n). The formula has a pole at δ = 1/n,
/// which is reported as an explicit unbounded error.
pub fn b_rq_h1(n: usize, q: f64, r: f64) -> Result<f64, NbError> {
    if n < 2 {
        return Err(NbError::InvalidProfile(format!("dimension n = {n} must be at least 2")));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(NbError::InvalidExponents(format!("q = {q} must be positive")));
    }
    if !(r >= q) || !r.is_finite() {
        return Err(NbError::InvalidExponents(format!("need r >= q, got r = {r}, q = {q}")));
    }
    let nf = n as f64;
    let delta = 1.0 / q - 1.0 / r;
    if delta >= 1.0 / nf {
        return Err(NbError::Unbounded(format!(
            "Poincare constant formula has a pole at delta = 1/n: delta = {delta}, 1/n = {}",
            1.0 / nf
        )));
    }
    let mut fact = 1.0;
    for k in 2..=(n + 1) {
        fact *= k as f64;
    }
    let omega = unit_ball_volume(n);
    Ok(nf
        * ((1.0 - delta) / (1.0 / nf - delta)).powf(1.0 - delta)
        * omega.powf(1.0 - 1.0 / nf)
        * (1.0 / fact).powf(1.0 / nf - delta))
}

/// Assembles the eigenvalue lower bound μ_p ≥ (K·M·B)^{−p} from the three
/// constants. The inputs must be positive and finite.
pub fn composite_mu_lower(k: f64, m: f64, b: f64, p: f64) -> f64 {
    assert!(
        k > 0.0 && m > 0.0 && b > 0.0 && k.is_finite() && m.is_finite() && b.is_finite(),
        "composite bound needs positive finite constants, got k = {k}, m = {m}, b = {b}"
    );
    (k * m * b).powf(-p)
}

/// π_p = 2π(p−1)^{1/p} / (p·sin(π/p)); collapses to π at p = 2.
pub fn pi_p(p: f64) -> Result<f64, NbError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(NbError::InvalidExponents(format!("need p > 1, got p = {p}")));
    }
    let pi = std::f64::consts::PI;
    Ok(2.0 * pi * (p - 1.0).powf(1.0 / p) / (p * (pi / p).sin()))
}

/// Lower bound (π_p/d)^p for μ_p of a convex domain with diameter d.
/// Convexity is the caller's responsibility.
pub fn ent_lower(d: f64, p: f64) -> Result<f64, NbError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(NbError::Config(format!("diameter d = {d} must be positive")));
    }
    Ok((pi_p(p)? / d).powf(p))
}

/// Classical lower bound π²/d² for μ_2 of a convex domain with diameter d.
pub fn payne_weinberger_lower(d: f64) -> Result<f64, NbError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(NbError::Config(format!("diameter d = {d} must be positive")));
    }
    let pi = std::f64::consts::PI;
    Ok(pi * pi / (d * d))
}

/// Upper bound p²_{n/2}/R_*² for μ_2, with R_* the radius of the ball of
/// the same volume. The Bessel-derivative zeros are found by bracketed
/// bisection on series evaluations.
pub fn szego_weinberger_upper(n: usize, volume: f64) -> Result<f64, NbError> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(NbError::Config(format!("volume = {volume} must be positive")));
    }
    let z = match n {
        2 => crate::bessel::first_zero_j1_prime(),
        3 => crate::bessel::first_zero_radial32_prime(),
        _ => {
            return Err(NbError::Unsupported(format!(
                "equal-volume-ball upper bound implemented for n in {{2, 3}}, got n = {n}"
            )))
        }
    };
    let r_star = (volume / unit_ball_volume(n)).powf(1.0 / n as f64);
    Ok(z * z / (r_star * r_star))
}

/// The classical comparison bounds for a nice (convex) domain, gathered
/// for reporting next to the cusp machinery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalBounds {
    pub diameter: f64,
    pub ball_radius: f64,
    pub pw_lower: f64,
    pub ent_lower: f64,
    pub sw_upper: f64,
}

impl ClassicalBounds {
    pub fn compute(n: usize, volume: f64, diameter: f64, p: f64) -> Result<Self, NbError> {
        let sw = szego_weinberger_upper(n, volume)?;
        Ok(ClassicalBounds {
            diameter,
            ball_radius: (volume / unit_ball_volume(n)).powf(1.0 / n as f64),
            pw_lower: payne_weinberger_lower(diameter)?,
            ent_lower: ent_lower(diameter, p)?,
            sw_upper: sw,
        })
    }
}

/// Search configuration for `cusp_mu_lower`.
#[derive(Debug, Clone)]
pub struct SearchOpts {
    /// Log-spaced grid points for q in its admissible window.
    pub q_points: usize,
    /// Log-spaced grid points for r between p and the Sobolev conjugate.
    pub r_points: usize,
    /// Alternating golden-section refinement rounds around the best cell.
    pub refine_rounds: usize,
    /// Which distortion radicand drives the reported bound.
    pub variant: Variant,
}

impl Default for SearchOpts {
    fn default() -> Self {
        SearchOpts { q_points: 32, r_points: 32, refine_rounds: 2, variant: Variant::Corrected }
    }
}

/// The assembled lower bound at one choice of exponents, with the map
/// parameter already optimized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub profile: CuspProfile,
    pub exponents: ExponentConfig,
    /// Optimized map parameter (the clamped vertex of the radicand).
    pub a_star: f64,
    pub k_pq: f64,
    pub m_rp: f64,
    pub b_rq: f64,
    pub mu_lower: f64,
    /// Variant of the distortion constant the main numbers use.
    pub variant: Variant,
    /// True when the radicand vertex fell outside the admissible interval
    /// and a_star sits on its edge.
    pub a_on_boundary: bool,
    /// True for n = 2, where the cusp theory is evaluated outside its
    /// stated dimension range so FEM cross-checks (which are 2-D) can
    /// compare against it.
    pub extrapolated: bool,
    /// Side channel: the simplified-variant constant at the same
    /// (a, q, r), when its radicand is nonnegative.
    pub k_pq_simplified: Option<f64>,
    pub mu_lower_simplified: Option<f64>,
    /// True when the simplified radicand is negative at the chosen a.
    pub simplified_invalid: bool,
}

#[derive(Debug, Clone)]
struct Candidate {
    q: f64,
    r: f64,
    a: f64,
    on_boundary: bool,
    k_corr: f64,
    m: f64,
    b: f64,
    mu_corr: f64,
    k_simpl: Option<f64>,
    mu_simpl: Option<f64>,
}

impl Candidate {
    fn driver_mu(&self, variant: Variant) -> Option<f64> {
        match variant {
            Variant::Corrected => Some(self.mu_corr),
            Variant::Simplified => self.mu_simpl,
        }
    }

    fn into_report(self, profile: &CuspProfile, p: f64, variant: Variant) -> BoundReport {
        let exponents = ExponentConfig::new(p, self.q, self.r)
            .expect("search candidates satisfy the exponent ordering");
        let (k, mu) = match variant {
            Variant::Corrected => (self.k_corr, self.mu_corr),
            Variant::Simplified => (
                self.k_simpl.expect("simplified winner has a valid radicand"),
                self.mu_simpl.expect("simplified winner has a valid radicand"),
            ),
        };
        BoundReport {
            profile: profile.clone(),
            exponents,
            a_star: self.a,
            k_pq: k,
            m_rp: self.m,
            b_rq: self.b,
            mu_lower: mu,
            variant,
            a_on_boundary: self.on_boundary,
            extrapolated: profile.n == 2,
            k_pq_simplified: self.k_simpl,
            mu_lower_simplified: self.mu_simpl,
            simplified_invalid: self.k_simpl.is_none(),
        }
    }
}

/// Evaluates one (q, r) cell: intersects the admissible a-interval with the
/// Jacobian-integrability condition a > np/(γr), clamps the radicand vertex
/// into it, and assembles the constants. The closed-form-vs-quadrature
/// validity cap is deliberately not applied here: it gates the numeric
/// cross-check, not the bound itself.
/// Returns Ok(None) when the effective interval (or the B-window) is empty.
fn eval_candidate(
    profile: &CuspProfile,
    p: f64,
    q: f64,
    r: f64,
) -> Result<Option<Candidate>, NbError> {
    let n = profile.n as f64;
    let gamma = profile.gamma_total;
    let interval = admissible_a_interval(profile, p, q)?;
    let b = match b_rq_h1(profile.n, q, r) {
        Ok(v) => v,
        Err(NbError::Unbounded(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    // Below or at np/(γr) the M-integral diverges: an open constraint.
    let a_div = n * p / (gamma * r);
    let hi_eff = interval.hi;
    let mut lo_eff = interval.lo.max(a_div);
    if !(lo_eff < hi_eff) {
        return Ok(None);
    }
    if a_div >= interval.lo {
        // The binding lower constraint is the open divergence threshold;
        // step inside. (The geometric endpoint itself is usable.)
        lo_eff += (hi_eff - lo_eff) * 1e-9;
    }
    let vertex = profile.gamma_sum() / (profile.gamma_sq_sum() + 1.0);
    let a = vertex.clamp(lo_eff, hi_eff);
    let on_boundary = a != vertex;
    let k_corr = k_pq_closed(a, profile, p, q, Variant::Corrected)?;
    let m = m_rp_exact(a, profile, r, p)?;
    let k_simpl = k_pq_closed(a, profile, p, q, Variant::Simplified).ok();
    let mu_corr = composite_mu_lower(k_corr, m, b, p);
    let mu_simpl = k_simpl.map(|k| composite_mu_lower(k, m, b, p));
    Ok(Some(Candidate { q, r, a, on_boundary, k_corr, m, b, mu_corr, k_simpl, mu_simpl }))
}

/// The assembled bound at explicitly chosen exponents (q, r) — the building
/// block of `cusp_mu_lower` and of the sweep output.
pub fn bound_for_qr(
    profile: &CuspProfile,
    p: f64,
    q: f64,
    r: f64,
    variant: Variant,
) -> Result<BoundReport, NbError> {
    let exps = ExponentConfig::new(p, q, r)?;
    exps.check_against(profile)?;
    if !(r > p) {
        return Err(NbError::InvalidExponents(format!("need r > p, got r = {r}, p = {p}")));
    }
    match eval_candidate(profile, p, q, r)? {
        None => Err(NbError::NoBoundAvailable(format!(
            "empty admissible a-interval at q = {q}, r = {r}"
        ))),
        Some(c) => {
            if c.driver_mu(variant).is_none() {
                return Err(NbError::InvalidVariant(format!(
                    "{variant} radicand is negative at the optimized a = {} for q = {q}, r = {r}",
                    c.a
                )));
            }
            Ok(c.into_report(profile, p, variant))
        }
    }
}

fn q_window(profile: &CuspProfile, p: f64) -> (f64, f64) {
    let n = profile.n as f64;
    // Below np/(n+p) no r fits between p and the Sobolev conjugate nq/(n−q).
    let lo = (n * p / (n + p)).max(1.0);
    let hi = p.min(n);
    (lo, hi)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV * (hi - lo);
    let mut x2 = lo + INV * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best available lower bound for μ_p(H_g): maximizes the composite bound
/// over a log-spaced (q, r) grid (midpoint-inset so every cell is strictly
/// admissible), then sharpens the winner by alternating golden-section
/// passes in q and r. Within each cell the map parameter is the radicand
/// vertex clamped to the effective interval.
///
/// Ties on the grid resolve to the first cell in (q, r) lexicographic
/// order; the whole search is deterministic.
pub fn cusp_mu_lower(
    profile: &CuspProfile,
    p: f64,
    search: &SearchOpts,
) -> Result<BoundReport, NbError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(NbError::InvalidExponents(format!("need p > 1, got p = {p}")));
    }
    if !(p < profile.gamma_total) {
        return Err(NbError::InvalidExponents(format!(
            "need p < gamma_total, got p = {p}, gamma_total = {}",
            profile.gamma_total
        )));
    }
    if search.q_points == 0 || search.r_points == 0 {
        return Err(NbError::Config("search grid must have at least one point per axis".into()));
    }
    let n = profile.n as f64;
    let (q_lo, q_hi) = q_window(profile, p);
    let r_hi_of = |q: f64| n * q / (n - q); // q < min(p, n) ≤ n keeps this finite
    let nq = search.q_points;
    let nr = search.r_points;
    let qr: Vec<(f64, f64)> = (0..nq * nr)
        .map(|idx| {
            let jq = idx / nr;
            let ir = idx % nr;
            let tq = (jq as f64 + 0.5) / nq as f64;
            let q = q_lo * (q_hi / q_lo).powf(tq);
            let tr = (ir as f64 + 0.5) / nr as f64;
            let r = p * (r_hi_of(q) / p).powf(tr);
            (q, r)
        })
        .collect();
    let cells: Vec<Option<Candidate>> = qr
        .par_iter()
        .map(|&(q, r)| eval_candidate(profile, p, q, r))
        .collect::<Result<Vec<_>, NbError>>()?;

    let mut best: Option<Candidate> = None;
    let mut any_nonempty = false;
    for cand in cells.into_iter().flatten() {
        any_nonempty = true;
        let Some(mu) = cand.driver_mu(search.variant) else { continue };
        let beats = match &best {
            None => true,
            Some(b) => mu > b.driver_mu(search.variant).unwrap(),
        };
        if beats {
            best = Some(cand);
        }
    }
    let Some(mut best) = best else {
        return if any_nonempty {
            Err(NbError::InvalidVariant(format!(
                "{} radicand is negative at the optimized a of every (q, r) candidate",
                search.variant
            )))
        } else {
            Err(NbError::NoBoundAvailable(
                "empty admissible a-interval for every (q, r) candidate".into(),
            ))
        };
    };

    // Alternating 1-D refinements around the winning cell, in log coordinates.
    let score = |q: f64, r: f64| -> f64 {
        match eval_candidate(profile, p, q, r) {
            Ok(Some(c)) => c.driver_mu(search.variant).unwrap_or(f64::NEG_INFINITY),
            _ => f64::NEG_INFINITY,
        }
    };
    let q_step = (q_hi / q_lo).powf(1.0 / nq as f64);
    for _ in 0..search.refine_rounds {
        let r_fixed = best.r;
        let (lo, hi) = (
            (best.q / q_step).max(q_lo * (1.0 + 1e-12)),
            (best.q * q_step).min(q_hi * (1.0 - 1e-12)),
        );
        let (q_ref, mu_q) = golden_max(|t| score(t.exp(), r_fixed), lo.ln(), hi.ln(), 40);
        if mu_q > best.driver_mu(search.variant).unwrap() {
            if let Ok(Some(c)) = eval_candidate(profile, p, q_ref.exp(), r_fixed) {
                best = c;
            }
        }
        let q_fixed = best.q;
        let r_top = r_hi_of(q_fixed);
        let r_step = (r_top / p).powf(1.0 / nr as f64);
        let (lo, hi) = (
            (best.r / r_step).max(p * (1.0 + 1e-12)),
            (best.r * r_step).min(r_top * (1.0 - 1e-12)),
        );
        let (r_ref, mu_r) = golden_max(|t| score(q_fixed, t.exp()), lo.ln(), hi.ln(), 40);
        if mu_r > best.driver_mu(search.variant).unwrap() {
            if let Ok(Some(c)) = eval_candidate(profile, p, q_fixed, r_ref.exp()) {
                best = c;
            }
        }
    }
    Ok(best.into_report(profile, p, search.variant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn profile(gammas: Vec<f64>) -> CuspProfile {
        let n = gammas.len() + 1;
        CuspProfile::new(n, gammas).unwrap()
    }

    #[test]
    fn pi_p_values() {
        assert_eq!(pi_p(2.0).unwrap(), PI);
        assert_relative_eq!(pi_p(4.0).unwrap(), 2.923581388750121, max_relative = 1e-14);
        assert_relative_eq!(pi_p(1.5).unwrap(), 3.0469919990461722, max_relative = 1e-14);
        // conjugate exponents give the same constant
        assert_relative_eq!(pi_p(3.0).unwrap(), pi_p(1.5).unwrap(), max_relative = 1e-14);
        assert!(pi_p(1.0).is_err());
        assert!(pi_p(0.5).is_err());
    }

    #[test]
    fn classical_lower_bounds() {
        assert_relative_eq!(ent_lower(1.0, 2.0).unwrap(), PI * PI, max_relative = 1e-14);
        assert_relative_eq!(
            ent_lower(2.0f64.sqrt(), 2.0).unwrap(),
            PI * PI / 2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(payne_weinberger_lower(PI).unwrap(), 1.0, max_relative = 1e-14);
        // the two coincide at p = 2 for any diameter
        for d in [0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(
                ent_lower(d, 2.0).unwrap(),
                payne_weinberger_lower(d).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn classical_scaling_laws() {
        let d = 1.7;
        let lam = 3.2;
        assert_relative_eq!(
            payne_weinberger_lower(lam * d).unwrap(),
            payne_weinberger_lower(d).unwrap() / (lam * lam),
            max_relative = 1e-13
        );
        for p in [1.5, 2.0, 3.0] {
            assert_relative_eq!(
                ent_lower(lam * d, p).unwrap(),
                ent_lower(d, p).unwrap() / lam.powf(p),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn szego_weinberger_values() {
        // unit disc
        assert_relative_eq!(
            szego_weinberger_upper(2, PI).unwrap(),
            3.389957716671889,
            max_relative = 1e-9
        );
        // volume 4π scales the disc value by 1/4
        assert_relative_eq!(
            szego_weinberger_upper(2, 4.0 * PI).unwrap(),
            3.389957716671889 / 4.0,
            max_relative = 1e-9
        );
        // unit ball in 3-D
        assert_relative_eq!(
            szego_weinberger_upper(3, 4.0 * PI / 3.0).unwrap(),
            4.33295855142938,
            max_relative = 1e-9
        );
        assert!(matches!(szego_weinberger_upper(4, 1.0), Err(NbError::Unsupported(_))));
    }

    #[test]
    fn classical_bundle_is_consistent() {
        // unit square: volume 1, diameter sqrt(2)
        let c = ClassicalBounds::compute(2, 1.0, 2.0f64.sqrt(), 2.0).unwrap();
        assert_relative_eq!(c.pw_lower, c.ent_lower, max_relative = 1e-14);
        assert!(c.sw_upper >= c.pw_lower);
        assert_relative_eq!(c.ball_radius, (1.0 / PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(1), 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn radicand_variants() {
        let pr = profile(vec![1.0, 1.0]);
        // simplified at a=1: 3 - 4 = -1; corrected adds 4
        assert_relative_eq!(radicand(1.0, &pr, Variant::Simplified), -1.0, epsilon = 1e-15);
        assert_relative_eq!(radicand(1.0, &pr, Variant::Corrected), 3.0, epsilon = 1e-15);
        assert!(matches!(
            k_pq_closed(1.0, &pr, 2.0, 1.5, Variant::Simplified),
            Err(NbError::InvalidVariant(_))
        ));
        assert_relative_eq!(
            k_pq_closed(1.0, &pr, 2.0, 1.5, Variant::Corrected).unwrap(),
            3.0f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn k_closed_hand_value() {
        let pr = profile(vec![2.0, 2.0]);
        let k = k_pq_closed(0.5, &pr, 2.0, 1.5, Variant::Corrected).unwrap();
        // 0.5^{-1/2} * sqrt(0.25*9 - 4 + 4) = sqrt(2) * 1.5
        assert_relative_eq!(k, 2.0f64.sqrt() * 1.5, max_relative = 1e-14);
    }

    #[test]
    fn corrected_radicand_is_always_positive() {
        // discriminant analysis: (Σγ)² ≤ (n−1)Σγ² < 2(n−1)(Σγ²+1)
        for gam in [vec![1.0], vec![3.5], vec![1.0, 1.0], vec![3.0, 1.2]] {
            let pr = profile(gam);
            for a in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0] {
                assert!(radicand(a, &pr, Variant::Corrected) > 0.0);
            }
        }
    }

    #[test]
    fn m_exact_values() {
        let pr = profile(vec![1.0, 1.0]);
        assert_relative_eq!(
            m_rp_exact(1.0, &pr, 4.0, 2.0).unwrap(),
            (1.0f64 / 3.0).powf(0.25),
            max_relative = 1e-14
        );
        let pr5 = profile(vec![2.0, 2.0]);
        assert_relative_eq!(
            m_rp_exact(0.55, &pr5, 5.0, 2.0).unwrap(),
            0.5578625535268179,
            max_relative = 1e-14
        );
        // β = 0 configuration collapses to the shortcut a^{1/p}
        let m = m_rp_exact(0.4, &pr5, 4.0, 2.0).unwrap();
        assert_relative_eq!(m, m_rp_shortcut(0.4, 2.0), max_relative = 1e-14);
        assert_relative_eq!(m, 0.4f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn m_divergence_threshold() {
        let pr5 = profile(vec![2.0, 2.0]);
        assert!(matches!(
            m_rp_exact(0.24, &pr5, 5.0, 2.0),
            Err(NbError::DivergentIntegral(_))
        ));
        assert!(m_rp_exact(0.2401, &pr5, 5.0, 2.0).is_ok());
    }

    #[test]
    fn b_rq_values() {
        assert_relative_eq!(b_rq_h1(3, 2.0, 2.0).unwrap(), 8.107703070190471, max_relative = 1e-12);
        assert_relative_eq!(b_rq_h1(2, 2.0, 2.0).unwrap(), 2.8944050182330705, max_relative = 1e-12);
        // δ = 0 value is independent of the common exponent
        assert_relative_eq!(
            b_rq_h1(3, 1.5, 1.5).unwrap(),
            b_rq_h1(3, 4.0, 4.0).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn b_rq_pole() {
        // n=3, q=1.5: pole at r = nq/(n-q) = 3
        let vals: Vec<f64> =
            [2.5, 2.9, 2.99, 2.999].iter().map(|&r| b_rq_h1(3, 1.5, r).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(vals[3] > 100.0 * vals[0] / 10.0);
        assert!(matches!(b_rq_h1(3, 1.5, 3.0), Err(NbError::Unbounded(_))));
        assert!(matches!(b_rq_h1(3, 1.5, 10.0), Err(NbError::Unbounded(_))));
        assert!(matches!(b_rq_h1(3, 1.5, 1.0), Err(NbError::InvalidExponents(_))));
    }

    #[test]
    fn composite_arithmetic() {
        assert_relative_eq!(composite_mu_lower(1.0, 1.0, 1.0, 2.0), 1.0);
        assert_relative_eq!(composite_mu_lower(1.0, 1.0, 1.0, 3.7), 1.0);
        assert_relative_eq!(composite_mu_lower(2.0, 1.0, 1.0, 2.0), 0.25);
    }

    #[test]
    fn composite_golden_pipeline() {
        // n=3, γ=(1,1), p=2, q=1.5, r=2.75, a=1
        let pr = profile(vec![1.0, 1.0]);
        let k = k_pq_closed(1.0, &pr, 2.0, 1.5, Variant::Corrected).unwrap();
        let m = m_rp_exact(1.0, &pr, 2.75, 2.0).unwrap();
        let b = b_rq_h1(3, 1.5, 2.75).unwrap();
        assert_relative_eq!(m, 0.8608708665020085, max_relative = 1e-13);
        assert_relative_eq!(b, 62.96590479750118, max_relative = 1e-13);
        let mu = composite_mu_lower(k, m, b, 2.0);
        assert_relative_eq!(mu, 0.00011344668945677483, max_relative = 1e-12);
    }

    #[test]
    fn composite_monotone_in_constants() {
        let base = composite_mu_lower(1.3, 0.9, 5.0, 2.0);
        assert!(composite_mu_lower(1.4, 0.9, 5.0, 2.0) < base);
        assert!(composite_mu_lower(1.3, 0.9, 6.0, 2.0) < base);
    }

    #[test]
    fn shortcut_cancellation_identity() {
        // k_pq_closed · a^{1/p} reproduces sqrt(radicand) exactly
        let pr = profile(vec![2.0, 2.0]);
        for a in [0.42, 0.5, 0.55, 0.62] {
            let k = k_pq_closed(a, &pr, 2.0, 1.5, Variant::Corrected).unwrap();
            let lhs = k * m_rp_shortcut(a, 2.0);
            assert_relative_eq!(
                lhs,
                radicand(a, &pr, Variant::Corrected).sqrt(),
                max_relative = 1e-14
            );
        }
        // the simplified radicand needs a > 8/9 here to be nonnegative
        for a in [0.9, 1.0, 1.2] {
            let k = k_pq_closed(a, &pr, 2.0, 1.5, Variant::Simplified).unwrap();
            let lhs = k * m_rp_shortcut(a, 2.0);
            assert_relative_eq!(
                lhs,
                radicand(a, &pr, Variant::Simplified).sqrt(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn cusp_bound_clamps_for_flat_profile() {
        let pr = profile(vec![1.0, 1.0]);
        let rep = cusp_mu_lower(&pr, 2.0, &SearchOpts::default()).unwrap();
        assert_eq!(rep.a_star, 1.0);
        assert!(rep.a_on_boundary);
        assert!(rep.simplified_invalid);
        assert!(rep.k_pq_simplified.is_none());
        assert_relative_eq!(rep.k_pq, 3.0f64.sqrt(), max_relative = 1e-14);
        assert!(!rep.extrapolated);
        // report-level identity
        let p = rep.exponents.p;
        assert_relative_eq!(
            rep.mu_lower * (rep.k_pq * rep.m_rp * rep.b_rq).powf(p),
            1.0,
            max_relative = 1e-12
        );
        assert!(rep.mu_lower > 0.0);
    }

    #[test]
    fn cusp_bound_simplified_variant_invalid_for_flat_profile() {
        let pr = profile(vec![1.0, 1.0]);
        let opts = SearchOpts { variant: Variant::Simplified, ..SearchOpts::default() };
        assert!(matches!(cusp_mu_lower(&pr, 2.0, &opts), Err(NbError::InvalidVariant(_))));
    }

    #[test]
    fn interior_vertex_for_steeper_profile() {
        // γ=(2,2), p=2, q=1.5, r=2.9: the radicand vertex 4/9 is admissible
        let pr = profile(vec![2.0, 2.0]);
        let rep = bound_for_qr(&pr, 2.0, 1.5, 2.9, Variant::Corrected).unwrap();
        assert_relative_eq!(rep.a_star, 4.0 / 9.0, max_relative = 1e-12);
        assert!(!rep.a_on_boundary);
        // at a smaller r the integrability threshold pushes a off the vertex
        let rep2 = bound_for_qr(&pr, 2.0, 1.5, 2.2, Variant::Corrected).unwrap();
        assert!(rep2.a_on_boundary);
        assert!(rep2.a_star > 4.0 / 9.0);
    }

    #[test]
    fn search_beats_single_cells() {
        let pr = profile(vec![2.0, 2.0]);
        let rep = cusp_mu_lower(&pr, 2.0, &SearchOpts::default()).unwrap();
        for (q, r) in [(1.5, 2.9), (1.5, 2.2), (1.8, 4.2), (1.3, 2.2)] {
            let cell = bound_for_qr(&pr, 2.0, q, r, Variant::Corrected).unwrap();
            assert!(rep.mu_lower >= cell.mu_lower * (1.0 - 1e-12));
        }
    }

    #[test]
    fn high_exponents_on_sharp_plane_cusps_still_yield_bounds() {
        // Near the Sobolev ceiling r → nq/(n−q) the integrability floor
        // np/(γr) converges to the interval's own lower endpoint, so some
        // candidate cell survives for every 1 < p < gamma_total. These two
        // profiles used to be rejected when the search wrongly demanded the
        // closed form also dominate the quadrature value.
        for g1 in [2.5, 3.0, 3.2] {
            let pr = profile(vec![g1]);
            let rep = cusp_mu_lower(&pr, 3.0, &SearchOpts::default()).unwrap();
            assert!(rep.extrapolated);
            assert!(rep.mu_lower > 0.0, "gamma1 = {g1} gave {rep:#?}");
            assert!(rep.mu_lower.is_finite());
        }
    }

    #[test]
    fn rejects_bad_p() {
        let pr = profile(vec![1.0, 1.0]);
        assert!(matches!(
            cusp_mu_lower(&pr, 3.0, &SearchOpts::default()),
            Err(NbError::InvalidExponents(_))
        )); // p = γ
        assert!(cusp_mu_lower(&pr, 0.9, &SearchOpts::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cancellation_identity_random(a in 0.05f64..3.0, g1 in 1.0f64..3.5, g2 in 1.0f64..3.5) {
            let pr = profile(vec![g1, g2]);
            // fixed admissible exponents: p < 1 + g1 + g2 always holds for p = 1.9
            let k = k_pq_closed(a, &pr, 1.9, 1.45, Variant::Corrected).unwrap();
            let lhs = k * m_rp_shortcut(a, 1.9);
            let rhs = radicand(a, &pr, Variant::Corrected).sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn search_reports_are_internally_consistent(
            g1 in 1.1f64..3.0,
            g2 in 1.1f64..3.0,
            p_t in 0.1f64..0.9,
        ) {
            let pr = profile(vec![g1, g2]);
            let p = 1.0 + p_t * (pr.gamma_total - 1.2);
            prop_assume!(p > 1.05);
            let opts = SearchOpts { q_points: 8, r_points: 8, refine_rounds: 1, ..Default::default() };
            match cusp_mu_lower(&pr, p, &opts) {
                Ok(rep) => {
                    prop_assert!(rep.mu_lower > 0.0);
                    let identity = rep.mu_lower * (rep.k_pq * rep.m_rp * rep.b_rq).powf(p);
                    prop_assert!((identity - 1.0).abs() < 1e-10);
                    prop_assert!(rep.exponents.q > 1.0 && rep.exponents.q < p);
                    prop_assert!(rep.exponents.r > p);
                    prop_assert!(rep.a_star > 0.0);
                }
                Err(NbError::NoBoundAvailable(_)) => {}
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error: {e}"))),
            }
        }
    }
}
