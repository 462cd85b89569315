//! Randomized cross-checking of the closed-form constants against the
//! quadrature engine: a deterministic sampler for admissible parameter
//! tuples, and the per-tuple comparison row used by the verification CLI
//! and the acceptance suite.

use crate::bounds::{self, Variant};
use crate::cuspmap::CuspMap;
use crate::domain::{admissible_a_interval, CuspProfile};
use crate::error::NbError;
use crate::quad::{k_pq_numeric, m_rp_numeric, QuadSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One admissible parameter tuple: the K-inequality and the M-identity are
/// checkable at every point the sampler emits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyTuple {
    pub profile: CuspProfile,
    pub a: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

/// Tolerance for the one-sided closed-form check k_numeric ≤ k_closed·(1+tol).
pub const K_CHECK_TOL: f64 = 1e-6;
/// Relative tolerance for the exact-identity check on M.
pub const M_CHECK_TOL: f64 = 1e-7;

/// Draws `count` admissible tuples, reproducibly from `seed`.
///
/// The sample space: n ∈ {2, 3}; cross-section exponents uniform in
/// [1, 3.5); p uniform between 1.1 and min(γ − 0.05, 4); q uniform in the
/// window that leaves room for r; r log-uniform between p and the Sobolev
/// conjugate (both inset by 2%). The map parameter a is then drawn from the
/// effective admissible interval, additionally capped so that
///   - the closed form stays a certified upper bound for K (a at most the
///     validity cap), and
///   - the Jacobian power integrand keeps exponent ≥ −0.25, comfortably
///     inside the quadrature engine's high-accuracy regime.
/// Draws violating any window are rejected and retried.
pub fn sample_admissible_tuples(count: usize, seed: u64) -> Vec<VerifyTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(
            attempts < 200_000,
            "tuple sampler exceeded its rejection budget; the windows are wrong"
        );
        let n: usize = if rng.gen_bool(0.5) { 2 } else { 3 };
        let gammas: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(1.0..3.5)).collect();
        let profile = CuspProfile::new(n, gammas).expect("sampled exponents are valid");
        let gamma = profile.gamma_total;
        let nf = n as f64;
        let p_hi = (gamma - 0.05).min(4.0);
        if p_hi <= 1.1 {
            continue;
        }
        let p = rng.gen_range(1.1..p_hi);
        let q_lo = (nf * p / (nf + p) + 0.02).max(1.02);
        let q_hi = p.min(nf) - 0.02;
        if q_hi <= q_lo {
            continue;
        }
        let q = rng.gen_range(q_lo..q_hi);
        let r_lo = 1.02 * p;
        let r_hi = 0.98 * nf * q / (nf - q);
        if r_hi <= r_lo {
            continue;
        }
        let r = r_lo * (r_hi / r_lo).powf(rng.gen_range(0.0..1.0));
        let interval = admissible_a_interval(&profile, p, q).expect("window keeps q < p < gamma");
        let a_div = nf * p / (gamma * r);
        let a_quad = (nf - (nf - 0.75) * (r - p) / r) / gamma;
        let lo = interval.lo.max(a_div).max(a_quad);
        let hi = interval.hi.min(bounds::k_validity_cap(&profile, p, q));
        if !(lo < hi) {
            continue;
        }
        let a = rng.gen_range((lo + 0.02 * (hi - lo))..hi);
        out.push(VerifyTuple { profile, a, p, q, r });
    }
    out
}

/// Closed-form and quadrature values for one tuple, plus a status word:
/// "ok", or a '+'-joined list of failed checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub tuple: VerifyTuple,
    pub k_closed_corrected: f64,
    /// None when the simplified radicand is negative at this a.
    pub k_closed_simplified: Option<f64>,
    pub k_numeric: f64,
    pub m_exact: f64,
    pub m_numeric: f64,
    pub status: String,
}

impl VerifyRow {
    pub fn passed(&self) -> bool {
        self.status == "ok"
    }
}

/// Runs both cross-checks for one tuple. Errors only on genuine evaluation
/// failure (divergence, precision loss); check failures land in `status`.
pub fn verify_tuple(t: &VerifyTuple, spec: &QuadSpec) -> Result<VerifyRow, NbError> {
    let map = CuspMap::new(t.a, t.profile.clone())?;
    let k_closed_corrected = bounds::k_pq_closed(t.a, &t.profile, t.p, t.q, Variant::Corrected)?;
    let k_closed_simplified =
        bounds::k_pq_closed(t.a, &t.profile, t.p, t.q, Variant::Simplified).ok();
    let k_numeric = k_pq_numeric(&map, t.p, t.q, spec)?;
    let m_exact = bounds::m_rp_exact(t.a, &t.profile, t.r, t.p)?;
    let m_numeric = m_rp_numeric(&map, t.r, t.p, spec)?;
    let mut failures = Vec::new();
    if !(k_numeric <= k_closed_corrected * (1.0 + K_CHECK_TOL)) {
        failures.push("k-exceeds-closed-form");
    }
    if !((m_numeric - m_exact).abs() <= M_CHECK_TOL * m_exact) {
        failures.push("m-mismatch");
    }
    let status = if failures.is_empty() { "ok".to_string() } else { failures.join("+") };
    Ok(VerifyRow {
        tuple: t.clone(),
        k_closed_corrected,
        k_closed_simplified,
        k_numeric,
        m_exact,
        m_numeric,
        status,
    })
}
