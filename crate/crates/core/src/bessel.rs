//! Bessel evaluations and the two root constants used by the ball
//! comparison bound: the first positive zero of J_1′ (dimension 2) and the
//! first positive zero of d/dt [t^{−1/2} J_{3/2}(t)] (dimension 3).

/// J_0 by power series. Accurate to near machine precision for |x| ≤ 12;
/// the roots we bracket live well inside that range.
pub fn j0(x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..60 {
        term *= z / ((m * m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// J_1 by power series; same range notes as [`j0`].
pub fn j1(x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for m in 1..60 {
        term *= z / ((m * (m + 1)) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(
        flo * f(hi) < 0.0,
        "bisection bracket [{lo}, {hi}] does not change sign"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First positive zero of J_1′(t) = J_0(t) − J_1(t)/t, bracketed in [1, 3].
/// This is the radial mode constant of the two-dimensional unit disc.
pub fn first_zero_j1_prime() -> f64 {
    bisect(|t| j0(t) - j1(t) / t, 1.0, 3.0)
}

/// First positive zero of d/dt [t^{−1/2} J_{3/2}(t)], bracketed in [1.5, 3].
///
/// J_{3/2}(t) = sqrt(2/(πt)) (sin t / t − cos t), so the derivative condition
/// reduces to (t² − 2) sin t + 2t cos t = 0, which is what we solve.
pub fn first_zero_radial32_prime() -> f64 {
    bisect(|t| (t * t - 2.0) * t.sin() + 2.0 * t * t.cos(), 1.5, 3.0)
}
