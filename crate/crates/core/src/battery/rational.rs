//! One-sided rational approximation of conversion rates.
//!
//! A rate r is realized by swapping n copies in for m copies out, so the plan
//! needs m/n ≤ r. The best such fraction with n ≤ N is a convergent or an
//! intermediate fraction (semiconvergent) of the continued fraction of r;
//! its gap to r is below 1/N.

/// Default denominator cap.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// |r − m/n| below this (relative to max(1, r)) counts as an exact rational.
/// Kept near rounding noise: with n up to 10⁶ an irrational r already has
/// convergents within 1/n² ≈ 1e-12.
pub const EXACT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerApproximation {
    pub numerator: u64,
    pub denominator: u64,
    /// r − m/n
    pub gap: f64,
    pub exact: bool,
}

/// Partial quotients of x ≥ 0 until the expansion terminates (within
/// [`EXACT_TOL`]) or a convergent denominator exceeds `max_den`.
pub fn continued_fraction(x: f64, max_den: u64) -> Vec<u64> {
    let mut terms = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut r = x;
    loop {
        let a = r.floor();
        let ai = a as u128;
        terms.push(ai as u64);
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_den as u128 || (x - p2 as f64 / q2 as f64).abs() <= EXACT_TOL * x.max(1.0) {
            break;
        }
        let frac = r - a;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    terms
}

/// Convergents p_k/q_k of x with q_k ≤ max_den.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut out = Vec::new();
    for a in continued_fraction(x, max_den) {
        let a = a as u128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as u128 {
            break;
        }
        out.push((p2 as u64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

/// Largest m/n ≤ x with 1 ≤ n ≤ max_den (x ≥ 0, finite).
pub fn best_lower_approximation(x: f64, max_den: u64) -> LowerApproximation {
    assert!(x.is_finite() && x >= 0.0, "rate must be finite and non-negative");
    assert!(max_den >= 1);
    let n_max = max_den as u128;
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut best = (0u128, 1u128);
    let mut r = x;
    let mut k = 0usize;
    loop {
        let a = r.floor();
        let ai = a as u128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if k.is_multiple_of(2) {
            // (p0 + j p1)/(q0 + j q1), j = 1..=a, approach x from below
            // q1 = 0 only before the first convergent, where any j is in range
            let j_cap = ai.min(n_max.saturating_sub(q0).checked_div(q1).unwrap_or(ai));
            if j_cap >= 1 {
                best = (p0 + j_cap * p1, q0 + j_cap * q1);
            }
            if j_cap < ai {
                break;
            }
        }
        if q2 > n_max {
            break;
        }
        if (x - p2 as f64 / q2 as f64).abs() <= EXACT_TOL * x.max(1.0) {
            best = (p2, q2);
            break;
        }
        let frac = r - a;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        k += 1;
    }
    let (m, n) = best;
    let gap = x - m as f64 / n as f64;
    LowerApproximation {
        numerator: m as u64,
        denominator: n as u64,
        gap,
        exact: gap.abs() <= EXACT_TOL * x.max(1.0),
    }
}
