use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rational::{factorial, ln_big, qi, qu, to_f64, Q};

use super::equidistributed::equidistributed_count;

/// `g(t) = −t log t` with `g(0) = 0`.
pub fn shannon_g(t: &Q) -> Result<f64> {
    if t.is_negative() || *t > Q::one() {
        return Err(invalid(format!("g is defined on [0,1], got {t}")));
    }
    Ok(shannon_g_f64(to_f64(t)))
}

pub fn shannon_g_f64(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// `h(t) = g(t) + g(1−t) + (1−t) log(k−1)`.
pub fn entropy_h(t: f64, k: usize) -> f64 {
    let tail = if k > 1 { (1.0 - t) * ((k - 1) as f64).ln() } else { 0.0 };
    shannon_g_f64(t) + shannon_g_f64(1.0 - t) + tail
}

/// `δ₁ = (η/2)(h(1/k) − max(h(1/k−ε), h(1/k+ε)))`, dropping sides outside `[0,1]`.
///
/// `h` increases on `[0,1/k]` and decreases on `[1/k,1]`, so its maximum off
/// the open window `(1/k−ε, 1/k+ε)` sits at one of the two window ends.
pub fn delta1(k: usize, epsilon: f64, eta: f64) -> Result<f64> {
    if k < 2 || epsilon <= 0.0 || eta <= 0.0 {
        return Err(invalid("delta1 needs k ≥ 2, ε > 0, η > 0"));
    }
    let c = 1.0 / k as f64;
    let mut off = f64::NEG_INFINITY;
    if c - epsilon >= -1e-15 {
        off = off.max(entropy_h((c - epsilon).max(0.0), k));
    }
    if c + epsilon <= 1.0 + 1e-15 {
        off = off.max(entropy_h((c + epsilon).min(1.0), k));
    }
    if off == f64::NEG_INFINITY {
        return Err(invalid("window covers [0,1]; no deviant proportions exist"));
    }
    Ok(eta / 2.0 * (entropy_h(c, k) - off))
}

/// Least integer `N ≥ floor` with `phi(t) ≥ 0` for all real `t ≥ N`, for convex `phi`.
pub(crate) fn least_tail_integer(
    phi: impl Fn(f64) -> f64,
    dphi: impl Fn(f64) -> f64,
    floor: f64,
) -> f64 {
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while dphi(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let start = hi.max(floor);
    if phi(start) >= 0.0 {
        return floor.ceil();
    }
    let mut a = start;
    let mut b = start * 2.0;
    while phi(b) < 0.0 {
        a = b;
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if phi(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    b.ceil().max(floor.ceil())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StirlingReport {
    pub m: u64,
    #[serde(with = "crate::rational::serde_biguint")]
    pub factorial: BigUint,
    /// Enclosure of `e(m/e)^m`.
    #[serde(with = "crate::rational::serde_q_vec")]
    pub lower: Vec<Q>,
    /// Enclosure of `e·m·(m/e)^m`.
    #[serde(with = "crate::rational::serde_q_vec")]
    pub upper: Vec<Q>,
    pub lower_approx: f64,
    pub upper_approx: f64,
    pub pass: bool,
}

/// Rational enclosure `[lo, hi]` of e from `terms` Taylor terms.
pub fn e_enclosure(terms: u64) -> (Q, Q) {
    let terms = terms.max(2);
    let mut lo = Q::zero();
    let mut fact = BigUint::one();
    for i in 0..=terms {
        if i > 0 {
            fact *= i;
        }
        lo += Q::new(BigInt::one(), BigInt::from(fact.clone()));
    }
    // tail Σ_{i>K} 1/i! < 1/(K!·K)
    let tail = Q::new(BigInt::one(), BigInt::from(fact * terms));
    let hi = &lo + tail;
    (lo, hi)
}

/// Certifies `e(m/e)^m ≤ m! ≤ e·m·(m/e)^m` with an exact enclosure of e.
pub fn stirling_check(m: u64, terms: u64) -> Result<StirlingReport> {
    if m == 0 {
        return Err(invalid("m must be positive"));
    }
    let (e_lo, e_hi) = e_enclosure(terms);
    let mm = Q::from_integer(num_traits::pow(BigInt::from(m), m as usize));
    let exp = (m - 1) as usize;
    let pow_lo = num_traits::pow(e_lo.clone(), exp);
    let pow_hi = num_traits::pow(e_hi.clone(), exp);
    // m^m·e^{1−m} shrinks as e grows
    let lower = vec![&mm / &pow_hi, &mm / &pow_lo];
    let mq = qi(m as i64);
    let upper = vec![&mm * &mq / &pow_hi, &mm * &mq / &pow_lo];
    let fact = factorial(m);
    let fq = qu(&fact);
    let pass = lower[1] <= fq && fq <= upper[0];
    let mf = m as f64;
    Ok(StirlingReport {
        m,
        factorial: fact,
        lower_approx: (mf * mf.ln() + 1.0 - mf).exp(),
        upper_approx: (mf * mf.ln() + mf.ln() + 1.0 - mf).exp(),
        lower,
        upper,
        pass,
    })
}

/// Least integer `N ≥ k` with `e^{k−1} t^k ≤ e^{δt}` for every real `t ≥ N`.
pub fn regular_threshold(k: usize, delta: f64) -> Result<u64> {
    if k < 1 || delta <= 0.0 {
        return Err(invalid("need k ≥ 1 and δ > 0"));
    }
    let kf = k as f64;
    let n = least_tail_integer(
        |t| delta * t - (kf - 1.0) - kf * t.ln(),
        |t| delta - kf / t,
        kf,
    );
    Ok(n as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularBoundCheck {
    pub n: usize,
    pub k: usize,
    #[serde(with = "crate::rational::serde_biguint")]
    pub count: BigUint,
    /// `ln|ℛ| − (n ln k − δn)`.
    pub log_margin: f64,
    pub holds: bool,
    /// Whether the log comparison was too close and an exact series bound decided.
    pub exact_fallback: bool,
}

/// Lower and upper rational bounds of `e^x` for rational `x ≥ 0`.
fn exp_bounds(x: &Q, terms: usize) -> (Q, Q) {
    let mut sum = Q::zero();
    let mut term = Q::one();
    for i in 0..=terms {
        if i > 0 {
            term = term * x / qi(i as i64);
        }
        sum += &term;
    }
    let next = &term * x / qi(terms as i64 + 1);
    let ratio = x / qi(terms as i64 + 2);
    let upper = if ratio < Q::one() { &sum + next / (Q::one() - ratio) } else { sum.clone() * qi(1 << 20) };
    (sum, upper)
}

/// Checks `|ℛ(Z,k)| ≥ k^n e^{−δn}` on exact counts.
pub fn regular_bound_check(k: usize, delta: &Q, n: usize) -> Result<RegularBoundCheck> {
    if k < 1 || !delta.is_positive() {
        return Err(invalid("need k ≥ 1 and δ > 0"));
    }
    let count = equidistributed_count(n, k);
    let df = to_f64(delta);
    let log_margin = ln_big(&count) - (n as f64 * (k as f64).ln() - df * n as f64);
    let safety = 1e-6;
    if log_margin.abs() > safety {
        return Ok(RegularBoundCheck { n, k, count, log_margin, holds: log_margin > 0.0, exact_fallback: false });
    }
    let x = delta * qi(n as i64);
    let target = qu(&num_traits::pow(BigUint::from(k), n));
    let cq = qu(&count);
    let mut terms = 16 + 4 * to_f64(&x).ceil() as usize;
    loop {
        let (lo, hi) = exp_bounds(&x, terms);
        if &cq * &lo >= target {
            return Ok(RegularBoundCheck { n, k, count, log_margin, holds: true, exact_fallback: true });
        }
        if &cq * &hi < target {
            return Ok(RegularBoundCheck { n, k, count, log_margin, holds: false, exact_fallback: true });
        }
        terms *= 2;
        if terms > 1 << 14 {
            return Err(invalid("exponential enclosure did not separate"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn shannon_frozen_values() {
        assert_eq!(shannon_g(&q(0, 1)).unwrap(), 0.0);
        assert_eq!(shannon_g(&q(1, 1)).unwrap(), 0.0);
        assert!((shannon_g(&q(1, 2)).unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(shannon_g(&q(3, 2)).is_err());
        assert!(shannon_g(&q(-1, 2)).is_err());
    }

    #[test]
    fn shannon_peaks_at_inverse_e() {
        let peak = shannon_g_f64(1.0 / std::f64::consts::E);
        for i in 0..=1000 {
            assert!(shannon_g_f64(i as f64 / 1000.0) <= peak + 1e-15);
        }
    }

    #[test]
    fn entropy_endpoints() {
        for k in 2..6 {
            assert!((entropy_h(1.0 / k as f64, k) - (k as f64).ln()).abs() < 1e-12);
            assert!((entropy_h(0.0, k) - ((k - 1) as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn delta1_binary_full_window() {
        let d = delta1(2, 0.5, 1.0).unwrap();
        assert!((d - 2f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stirling_frozen() {
        let one = stirling_check(1, 30).unwrap();
        assert!(one.pass);
        assert_eq!(one.lower[0], Q::one());
        assert_eq!(one.upper[1], Q::one());
        let two = stirling_check(2, 30).unwrap();
        assert!(two.pass);
        assert!((two.lower_approx - 1.4715).abs() < 1e-3);
        assert!((two.upper_approx - 2.9430).abs() < 1e-3);
        assert!(stirling_check(10, 30).unwrap().pass);
        assert!(stirling_check(0, 30).is_err());
    }

    #[test]
    fn e_enclosure_brackets_e() {
        let (lo, hi) = e_enclosure(20);
        assert!(to_f64(&lo) <= std::f64::consts::E && std::f64::consts::E <= to_f64(&hi));
    }

    #[test]
    fn regular_threshold_values() {
        let n = regular_threshold(2, 0.5).unwrap();
        assert_eq!(n, 12);
        let t = n as f64;
        assert!(1.0 + 2.0 * t.ln() <= 0.5 * t);
    }

    #[test]
    fn regular_bound_small_cases() {
        let c = regular_bound_check(2, &q(1, 2), 12).unwrap();
        assert!(c.holds);
        assert_eq!(c.count, BigUint::from(924u32));
    }
}
