//! Count-based dynamic program for one-sided crossing probabilities.
//!
//! The event `{xi_i >= a_i for all i}` holds iff fewer than i of the m points
//! lie at or below `a_i`, for every i. Collapsing equal thresholds (the
//! binding cap at a value is the one from its smallest index) leaves distinct
//! cut points `0 < t_1 < ... < t_r < 1` with caps `c_1 < ... < c_r`, and the
//! chain rule gives a DP over (cut index, count at or below the cut) with
//! transition weight `C(m-s', s-s') * (t_j - t_{j-1})^{s-s'}` and final
//! factor `(1 - t_r)^{m-s}`.
//!
//! The exact path runs those weights over the common denominator of the
//! thresholds, so every state is a plain big integer and the result is a
//! reduced rational. The float path carries the algebraically identical
//! conditional form: given s' points at or below `t_{j-1}`, the count landing
//! in `(t_{j-1}, t_j]` is Binomial(m-s', d) with
//! `d = (t_j - t_{j-1})/(1 - t_{j-1})`, which keeps every intermediate value
//! inside [0,1] — no rescaling, no cancellation (all terms are nonnegative).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::boundary::{
    lower_profile, reflect_to_lower, upper_profile, BoundaryQuery, LowerThresholdProfile,
    ProbabilityResult,
};
use crate::error::Error;

/// Largest m for which the automatic mode picks exact rational arithmetic.
pub const EXACT_M_LIMIT: usize = 200;

/// Arithmetic selection for the dynamic program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArithMode {
    /// Exact rationals for m <= 200, compensated floats beyond.
    #[default]
    Auto,
    Exact,
    Float,
}

struct Collapsed<T> {
    /// Distinct thresholds strictly inside (0,1), paired with the count cap
    /// (at most `cap` points may lie at or below the threshold).
    steps: Vec<(T, usize)>,
    /// Some threshold equals 1: the event has probability zero.
    hits_one: bool,
}

fn collapse_rational(ts: &[BigRational]) -> Collapsed<BigRational> {
    let one = BigRational::one();
    let mut steps: Vec<(BigRational, usize)> = Vec::new();
    for (idx0, t) in ts.iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        if *t == one {
            return Collapsed { steps, hits_one: true };
        }
        if steps.last().map_or(false, |(prev, _)| prev == t) {
            continue; // binding cap is the first index with this value
        }
        steps.push((t.clone(), idx0));
    }
    Collapsed { steps, hits_one: false }
}

fn collapse_float(ts: &[f64]) -> Collapsed<f64> {
    let mut steps: Vec<(f64, usize)> = Vec::new();
    for (idx0, &t) in ts.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        if t >= 1.0 {
            return Collapsed { steps, hits_one: true };
        }
        if steps.last().map_or(false, |&(prev, _)| prev == t) {
            continue;
        }
        steps.push((t, idx0));
    }
    Collapsed { steps, hits_one: false }
}

/// Rows of Pascal's triangle up to n, as big integers.
fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    rows.push(vec![BigInt::one()]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = Vec::with_capacity(r + 1);
        row.push(BigInt::one());
        for c in 1..r {
            row.push(&prev[c - 1] + &prev[c]);
        }
        row.push(BigInt::one());
        rows.push(row);
    }
    rows
}

/// Exact DP over a common denominator. States are `f_j(s) * den^s`.
pub(crate) fn dp_exact(profile: &LowerThresholdProfile) -> BigRational {
    let m = profile.m();
    let collapsed = collapse_rational(profile.thresholds());
    if collapsed.hits_one {
        return BigRational::zero();
    }
    if collapsed.steps.is_empty() {
        return BigRational::one();
    }

    let den = collapsed
        .steps
        .iter()
        .fold(BigInt::one(), |acc, (t, _)| acc.lcm(t.denom()));
    let nums: Vec<BigInt> = collapsed
        .steps
        .iter()
        .map(|(t, _)| t.numer() * (&den / t.denom()))
        .collect();
    let caps: Vec<usize> = collapsed.steps.iter().map(|&(_, c)| c).collect();

    let binom = pascal(m);
    let mut states: Vec<BigInt> = vec![BigInt::one()];
    let mut prev_num = BigInt::zero();
    for (step, cap) in nums.iter().zip(caps.iter()) {
        let delta = step - &prev_num;
        let mut delta_pows: Vec<BigInt> = Vec::with_capacity(cap + 1);
        delta_pows.push(BigInt::one());
        for e in 1..=*cap {
            delta_pows.push(&delta_pows[e - 1] * &delta);
        }
        let mut next = vec![BigInt::zero(); cap + 1];
        for (s_prev, f) in states.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            for s in s_prev..=*cap {
                next[s] += f * &binom[m - s_prev][s - s_prev] * &delta_pows[s - s_prev];
            }
        }
        states = next;
        prev_num = step.clone();
    }

    // final factor (1 - t_r)^{m-s}, scaled: (den - n_r)^{m-s} * den^{s} / den^m
    let rest = &den - &prev_num;
    let mut rest_pows: Vec<BigInt> = vec![BigInt::one()];
    let mut den_pows: Vec<BigInt> = vec![BigInt::one()];
    for e in 1..=m {
        rest_pows.push(&rest_pows[e - 1] * &rest);
        den_pows.push(&den_pows[e - 1] * &den);
    }
    let mut numerator = BigInt::zero();
    for (s, f) in states.iter().enumerate() {
        numerator += f * &rest_pows[m - s] * &den_pows[s];
    }
    BigRational::new(numerator, den_pows[m].clone())
}

/// Natural log of the gamma function (Lanczos, g = 7). Used only on the rare
/// slow path where a binomial row underflows.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn ln_binom(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

#[inline]
fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Float DP in the conditional (probability-valued) form.
///
/// Error bound: each binomial row is produced by a multiplicative recurrence
/// (one rounding per step, at most m steps), each state update adds one
/// compensated accumulation per cut, and the result is a sum of at most m
/// nonnegative terms of total at most 1. That gives a relative bound of
/// `(2m + 4r + 8) * eps` on the returned value, plus `1e-13` per row that
/// took the log-space fallback.
pub(crate) fn dp_float(ts: &[f64], m: usize) -> (f64, f64) {
    let collapsed = collapse_float(ts);
    if collapsed.hits_one {
        return (0.0, 0.0);
    }
    if collapsed.steps.is_empty() {
        return (1.0, 0.0);
    }
    let r = collapsed.steps.len();

    let mut states: Vec<f64> = vec![1.0];
    let mut prev_t = 0.0f64;
    let mut slow_rows: usize = 0;
    for &(t, cap) in &collapsed.steps {
        let d = (t - prev_t) / (1.0 - prev_t);
        let d = d.clamp(0.0, 1.0);
        let mut next = vec![0.0f64; cap + 1];
        let mut comp = vec![0.0f64; cap + 1];
        for (s_prev, &f) in states.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            let n = m - s_prev;
            let max_k = cap - s_prev;
            let log_p0 = n as f64 * (-d).ln_1p();
            if log_p0 > -700.0 {
                let ratio = d / (1.0 - d);
                let mut pmf = (1.0 - d).powi(n as i32);
                for k in 0..=max_k.min(n) {
                    kahan_add(&mut next[s_prev + k], &mut comp[s_prev + k], f * pmf);
                    pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
                }
            } else {
                // the head of the row underflows; take each mass from logs
                slow_rows += 1;
                let ln_d = d.ln();
                let ln_q = (-d).ln_1p();
                for k in 0..=max_k.min(n) {
                    let ln_pmf = ln_binom(n, k) + k as f64 * ln_d + (n - k) as f64 * ln_q;
                    if ln_pmf > -745.0 {
                        kahan_add(&mut next[s_prev + k], &mut comp[s_prev + k], f * ln_pmf.exp());
                    }
                }
            }
        }
        states = next;
        prev_t = t;
    }

    let mut value = 0.0;
    let mut comp = 0.0;
    for &s in &states {
        kahan_add(&mut value, &mut comp, s);
    }
    let bound = f64::EPSILON * (2 * m + 4 * r + 8) as f64 * value.max(f64::MIN_POSITIVE)
        + slow_rows as f64 * 1e-13;
    (value.clamp(0.0, 1.0), bound)
}

fn resolve(mode: ArithMode, m: usize) -> ArithMode {
    match mode {
        ArithMode::Auto => {
            if m <= EXACT_M_LIMIT {
                ArithMode::Exact
            } else {
                ArithMode::Float
            }
        }
        other => other,
    }
}

/// Probability that `xi_i >= a_i` for all i, for an arbitrary valid profile.
pub fn q_exact_general(p: &LowerThresholdProfile) -> ProbabilityResult {
    q_exact_general_with(p, ArithMode::Auto)
}

/// Same, with explicit arithmetic selection.
pub fn q_exact_general_with(p: &LowerThresholdProfile, mode: ArithMode) -> ProbabilityResult {
    match resolve(mode, p.m()) {
        ArithMode::Exact => ProbabilityResult::from_exact(dp_exact(p)),
        _ => {
            let (v, b) = dp_float(&p.as_f64(), p.m());
            ProbabilityResult::from_float(v, b)
        }
    }
}

/// `Q_m(u, v)`: the crossing probability of a boundary query.
pub fn q_exact(q: &BoundaryQuery) -> ProbabilityResult {
    q_exact_with(q, ArithMode::Auto)
}

pub fn q_exact_with(q: &BoundaryQuery, mode: ArithMode) -> ProbabilityResult {
    // Degenerate cases, decided in exact arithmetic: w <= 0 forces a_m = 1;
    // u >= m makes every threshold clamp to 0.
    let w = q.w_exact();
    if w <= BigRational::zero() {
        return ProbabilityResult::from_exact(BigRational::zero());
    }
    if q.u() >= q.m() as f64 {
        return ProbabilityResult::from_exact(BigRational::one());
    }
    q_exact_general_with(&lower_profile(q), mode)
}

/// Evaluates the reflected (upper-threshold) form
/// `P(xi_i <= (u+v-m-1+i)/v for all i)` by mapping it back onto the
/// lower-threshold engine; must agree with `q_exact`.
pub fn q_reflect_upper(q: &BoundaryQuery) -> Result<ProbabilityResult, Error> {
    q_reflect_upper_with(q, ArithMode::Auto)
}

pub fn q_reflect_upper_with(
    q: &BoundaryQuery,
    mode: ArithMode,
) -> Result<ProbabilityResult, Error> {
    let upper = upper_profile(q);
    let profile = reflect_to_lower(&upper)?;
    Ok(q_exact_general_with(&profile, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn single_free_point() {
        // profile (0) for m=1: always true
        let p = LowerThresholdProfile::from_raw(&[0.0]).unwrap();
        let r = q_exact_general(&p);
        assert_eq!(r.exact_value(), Some(&BigRational::one()));
    }

    #[test]
    fn two_point_half() {
        // profile (0, 0.5): 1 - P(both below 1/2) = 3/4 by direct integration
        let p = LowerThresholdProfile::from_raw(&[0.0, 0.5]).unwrap();
        let r = q_exact_general(&p);
        assert_eq!(r.exact_value(), Some(&rat(3, 4)));
    }

    #[test]
    fn top_threshold_one_kills() {
        let p = LowerThresholdProfile::from_raw(&[0.2, 1.0]).unwrap();
        let r = q_exact_general(&p);
        assert_eq!(r.exact_value(), Some(&BigRational::zero()));
    }

    #[test]
    fn query_examples() {
        // (m=1, u=0.5, v=1) -> 0.5 = P(U >= 0.5)
        let q = BoundaryQuery::new(1, 0.5, 1.0).unwrap();
        assert_eq!(q_exact(&q).exact_value(), Some(&rat(1, 2)));

        // (m=2, u=1, v=2) -> 3/4
        let q = BoundaryQuery::new(2, 1.0, 2.0).unwrap();
        assert_eq!(q_exact(&q).exact_value(), Some(&rat(3, 4)));

        // (m=5, u=5, v=1) -> 1 (every threshold clamps to <= 0)
        let q = BoundaryQuery::new(5, 5.0, 1.0).unwrap();
        assert_eq!(q_exact(&q).exact_value(), Some(&BigRational::one()));

        // (m=10, u=0, v=10) -> 0 (a_m = 1, matching w = 0)
        let q = BoundaryQuery::new(10, 0.0, 10.0).unwrap();
        assert_eq!(q_exact(&q).exact_value(), Some(&BigRational::zero()));
    }

    #[test]
    fn reflected_route_matches() {
        for &(m, u, v) in &[(2usize, 1.0, 2.0), (1, 0.5, 1.0), (7, 1.25, 9.5), (4, 0.0, 4.0)] {
            let q = BoundaryQuery::new(m, u, v).unwrap();
            let a = q_exact(&q);
            let b = q_reflect_upper(&q).unwrap();
            assert_eq!(a.exact_value(), b.exact_value(), "m={m} u={u} v={v}");
        }
    }

    #[test]
    fn float_agrees_with_exact_within_reported_bound() {
        let mut checked = 0;
        for m in [1usize, 2, 3, 5, 9, 17, 33, 64] {
            for (u, v) in [(0.5, 1.5), (1.0, 2.0), (0.25, 0.75), (2.5, 10.0)] {
                let v = v + m as f64 * 0.5;
                let q = BoundaryQuery::new(m, u, v).unwrap();
                let ex = q_exact_with(&q, ArithMode::Exact);
                let fl = q_exact_with(&q, ArithMode::Float);
                let diff = (ex.value() - fl.value()).abs();
                // float thresholds differ from the exact rationals by <= 1 ulp
                // each; allow that on top of the DP's own reported bound
                let slack = fl.abs_error_bound() + 1e-12;
                assert!(diff <= slack, "m={m} u={u} v={v}: diff={diff:e} bound={slack:e}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}
