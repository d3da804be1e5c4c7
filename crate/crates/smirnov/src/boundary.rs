//! Boundary queries and threshold profiles.
//!
//! A query `(m, u, v)` asks for the probability that the i-th smallest of m
//! independent Uniform[0,1] draws stays at or above the line value
//! `(i - u)/v` for every i. Thresholds are kept as exact rationals: every
//! finite `f64` input *is* a rational, so the exact arithmetic path needs no
//! separate input type.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational value of a finite float.
pub(crate) fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled division for extreme numerators
        let num = r.numer().to_f64().unwrap_or(f64::MAX);
        let den = r.denom().to_f64().unwrap_or(f64::MAX);
        num / den
    })
}

/// The triple `(m, u, v)`; the slack `w = u + v - m` is always derived so the
/// quadruple can never go inconsistent.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryQuery {
    m: usize,
    u: f64,
    v: f64,
}

impl BoundaryQuery {
    pub fn new(m: usize, u: f64, v: f64) -> Result<Self, Error> {
        if m == 0 {
            return Err(Error::InvalidQuery("m must be at least 1".into()));
        }
        if !u.is_finite() || u < 0.0 {
            return Err(Error::InvalidQuery(format!("u must be finite and >= 0, got {u}")));
        }
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidQuery(format!("v must be finite and > 0, got {v}")));
        }
        Ok(BoundaryQuery { m, u, v })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Derived slack `u + v - m`.
    pub fn w(&self) -> f64 {
        self.u + self.v - self.m as f64
    }

    /// Exact rational slack, for degenerate-case decisions.
    pub(crate) fn w_exact(&self) -> BigRational {
        rational_from_f64(self.u) + rational_from_f64(self.v)
            - BigRational::from_integer(BigInt::from(self.m))
    }
}

fn clamp_unit(r: BigRational) -> BigRational {
    if r.is_negative() {
        BigRational::zero()
    } else if r > BigRational::one() {
        BigRational::one()
    } else {
        r
    }
}

/// Nondecreasing thresholds `a_1 <= ... <= a_m`, each clamped into [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct LowerThresholdProfile {
    thresholds: Vec<BigRational>,
}

impl LowerThresholdProfile {
    /// Clamps raw values into [0,1] and rejects non-monotone sequences.
    pub fn from_raw(raw: &[f64]) -> Result<Self, Error> {
        if raw.is_empty() {
            return Err(Error::InvalidProfile("empty threshold sequence".into()));
        }
        for x in raw {
            if !x.is_finite() {
                return Err(Error::InvalidProfile(format!("non-finite threshold {x}")));
            }
        }
        let ts: Vec<BigRational> = raw
            .iter()
            .map(|&x| clamp_unit(rational_from_f64(x)))
            .collect();
        Self::from_rationals(ts)
    }

    pub fn from_rationals(ts: Vec<BigRational>) -> Result<Self, Error> {
        if ts.is_empty() {
            return Err(Error::InvalidProfile("empty threshold sequence".into()));
        }
        let ts: Vec<BigRational> = ts.into_iter().map(clamp_unit).collect();
        for i in 1..ts.len() {
            if ts[i] < ts[i - 1] {
                return Err(Error::InvalidProfile(format!(
                    "thresholds must be nondecreasing (violated at index {i})"
                )));
            }
        }
        Ok(LowerThresholdProfile { thresholds: ts })
    }

    pub fn m(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[BigRational] {
        &self.thresholds
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.thresholds.iter().map(rational_to_f64).collect()
    }
}

/// Lower thresholds `clamp((i - u)/v, 0, 1)` for `i = 1..=m`.
pub fn lower_profile(q: &BoundaryQuery) -> LowerThresholdProfile {
    let u = rational_from_f64(q.u());
    let v = rational_from_f64(q.v());
    let ts = (1..=q.m())
        .map(|i| clamp_unit((BigRational::from_integer(BigInt::from(i)) - &u) / &v))
        .collect();
    LowerThresholdProfile { thresholds: ts }
}

/// Upper thresholds `clamp((u + v - m - 1 + i)/v, 0, 1)` for `i = 1..=m`:
/// the reflected form of the same crossing event.
pub fn upper_profile(q: &BoundaryQuery) -> Vec<BigRational> {
    let u = rational_from_f64(q.u());
    let v = rational_from_f64(q.v());
    let shift = &u + &v - BigRational::from_integer(BigInt::from(q.m() + 1));
    (1..=q.m())
        .map(|i| clamp_unit((&shift + BigRational::from_integer(BigInt::from(i))) / &v))
        .collect()
}

/// Maps an upper-threshold event onto the lower-threshold engine:
/// `a'_i = 1 - b_{m+1-i}` (the reflected sample is again a vector of uniform
/// order statistics).
pub fn reflect_to_lower(upper: &[BigRational]) -> Result<LowerThresholdProfile, Error> {
    let one = BigRational::one();
    let ts: Vec<BigRational> = upper.iter().rev().map(|b| &one - b).collect();
    LowerThresholdProfile::from_rationals(ts)
}

/// How a probability was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMode {
    ExactRational,
    Float,
}

impl std::fmt::Display for ProbMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbMode::ExactRational => write!(f, "exact-rational"),
            ProbMode::Float => write!(f, "float"),
        }
    }
}

/// A probability with its arithmetic provenance. Exact mode carries the
/// rational value and a zero error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityResult {
    value: f64,
    mode: ProbMode,
    abs_error_bound: f64,
    exact: Option<BigRational>,
}

impl ProbabilityResult {
    pub(crate) fn from_exact(r: BigRational) -> Self {
        debug_assert!(!r.is_negative() && r <= BigRational::one());
        let value = rational_to_f64(&r);
        ProbabilityResult {
            value,
            mode: ProbMode::ExactRational,
            abs_error_bound: 0.0,
            exact: Some(r),
        }
    }

    pub(crate) fn from_float(value: f64, abs_error_bound: f64) -> Self {
        ProbabilityResult {
            value: value.clamp(0.0, 1.0),
            mode: ProbMode::Float,
            abs_error_bound,
            exact: None,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn mode(&self) -> ProbMode {
        self.mode
    }

    pub fn abs_error_bound(&self) -> f64 {
        self.abs_error_bound
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_profile_examples() {
        // (m=2, u=1, v=2) -> (0, 0.5)
        let q = BoundaryQuery::new(2, 1.0, 2.0).unwrap();
        let p = lower_profile(&q);
        assert_eq!(p.as_f64(), vec![0.0, 0.5]);

        // (m=1, u=2, v=1): (1-2)/1 < 0 clamps to 0
        let q = BoundaryQuery::new(1, 2.0, 1.0).unwrap();
        assert_eq!(lower_profile(&q).as_f64(), vec![0.0]);

        // (m=3, u=0, v=3) -> (1/3, 2/3, 1)
        let q = BoundaryQuery::new(3, 0.0, 3.0).unwrap();
        let p = lower_profile(&q);
        let thirds: Vec<BigRational> = (1..=3)
            .map(|i| BigRational::new(BigInt::from(i), BigInt::from(3)))
            .collect();
        assert_eq!(p.thresholds(), &thirds[..]);
    }

    #[test]
    fn upper_profile_is_reflection_of_lower() {
        let q = BoundaryQuery::new(5, 1.25, 3.5).unwrap();
        let lower = lower_profile(&q);
        let upper = upper_profile(&q);
        let reflected = reflect_to_lower(&upper).unwrap();
        assert_eq!(lower, reflected);
    }

    #[test]
    fn query_validation() {
        assert!(BoundaryQuery::new(0, 1.0, 1.0).is_err());
        assert!(BoundaryQuery::new(1, -0.5, 1.0).is_err());
        assert!(BoundaryQuery::new(1, 0.0, 0.0).is_err());
        assert!(BoundaryQuery::new(1, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn w_is_derived() {
        let q = BoundaryQuery::new(10, 2.5, 4.0).unwrap();
        assert_eq!(q.w(), 2.5 + 4.0 - 10.0);
        let w = q.w_exact();
        assert_eq!(rational_to_f64(&w), q.w());
    }

    #[test]
    fn profile_rejects_non_monotone() {
        assert!(LowerThresholdProfile::from_raw(&[0.5, 0.25]).is_err());
        // clamping may repair apparent violations outside [0,1]
        assert!(LowerThresholdProfile::from_raw(&[-2.0, -1.0, 0.0]).is_ok());
    }
}
