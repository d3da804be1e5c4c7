//! Double-double ("dd") arithmetic: an unevaluated sum of two `f64`s giving
//! roughly 106 bits of precision.
//!
//! Two uses drive the design. Reciprocal-sum budgets (`DdSum`) sit close to
//! hard cutoffs like 1 or 2, where plain `f64` accumulation over tens of
//! thousands of terms is not obviously trustworthy. And integer thresholds of
//! the form "least y with log log y >= t" need `exp(exp(t))` evaluated well
//! below one unit in the last place of the integer, so that floor/ceil
//! decisions are deterministic.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn from_u64(x: u64) -> Dd {
        // u64 may exceed 2^53; split exactly.
        let hi = (x >> 32) as f64 * 4294967296.0;
        let lo = (x & 0xffff_ffff) as f64;
        Dd::from_f64(hi).add(Dd::from_f64(lo))
    }

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        let (s, e) = two_sum(self.hi, other);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p, e) = two_prod(self.hi, other);
        let e = e + self.lo * other;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul_f64(q2));
        let q3 = r2.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    #[inline]
    pub fn recip_f64(x: f64) -> Dd {
        Dd::ONE.div(Dd::from_f64(x))
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    /// Total order consistent with the represented real (finite values).
    pub fn cmp_dd(self, other: Dd) -> std::cmp::Ordering {
        let d = self.sub(other);
        if d.hi > 0.0 || (d.hi == 0.0 && d.lo > 0.0) {
            std::cmp::Ordering::Greater
        } else if d.hi < 0.0 || (d.hi == 0.0 && d.lo < 0.0) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Equal
        }
    }

    pub fn lt(self, other: Dd) -> bool {
        self.cmp_dd(other) == std::cmp::Ordering::Less
    }

    pub fn le(self, other: Dd) -> bool {
        self.cmp_dd(other) != std::cmp::Ordering::Greater
    }

    /// Largest integer <= self, as u64. `None` when negative or too large.
    pub fn floor_u64(self) -> Option<u64> {
        if !self.hi.is_finite() || self.hi < 0.0 || self.hi >= 1.8e19 {
            return None;
        }
        let a = self.hi.floor();
        let frac = Dd::new(self.hi - a, self.lo); // exact: hi - floor(hi) is exact
        let mut n = a as u64;
        // frac in (-1, 2); fold it into the integer part
        if frac.hi < 0.0 {
            n = n.checked_sub(1)?;
        } else if frac.hi >= 1.0 {
            n += 1;
        }
        Some(n)
    }

    /// Smallest integer >= self, as u64 (0 when negative).
    pub fn ceil_u64(self) -> Option<u64> {
        if !self.hi.is_finite() || self.hi >= 1.8e19 {
            return None;
        }
        if self.hi < 0.0 {
            return Some(0);
        }
        let f = self.floor_u64()?;
        let fd = Dd::from_u64(f);
        if self.sub(fd) == Dd::ZERO {
            Some(f)
        } else {
            Some(f + 1)
        }
    }
}

const LN2: Dd = Dd { hi: 0.693_147_180_559_945_3, lo: 2.319_046_813_846_299_6e-17 };

/// exp(a) in double-double via range reduction and a Taylor tail.
///
/// Returns a non-finite `hi` when the result overflows f64 range; callers
/// treat that as "beyond any integer capacity".
pub fn exp_dd(a: Dd) -> Dd {
    if !a.hi.is_finite() {
        return Dd::from_f64(if a.hi > 0.0 { f64::INFINITY } else { 0.0 });
    }
    if a.hi > 709.0 {
        return Dd::from_f64(f64::INFINITY);
    }
    if a.hi < -745.0 {
        return Dd::ZERO;
    }
    let n = (a.hi / LN2.hi).round();
    let r = a.sub(LN2.mul_f64(n));
    // Taylor: sum r^k / k!, |r| <= ln2/2 so ~25 terms reach 1e-33.
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for k in 1..=26 {
        term = term.mul(r).div(Dd::from_f64(k as f64));
        sum = sum.add(term);
        if term.hi.abs() < 1e-35 * sum.hi.abs() {
            break;
        }
    }
    let scale = 2.0f64.powi(n as i32);
    Dd { hi: sum.hi * scale, lo: sum.lo * scale }
}

/// exp(exp(t)): the map from the log-log scale back to magnitudes. Saturates
/// to +inf for t beyond f64 range (t > ~6.565).
pub fn exp_exp_dd(t: Dd) -> Dd {
    exp_dd(exp_dd(t))
}

/// Compensated accumulator for long sums of small positive terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct DdSum {
    acc: Dd,
}

impl DdSum {
    pub fn new() -> DdSum {
        DdSum { acc: Dd::ZERO }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.acc = self.acc.add_f64(x);
    }

    #[inline]
    pub fn add_dd(&mut self, x: Dd) {
        self.acc = self.acc.add(x);
    }

    pub fn value(&self) -> Dd {
        self.acc
    }

    pub fn to_f64(&self) -> f64 {
        self.acc.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_mul_roundtrip() {
        let a = Dd::from_f64(0.1).add(Dd::from_f64(0.2));
        let b = Dd::from_f64(0.3);
        // 0.1 + 0.2 != 0.3 in f64, but the dd difference is ~1e-17, not 1e-16s of slop
        let d = a.sub(b).to_f64().abs();
        assert!(d < 1e-16, "d = {d}");
    }

    #[test]
    fn div_inverse() {
        let x = Dd::from_f64(3.0);
        let y = Dd::ONE.div(x).mul(x).sub(Dd::ONE);
        assert!(y.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_known_values() {
        // e and e^2 to 30+ digits
        let e = exp_dd(Dd::ONE);
        assert!((e.hi - 2.718281828459045).abs() < 1e-15);
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        let e2 = exp_dd(Dd::from_f64(2.0));
        let err = e2.sub(e.mul(e));
        assert!(err.to_f64().abs() < 1e-28, "err = {}", err.to_f64());
    }

    #[test]
    fn exp_matches_f64_across_range() {
        for i in -60..=60 {
            let t = i as f64 * 0.1;
            let d = exp_dd(Dd::from_f64(t)).to_f64();
            let rel = (d - t.exp()).abs() / t.exp();
            assert!(rel < 1e-14, "t = {t}, rel = {rel}");
        }
    }

    #[test]
    fn exp_exp_saturates() {
        assert!(!exp_exp_dd(Dd::from_f64(7.0)).is_finite());
        let v = exp_exp_dd(Dd::from_f64(1.0));
        assert!((v.to_f64() - 15.154262241479262).abs() < 1e-12);
    }

    #[test]
    fn floor_ceil_exact_integers() {
        let x = Dd::from_u64(123456789012345);
        assert_eq!(x.floor_u64(), Some(123456789012345));
        assert_eq!(x.ceil_u64(), Some(123456789012345));
        let y = x.add_f64(1e-20);
        assert_eq!(y.floor_u64(), Some(123456789012345));
        assert_eq!(y.ceil_u64(), Some(123456789012346));
        let z = x.add_f64(-1e-20);
        assert_eq!(z.floor_u64(), Some(123456789012344));
        assert_eq!(z.ceil_u64(), Some(123456789012345));
    }

    #[test]
    fn compensated_sum_of_reciprocals() {
        // sum_{i=1}^{n} 1/i forwards vs backwards must agree to ~1e-25
        let n = 200_000u64;
        let mut f = DdSum::new();
        for i in 1..=n {
            f.add_dd(Dd::recip_f64(i as f64));
        }
        let mut b = DdSum::new();
        for i in (1..=n).rev() {
            b.add_dd(Dd::recip_f64(i as f64));
        }
        let d = f.value().sub(b.value()).to_f64().abs();
        assert!(d < 1e-24, "d = {d}");
    }
}
