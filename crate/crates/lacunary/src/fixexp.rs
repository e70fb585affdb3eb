//! Directed-rounding fixed-point evaluation of e^(c·k^beta) and k^gamma.
//!
//! Values are intervals [lo, hi]/2^f guaranteed to contain the true real.
//! All operations round lo down and hi up, so floors extracted from an
//! interval are provably correct whenever both endpoints share them;
//! otherwise the caller retries at doubled precision.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// An interval enclosure of a nonnegative real at `f` fraction bits.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub lo: BigUint,
    pub hi: BigUint,
    pub f: u32,
}

impl Enclosure {
    #[cfg(test)]
    pub fn exact(v: BigUint, f: u32) -> Self {
        Self { lo: v.clone(), hi: v, f }
    }

    /// Both endpoints agree on the integer part.
    pub fn certain_floor(&self) -> Option<BigUint> {
        let a = &self.lo >> self.f;
        let b = &self.hi >> self.f;
        (a == b).then_some(a)
    }

    /// Multiply by the exact rational num/den, outward rounding.
    pub fn mul_rational(&self, num: u64, den: u64) -> Self {
        let num = BigUint::from(num);
        let den = BigUint::from(den);
        let lo = &self.lo * &num / &den;
        let hi = (&self.hi * &num + &den - BigUint::one()) / &den;
        Self { lo, hi, f: self.f }
    }

    /// Product, outward rounding, same scale.
    pub fn mul(&self, other: &Enclosure) -> Self {
        assert_eq!(self.f, other.f);
        let shift = self.f;
        let lo = (&self.lo * &other.lo) >> shift;
        let hi = ((&self.hi * &other.hi) + ((BigUint::one() << shift) - BigUint::one())) >> shift;
        Self { lo, hi, f: self.f }
    }
}

/// Enclosure of k^(num/den) at `f` fraction bits via an exact integer root:
/// r = floor((k^num · 2^(f·den))^(1/den)) gives r <= k^(num/den)·2^f < r+1.
pub fn pow_rational(k: u64, num: u32, den: u32, f: u32) -> Enclosure {
    assert!(den >= 1 && k >= 1);
    let base = BigUint::from(k).pow(num);
    let scaled = base << (f as u64 * den as u64);
    let r = scaled.nth_root(den);
    Enclosure {
        hi: &r + BigUint::one(),
        lo: r,
        f,
    }
}

/// Enclosure of 1/x given an enclosure of x > 0.
pub fn reciprocal(x: &Enclosure) -> Enclosure {
    assert!(!x.lo.is_zero(), "reciprocal of interval touching zero");
    let one_sq = BigUint::one() << (2 * x.f as u64);
    let lo = &one_sq / &x.hi;
    let hi = (&one_sq + &x.lo - BigUint::one()) / &x.lo;
    Enclosure { lo, hi, f: x.f }
}

/// Enclosure of e^y for y given as an enclosure (y >= 0).
///
/// Argument reduction y -> y/2^s with y/2^s < 1/2, Taylor series with
/// directed rounding, then s repeated squarings. Internal guard bits absorb
/// the squaring error growth.
pub fn exp_enclosure(y: &Enclosure) -> Enclosure {
    let f = y.f;
    // halvings so the reduced argument is below 1/2
    let top_bits = y.hi.bits() as i64 - f as i64; // log2 of integer part, roughly
    let s = (top_bits + 1).max(0) as u32;
    let guard = 2 * s + 64;
    let fw = f + guard;

    // rescale to working precision and halve: y / 2^s at fw bits
    let z_lo = (&y.lo << guard) >> s;
    let z_hi = (((&y.hi << guard) + ((BigUint::one() << s) - BigUint::one())) >> s) + BigUint::one();
    debug_assert!(z_hi.bits() < fw as u64, "argument reduction failed");

    let mut e_lo = taylor_exp_lo(&z_lo, fw);
    let mut e_hi = taylor_exp_hi(&z_hi, fw);

    for _ in 0..s {
        e_lo = (&e_lo * &e_lo) >> fw;
        e_hi = ((&e_hi * &e_hi) + ((BigUint::one() << fw) - BigUint::one())) >> fw;
    }

    // drop guard bits, outward
    Enclosure {
        lo: &e_lo >> guard,
        hi: ((&e_hi >> guard) + BigUint::one()),
        f,
    }
}

/// Lower bound of e^z at f bits for 0 <= z < 2^(f-1) (z scaled by 2^f).
/// Partial Taylor sums with floor division only ever undershoot.
fn taylor_exp_lo(z: &BigUint, f: u32) -> BigUint {
    let one = BigUint::one() << f;
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        term = (&term * z) >> f;
        term /= BigUint::from(n);
        if term.is_zero() {
            return sum;
        }
        sum += &term;
        n += 1;
    }
}

/// Upper bound of e^z at f bits for 0 <= z < 2^(f-1): ceil rounding per term
/// and a doubled final term to cover the series remainder (ratio < 1/2).
fn taylor_exp_hi(z: &BigUint, f: u32) -> BigUint {
    let one = BigUint::one() << f;
    let mut sum = one.clone();
    let mut term = one;
    let mut n = 1u64;
    loop {
        let num = &term * z;
        let denom = BigUint::from(n) << f;
        term = (&num + &denom - BigUint::one()) / &denom; // ceil
        sum += &term;
        if term <= BigUint::one() {
            // remainder after this term is below term * sum_{j>=1} 2^-j = term
            sum += BigUint::one();
            return sum;
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn approx(e: &Enclosure) -> (f64, f64) {
        let scale = 2f64.powi(-(e.f as i32));
        (
            e.lo.to_f64().unwrap() * scale,
            e.hi.to_f64().unwrap() * scale,
        )
    }

    #[test]
    fn exp_of_one_brackets_e() {
        let one = Enclosure::exact(BigUint::one() << 96u32, 96);
        let e = exp_enclosure(&one);
        let (lo, hi) = approx(&e);
        assert!(lo <= std::f64::consts::E && std::f64::consts::E <= hi);
        assert!(hi - lo < 1e-20);
    }

    #[test]
    fn exp_of_ten_tight() {
        let ten = Enclosure::exact(BigUint::from(10u32) << 128u32, 128);
        let e = exp_enclosure(&ten);
        let (lo, hi) = approx(&e);
        let truth = 22026.465794806718;
        assert!(lo <= truth && truth <= hi, "[{lo}, {hi}]");
        assert!(hi - lo < 1e-25 * truth);
    }

    #[test]
    fn sqrt_two_enclosure() {
        let r = pow_rational(2, 1, 2, 200);
        let (lo, hi) = approx(&r);
        assert!(lo <= std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= hi);
    }

    #[test]
    fn reciprocal_brackets() {
        let r = pow_rational(3, 1, 1, 64); // exactly 3
        let inv = reciprocal(&r);
        let (lo, hi) = approx(&inv);
        assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);
    }
}
