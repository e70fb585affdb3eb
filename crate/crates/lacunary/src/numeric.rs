//! Small numeric utilities shared across modules.

use num_bigint::BigUint;

/// Kahan compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Natural log of an arbitrary-precision positive integer, accurate to a few ulps.
pub fn big_ln(x: &BigUint) -> f64 {
    assert!(!num_traits::Zero::is_zero(x), "big_ln(0)");
    let bits = x.bits();
    if bits <= 63 {
        let words = x.to_u64_digits();
        return (words[0] as f64).ln();
    }
    // x = m * 2^(bits-64) with m the top 64 bits
    let m = (x >> (bits - 64)).to_u64_digits()[0];
    (m as f64).ln() + ((bits - 64) as f64) * std::f64::consts::LN_2
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of N(0, sigma^2).
pub fn normal_cdf_scaled(x: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        // degenerate atom at zero; symmetric step convention
        return if x > 0.0 {
            1.0
        } else if x < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    normal_cdf(x / sigma)
}

/// Standard normal quantile by bisection on the CDF (|error| < 1e-13).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
