//! Digit-stream constructions of normal numbers, block-frequency statistics,
//! and the pseudorandom orbit families {b^n x} and {ξ x^n}.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pointstats::PointSet;

/// A deterministic, restartable digit source in base b. `prefix(n)` always
/// regenerates from index 0, so any prefix can be re-derived at will.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitStream {
    base: u32,
    source: DigitSource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum DigitSource {
    /// Concatenated base-b expansions of 1, 2, 3, ...
    Champernowne,
    /// Concatenated base-b expansions of the primes 2, 3, 5, ...
    CopelandErdos,
    /// A fixed finite digit string.
    Literal(Vec<u8>),
    /// An infinite repetition of a finite pattern.
    Periodic(Vec<u8>),
}

impl DigitStream {
    pub fn champernowne(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Self { base, source: DigitSource::Champernowne })
    }

    pub fn copeland_erdos(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(Self { base, source: DigitSource::CopelandErdos })
    }

    pub fn literal(base: u32, digits: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        if digits.iter().any(|&d| d as u32 >= base) {
            return Err(Error::InvalidSpec("digit out of base range".into()));
        }
        Ok(Self { base, source: DigitSource::Literal(digits) })
    }

    pub fn periodic(base: u32, pattern: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        if pattern.is_empty() || pattern.iter().any(|&d| d as u32 >= base) {
            return Err(Error::InvalidSpec("bad periodic pattern".into()));
        }
        Ok(Self { base, source: DigitSource::Periodic(pattern) })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// First n digits; errors only for finite literal sources that run dry.
    pub fn prefix(&self, n: usize) -> Result<Vec<u8>> {
        match &self.source {
            DigitSource::Champernowne => Ok(concat_expansions(self.base, n, 1..)),
            DigitSource::CopelandErdos => Ok(concat_expansions(self.base, n, Primes::new())),
            DigitSource::Literal(d) => {
                if d.len() < n {
                    Err(Error::StreamExhausted { needed: n, got: d.len() })
                } else {
                    Ok(d[..n].to_vec())
                }
            }
            DigitSource::Periodic(p) => {
                Ok((0..n).map(|i| p[i % p.len()]).collect())
            }
        }
    }
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::InvalidSpec("base must be >= 2".into()));
    }
    if base > 256 {
        return Err(Error::InvalidSpec("digit streams support bases up to 256".into()));
    }
    Ok(())
}

fn digits_of(mut v: u64, base: u32) -> Vec<u8> {
    let mut out = Vec::new();
    let b = base as u64;
    while v > 0 {
        out.push((v % b) as u8);
        v /= b;
    }
    out.reverse();
    out
}

fn concat_expansions<I: IntoIterator<Item = u64>>(base: u32, n: usize, values: I) -> Vec<u8> {
    let mut out = Vec::with_capacity(n);
    for v in values {
        if out.len() >= n {
            break;
        }
        out.extend(digits_of(v, base));
    }
    out.truncate(n);
    out
}

/// Unbounded prime iterator over a growing sieve.
struct Primes {
    sieve: Vec<bool>,
    limit: usize,
    next: usize,
}

impl Primes {
    fn new() -> Self {
        Self { sieve: Vec::new(), limit: 0, next: 2 }
    }

    fn grow(&mut self, limit: usize) {
        let mut s = vec![true; limit + 1];
        s[0] = false;
        if limit >= 1 {
            s[1] = false;
        }
        let mut p = 2usize;
        while p * p <= limit {
            if s[p] {
                for q in (p * p..=limit).step_by(p) {
                    s[q] = false;
                }
            }
            p += 1;
        }
        self.sieve = s;
        self.limit = limit;
    }
}

impl Iterator for Primes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        loop {
            if self.next > self.limit {
                let new_limit = (self.limit * 2).max(1 << 12);
                self.grow(new_limit);
            }
            let candidate = self.next;
            self.next += 1;
            if self.sieve[candidate] {
                return Some(candidate as u64);
            }
        }
    }
}

/// First n digits of the base-b Champernowne expansion.
pub fn champernowne_digits(base: u32, n: usize) -> Result<Vec<u8>> {
    DigitStream::champernowne(base)?.prefix(n)
}

/// First n digits of the base-b Copeland–Erdős expansion.
pub fn copeland_erdos_digits(base: u32, n: usize) -> Result<Vec<u8>> {
    DigitStream::copeland_erdos(base)?.prefix(n)
}

/// max over all b^ℓ blocks of |(overlapping occurrences)/windows − b^{−ℓ}|;
/// blocks that never occur still contribute b^{−ℓ}.
pub fn block_deviation(digits: &[u8], base: u32, ell: u32) -> Result<f64> {
    check_base(base)?;
    if ell == 0 {
        return Err(Error::InvalidSpec("block length must be >= 1".into()));
    }
    let n_blocks = (base as u64).checked_pow(ell).filter(|&b| b <= 1 << 26).ok_or_else(|| {
        Error::CapacityExceeded(format!("base^ell = {base}^{ell} block table too large"))
    })?;
    if digits.len() < ell as usize {
        return Err(Error::InvalidSpec("prefix shorter than the block length".into()));
    }
    let windows = digits.len() - ell as usize + 1;
    let mut counts = vec![0u64; n_blocks as usize];
    let modulus = n_blocks / base as u64;
    let mut idx: u64 = 0;
    for (i, &d) in digits.iter().enumerate() {
        idx = (idx % modulus) * base as u64 + d as u64;
        if i + 1 >= ell as usize {
            counts[idx as usize] += 1;
        }
    }
    let target = (base as f64).powi(-(ell as i32));
    let mut worst: f64 = 0.0;
    for &c in &counts {
        worst = worst.max((c as f64 / windows as f64 - target).abs());
    }
    Ok(worst)
}

/// Point n (0-based) is 0.d_{n+1}d_{n+2}... truncated to `bits` output bits,
/// with the base-b digits converted exactly.
pub fn shift_orbit_pointset(
    stream: &DigitStream,
    n: usize,
    bits: u64,
) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidSpec("orbit needs at least one point".into()));
    }
    let base = stream.base();
    let depth = (bits as f64 / (base as f64).log2()).ceil() as usize + 1;
    let digits = stream.prefix(n + depth)?;
    let b = BigUint::from(base);
    let b_pow = b.pow(depth as u32);
    let mut values = Vec::with_capacity(n);
    // V_k = digits d_{k+1}..d_{k+depth} as a base-b integer, maintained by
    // one push/pop per step
    let mut v = BigUint::zero();
    for &d in &digits[..depth] {
        v = &v * &b + BigUint::from(d);
    }
    let top = b.pow(depth as u32 - 1);
    for k in 0..n {
        let mantissa = (&v << bits) / &b_pow;
        values.push(fixed_to_double(&mantissa, bits));
        if k + 1 < n {
            let lead = BigUint::from(digits[k]);
            v = (&v - &lead * &top) * &b + BigUint::from(digits[k + depth]);
        }
    }
    PointSet::new(values)
}

fn fixed_to_double(mantissa: &BigUint, bits: u64) -> f64 {
    crate::bigfrac::FixedPointReal::new(mantissa.clone(), bits).to_double()
}

/// An exactly specified positive real for power orbits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealSpec {
    Rational { num: u64, den: u64 },
    /// (1 + √5)/2.
    GoldenRatio,
    /// mantissa / 2^scale_bits; values above 1 carry an integer part.
    Dyadic { mantissa: BigUint, scale_bits: u64 },
}

impl RealSpec {
    /// floor(value · 2^f); error below one ulp at scale f.
    fn to_fixed(&self, f: u64) -> Result<BigUint> {
        match self {
            RealSpec::Rational { num, den } => {
                if *den == 0 || *num == 0 {
                    return Err(Error::InvalidSpec("rational must be positive".into()));
                }
                Ok((BigUint::from(*num) << f) / BigUint::from(*den))
            }
            RealSpec::GoldenRatio => {
                let five = BigUint::from(5u32) << (2 * f);
                Ok((five.sqrt() + (BigUint::one() << f)) >> 1)
            }
            RealSpec::Dyadic { mantissa, scale_bits } => {
                if mantissa.is_zero() {
                    return Err(Error::InvalidSpec("dyadic must be positive".into()));
                }
                Ok(if f >= *scale_bits {
                    mantissa << (f - scale_bits)
                } else {
                    mantissa >> (scale_bits - f)
                })
            }
        }
    }

    fn approx(&self) -> f64 {
        match self {
            RealSpec::Rational { num, den } => *num as f64 / *den as f64,
            RealSpec::GoldenRatio => (1.0 + 5.0f64.sqrt()) / 2.0,
            RealSpec::Dyadic { mantissa, scale_bits } => {
                let bits = mantissa.bits();
                let top = (mantissa >> bits.saturating_sub(53)).to_f64().unwrap_or(0.0);
                top * 2f64.powi((bits.saturating_sub(53) as i64 - *scale_bits as i64) as i32)
            }
        }
    }
}

const POWER_ORBIT_BIT_CAP: u64 = 1 << 26;

/// The orbit {ξ x^n}, n = 1..N, each point accurate to 2^-64.
///
/// Maintains the full product ξ·xⁿ in fixed point at N·log₂x + 96 fraction
/// bits; one floor per multiply keeps the accumulated error below 2^-80.
pub fn power_orbit(xi: &RealSpec, x: &RealSpec, n: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidSpec("power orbit needs N >= 1".into()));
    }
    let x_approx = x.approx();
    if !(x_approx > 1.0) {
        return Err(Error::InvalidSpec(format!("power orbit needs x > 1, got {x_approx}")));
    }
    let f = (n as f64 * x_approx.log2()).ceil() as u64 + 96;
    if f > POWER_ORBIT_BIT_CAP {
        return Err(Error::PrecisionOverflow(f, POWER_ORBIT_BIT_CAP));
    }
    let x_fix = x.to_fixed(f)?;
    let mut p = xi.to_fixed(f)?;
    if p.is_zero() {
        return Err(Error::InvalidSpec("xi must be positive".into()));
    }
    let mask = (BigUint::one() << f) - BigUint::one();
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        p = (&p * &x_fix) >> f;
        let frac = &p & &mask;
        values.push(fixed_to_double(&frac, f));
    }
    PointSet::new(values)
}
