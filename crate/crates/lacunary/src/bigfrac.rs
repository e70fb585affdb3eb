//! Exact arithmetic for fractional parts {n·x}.
//!
//! `x` is a B-bit binary fraction in [0,1) held as an arbitrary-precision
//! mantissa; multiplying by an integer and reducing mod 1 is a multiply and a
//! mask, so every orbit value {n_k x} is exact at B-bit resolution. A
//! counter-based generator supplies reproducible uniform draws: each sample is
//! a pure function of (seed, index), so parallel schedules cannot change
//! results.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Arbitrary-precision nonnegative integer; sequence terms live here.
pub type BigNat = BigUint;

/// A B-bit binary fraction in [0,1): `mantissa / 2^bits` with `mantissa < 2^bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointReal {
    mantissa: BigUint,
    bits: u64,
}

impl FixedPointReal {
    /// Build from a mantissa already reduced below `2^bits`.
    ///
    /// Panics if the invariant `mantissa < 2^bits` is violated.
    pub fn new(mantissa: BigUint, bits: u64) -> Self {
        assert!(bits > 0, "FixedPointReal needs at least one bit");
        assert!(
            mantissa.bits() <= bits,
            "mantissa of {} bits does not fit in {} bits",
            mantissa.bits(),
            bits
        );
        Self { mantissa, bits }
    }

    pub fn zero(bits: u64) -> Self {
        Self::new(BigUint::zero(), bits)
    }

    /// floor(num · 2^bits / den) mod 2^bits — the best B-bit approximation
    /// from below of the rational num/den.
    pub fn from_fraction(num: &BigUint, den: &BigUint, bits: u64) -> Self {
        assert!(!den.is_zero());
        let scaled = (num << bits) / den;
        Self::new(scaled & mask(bits), bits)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Round to the nearest 53-bit double in [0,1]; error at most 2^-54.
    ///
    /// Defined canonically as: take the top `min(bits, 128)` bits of the
    /// mantissa (truncated), convert to f64 (round to nearest even), and
    /// scale by the matching power of two. `DyadicWindows` reproduces this
    /// rule bit-for-bit at shifted offsets.
    pub fn to_double(&self) -> f64 {
        let words = self.mantissa.to_u64_digits();
        window_to_double(&words, self.bits, 0)
    }
}

fn mask(bits: u64) -> BigUint {
    (BigUint::one() << bits) - BigUint::one()
}

/// Returns exactly (n·mantissa mod 2^B)/2^B, i.e. {n·x} at B-bit resolution.
///
/// Total and exact; a power-of-two multiplier reduces to a shift with the
/// overflow discarded.
pub fn frac_mul_nat(x: &FixedPointReal, n: &BigNat) -> FixedPointReal {
    let bits = x.bits;
    if n.is_zero() {
        return FixedPointReal::zero(bits);
    }
    let mantissa = if n.count_ones() == 1 {
        let k = n.trailing_zeros().expect("nonzero");
        if k >= bits {
            BigUint::zero()
        } else {
            // keep the low bits-k bits, then shift them up
            (&x.mantissa & mask(bits - k)) << k
        }
    } else {
        (&x.mantissa * n) & mask(bits)
    };
    FixedPointReal { mantissa, bits }
}

// ---------------------------------------------------------------------------
// Counter-based uniform sampler
// ---------------------------------------------------------------------------

/// splitmix64 finalizer; full-avalanche bijection on u64.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed permutation of a 128-bit counter: a 4-round Feistel network with
/// splitmix64 round functions. Being a permutation, distinct counters can
/// never produce colliding blocks, and each output word is a pure function
/// of (seed, counter).
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    keys: [u64; 4],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        let mut s = seed;
        let mut keys = [0u64; 4];
        for k in keys.iter_mut() {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            *k = mix64(s);
        }
        Self { keys }
    }

    /// Encrypt the counter block (hi, lo).
    #[inline]
    pub fn block(&self, hi: u64, lo: u64) -> (u64, u64) {
        let (mut l, mut r) = (hi, lo);
        for &k in &self.keys {
            let t = r;
            r = l ^ mix64(r ^ k);
            l = t;
        }
        (l, r)
    }

    /// One uniform u64 for the given counter pair.
    #[inline]
    pub fn word(&self, hi: u64, lo: u64) -> u64 {
        self.block(hi, lo).1
    }

    /// Uniform draw in 0..bound via 128-bit multiply reduction (bias < 2^-64).
    #[inline]
    pub fn below(&self, hi: u64, lo: u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.word(hi, lo) as u128 * bound as u128) >> 64) as u64
    }
}

/// Deterministic uniform draw on [0,1) at B-bit resolution.
///
/// Pure function of (seed, index, bits): identical output regardless of call
/// order or parallel schedule.
pub fn sample_uniform(seed: u64, index: u64, bits: u64) -> FixedPointReal {
    assert!(bits >= 64, "sample_uniform requires at least 64 bits");
    let rng = CounterRng::new(seed);
    let n_words = bits.div_ceil(64) as usize;
    let mut words = vec![0u64; n_words];
    for t in 0..n_words.div_ceil(2) {
        let (hi, lo) = rng.block(index, t as u64);
        words[2 * t] = lo;
        if 2 * t + 1 < n_words {
            words[2 * t + 1] = hi;
        }
    }
    let rem = bits % 64;
    if rem != 0 {
        words[n_words - 1] &= (1u64 << rem) - 1;
    }
    let u32_digits: Vec<u32> = words
        .iter()
        .flat_map(|w| [(w & 0xFFFF_FFFF) as u32, (w >> 32) as u32])
        .collect();
    FixedPointReal::new(BigUint::new(u32_digits), bits)
}

// ---------------------------------------------------------------------------
// Shift windows: {2^m x} without touching the big mantissa
// ---------------------------------------------------------------------------

/// Extract `count <= 128` bits starting at bit `lo` (LSB order) from a
/// little-endian u64 word array; missing high words read as zero.
fn extract_bits(words: &[u64], lo: u64, count: u32) -> u128 {
    debug_assert!(count <= 128);
    let mut out: u128 = 0;
    let mut filled: u32 = 0;
    let mut word_idx = (lo / 64) as usize;
    let mut bit_in_word = (lo % 64) as u32;
    while filled < count {
        let w = words.get(word_idx).copied().unwrap_or(0);
        let avail = 64 - bit_in_word;
        let take = (count - filled).min(avail);
        let m = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        let chunk = (w >> bit_in_word) & m;
        out |= (chunk as u128) << filled;
        filled += take;
        word_idx += 1;
        bit_in_word = 0;
    }
    out
}

/// to_double of the value whose mantissa is `words mod 2^total_bits`, after
/// discarding the top `drop` bits (i.e. {2^drop · x}).
fn window_to_double(words: &[u64], total_bits: u64, drop: u64) -> f64 {
    if drop >= total_bits {
        return 0.0;
    }
    let remaining = total_bits - drop;
    let take = remaining.min(128) as u32;
    let lo = remaining - take as u64;
    let t = extract_bits(words, lo, take);
    (t as f64) * exp2_neg(take)
}

#[inline]
fn exp2_neg(k: u32) -> f64 {
    // exact for k <= 1022
    f64::from_bits((1023u64 - k as u64) << 52)
}

/// Read-only view of a fixed-point value for O(1) evaluation of {2^m x}.
///
/// Matches `frac_mul_nat(x, 2^m).to_double()` bit-for-bit.
pub struct DyadicWindows {
    words: Vec<u64>,
    bits: u64,
}

impl DyadicWindows {
    pub fn new(x: &FixedPointReal) -> Self {
        Self {
            words: x.mantissa.to_u64_digits(),
            bits: x.bits,
        }
    }

    #[inline]
    pub fn frac_pow2_mul(&self, m: u64) -> f64 {
        window_to_double(&self.words, self.bits, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn fp(mantissa: u64, bits: u64) -> FixedPointReal {
        FixedPointReal::new(BigUint::from_u64(mantissa).unwrap(), bits)
    }

    #[test]
    fn frac_mul_small_exact() {
        // 5/16 * 3 = 15/16
        let x = fp(5, 4);
        let n = BigUint::from_u64(3).unwrap();
        assert_eq!(frac_mul_nat(&x, &n), fp(15, 4));
        // {2 * 3/4} = 1/2
        let y = fp(3, 2);
        let two = BigUint::from_u64(2).unwrap();
        assert_eq!(frac_mul_nat(&y, &two), fp(2, 2));
    }

    #[test]
    fn frac_mul_zero_and_pow2() {
        let x = fp(0b1011, 4);
        assert!(frac_mul_nat(&x, &BigUint::zero()).is_zero());
        // shift by 2 with overflow discarded: 1011 -> 1100
        let four = BigUint::from_u64(4).unwrap();
        assert_eq!(frac_mul_nat(&x, &four), fp(0b1100, 4));
        // shift past the width gives zero
        let sixteen = BigUint::from_u64(16).unwrap();
        assert!(frac_mul_nat(&x, &sixteen).is_zero());
    }

    #[test]
    fn pow2_path_matches_generic_multiply() {
        let x = sample_uniform(11, 3, 256);
        for k in [0u64, 1, 5, 63, 64, 130, 255, 256, 300] {
            let n = BigUint::one() << k;
            let fast = frac_mul_nat(&x, &n);
            let slow = FixedPointReal::new((x.mantissa() * &n) & mask(x.bits()), x.bits());
            assert_eq!(fast, slow, "k={k}");
        }
    }

    #[test]
    fn two_step_identity_exact() {
        // {mn x} == {n {m x}} with exact mantissa equality
        for seed in 0..20u64 {
            let x = sample_uniform(seed, 0, 192);
            let m = BigUint::from_u64(mix64(seed) | 1).unwrap();
            let n = BigUint::from_u64(mix64(seed ^ 0xABCD) | 1).unwrap();
            let direct = frac_mul_nat(&x, &(&m * &n));
            let two_step = frac_mul_nat(&frac_mul_nat(&x, &m), &n);
            assert_eq!(direct, two_step);
        }
    }

    #[test]
    fn to_double_half_and_underflow() {
        let half = FixedPointReal::new(BigUint::one() << 4095u32, 4096);
        assert_eq!(half.to_double(), 0.5);
        let tiny = FixedPointReal::new(BigUint::one(), 4096);
        assert_eq!(tiny.to_double(), 0.0);
    }

    #[test]
    fn to_double_error_within_2_pow_minus_54() {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::Signed;
        for seed in 0..50u64 {
            for &bits in &[64u64, 100, 512, 1100] {
                let x = sample_uniform(seed, 7, bits);
                let d = x.to_double();
                // exact rational value of the double
                let b = d.to_bits();
                assert_eq!(b >> 63, 0);
                let exp = ((b >> 52) & 0x7FF) as i64;
                let frac = b & ((1u64 << 52) - 1);
                let (m, e) = if exp == 0 {
                    (frac, -1074i64)
                } else {
                    (frac | (1 << 52), exp - 1075)
                };
                let mut rd = BigRational::from_integer(BigInt::from(m));
                if e >= 0 {
                    rd *= BigRational::from_integer(BigInt::from(1u8) << (e as usize));
                } else {
                    rd /= BigRational::from_integer(BigInt::from(1u8) << ((-e) as usize));
                }
                let rx = BigRational::new(
                    BigInt::from(x.mantissa().clone()),
                    BigInt::from(1u8) << (bits as usize),
                );
                let diff = (rd - rx).abs();
                let bound = BigRational::new(BigInt::from(1u8), BigInt::from(1u8) << 54usize);
                assert!(diff <= bound, "seed {seed} bits {bits}");
            }
        }
    }

    #[test]
    fn sample_uniform_is_pure_and_distinct() {
        let a = sample_uniform(42, 9, 128);
        let b = sample_uniform(42, 9, 128);
        assert_eq!(a, b);
        let c = sample_uniform(42, 10, 128);
        assert_ne!(a, c);
        let d = sample_uniform(43, 9, 128);
        assert_ne!(a, d);
    }

    #[test]
    fn sample_uniform_64_bit_range() {
        for i in 0..100 {
            let x = sample_uniform(5, i, 64);
            let v = x.to_double();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn monobit_within_three_sigma() {
        // total ones among the first 64 bits of 10^4 consecutive indices
        let rng = CounterRng::new(0xD1CE);
        let n = 10_000u64;
        let mut ones = 0u64;
        for i in 0..n {
            ones += rng.word(i, 0).count_ones() as u64;
        }
        let total = 64 * n;
        let mean = total as f64 / 2.0;
        let sigma = (total as f64 * 0.25).sqrt();
        assert!(
            (ones as f64 - mean).abs() <= 3.0 * sigma,
            "ones={ones} mean={mean} sigma={sigma}"
        );
    }

    #[test]
    fn windows_match_frac_mul_exactly() {
        let x = sample_uniform(77, 1, 521); // deliberately not a word multiple
        let w = DyadicWindows::new(&x);
        for m in [0u64, 1, 7, 63, 64, 65, 128, 200, 400, 457, 520, 521, 600] {
            let n = BigUint::one() << m;
            let reference = frac_mul_nat(&x, &n).to_double();
            assert_eq!(w.frac_pow2_mul(m).to_bits(), reference.to_bits(), "m={m}");
        }
    }

    #[test]
    fn rational_oracle_modpow() {
        // x ~= p/q at B bits, n = 2^100: {n x} must match (2^100 p mod q)/q
        use num_traits::ToPrimitive;
        let bits = 512u64;
        let q = BigUint::from_u64(1_000_003).unwrap(); // odd
        for p in [1u64, 17, 999_999] {
            let p = BigUint::from_u64(p).unwrap();
            let x = FixedPointReal::from_fraction(&p, &q, bits);
            let n = BigUint::one() << 100u32;
            let got = frac_mul_nat(&x, &n).to_double();
            let reference = {
                let two = BigUint::from_u64(2).unwrap();
                let r = two.modpow(&BigUint::from_u64(100).unwrap(), &q) * &p % &q;
                r.to_f64().unwrap() / q.to_f64().unwrap()
            };
            // error <= 2^(100-512) from the input truncation plus 2^-54 rounding
            assert!((got - reference).abs() < 1e-15, "p/q case");
        }
    }
}
