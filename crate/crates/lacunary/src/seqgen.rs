//! Generators for every sequence family under study, deterministic and
//! random, plus gap-condition diagnostics.
//!
//! Random variants are driven by the counter RNG keyed on (seed, position),
//! so `generate(spec, N)` is always a prefix of `generate(spec, N+1)` and
//! results are independent of evaluation order.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::bigfrac::{BigNat, CounterRng};
use crate::error::{Error, Result};
use crate::fixexp::{self, Enclosure};
use crate::numeric::big_ln;

/// Block-size rule for `BlockUniform`: consecutive disjoint blocks
/// I_1 = [1, s_1], I_k = (sum s_j (j<k), sum s_j (j<=k)].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockRule {
    EqualLength(u64),
    /// s_k = k^exponent (the k^5 construction uses exponent 5).
    PowerRule { exponent: u32 },
    Custom(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceSpec {
    /// n_k = theta^k, integer theta >= 2.
    GeometricInt { theta: u64 },
    /// n_k = floor((num/den)^k), num/den > 1. Errors if the floors stall.
    GeometricFloor { num: u64, den: u64 },
    /// n_k = base^k - 1, base >= 2.
    PowerMinusOne { base: u64 },
    /// n_k = k^2.
    Squares,
    /// n_k = k.
    Naturals,
    /// Multiplicative semigroup of the given primes, sorted ascending.
    Hlp { primes: Vec<u64>, include_one: bool },
    /// n_k = floor(e^(c k^beta)) for rational c, beta > 0; floors certified.
    ExpPower {
        c_num: u64,
        c_den: u64,
        beta_num: u32,
        beta_den: u32,
    },
    /// Greedy sequence keeping all pairwise sums n_i + n_j (i <= j) distinct.
    GreedySidon,
    /// Independent inclusion of each integer with probability p = p_num/p_den.
    CoinFlip { p_num: u64, p_den: u64, seed: u64 },
    /// n_k uniform on the k-th block of consecutive integers.
    BlockUniform { rule: BlockRule, seed: u64 },
    /// n_k uniform on the integers of J_k = (e^(c k^beta)(1-r_k), e^(c k^beta)(1+r_k)),
    /// r_k = k^(-gamma), gamma > 1 - beta; starts at the least k0 with the
    /// intervals disjoint and nonempty.
    IntervalFamily {
        c_num: u64,
        c_den: u64,
        beta_num: u32,
        beta_den: u32,
        gamma_num: u32,
        gamma_den: u32,
        seed: u64,
    },
    /// Externally supplied terms (deserialized sequences).
    Custom,
}

/// A strictly increasing prefix of positive integer terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunarySequence {
    terms: Vec<BigNat>,
    spec: SequenceSpec,
    /// Index of the first generated term (1 except for IntervalFamily,
    /// which reports its k0 here).
    origin_index: u64,
}

impl LacunarySequence {
    pub fn from_terms(terms: Vec<BigNat>) -> Result<Self> {
        validate_increasing(&terms)?;
        Ok(Self {
            terms,
            spec: SequenceSpec::Custom,
            origin_index: 1,
        })
    }

    pub fn terms(&self) -> &[BigNat] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn origin_index(&self) -> u64 {
        self.origin_index
    }

    /// Bit length of the largest term.
    pub fn max_bits(&self) -> u64 {
        self.terms.last().map_or(0, |t| t.bits())
    }

    /// Newline-delimited decimal text; round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let t: BigUint = line
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("line {}: {e}", i + 1)))?;
            terms.push(t);
        }
        Self::from_terms(terms)
    }

    /// Length-prefixed little-endian binary format; round-trips exactly.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"LSEQ");
        out.extend_from_slice(&(self.terms.len() as u64).to_le_bytes());
        for t in &self.terms {
            let bytes = t.to_bytes_le();
            out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn from_binary(data: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::InvalidSpec(format!("binary sequence: {m}"));
        if data.len() < 12 || &data[..4] != b"LSEQ" {
            return Err(bad("missing LSEQ header"));
        }
        let count = u64::from_le_bytes(data[4..12].try_into().unwrap()) as usize;
        let mut pos = 12usize;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            if pos + 8 > data.len() {
                return Err(bad("truncated length"));
            }
            let len = u64::from_le_bytes(data[pos..pos + 8].try_into().unwrap()) as usize;
            pos += 8;
            if pos + len > data.len() {
                return Err(bad("truncated term"));
            }
            terms.push(BigUint::from_bytes_le(&data[pos..pos + len]));
            pos += len;
        }
        Self::from_terms(terms)
    }
}

fn validate_increasing(terms: &[BigNat]) -> Result<()> {
    if terms.first().is_some_and(|t| t.is_zero()) {
        return Err(Error::InvalidSpec("terms must be positive".into()));
    }
    for w in terms.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidSpec(format!(
                "terms not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Gap-condition diagnostics over a generated prefix.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub min_ratio: BigRational,
    pub max_ratio: BigRational,
    pub min_gap: BigNat,
    pub max_gap: BigNat,
    /// Largest q with n_{k+1}/n_k >= q over the prefix (= min_ratio).
    pub hadamard_q: BigRational,
    /// Least alpha >= 0 with n_{k+1}/n_k >= 1 + k^-alpha over the whole
    /// prefix, or None when no alpha works (the k = 1 step needs ratio >= 2).
    pub erdos_alpha_fit: Option<f64>,
}

pub fn gap_report(seq: &LacunarySequence) -> Result<GapReport> {
    if seq.len() < 2 {
        return Err(Error::InvalidSpec("gap_report needs at least 2 terms".into()));
    }
    let t = seq.terms();
    let mut min_ratio: Option<BigRational> = None;
    let mut max_ratio: Option<BigRational> = None;
    let mut min_gap: Option<BigUint> = None;
    let mut max_gap: Option<BigUint> = None;
    let mut alpha: f64 = 0.0;
    let mut fails = false;
    for (k, w) in t.windows(2).enumerate() {
        let ratio = BigRational::new(BigInt::from(w[1].clone()), BigInt::from(w[0].clone()));
        let gap = &w[1] - &w[0];
        if min_ratio.as_ref().is_none_or(|m| ratio < *m) {
            min_ratio = Some(ratio.clone());
        }
        if max_ratio.as_ref().is_none_or(|m| ratio > *m) {
            max_ratio = Some(ratio.clone());
        }
        if min_gap.as_ref().is_none_or(|m| gap < *m) {
            min_gap = Some(gap.clone());
        }
        if max_gap.as_ref().is_none_or(|m| gap > *m) {
            max_gap = Some(gap.clone());
        }
        // requirement at step k (1-based): ratio >= 1 + k^-alpha
        let k1 = k + 1;
        // ln(ratio - 1) computed from exact big integers: ratio - 1 = gap / n_k
        let ln_excess = big_ln(&gap) - big_ln(&w[0]);
        if k1 == 1 {
            if ln_excess < 0.0 {
                fails = true; // 1^-alpha = 1 for every alpha
            }
        } else if ln_excess < 0.0 {
            alpha = alpha.max(-ln_excess / (k1 as f64).ln());
        }
    }
    let min_ratio = min_ratio.unwrap();
    Ok(GapReport {
        hadamard_q: min_ratio.clone(),
        min_ratio,
        max_ratio: max_ratio.unwrap(),
        min_gap: min_gap.unwrap(),
        max_gap: max_gap.unwrap(),
        erdos_alpha_fit: if fails { None } else { Some(alpha) },
    })
}

/// Generate the first N terms of the family described by `spec`.
pub fn generate(spec: &SequenceSpec, n: usize) -> Result<LacunarySequence> {
    if n == 0 {
        return Err(Error::InvalidSpec("N must be at least 1".into()));
    }
    let mut origin_index = 1u64;
    let terms = match spec {
        SequenceSpec::GeometricInt { theta } => {
            if *theta < 2 {
                return Err(Error::InvalidSpec("GeometricInt needs theta >= 2".into()));
            }
            let theta = BigUint::from(*theta);
            let mut v = BigUint::one();
            (0..n)
                .map(|_| {
                    v *= &theta;
                    v.clone()
                })
                .collect()
        }
        SequenceSpec::GeometricFloor { num, den } => {
            if *den == 0 || num <= den {
                return Err(Error::InvalidSpec("GeometricFloor needs num/den > 1".into()));
            }
            let (p, q) = (BigUint::from(*num), BigUint::from(*den));
            let (mut pk, mut qk) = (BigUint::one(), BigUint::one());
            let mut terms = Vec::with_capacity(n);
            for _ in 0..n {
                pk *= &p;
                qk *= &q;
                terms.push(&pk / &qk);
            }
            validate_increasing(&terms).map_err(|_| {
                Error::InvalidSpec("GeometricFloor: floor powers stall for this theta".into())
            })?;
            terms
        }
        SequenceSpec::PowerMinusOne { base } => {
            if *base < 2 {
                return Err(Error::InvalidSpec("PowerMinusOne needs base >= 2".into()));
            }
            let base = BigUint::from(*base);
            let mut v = BigUint::one();
            (0..n)
                .map(|_| {
                    v *= &base;
                    &v - BigUint::one()
                })
                .collect()
        }
        SequenceSpec::Squares => (1..=n as u64).map(|k| BigUint::from(k * k)).collect(),
        SequenceSpec::Naturals => (1..=n as u64).map(BigUint::from).collect(),
        SequenceSpec::Hlp { primes, include_one } => hlp_first_n(primes, *include_one, n)?,
        SequenceSpec::ExpPower {
            c_num,
            c_den,
            beta_num,
            beta_den,
        } => exp_power_terms(*c_num, *c_den, *beta_num, *beta_den, n)?,
        SequenceSpec::GreedySidon => greedy_sidon_terms(n)?,
        SequenceSpec::CoinFlip { p_num, p_den, seed } => {
            if *p_den == 0 || *p_num == 0 || p_num >= p_den {
                return Err(Error::InvalidSpec("CoinFlip needs 0 < p < 1".into()));
            }
            // expected scan length is 2N/p integers
            let rng = CounterRng::new(*seed);
            let threshold = ((*p_num as u128) << 64) / *p_den as u128;
            let mut terms = Vec::with_capacity(n);
            let mut m = 0u64;
            while terms.len() < n {
                m += 1;
                if (rng.word(m, 0) as u128) < threshold {
                    terms.push(BigUint::from(m));
                }
            }
            terms
        }
        SequenceSpec::BlockUniform { rule, seed } => block_uniform_terms(rule, *seed, n)?,
        SequenceSpec::IntervalFamily {
            c_num,
            c_den,
            beta_num,
            beta_den,
            gamma_num,
            gamma_den,
            seed,
        } => {
            let (terms, k0) = interval_family_terms(
                *c_num, *c_den, *beta_num, *beta_den, *gamma_num, *gamma_den, *seed, n,
            )?;
            origin_index = k0;
            terms
        }
        SequenceSpec::Custom => {
            return Err(Error::InvalidSpec(
                "Custom sequences are loaded from data, not generated".into(),
            ))
        }
    };
    validate_increasing(&terms)?;
    Ok(LacunarySequence {
        terms,
        spec: spec.clone(),
        origin_index,
    })
}

/// All semigroup elements <= bound, ascending, by heap merge
/// (sub-quadratic in the output size).
pub fn hlp_generate(primes: &[u64], bound: &BigNat, include_one: bool) -> Result<LacunarySequence> {
    check_primes(primes)?;
    let mut out = Vec::new();
    let mut heap: BinaryHeap<Reverse<BigUint>> = BinaryHeap::new();
    heap.push(Reverse(BigUint::one()));
    let mut last: Option<BigUint> = None;
    while let Some(Reverse(v)) = heap.pop() {
        if v > *bound {
            break;
        }
        if last.as_ref() == Some(&v) {
            continue;
        }
        for p in primes {
            let child = &v * BigUint::from(*p);
            if child <= *bound {
                heap.push(Reverse(child));
            }
        }
        if include_one || !v.is_one() {
            out.push(v.clone());
        }
        last = Some(v);
    }
    LacunarySequence::from_terms(out).map(|mut s| {
        s.spec = SequenceSpec::Hlp {
            primes: primes.to_vec(),
            include_one,
        };
        s
    })
}

fn check_primes(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return Err(Error::InvalidSpec("need at least one prime".into()));
    }
    for &p in primes {
        if p < 2 || !is_prime_u64(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
    }
    Ok(())
}

fn hlp_first_n(primes: &[u64], include_one: bool, n: usize) -> Result<Vec<BigNat>> {
    check_primes(primes)?;
    let mut out = Vec::with_capacity(n);
    let mut heap: BinaryHeap<Reverse<BigUint>> = BinaryHeap::new();
    heap.push(Reverse(BigUint::one()));
    let mut last: Option<BigUint> = None;
    while out.len() < n {
        let Reverse(v) = heap.pop().expect("heap never empties");
        if last.as_ref() == Some(&v) {
            continue;
        }
        for p in primes {
            heap.push(Reverse(&v * BigUint::from(*p)));
        }
        if include_one || !v.is_one() {
            out.push(v.clone());
        }
        last = Some(v);
    }
    Ok(out)
}

/// Deterministic Miller-Rabin, exact for all u64.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

fn greedy_sidon_terms(n: usize) -> Result<Vec<BigNat>> {
    if n > 4096 {
        return Err(Error::CapacityExceeded(format!(
            "GreedySidon N={n}: terms grow like k^3, prefix cap is 4096"
        )));
    }
    let mut terms: Vec<u64> = Vec::with_capacity(n);
    let mut sums: HashSet<u64> = HashSet::new(); // all n_i + n_j, i <= j
    let mut candidate = 1u64;
    while terms.len() < n {
        let ok = !sums.contains(&(2 * candidate))
            && terms.iter().all(|&t| !sums.contains(&(t + candidate)));
        if ok {
            for &t in &terms {
                sums.insert(t + candidate);
            }
            sums.insert(2 * candidate);
            terms.push(candidate);
        }
        candidate += 1;
    }
    Ok(terms.into_iter().map(BigUint::from).collect())
}

fn block_uniform_terms(rule: &BlockRule, seed: u64, n: usize) -> Result<Vec<BigNat>> {
    let rng = CounterRng::new(seed);
    let mut terms = Vec::with_capacity(n);
    let mut start: u128 = 0; // block k covers (start, start + s_k]
    for k in 1..=n as u64 {
        let size = match rule {
            BlockRule::EqualLength(len) => {
                if *len == 0 {
                    return Err(Error::InvalidSpec("block length must be positive".into()));
                }
                *len
            }
            BlockRule::PowerRule { exponent } => k
                .checked_pow(*exponent)
                .ok_or_else(|| Error::CapacityExceeded(format!("block size k^{exponent} overflows at k={k}")))?,
            BlockRule::Custom(sizes) => *sizes.get(k as usize - 1).ok_or_else(|| {
                Error::InvalidSpec(format!("custom block rule has only {} sizes", sizes.len()))
            })?,
        };
        let offset = rng.below(k, 1, size); // 0..size
        terms.push(BigUint::from(start + 1 + offset as u128));
        start += size as u128;
    }
    Ok(terms)
}

fn exp_power_terms(c_num: u64, c_den: u64, beta_num: u32, beta_den: u32, n: usize) -> Result<Vec<BigNat>> {
    if c_num == 0 || c_den == 0 || beta_num == 0 || beta_den == 0 {
        return Err(Error::InvalidSpec("ExpPower needs c > 0 and beta > 0".into()));
    }
    let mut terms = Vec::with_capacity(n);
    for k in 1..=n as u64 {
        let v = certified_exp_floor(k, c_num, c_den, beta_num, beta_den)?;
        terms.push(v);
    }
    validate_increasing(&terms)
        .map_err(|_| Error::InvalidSpec("ExpPower floors are not strictly increasing; raise c or beta".into()))?;
    Ok(terms)
}

/// floor(e^(c k^beta)) with the floor certified by interval arithmetic;
/// precision doubles on ambiguity up to a cap.
fn certified_exp_floor(k: u64, c_num: u64, c_den: u64, beta_num: u32, beta_den: u32) -> Result<BigNat> {
    let mut f: u32 = 96;
    const CAP: u32 = 1 << 17;
    while f <= CAP {
        let kb = fixexp::pow_rational(k, beta_num, beta_den, f);
        let y = kb.mul_rational(c_num, c_den);
        let e = fixexp::exp_enclosure(&y);
        if let Some(v) = e.certain_floor() {
            return Ok(v);
        }
        f *= 2;
    }
    Err(Error::NearIntegerAmbiguity {
        index: k as usize,
        bits: CAP,
    })
}

#[allow(clippy::too_many_arguments)]
fn interval_family_terms(
    c_num: u64,
    c_den: u64,
    beta_num: u32,
    beta_den: u32,
    gamma_num: u32,
    gamma_den: u32,
    seed: u64,
    n: usize,
) -> Result<(Vec<BigNat>, u64)> {
    if c_num == 0 || c_den == 0 || beta_num == 0 || beta_den == 0 || gamma_num == 0 || gamma_den == 0 {
        return Err(Error::InvalidSpec("IntervalFamily needs positive parameters".into()));
    }
    // disjointness needs r_k -> 0 faster than k^-(1-beta): gamma > 1 - beta
    let gamma = gamma_num as f64 / gamma_den as f64;
    let beta = beta_num as f64 / beta_den as f64;
    if gamma <= 1.0 - beta {
        return Err(Error::InvalidSpec(format!(
            "IntervalFamily needs gamma > 1 - beta (gamma={gamma}, beta={beta})"
        )));
    }

    // integer candidate range of J_k, certified
    let range_of = |k: u64| -> Result<(BigUint, BigUint)> {
        let mut f: u32 = 96;
        const CAP: u32 = 1 << 17;
        while f <= CAP {
            let kb = fixexp::pow_rational(k, beta_num, beta_den, f);
            let y = kb.mul_rational(c_num, c_den);
            let e = fixexp::exp_enclosure(&y);
            let kg = fixexp::pow_rational(k, gamma_num, gamma_den, f);
            let r = fixexp::reciprocal(&kg); // k^-gamma
            let one = BigUint::one() << f;
            if r.hi >= one {
                // 1 - r_k <= 0 at k = 1; treat the lower endpoint as zero
                let b = e.mul(&Enclosure {
                    lo: &one + &r.lo,
                    hi: &one + &r.hi,
                    f,
                });
                if let Some(bf) = b.certain_floor() {
                    return Ok((BigUint::one(), bf));
                }
            } else {
                let a = e.mul(&Enclosure {
                    lo: &one - &r.hi,
                    hi: &one - &r.lo,
                    f,
                });
                let b = e.mul(&Enclosure {
                    lo: &one + &r.lo,
                    hi: &one + &r.hi,
                    f,
                });
                if let (Some(af), Some(bf)) = (a.certain_floor(), b.certain_floor()) {
                    // open interval (A, B): integers floor(A)+1 ..= floor(B)
                    return Ok((af + BigUint::one(), bf));
                }
            }
            f *= 2;
        }
        Err(Error::NearIntegerAmbiguity {
            index: k as usize,
            bits: CAP,
        })
    };

    // find the least k0 with n consecutive nonempty pairwise-disjoint blocks
    const K0_CAP: u64 = 100_000;
    let mut k0 = 1u64;
    let mut ranges: Vec<(BigUint, BigUint)> = Vec::new();
    let mut k = 1u64;
    while ranges.len() < n {
        if k0 > K0_CAP {
            return Err(Error::InvalidSpec(format!(
                "IntervalFamily found no run of {n} disjoint blocks below k0 = {K0_CAP}"
            )));
        }
        let r = range_of(k)?;
        let ok_nonempty = r.0 <= r.1;
        let ok_disjoint = ranges.last().is_none_or(|prev: &(BigUint, BigUint)| prev.1 < r.0);
        if ok_nonempty && ok_disjoint {
            ranges.push(r);
        } else {
            ranges.clear();
            k0 = k + 1;
        }
        k += 1;
    }

    let rng = CounterRng::new(seed);
    let terms = ranges
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| {
            let count = hi - lo + BigUint::one();
            lo + draw_below(&rng, k0 + i as u64, &count)
        })
        .collect();
    Ok((terms, k0))
}

/// Deterministic uniform draw in 0..bound for arbitrary-precision bounds
/// (modulo bias below 2^-64).
fn draw_below(rng: &CounterRng, position: u64, bound: &BigUint) -> BigUint {
    let words = (bound.bits() + 64).div_ceil(64);
    let mut digits: Vec<u32> = Vec::with_capacity(2 * words as usize);
    for t in 0..words {
        let w = rng.word(position, 2 + t);
        digits.push((w & 0xFFFF_FFFF) as u32);
        digits.push((w >> 32) as u32);
    }
    BigUint::new(digits) % bound
}
