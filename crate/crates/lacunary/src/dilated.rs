//! Periodic test functions and the arithmetic of dilated sums: Fourier
//! pairing of ∫f(mx)g(nx)dx, the Franel–Landau identity, GCD sums, dilation
//! variances, signed-moment counting, divisor-function bounds, and weighted
//! partial sums of dilated functions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bigfrac::{frac_mul_nat, BigNat, DyadicWindows, FixedPointReal};
use crate::error::{Error, Result};
use crate::numeric::{big_ln, Kahan};
use crate::seqgen::{LacunarySequence, SequenceSpec};

/// One Fourier harmonic: a·cos(2πjx) + b·sin(2πjx).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub j: u64,
    pub a: f64,
    pub b: f64,
}

/// Closed-form coefficient rule for truncated Fourier series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CoeffRule {
    Sawtooth,
    Indicator { a: f64, b: f64 },
}

/// A 1-periodic zero-mean function with closed-form Fourier coefficients and
/// a total-variation bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PeriodicFunction {
    /// {x} - 1/2 (value -1/2 at lattice points since {0} = 0).
    CenteredSawtooth,
    /// 1_[a,b) - (b - a) on [0,1), 0 <= a < b <= 1.
    CenteredIndicator { a: f64, b: f64 },
    /// Finite cosine/sine polynomial; must have no constant term.
    CosPoly(Vec<Harmonic>),
    /// First `m` harmonics of a coefficient rule.
    TruncatedFourier { rule: CoeffRule, m: u64 },
}

impl PeriodicFunction {
    pub fn sawtooth() -> Self {
        PeriodicFunction::CenteredSawtooth
    }

    pub fn cos() -> Self {
        PeriodicFunction::CosPoly(vec![Harmonic { j: 1, a: 1.0, b: 0.0 }])
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&a) || !(a..=1.0).contains(&b) || a >= b {
            return Err(Error::InvalidSpec(format!(
                "indicator needs 0 <= a < b <= 1, got [{a}, {b})"
            )));
        }
        Ok(PeriodicFunction::CenteredIndicator { a, b })
    }

    /// Evaluate at x in [0, 1).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PeriodicFunction::CenteredSawtooth => x - 0.5,
            PeriodicFunction::CenteredIndicator { a, b } => {
                let inside = *a <= x && x < *b;
                (inside as u8 as f64) - (b - a)
            }
            PeriodicFunction::CosPoly(hs) => {
                let mut acc = 0.0;
                for h in hs {
                    let (s, c) = (2.0 * PI * frac_mult_u128(h.j as u128, x)).sin_cos();
                    acc += h.a * c + h.b * s;
                }
                acc
            }
            PeriodicFunction::TruncatedFourier { rule, m } => {
                let mut acc = Kahan::new();
                for j in 1..=*m {
                    let (a, b) = rule_coeff(rule, j as u128);
                    let (s, c) = (2.0 * PI * frac_mult_u128(j as u128, x)).sin_cos();
                    acc.add(a * c + b * s);
                }
                acc.value()
            }
        }
    }

    /// Exact closed-form Fourier coefficients (a_j, b_j), j >= 1.
    pub fn coeff(&self, j: u64) -> (f64, f64) {
        self.coeff_wide(j as u128)
    }

    fn coeff_wide(&self, j: u128) -> (f64, f64) {
        debug_assert!(j >= 1);
        match self {
            PeriodicFunction::CenteredSawtooth => (0.0, -1.0 / (PI * j as f64)),
            PeriodicFunction::CenteredIndicator { a, b } => indicator_coeff(*a, *b, j),
            PeriodicFunction::CosPoly(hs) => {
                if j <= u64::MAX as u128 {
                    let j = j as u64;
                    hs.iter()
                        .find(|h| h.j == j)
                        .map_or((0.0, 0.0), |h| (h.a, h.b))
                } else {
                    (0.0, 0.0)
                }
            }
            PeriodicFunction::TruncatedFourier { rule, m } => {
                if j <= *m as u128 {
                    rule_coeff(rule, j)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Total-variation bound on [0,1]. Exact for sawtooth (1) and indicator
    /// (2); for trigonometric polynomials the per-harmonic bound 4j·R_j is
    /// summed.
    pub fn variation(&self) -> f64 {
        match self {
            PeriodicFunction::CenteredSawtooth => 1.0,
            PeriodicFunction::CenteredIndicator { .. } => 2.0,
            PeriodicFunction::CosPoly(hs) => hs
                .iter()
                .map(|h| 4.0 * h.j as f64 * (h.a * h.a + h.b * h.b).sqrt())
                .sum(),
            PeriodicFunction::TruncatedFourier { rule, m } => (1..=*m)
                .map(|j| {
                    let (a, b) = rule_coeff(rule, j as u128);
                    4.0 * j as f64 * (a * a + b * b).sqrt()
                })
                .sum(),
        }
    }

    /// ∫f² over one period.
    pub fn integral_f_squared(&self) -> f64 {
        match self {
            PeriodicFunction::CenteredSawtooth => 1.0 / 12.0,
            PeriodicFunction::CenteredIndicator { a, b } => {
                let len = b - a;
                len * (1.0 - len)
            }
            PeriodicFunction::CosPoly(hs) => {
                hs.iter().map(|h| (h.a * h.a + h.b * h.b) / 2.0).sum()
            }
            PeriodicFunction::TruncatedFourier { rule, m } => {
                let mut acc = Kahan::new();
                for j in 1..=*m {
                    let (a, b) = rule_coeff(rule, j as u128);
                    acc.add((a * a + b * b) / 2.0);
                }
                acc.value()
            }
        }
    }

    /// K with |a_j|, |b_j| <= K/j for every j.
    pub fn coeff_envelope(&self) -> f64 {
        match self {
            PeriodicFunction::CenteredSawtooth => 1.0 / PI,
            PeriodicFunction::CenteredIndicator { .. } => 2.0 / PI,
            PeriodicFunction::CosPoly(hs) => hs
                .iter()
                .map(|h| h.j as f64 * h.a.abs().max(h.b.abs()))
                .fold(0.0, f64::max),
            PeriodicFunction::TruncatedFourier { rule, .. } => match rule {
                CoeffRule::Sawtooth => 1.0 / PI,
                CoeffRule::Indicator { .. } => 2.0 / PI,
            },
        }
    }

    /// Largest harmonic with a nonzero coefficient, when finite.
    pub fn max_frequency(&self) -> Option<u64> {
        match self {
            PeriodicFunction::CosPoly(hs) => hs.iter().map(|h| h.j).max(),
            PeriodicFunction::TruncatedFourier { m, .. } => Some(*m),
            _ => None,
        }
    }
}

fn rule_coeff(rule: &CoeffRule, j: u128) -> (f64, f64) {
    match rule {
        CoeffRule::Sawtooth => (0.0, -1.0 / (PI * j as f64)),
        CoeffRule::Indicator { a, b } => indicator_coeff(*a, *b, j),
    }
}

fn indicator_coeff(a: f64, b: f64, j: u128) -> (f64, f64) {
    let pj = PI * j as f64;
    let ta = 2.0 * PI * frac_mult_u128(j, a);
    let tb = 2.0 * PI * frac_mult_u128(j, b);
    let (sa, ca) = ta.sin_cos();
    let (sb, cb) = tb.sin_cos();
    ((sb - sa) / pj, (ca - cb) / pj)
}

/// Exact {j·x} treating the f64 `x` as the dyadic rational it is.
fn frac_mult_u128(j: u128, x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7FF) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    let shift = (-e) as u32; // x = m / 2^shift, m < 2^53
    if shift <= 75 && j < (1u128 << 75) {
        let prod = j * m as u128; // < 2^128, exact
        let modulus = 1u128 << shift;
        ((prod & (modulus - 1)) as f64) / modulus as f64
    } else {
        (j as f64 * x).fract()
    }
}

// ---------------------------------------------------------------------------
// Fourier pairing of dilations
// ---------------------------------------------------------------------------

/// Value and rigorous error bound for ∫f(mx)g(nx)dx.
#[derive(Clone, Copy, Debug)]
pub struct InnerProduct {
    pub value: f64,
    pub tail_bound: f64,
}

/// ∫₀¹ f(mx) g(nx) dx via Fourier pairing:
/// (1/2) Σ_t [a^f_{αt} a^g_{βt} + b^f_{αt} b^g_{βt}] with α = n/d, β = m/d,
/// d = gcd(m, n), summed over t <= M.
///
/// For pure 1/j-coefficient pairs (sawtooth against sawtooth) the series tail
/// is summed analytically, so the reported bound drops to machine noise;
/// otherwise the tail bound comes from the coefficient envelopes.
pub fn dilated_inner_product(
    f: &PeriodicFunction,
    g: &PeriodicFunction,
    m: u64,
    n: u64,
    truncation: u64,
) -> Result<InnerProduct> {
    if m == 0 || n == 0 || truncation == 0 {
        return Err(Error::InvalidSpec("dilated_inner_product needs m, n, M >= 1".into()));
    }
    let d = m.gcd(&n);
    let alpha = (n / d) as u128; // multiplies f's index
    let beta = (m / d) as u128; // multiplies g's index
    let kf = f.coeff_envelope();
    let kg = g.coeff_envelope();

    // contributions decay like 1/(alpha beta t^2); if the product is already
    // below resolution there is nothing to sum
    let ab = alpha as f64 * beta as f64;
    if ab > 1e24 {
        return Ok(InnerProduct {
            value: 0.0,
            tail_bound: kf * kg / ab * (PI * PI / 6.0),
        });
    }

    // finite spectra cut the sum exactly
    let mut t_cut = truncation;
    let mut finite = false;
    if let Some(jf) = f.max_frequency() {
        t_cut = t_cut.min((jf as u128 / alpha) as u64);
        finite = true;
    }
    if let Some(jg) = g.max_frequency() {
        t_cut = t_cut.min((jg as u128 / beta) as u64);
        finite = true;
    }

    let mut acc = Kahan::new();
    for t in 1..=t_cut as u128 {
        let (af, bf) = f.coeff_wide(alpha * t);
        let (ag, bg) = g.coeff_wide(beta * t);
        acc.add(0.5 * (af * ag + bf * bg));
    }
    let mut value = acc.value();

    let mut tail = if finite && t_cut < truncation {
        0.0 // the spectrum ran out before the truncation did
    } else {
        kf * kg / (ab * truncation as f64)
    };

    // analytic tail for the pure 1/(pi j) x 1/(pi j) pair
    let both_sawtooth = matches!(f, PeriodicFunction::CenteredSawtooth)
        && matches!(g, PeriodicFunction::CenteredSawtooth);
    if both_sawtooth {
        let x = truncation as f64 + 1.0;
        let em = 1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x.powi(3))
            - 1.0 / (30.0 * x.powi(5))
            + 1.0 / (42.0 * x.powi(7));
        value += em / (2.0 * PI * PI * ab);
        tail = 1.0 / (30.0 * x.powi(9)) / (2.0 * PI * PI * ab) + 1e-14;
    }

    Ok(InnerProduct { value, tail_bound: tail })
}

/// Exact rational (1/12)·gcd(m,n)²/(m·n).
pub fn franel_landau(m: u64, n: u64) -> Result<BigRational> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSpec("franel_landau needs m, n >= 1".into()));
    }
    let g = m.gcd(&n);
    Ok(BigRational::new(
        BigInt::from(g) * BigInt::from(g),
        BigInt::from(12u32) * BigInt::from(m) * BigInt::from(n),
    ))
}

// ---------------------------------------------------------------------------
// GCD sums
// ---------------------------------------------------------------------------

/// Σ_{k,ℓ<=N} gcd(n_k, n_ℓ)^{2α} / (n_k n_ℓ)^α over ordered pairs.
#[derive(Clone, Debug)]
pub struct GcdSumQuery {
    pub terms: Vec<BigNat>,
    pub alpha: f64,
}

pub fn gcd_sum(q: &GcdSumQuery) -> Result<f64> {
    if !(q.alpha > 0.5 && q.alpha <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "gcd_sum needs alpha in (1/2, 1], got {}",
            q.alpha
        )));
    }
    for w in q.terms.iter() {
        if w.is_zero() {
            return Err(Error::InvalidSpec("terms must be positive".into()));
        }
    }
    let n = q.terms.len();
    let lns: Vec<f64> = q.terms.iter().map(big_ln).collect();
    let mut acc = Kahan::new();
    acc.add(n as f64); // diagonal contributes exactly 1 per term
    for k in 0..n {
        for l in (k + 1)..n {
            let g = q.terms[k].gcd(&q.terms[l]);
            let term = (q.alpha * (2.0 * big_ln(&g) - lns[k] - lns[l])).exp();
            acc.add(2.0 * term); // (k,l) and (l,k)
        }
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// Dilation variance (Kac)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct VarianceReport {
    /// ∫f² + 2 Σ_{m<=M} ∫f(x)f(r^m x)dx, raw.
    pub sigma_squared: f64,
    pub truncation: u64,
    /// Rigorous bound on |reported - true σ²|.
    pub tail_bound: f64,
    /// max(sigma_squared, 0); the raw value may dip below zero only within
    /// the tail error.
    pub sigma_squared_clamped: f64,
}

/// Limiting variance of N^{-1/2} Σ f(r^k x): σ² = ∫f² + 2 Σ_m ∫f(x)f(r^m x)dx.
pub fn dilation_variance(f: &PeriodicFunction, r: u64, truncation: u64) -> Result<VarianceReport> {
    if r < 2 {
        return Err(Error::InvalidSpec("dilation base r must be >= 2".into()));
    }
    if truncation == 0 {
        return Err(Error::InvalidSpec("truncation must be >= 1".into()));
    }

    // exact dyadic-indicator route: overlap counting in integer arithmetic
    if let PeriodicFunction::CenteredIndicator { a, b } = f {
        if let Some(((na, nb), g)) = small_dyadic_pair(*a, *b, 20) {
            return Ok(indicator_dyadic_variance(na, nb, g, r, truncation));
        }
    }

    let mut sigma = Kahan::new();
    sigma.add(f.integral_f_squared());
    let mut tail = 0.0;
    let mut rm: u128 = 1;
    let kf = f.coeff_envelope();
    let max_freq = f.max_frequency();
    let mut spectrum_exhausted = false;
    for _ in 1..=truncation {
        rm = rm.saturating_mul(r as u128);
        // a finite spectrum makes every cross term with r^m > J exactly zero
        if let Some(j) = max_freq {
            if rm > j as u128 {
                spectrum_exhausted = true;
                break;
            }
        }
        if rm > u64::MAX as u128 {
            // remaining cross terms are below 2 * K^2 zeta(2) / r^m each
            tail += 4.0 * kf * kf * (PI * PI / 6.0) / rm as f64;
            break;
        }
        let inner = dilated_inner_product(f, f, 1, rm as u64, inner_truncation(f))?;
        sigma.add(2.0 * inner.value);
        tail += 2.0 * inner.tail_bound;
    }
    if !spectrum_exhausted {
        // dilation terms beyond M: |∫f(x)f(nx)| <= 2 K² ζ(2)/n, geometric in m
        let r_f = r as f64;
        let beyond = 2.0 * kf * kf * (PI * PI / 6.0) / (r_f.powi(truncation as i32) * (r_f - 1.0));
        tail += 2.0 * beyond;
    }

    let raw = sigma.value();
    Ok(VarianceReport {
        sigma_squared: raw,
        truncation,
        tail_bound: tail,
        sigma_squared_clamped: raw.max(0.0),
    })
}

fn inner_truncation(f: &PeriodicFunction) -> u64 {
    // finite spectra are cut exactly inside dilated_inner_product; infinite
    // ones get the identity-grade default
    match f.max_frequency() {
        Some(j) => j.max(1),
        None => 1_000_000,
    }
}

/// (a, b) as (num_a, num_b)/2^g in lowest power of two.
fn small_dyadic_pair(a: f64, b: f64, max_pow: u32) -> Option<((u64, u64), u32)> {
    let scale = (1u64 << max_pow) as f64;
    let (sa, sb) = (a * scale, b * scale);
    if sa.fract() == 0.0 && sb.fract() == 0.0 && sb <= scale {
        let (mut na, mut nb, mut g) = (sa as u64, sb as u64, max_pow);
        while g > 0 && na % 2 == 0 && nb % 2 == 0 {
            na /= 2;
            nb /= 2;
            g -= 1;
        }
        Some(((na, nb), g))
    } else {
        None
    }
}

/// Exact σ² for f = 1_[A/2^g, B/2^g) - ℓ under dilation by r.
///
/// ∫f(x)f(nx)dx = Σ_i |[a,b) ∩ [(i+a)/n, (i+b)/n)| - ℓ², computed in integer
/// arithmetic; once 2^g divides r^m the overlap is exactly ℓ² and every
/// further term vanishes.
fn indicator_dyadic_variance(na: u64, nb: u64, g: u32, r: u64, truncation: u64) -> VarianceReport {
    let den = 1u64 << g;
    let len_num = nb - na;
    let f2 = rat(len_num as i128 * (den - len_num) as i128, (den as i128) * (den as i128));
    let mut sigma = f2;
    let mut tail = 0.0;
    let mut exact_all = true;
    let mut rm: u128 = 1;
    for _ in 1..=truncation {
        rm = rm.saturating_mul(r as u128);
        if rm % den as u128 == 0 {
            continue; // exactly zero from here on when r is even; keep scanning for odd r
        }
        if rm > (1u128 << 22) {
            exact_all = false;
            // |∫f f(nx)| <= 2 (2/π)² ζ(2) / n = (4/3)/n
            tail += 2.0 * (4.0 / 3.0) / rm as f64 * (r as f64) / (r as f64 - 1.0);
            break;
        }
        let n = rm as u64;
        let nd = n as i128 * den as i128;
        let (an, bn) = (na as i128 * n as i128, nb as i128 * n as i128);
        let mut overlap: i128 = 0;
        for i in 0..n as i128 {
            let lo = (i * den as i128 + na as i128).max(an);
            let hi = (i * den as i128 + nb as i128).min(bn);
            if hi > lo {
                overlap += hi - lo;
            }
        }
        let cross = rat(overlap, nd) - rat((len_num as i128) * (len_num as i128), (den as i128) * (den as i128));
        sigma += 2.0 * cross;
    }
    if exact_all {
        tail = 0.0;
    }
    VarianceReport {
        sigma_squared: sigma,
        truncation,
        tail_bound: tail,
        sigma_squared_clamped: sigma.max(0.0),
    }
}

#[inline]
fn rat(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

// ---------------------------------------------------------------------------
// Trigonometric moments by signed Diophantine counting
// ---------------------------------------------------------------------------

/// ∫₀¹ (Σ_{k<=N} cos 2π n_k x)^m dx = 2^{-m} · #{signed m-tuples summing to 0},
/// exact over the integers.
pub fn trig_moment(seq: &LacunarySequence, n: usize, m: u32) -> Result<BigRational> {
    if !(1..=4).contains(&m) {
        return Err(Error::InvalidSpec("moment order m must be in 1..=4".into()));
    }
    if n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "prefix length {n} exceeds sequence length {}",
            seq.len()
        )));
    }
    let terms = &seq.terms()[..n];
    let count: u128 = match m {
        1 => 0, // ±n_k = 0 has no solution for positive terms
        2 => {
            // ε₁n_{k1} + ε₂n_{k2} = 0 needs opposite signs and equal terms;
            // terms are strictly increasing, so only k1 = k2 contributes
            2 * n as u128
        }
        3 => {
            if n > 4096 {
                return Err(Error::CapacityExceeded(format!(
                    "m=3 moment is O(N² log N); N={n} exceeds the 4096 cap"
                )));
            }
            let mut count: u128 = 0;
            for k1 in 0..n {
                for k2 in 0..n {
                    let sum = &terms[k1] + &terms[k2];
                    if terms.binary_search(&sum).is_ok() {
                        count += 2; // (+,+,-) and (-,-,+)
                    }
                    if k1 != k2 {
                        let diff = if terms[k1] > terms[k2] {
                            &terms[k1] - &terms[k2]
                        } else {
                            &terms[k2] - &terms[k1]
                        };
                        if terms.binary_search(&diff).is_ok() {
                            count += 2; // (+,-,±) with the sign of the third forced
                        }
                    }
                }
            }
            count
        }
        4 => {
            if n > 512 {
                return Err(Error::CapacityExceeded(format!(
                    "m=4 moment stores 4N² signed pair sums; N={n} exceeds the 512 cap"
                )));
            }
            // meet in the middle: all signed pair values, then match v with -v
            let mut values: Vec<BigInt> = Vec::with_capacity(4 * n * n);
            for k1 in 0..n {
                for k2 in 0..n {
                    let a = BigInt::from(terms[k1].clone());
                    let b = BigInt::from(terms[k2].clone());
                    values.push(&a + &b);
                    values.push(&a - &b);
                    values.push(&b - &a);
                    values.push(-(a + b));
                }
            }
            values.sort_unstable();
            let mut count: u128 = 0;
            let mut i = 0;
            while i < values.len() {
                let mut j = i + 1;
                while j < values.len() && values[j] == values[i] {
                    j += 1;
                }
                let c = (j - i) as u128;
                let v = &values[i];
                if v.is_zero() {
                    count += c * c;
                } else if v.is_negative() {
                    let neg = -v.clone();
                    let lo = values.partition_point(|x| *x < neg);
                    let hi = values.partition_point(|x| *x <= neg);
                    count += c * (hi - lo) as u128;
                } else {
                    let neg = -v.clone();
                    let lo = values.partition_point(|x| *x < neg);
                    let hi = values.partition_point(|x| *x <= neg);
                    count += c * (hi - lo) as u128;
                }
                i = j;
            }
            count
        }
        _ => unreachable!(),
    };
    Ok(BigRational::new(
        BigInt::from(count),
        BigInt::from(1u128 << m),
    ))
}

// ---------------------------------------------------------------------------
// Arithmetic functions d, σ_s, Δ
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithmeticKind {
    /// d(n) = #divisors.
    DivisorCount,
    /// σ_s(n) = Σ_{d|n} d^s.
    SigmaS(f64),
    /// Erdős–Hooley Δ(n) = max over u of #{d | n : u <= d <= e·u}.
    DeltaHooley,
}

pub fn arithmetic_function(kind: ArithmeticKind, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSpec("arithmetic functions need n >= 1".into()));
    }
    let divs = divisors(n);
    Ok(match kind {
        ArithmeticKind::DivisorCount => divs.len() as f64,
        ArithmeticKind::SigmaS(s) => divs.iter().map(|&d| (d as f64).powf(s)).sum(),
        ArithmeticKind::DeltaHooley => delta_from_divisors(&divs) as f64,
    })
}

/// Sorted divisors of n.
pub(crate) fn divisors(n: u64) -> Vec<u64> {
    let factors = factorize(n);
    let mut divs = vec![1u64];
    for (p, e) in factors {
        let prev = divs.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            divs.extend(prev.iter().map(|d| d * pe));
        }
    }
    divs.sort_unstable();
    divs
}

/// Window sweep anchored at each divisor; the sup over real u is attained
/// with the window starting at a divisor.
fn delta_from_divisors(divs: &[u64]) -> usize {
    let e = std::f64::consts::E;
    let mut best = 0usize;
    for (i, &d) in divs.iter().enumerate() {
        let hi = d as f64 * e;
        let count = divs[i..].iter().take_while(|&&x| x as f64 <= hi).count();
        best = best.max(count);
    }
    best
}

/// Prime factorization of a u64 via trial division + Pollard rho.
pub(crate) fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut primes: Vec<u64> = Vec::new();
        while let Some(v) = stack.pop() {
            if crate::seqgen::is_prime_u64(v) {
                primes.push(v);
                continue;
            }
            let d = pollard_rho(v);
            stack.push(d);
            stack.push(v / d);
        }
        primes.sort_unstable();
        for p in primes {
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some((_, e)) => *e += 1,
                None => out.push((p, 1)),
            }
        }
        out.sort_unstable();
    }
    out
}

fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && n % 2 != 0);
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    for c in 1u64.. {
        let f = |x: u64| (mulmod(x, x) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            let diff = x.abs_diff(y);
            if diff == 0 {
                break;
            }
            d = num_integer::gcd(diff, n);
        }
        if d != 1 && d != n {
            return d;
        }
    }
    unreachable!()
}

/// Δ(ν) for all ν <= limit via a divisor-list sieve.
pub fn delta_table(limit: u64) -> Vec<u32> {
    let limit = limit as usize;
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); limit + 1];
    for d in 1..=limit {
        for multiple in (d..=limit).step_by(d) {
            lists[multiple].push(d as u32);
        }
    }
    let e = std::f64::consts::E;
    let mut out = vec![0u32; limit + 1];
    for (nu, divs) in lists.iter().enumerate().skip(1) {
        let mut best = 0u32;
        for (i, &d) in divs.iter().enumerate() {
            let hi = d as f64 * e;
            let count = divs[i..].iter().take_while(|&&x| x as f64 <= hi).count() as u32;
            best = best.max(count);
        }
        out[nu] = best;
    }
    out
}

// ---------------------------------------------------------------------------
// Weber-type variance bound
// ---------------------------------------------------------------------------

/// lhs = ∫(Σ_{k∈H} c_k f(kx))² dx; rhs = (Σ_ν |â_ν|² Δ(ν)) · Σ_{k∈H} c_k² d(k)
/// with |â_ν|² = (a_ν² + b_ν²)/4. Valid for H inside [e^r, e^(r+1)].
pub fn weber_bound_check(
    f: &PeriodicFunction,
    h: &[u64],
    coeffs: &[f64],
    r: u32,
    truncation: u64,
) -> Result<(f64, f64)> {
    if r < 1 {
        return Err(Error::InvalidSpec("weber_bound_check needs r >= 1".into()));
    }
    if h.len() != coeffs.len() || h.is_empty() {
        return Err(Error::InvalidSpec("H and coefficients must align and be nonempty".into()));
    }
    let lo = (r as f64).exp();
    let hi = (r as f64 + 1.0).exp();
    for &k in h {
        if (k as f64) < lo || (k as f64) > hi {
            return Err(Error::IntervalViolation { value: k, r });
        }
    }
    let mut lhs = Kahan::new();
    for (i, (&k1, &c1)) in h.iter().zip(coeffs).enumerate() {
        for (&k2, &c2) in h.iter().zip(coeffs).skip(i) {
            let ip = dilated_inner_product(f, f, k1, k2, truncation)?;
            let w = if k1 == k2 { 1.0 } else { 2.0 };
            lhs.add(w * c1 * c2 * ip.value);
        }
    }
    let deltas = delta_table(truncation);
    let mut spectral = Kahan::new();
    for nu in 1..=truncation {
        let (a, b) = f.coeff(nu);
        if a != 0.0 || b != 0.0 {
            spectral.add((a * a + b * b) / 4.0 * deltas[nu as usize] as f64);
        }
    }
    let weight: f64 = h
        .iter()
        .zip(coeffs)
        .map(|(&k, &c)| c * c * divisors(k).len() as f64)
        .sum();
    Ok((lhs.value(), spectral.value() * weight))
}

// ---------------------------------------------------------------------------
// Weighted partial sums of dilated functions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightRule {
    Ones,
    /// w_k = k^exponent.
    Power { exponent: f64 },
    Custom(Vec<f64>),
}

impl WeightRule {
    pub fn weight(&self, k: usize) -> f64 {
        match self {
            WeightRule::Ones => 1.0,
            WeightRule::Power { exponent } => (k as f64).powf(*exponent),
            WeightRule::Custom(w) => w[k - 1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    None,
    SqrtN,
    SqrtHalfN,
    EllTwoNorm,
    Custom(f64),
}

impl Normalization {
    pub fn divisor(&self, n: usize, weights: &WeightRule) -> f64 {
        match self {
            Normalization::None => 1.0,
            Normalization::SqrtN => (n as f64).sqrt(),
            Normalization::SqrtHalfN => (n as f64 / 2.0).sqrt(),
            Normalization::EllTwoNorm => {
                let mut acc = Kahan::new();
                for k in 1..=n {
                    let w = weights.weight(k);
                    acc.add(w * w);
                }
                acc.value().sqrt()
            }
            Normalization::Custom(s) => *s,
        }
    }
}

/// (Σ_{k<=N} w_k f({n_k x})) / norm with compensated summation.
pub fn partial_sum(
    f: &PeriodicFunction,
    seq: &LacunarySequence,
    weights: &WeightRule,
    x: &FixedPointReal,
    n: usize,
    normalization: Normalization,
) -> Result<f64> {
    if n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "prefix length {n} exceeds sequence length {}",
            seq.len()
        )));
    }
    if let WeightRule::Custom(w) = weights {
        if w.len() < n {
            return Err(Error::InvalidSpec("custom weights shorter than N".into()));
        }
    }
    let need = seq.terms()[..n].last().map_or(0, |t| t.bits()) + 64;
    if x.bits() < need {
        return Err(Error::InsufficientPrecision {
            required: need,
            actual: x.bits(),
        });
    }
    let mut acc = Kahan::new();
    // power-of-two geometric sequences read orbit points straight out of the
    // mantissa bit windows
    if let SequenceSpec::GeometricInt { theta } = seq.spec() {
        if theta.is_power_of_two() {
            let log2 = theta.trailing_zeros() as u64;
            let w = DyadicWindows::new(x);
            for k in 1..=n {
                let point = w.frac_pow2_mul(log2 * k as u64);
                acc.add(weights.weight(k) * f.eval(point));
            }
            return Ok(acc.value() / normalization.divisor(n, weights));
        }
    }
    for (i, t) in seq.terms()[..n].iter().enumerate() {
        let point = frac_mul_nat(x, t).to_double();
        acc.add(weights.weight(i + 1) * f.eval(point));
    }
    Ok(acc.value() / normalization.divisor(n, weights))
}

/// Convenience wrapper returning the pair the caller usually wants from
/// `fourier_coeffs`.
pub fn fourier_coeffs(f: &PeriodicFunction, j: u64) -> Result<(f64, f64)> {
    if j == 0 {
        return Err(Error::InvalidSpec("fourier_coeffs needs j >= 1".into()));
    }
    Ok(f.coeff(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::{generate, SequenceSpec};
    use num_bigint::BigUint;
    use num_traits::{One, ToPrimitive};

    fn cos_minus_cos2() -> PeriodicFunction {
        PeriodicFunction::CosPoly(vec![
            Harmonic { j: 1, a: 1.0, b: 0.0 },
            Harmonic { j: 2, a: -1.0, b: 0.0 },
        ])
    }

    #[test]
    fn franel_landau_values() {
        let r = franel_landau(1, 1).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(12)));
        let r = franel_landau(2, 4).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(24)));
        let r = franel_landau(3, 5).unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(1), BigInt::from(180)));
    }

    #[test]
    fn franel_landau_symmetry_and_scaling() {
        // gcd(cm, cn) = c·gcd(m, n), so the c² cancels: the identity is
        // invariant under joint scaling of (m, n)
        for (m, n) in [(2u64, 3u64), (4, 6), (5, 25)] {
            for c in [2u64, 3, 7] {
                let base = franel_landau(m, n).unwrap();
                let scaled = franel_landau(c * m, c * n).unwrap();
                assert_eq!(scaled, base);
                assert_eq!(
                    franel_landau(m, n).unwrap(),
                    franel_landau(n, m).unwrap()
                );
            }
        }
    }

    #[test]
    fn sawtooth_coeffs_closed_form() {
        let f = PeriodicFunction::sawtooth();
        let (a1, b1) = f.coeff(1);
        assert_eq!(a1, 0.0);
        assert!((b1 + 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn cospoly_missing_harmonic_is_zero() {
        let f = PeriodicFunction::cos();
        assert_eq!(f.coeff(2), (0.0, 0.0));
    }

    #[test]
    fn indicator_half_coeffs() {
        // 1_[0,1/2) centered: j = 2 has sin(2pi) = 0, cos(2pi) = 1
        let f = PeriodicFunction::indicator(0.0, 0.5).unwrap();
        let (a2, b2) = f.coeff(2);
        assert!(a2.abs() < 1e-15 && b2.abs() < 1e-15);
        let (a1, b1) = f.coeff(1);
        assert!(a1.abs() < 1e-15);
        assert!((b1 - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn inner_product_orthogonal_cos() {
        let f = PeriodicFunction::cos();
        let ip = dilated_inner_product(&f, &f, 2, 3, 100).unwrap();
        assert_eq!(ip.value, 0.0);
        assert_eq!(ip.tail_bound, 0.0);
        let ip = dilated_inner_product(&f, &f, 1, 1, 100).unwrap();
        assert!((ip.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inner_product_sawtooth_matches_franel_landau() {
        for (m, n) in [(1u64, 1u64), (2, 4), (3, 5), (6, 4), (7, 13)] {
            let f = PeriodicFunction::sawtooth();
            let ip = dilated_inner_product(&f, &f, m, n, 10_000).unwrap();
            let exact = franel_landau(m, n).unwrap().to_f64().unwrap();
            assert!(
                (ip.value - exact).abs() <= ip.tail_bound,
                "({m},{n}): {} vs {} bound {}",
                ip.value,
                exact,
                ip.tail_bound
            );
            assert!((ip.value - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn gcd_sum_small_cases() {
        let one = GcdSumQuery {
            terms: vec![BigUint::one()],
            alpha: 1.0,
        };
        assert!((gcd_sum(&one).unwrap() - 1.0).abs() < 1e-15);
        let two = GcdSumQuery {
            terms: vec![BigUint::one(), BigUint::from(2u32)],
            alpha: 1.0,
        };
        assert!((gcd_sum(&two).unwrap() - 3.0).abs() < 1e-12);
        let pows = GcdSumQuery {
            terms: vec![BigUint::from(2u32), BigUint::from(4u32), BigUint::from(8u32)],
            alpha: 1.0,
        };
        // sum of 2^{-|k-l|} over 3x3: 3 + 4/2 + 2/4 = 5.5
        assert!((gcd_sum(&pows).unwrap() - 5.5).abs() < 1e-12);
    }

    #[test]
    fn dilation_variance_cos_exact_half() {
        let f = PeriodicFunction::cos();
        let v = dilation_variance(&f, 2, 40).unwrap();
        assert_eq!(v.sigma_squared, 0.5);
        assert_eq!(v.tail_bound, 0.0);
    }

    #[test]
    fn dilation_variance_sawtooth_quarter() {
        let v = dilation_variance(&PeriodicFunction::sawtooth(), 2, 60).unwrap();
        assert!((v.sigma_squared - 0.25).abs() < 1e-12, "{}", v.sigma_squared);
    }

    #[test]
    fn dilation_variance_telescoping_zero() {
        let v = dilation_variance(&cos_minus_cos2(), 2, 40).unwrap();
        assert!(v.sigma_squared.abs() < 1e-12, "{}", v.sigma_squared);
    }

    #[test]
    fn dilation_variance_half_interval() {
        let f = PeriodicFunction::indicator(0.0, 0.5).unwrap();
        let v = dilation_variance(&f, 2, 40).unwrap();
        assert_eq!(v.sigma_squared, 0.25);
        assert_eq!(v.tail_bound, 0.0);
    }

    #[test]
    fn trig_moment_first_and_second() {
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 16).unwrap();
        assert!(trig_moment(&seq, 10, 1).unwrap().is_zero());
        let m2 = trig_moment(&seq, 10, 2).unwrap();
        assert_eq!(m2, BigRational::new(BigInt::from(10), BigInt::from(2)));
    }

    #[test]
    fn trig_moment_third_pow2() {
        // 2^k, N = 3: twelve signed triples solve ±2^a ±2^b ±2^c = 0
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 4).unwrap();
        let m3 = trig_moment(&seq, 3, 3).unwrap();
        assert_eq!(m3, BigRational::new(BigInt::from(3), BigInt::from(2)));
    }

    #[test]
    fn trig_moment_brute_force_oracle() {
        // enumerate all signed tuples directly for small N
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 6).unwrap();
        let terms: Vec<i128> = seq.terms().iter().map(|t| t.to_i128().unwrap()).collect();
        for m in [3usize, 4] {
            let n = 5;
            let mut count: u128 = 0;
            let mut idx = vec![0usize; m];
            loop {
                for signs in 0..(1u32 << m) {
                    let mut total: i128 = 0;
                    for (pos, &i) in idx.iter().enumerate() {
                        let v = terms[i];
                        total += if signs >> pos & 1 == 1 { -v } else { v };
                    }
                    if total == 0 {
                        count += 1;
                    }
                }
                // odometer over indices 0..n
                let mut p = 0;
                loop {
                    if p == m {
                        break;
                    }
                    idx[p] += 1;
                    if idx[p] < n {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == m {
                    break;
                }
            }
            let expect = BigRational::new(BigInt::from(count), BigInt::from(1u32 << m));
            let got = trig_moment(&seq, n, m as u32).unwrap();
            assert_eq!(got, expect, "m={m}");
        }
    }

    #[test]
    fn arithmetic_function_values() {
        assert_eq!(arithmetic_function(ArithmeticKind::DivisorCount, 12).unwrap(), 6.0);
        assert_eq!(arithmetic_function(ArithmeticKind::SigmaS(1.0), 6).unwrap(), 12.0);
        assert_eq!(arithmetic_function(ArithmeticKind::DeltaHooley, 12).unwrap(), 3.0);
        assert_eq!(arithmetic_function(ArithmeticKind::DivisorCount, 1).unwrap(), 1.0);
        // large semiprime exercises Pollard rho
        let p = 1_000_000_007u64 * 998_244_353u64;
        assert_eq!(arithmetic_function(ArithmeticKind::DivisorCount, p).unwrap(), 4.0);
    }

    #[test]
    fn delta_table_matches_pointwise() {
        let table = delta_table(200);
        for nu in 1..=200u64 {
            let direct = arithmetic_function(ArithmeticKind::DeltaHooley, nu).unwrap();
            assert_eq!(table[nu as usize] as f64, direct, "nu={nu}");
        }
    }

    #[test]
    fn weber_single_cos() {
        let f = PeriodicFunction::cos();
        let (lhs, rhs) = weber_bound_check(&f, &[3], &[1.0], 1, 100).unwrap();
        assert!((lhs - 0.5).abs() < 1e-12);
        assert!(rhs >= lhs - 1e-12);
        // d(3) = 2, |a_1|^2 contribution = 1/4 -> rhs = 1/2 exactly
        assert!((rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weber_zero_coeffs() {
        let f = PeriodicFunction::sawtooth();
        let (lhs, rhs) = weber_bound_check(&f, &[3], &[0.0], 1, 50).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn weber_interval_enforced() {
        let f = PeriodicFunction::cos();
        assert!(weber_bound_check(&f, &[2], &[1.0], 1, 50).is_err()); // 2 < e
    }

    #[test]
    fn partial_sum_telescopes() {
        use crate::bigfrac::sample_uniform;
        let f = cos_minus_cos2();
        let n = 80usize;
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, n).unwrap();
        for seed in 0..5u64 {
            let x = sample_uniform(seed, 0, n as u64 + 96);
            let s = partial_sum(&f, &seq, &WeightRule::Ones, &x, n, Normalization::None).unwrap();
            let xd = x.to_double();
            let tail_angle = 2.0 * PI * DyadicWindows::new(&x).frac_pow2_mul(n as u64 + 1);
            let expect = (4.0 * PI * xd).cos() - tail_angle.cos();
            assert!((s - expect).abs() < 1e-9, "seed {seed}: {s} vs {expect}");
        }
    }

    #[test]
    fn partial_sum_sawtooth_at_zero() {
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 10).unwrap();
        let x = FixedPointReal::zero(128);
        let s = partial_sum(
            &PeriodicFunction::sawtooth(),
            &seq,
            &WeightRule::Ones,
            &x,
            10,
            Normalization::None,
        )
        .unwrap();
        assert_eq!(s, -5.0); // f(0) = -1/2 per the lattice convention
    }

    #[test]
    fn partial_sum_precision_guard() {
        let seq = generate(&SequenceSpec::GeometricInt { theta: 2 }, 100).unwrap();
        let x = FixedPointReal::zero(100);
        let err = partial_sum(
            &PeriodicFunction::sawtooth(),
            &seq,
            &WeightRule::Ones,
            &x,
            100,
            Normalization::None,
        );
        assert!(matches!(err, Err(Error::InsufficientPrecision { .. })));
    }

    #[test]
    fn fast_and_slow_partial_sum_paths_agree() {
        use crate::bigfrac::sample_uniform;
        let f = PeriodicFunction::cos();
        let n = 40;
        let fast_seq = generate(&SequenceSpec::GeometricInt { theta: 4 }, n).unwrap();
        let slow_seq = LacunarySequence::from_terms(fast_seq.terms().to_vec()).unwrap();
        let x = sample_uniform(3, 1, 256);
        let a = partial_sum(&f, &fast_seq, &WeightRule::Ones, &x, n, Normalization::SqrtN).unwrap();
        let b = partial_sum(&f, &slow_seq, &WeightRule::Ones, &x, n, Normalization::SqrtN).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
