//! Statistics of finite point sets in [0,1): star and extreme discrepancy,
//! exponential sums, the Erdős–Turán and Koksma inequalities, pair
//! correlation, and nearest-neighbor gaps.

use std::borrow::Cow;
use std::f64::consts::PI;

use crate::bigfrac::{frac_mul_nat, DyadicWindows, FixedPointReal};
use crate::dilated::PeriodicFunction;
use crate::error::{Error, Result};
use crate::numeric::Kahan;
use crate::seqgen::{LacunarySequence, SequenceSpec};

/// A finite multiset of unit-interval points (double projections of exact
/// orbit values).
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    values: Vec<f64>,
    sorted: bool,
}

impl PointSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(0.0..1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidSpec(format!("point {v} outside [0,1)")));
            }
        }
        let sorted = values.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { values, sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Stable, idempotent sort.
    pub fn sort(&mut self) {
        if !self.sorted {
            self.values.sort_by(f64::total_cmp);
            self.sorted = true;
        }
    }

    fn sorted_values(&self) -> Cow<'_, [f64]> {
        if self.sorted {
            Cow::Borrowed(&self.values)
        } else {
            let mut v = self.values.clone();
            v.sort_by(f64::total_cmp);
            Cow::Owned(v)
        }
    }

    /// One decimal value per line, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for v in &self.values {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|e| Error::InvalidSpec(format!("line {}: {e}", i + 1)))?;
            values.push(v);
        }
        Self::new(values)
    }
}

/// The dilated orbit {n_k x}, k <= N, as doubles of the exact B-bit values.
pub fn dilated_orbit(x: &FixedPointReal, seq: &LacunarySequence, n: usize) -> Result<PointSet> {
    if n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "orbit length {n} exceeds sequence length {}",
            seq.len()
        )));
    }
    let need = seq.terms()[..n].last().map_or(0, |t| t.bits()) + 64;
    if x.bits() < need {
        return Err(Error::InsufficientPrecision {
            required: need,
            actual: x.bits(),
        });
    }
    let mut values = Vec::with_capacity(n);
    if let SequenceSpec::GeometricInt { theta } = seq.spec() {
        if theta.is_power_of_two() {
            let log2 = theta.trailing_zeros() as u64;
            let w = DyadicWindows::new(x);
            for k in 1..=n as u64 {
                values.push(w.frac_pow2_mul(log2 * k));
            }
            return PointSet::new(values);
        }
    }
    for t in &seq.terms()[..n] {
        values.push(frac_mul_nat(x, t).to_double());
    }
    PointSet::new(values)
}

/// D_N* over anchored intervals [0, t): max_i max(i/N - x_(i), x_(i) - (i-1)/N).
pub fn star_discrepancy(p: &PointSet) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::InvalidSpec("discrepancy needs N >= 1".into()));
    }
    let v = p.sorted_values();
    let n = v.len() as f64;
    let mut best = f64::MIN;
    for (i, &x) in v.iter().enumerate() {
        let up = (i as f64 + 1.0) / n - x;
        let down = x - (i as f64) / n;
        best = best.max(up).max(down);
    }
    Ok(best)
}

/// D_N over all subintervals: D_N = D_N^+ + D_N^- with
/// D_N^+ = max_i (i/N - x_(i)), D_N^- = max_i (x_(i) - (i-1)/N).
pub fn extreme_discrepancy(p: &PointSet) -> Result<f64> {
    let (plus, minus) = extreme_discrepancy_parts(p)?;
    Ok(plus + minus)
}

pub fn extreme_discrepancy_parts(p: &PointSet) -> Result<(f64, f64)> {
    if p.is_empty() {
        return Err(Error::InvalidSpec("discrepancy needs N >= 1".into()));
    }
    let v = p.sorted_values();
    let n = v.len() as f64;
    let mut plus = f64::MIN;
    let mut minus = f64::MIN;
    for (i, &x) in v.iter().enumerate() {
        plus = plus.max((i as f64 + 1.0) / n - x);
        minus = minus.max(x - (i as f64) / n);
    }
    Ok((plus, minus))
}

/// |(1/N) Σ e^{2πi h x_n}| with compensated summation.
pub fn weyl_sum(p: &PointSet, h: i64) -> Result<f64> {
    if h == 0 {
        return Err(Error::InvalidSpec("weyl_sum needs h != 0".into()));
    }
    if p.is_empty() {
        return Err(Error::InvalidSpec("weyl_sum needs N >= 1".into()));
    }
    let hf = h as f64;
    let mut re = Kahan::new();
    let mut im = Kahan::new();
    for &x in p.values() {
        let (s, c) = (2.0 * PI * hf * x).sin_cos();
        re.add(c);
        im.add(s);
    }
    let n = p.len() as f64;
    Ok((re.value() / n).hypot(im.value() / n))
}

/// 3·(1/(m+1) + Σ_{h=1}^m |S_h|/h): an upper bound for D_N.
pub fn erdos_turan_bound(p: &PointSet, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidSpec("erdos_turan_bound needs m >= 1".into()));
    }
    let mut acc = Kahan::new();
    acc.add(1.0 / (m as f64 + 1.0));
    for h in 1..=m {
        acc.add(weyl_sum(p, h as i64)? / h as f64);
    }
    Ok(3.0 * acc.value())
}

/// min over m in 1..=m_max of the Erdős–Turán bound, with the minimizing m.
pub fn erdos_turan_best(p: &PointSet, m_max: u64) -> Result<(f64, u64)> {
    if m_max == 0 {
        return Err(Error::InvalidSpec("erdos_turan_best needs m_max >= 1".into()));
    }
    let mut harmonic = Kahan::new();
    let mut best = f64::INFINITY;
    let mut best_m = 1;
    for m in 1..=m_max {
        harmonic.add(weyl_sum(p, m as i64)? / m as f64);
        let bound = 3.0 * (1.0 / (m as f64 + 1.0) + harmonic.value());
        if bound < best {
            best = bound;
            best_m = m;
        }
    }
    Ok((best, best_m))
}

/// Koksma's inequality: lhs = |(1/N)Σ f(x_n) - ∫f|, rhs = V(f)·D_N*.
/// The catalog functions all have zero mean.
pub fn koksma_check(f: &PeriodicFunction, p: &PointSet) -> Result<(f64, f64)> {
    if p.is_empty() {
        return Err(Error::InvalidSpec("koksma_check needs N >= 1".into()));
    }
    let mut acc = Kahan::new();
    for &x in p.values() {
        acc.add(f.eval(x));
    }
    let lhs = (acc.value() / p.len() as f64).abs();
    let rhs = f.variation() * star_discrepancy(p)?;
    Ok((lhs, rhs))
}

/// Distance to the nearest integer of |a - b|.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Pair correlation R₂(s) = (1/N)·#{(k,ℓ): k != ℓ, ‖x_k - x_ℓ‖ <= s/N}.
///
/// Sorted sweep proposes candidate pairs; every candidate is confirmed with
/// the same `circle_dist <= s/N` comparison a naive double loop would use,
/// so counts agree exactly with the O(N²) reference.
pub fn pair_correlation(p: &PointSet, s: f64) -> Result<f64> {
    if p.len() < 2 {
        return Err(Error::InvalidSpec("pair_correlation needs N >= 2".into()));
    }
    if s <= 0.0 {
        return Err(Error::InvalidSpec("pair_correlation needs s > 0".into()));
    }
    let n = p.len();
    let tau = s / n as f64;
    let v = p.sorted_values();

    let mut ordered: u64 = 0;
    if tau >= 0.499 {
        // wide windows cover most of the circle; the sweep saves nothing
        for i in 0..n {
            for j in (i + 1)..n {
                if circle_dist(v[i], v[j]) <= tau {
                    ordered += 2;
                }
            }
        }
        return Ok(ordered as f64 / n as f64);
    }

    let slack = tau + 1e-9;
    // short pairs: forward gap within the window
    for i in 0..n {
        for j in (i + 1)..n {
            if v[j] - v[i] > slack {
                break;
            }
            if circle_dist(v[i], v[j]) <= tau {
                ordered += 2;
            }
        }
    }
    // wrapped pairs: top of the interval against the bottom
    let cut = 1.0 - slack;
    for j in (0..n).rev() {
        if v[j] < cut {
            break;
        }
        for i in 0..n {
            if i == j || v[j] - v[i] < cut {
                break;
            }
            if circle_dist(v[i], v[j]) <= tau {
                ordered += 2;
            }
        }
    }
    Ok(ordered as f64 / n as f64)
}

/// Histogram of N·(circular nearest-neighbor gaps).
#[derive(Clone, Debug)]
pub struct GapHistogram {
    /// All N scaled gaps in sorted-circle order.
    pub scaled_gaps: Vec<f64>,
    /// Counts per [edge_k, edge_{k+1}) bin.
    pub counts: Vec<u64>,
    pub total: u64,
}

pub fn gap_statistics(p: &PointSet, bin_edges: &[f64]) -> Result<GapHistogram> {
    if p.len() < 2 {
        return Err(Error::InvalidSpec("gap_statistics needs N >= 2".into()));
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("bin edges must be increasing, >= 2 of them".into()));
    }
    let v = p.sorted_values();
    let n = v.len();
    let mut scaled = Vec::with_capacity(n);
    for w in v.windows(2) {
        scaled.push(n as f64 * (w[1] - w[0]));
    }
    scaled.push(n as f64 * (v[0] + 1.0 - v[n - 1]));
    let mut counts = vec![0u64; bin_edges.len() - 1];
    for &g in &scaled {
        if g < bin_edges[0] {
            continue;
        }
        let idx = bin_edges.partition_point(|&e| e <= g);
        if idx >= 1 && idx <= counts.len() {
            counts[idx - 1] += 1;
        }
    }
    Ok(GapHistogram {
        scaled_gaps: scaled,
        counts,
        total: n as u64,
    })
}
