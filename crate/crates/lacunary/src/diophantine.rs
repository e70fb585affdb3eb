//! Counting solutions of the two-term linear equations a·n_k − b·n_ℓ = c
//! that govern lacunary limit behavior, plus B₂/Sidon representation
//! analysis and four-term ± relations.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use std::collections::HashMap;

use crate::bigfrac::BigNat;
use crate::error::{Error, Result};
use crate::seqgen::LacunarySequence;

/// The equation a·n_k − b·n_ℓ = c over pairs k, ℓ <= N.
#[derive(Clone, Debug)]
pub struct DiophantineQuery {
    pub a: u64,
    pub b: u64,
    pub c: BigInt,
    pub n: usize,
    /// Require k != ℓ.
    pub distinct_indices: bool,
}

/// Exact count of ordered pairs (k, ℓ) solving the query, O(N) expected via
/// hashing of {b·n_ℓ + c}.
pub fn count_solutions(seq: &LacunarySequence, q: &DiophantineQuery) -> Result<u64> {
    if q.a == 0 || q.b == 0 {
        return Err(Error::InvalidSpec("count_solutions needs a, b >= 1".into()));
    }
    if q.n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "prefix {} exceeds sequence length {}",
            q.n,
            seq.len()
        )));
    }
    let terms = &seq.terms()[..q.n];
    let mut rhs: HashMap<BigInt, u64> = HashMap::with_capacity(q.n);
    for t in terms {
        let v = BigInt::from(t * q.b) + &q.c;
        *rhs.entry(v).or_insert(0) += 1;
    }
    let mut count = 0u64;
    for t in terms {
        let v = BigInt::from(t * q.a);
        if let Some(&c) = rhs.get(&v) {
            count += c;
        }
    }
    if q.distinct_indices {
        for t in terms {
            let lhs = BigInt::from(t * q.a);
            let r = BigInt::from(t * q.b) + &q.c;
            if lhs == r {
                count -= 1;
            }
        }
    }
    Ok(count)
}

/// Representation counts ν = n_k ± n_ℓ over pairs k > ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct B2Report {
    /// max over ν > 0 of (#sum reps) + (#difference reps).
    pub max_representations: u64,
    /// Smallest ν attaining the max.
    pub witness: BigNat,
    pub sum_reps_max: u64,
    pub diff_reps_max: u64,
}

impl B2Report {
    /// Stable sorted-key text format for golden-file testing.
    pub fn to_text(&self) -> String {
        format!(
            "diff_reps_max = {}\nmax_representations = {}\nsum_reps_max = {}\nwitness = {}\n",
            self.diff_reps_max, self.max_representations, self.sum_reps_max, self.witness
        )
    }
}

const B2_CAP: usize = 2048;

/// Exact B₂ statistics by hashing all O(N²) pair values; ν ranges only over
/// achievable values.
pub fn b2_max_representations(seq: &LacunarySequence, n: usize) -> Result<B2Report> {
    if n < 2 {
        return Err(Error::InvalidSpec("b2_max_representations needs N >= 2".into()));
    }
    if n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "prefix {} exceeds sequence length {}",
            n,
            seq.len()
        )));
    }
    if n > B2_CAP {
        return Err(Error::CapacityExceeded(format!(
            "B2 report hashes N² pair values; N={n} exceeds the {B2_CAP} cap"
        )));
    }
    let terms = &seq.terms()[..n];
    let mut reps: HashMap<BigUint, (u64, u64)> = HashMap::new();
    for k in 1..n {
        for l in 0..k {
            let sum = &terms[k] + &terms[l];
            reps.entry(sum).or_insert((0, 0)).0 += 1;
            let diff = &terms[k] - &terms[l];
            if !diff.is_zero() {
                reps.entry(diff).or_insert((0, 0)).1 += 1;
            }
        }
    }
    let mut max_total = 0u64;
    let mut witness: Option<BigUint> = None;
    let mut sum_max = 0u64;
    let mut diff_max = 0u64;
    for (nu, (s, d)) in &reps {
        sum_max = sum_max.max(*s);
        diff_max = diff_max.max(*d);
        let total = s + d;
        let better = total > max_total
            || (total == max_total && witness.as_ref().is_some_and(|w| nu < w));
        if better {
            max_total = total;
            witness = Some(nu.clone());
        }
    }
    Ok(B2Report {
        max_representations: max_total,
        witness: witness.expect("N >= 2 yields at least one pair"),
        sum_reps_max: sum_max,
        diff_reps_max: diff_max,
    })
}

/// Count solutions of ε₁n_{k₁} + ε₂n_{k₂} + ε₃n_{k₃} = n_{k₄} with
/// k₁ <= k₂ <= k₃ < k₄ and k₄ >= min_max_index (1-based), i.e. the four-term
/// relations ±n ± n ± n ± n = 0 normalized so the largest index carries the
/// positive sign. `distinct` restricts to k₁ < k₂ < k₃.
///
/// Meet-in-the-middle over signed pair sums: O(N²) expected.
pub fn four_term_zero_solutions(
    seq: &LacunarySequence,
    n: usize,
    min_max_index: usize,
    distinct: bool,
) -> Result<u64> {
    if n < 4 {
        return Err(Error::InvalidSpec("four_term_zero_solutions needs N >= 4".into()));
    }
    if n > seq.len() {
        return Err(Error::InvalidSpec(format!(
            "prefix {} exceeds sequence length {}",
            n,
            seq.len()
        )));
    }
    if n > B2_CAP {
        return Err(Error::CapacityExceeded(format!(
            "four-term counting hashes N² signed pair sums; N={n} exceeds the {B2_CAP} cap"
        )));
    }
    let terms: Vec<BigInt> = seq.terms()[..n].iter().map(|t| BigInt::from(t.clone())).collect();
    // pairs[value] = #{(k1, k2, signs) : k1 <= k2 <= current k3 frontier}
    let mut pairs: HashMap<BigInt, u64> = HashMap::new();
    let admit = |pairs: &mut HashMap<BigInt, u64>, k2: usize, strict: bool| {
        let upper = if strict { k2 } else { k2 + 1 };
        for k1 in 0..upper {
            for (s1, s2) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let v = &terms[k1] * s1 + &terms[k2] * s2;
                *pairs.entry(v).or_insert(0) += 1;
            }
        }
    };
    let mut count = 0u64;
    for k3 in 0..n {
        // with repeats allowed, k2 may equal k3; strictly increasing indices
        // only see pairs with k2 < k3
        if !distinct {
            admit(&mut pairs, k3, false);
        }
        for k4 in (k3 + 1).max(min_max_index.saturating_sub(1))..n {
            for s3 in [1i64, -1] {
                // ε₁n₁ + ε₂n₂ = -(ε₃n₃ + n₄)
                let target = -(&terms[k3] * s3 + &terms[k4]);
                if let Some(&c) = pairs.get(&target) {
                    count += c;
                }
            }
        }
        if distinct {
            admit(&mut pairs, k3, true);
        }
    }
    Ok(count)
}
