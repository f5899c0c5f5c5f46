//! Exact ground truth at tiny scale by exhaustive enumeration.
//!
//! Every decision sequence of the growth process (innovate, or copy index
//! `j`) is enumerated with its probability, and the expected occurrence
//! histogram is accumulated exactly. Word identities don't matter, so
//! states are merged under a canonical set-partition label of the
//! positions: copies of different indices inside the same block lead to
//! the same successor and their probabilities add. That keeps the state
//! count at Bell numbers instead of factorials and makes `n = 12`
//! practical.
//!
//! This module is deliberately independent of the samplers it validates:
//! weights are recomputed from scratch with plain `pow` and nothing here
//! touches the inverse-CDF sampling path.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

const MAX_N: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Enumeration is guarded to 2 <= n <= 12; the state count grows too
    /// fast beyond that.
    LengthOutOfRange { n: u64 },
    InvalidParameter,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::LengthOutOfRange { n } => {
                write!(f, "enumeration length n={n} outside 2..={MAX_N}")
            }
            OracleError::InvalidParameter => write!(f, "p must be in (0,1) and alpha >= 0"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

/// Exact expected occurrence histogram of the length-`n` model.
#[derive(Debug, Clone)]
pub struct ExactExpectation {
    pub n: u64,
    pub p: f64,
    pub alpha: f64,
    /// ell -> E[nu_n(ell)], exact up to float rounding of the
    /// compensated accumulation.
    pub expected_nu: BTreeMap<u64, f64>,
    /// Number of raw decision sequences represented (n! when complete).
    pub path_count: u64,
    /// Total probability over enumerated paths; equals 1 up to rounding.
    pub probability_mass: f64,
}

/// Kahan accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Positions are labeled by block in order of first appearance, 4 bits
/// each; states at the same length merge by key.
#[inline]
fn label_at(key: u64, pos: usize) -> usize {
    ((key >> (4 * pos)) & 0xF) as usize
}

/// Depth-first enumeration of every decision sequence, merged by
/// canonical partition, accumulating the exact expected histogram.
pub fn enumerate_exact(p: f64, alpha: f64, n: u64) -> Result<ExactExpectation, OracleError> {
    if !(2..=MAX_N).contains(&n) {
        return Err(OracleError::LengthOutOfRange { n });
    }
    if !(p > 0.0 && p < 1.0) || !alpha.is_finite() || alpha < 0.0 {
        return Err(OracleError::InvalidParameter);
    }
    let p_bar = 1.0 - p;
    let n = n as usize;

    // Weights computed independently of the sampler's fast paths; the
    // index-0 slot exists only to make indexing 1-based.
    let weights: Vec<f64> = (0..=n)
        .map(|j| if j == 0 { 0.0 } else { math::powf(j as f64, alpha) })
        .collect();
    let prefix: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();

    // Level k holds (partition key, probability, raw path count) for
    // strings of length k; the single length-1 state is one block.
    let mut level: Vec<(u64, f64, u64)> = alloc::vec![(0u64, 1.0, 1u64)];
    let mut next: Vec<(u64, f64, u64)> = Vec::new();

    for k in 1..n {
        let s_k = prefix[k];
        next.clear();
        next.reserve(level.len() * (k + 2));
        for &(key, mass, paths) in &level {
            let blocks = 1 + (0..k).map(|i| label_at(key, i)).max().unwrap();
            // Block weights and sizes under the current length.
            let mut block_weight = [0.0f64; MAX_N as usize];
            let mut block_size = [0u64; MAX_N as usize];
            for i in 0..k {
                let l = label_at(key, i);
                block_weight[l] += weights[i + 1];
                block_size[l] += 1;
            }
            // Innovation: a fresh block labeled `blocks`.
            next.push((key | ((blocks as u64) << (4 * k)), mass * p, paths));
            // Copy into block l: total probability p_bar * W_l / s_k,
            // covering block_size[l] raw index choices.
            for l in 0..blocks {
                next.push((
                    key | ((l as u64) << (4 * k)),
                    mass * p_bar * block_weight[l] / s_k,
                    paths * block_size[l],
                ));
            }
        }
        // Merge identical partitions.
        next.sort_unstable_by_key(|&(key, _, _)| key);
        level.clear();
        for &(key, mass, paths) in next.iter() {
            match level.last_mut() {
                Some(last) if last.0 == key => {
                    last.1 += mass;
                    last.2 += paths;
                }
                _ => level.push((key, mass, paths)),
            }
        }
    }

    // Fold final states into the expected histogram.
    let mut expected = [Kahan::default(); MAX_N as usize + 1];
    let mut mass_total = Kahan::default();
    let mut path_count = 0u64;
    for &(key, mass, paths) in &level {
        let mut block_size = [0u64; MAX_N as usize];
        for i in 0..n {
            block_size[label_at(key, i)] += 1;
        }
        let mut nu = [0u64; MAX_N as usize + 1];
        for &s in block_size.iter().filter(|&&s| s > 0) {
            nu[s as usize] += 1;
        }
        for (ell, &count) in nu.iter().enumerate().skip(1) {
            if count > 0 {
                expected[ell].add(mass * count as f64);
            }
        }
        mass_total.add(mass);
        path_count += paths;
    }

    let expected_nu = expected
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, k)| k.sum != 0.0)
        .map(|(ell, k)| (ell as u64, k.sum))
        .collect();
    Ok(ExactExpectation {
        n: n as u64,
        p,
        alpha,
        expected_nu,
        path_count,
        probability_mass: mass_total.sum,
    })
}

impl ExactExpectation {
    pub fn expected(&self, ell: u64) -> f64 {
        self.expected_nu.get(&ell).copied().unwrap_or(0.0)
    }
}

/// pmf of the geometric law with parameter e^{-t} on {1, 2, ...}:
/// e^{-t} (1 - e^{-t})^{k-1}. This is the law of the standard Yule
/// population at time t, used as a closed-form cross-check.
pub fn geometric_pmf(t: f64, k: u64) -> f64 {
    debug_assert!(t > 0.0 && k >= 1);
    let q = math::exp(-t);
    // (1-q)^(k-1) through ln_1p for small t.
    q * math::exp((k - 1) as f64 * math::ln_1p(-q))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over raw index decisions, no merging; the reference
    /// for the partition-merged enumeration.
    fn brute_force(p: f64, alpha: f64, n: usize) -> BTreeMap<u64, f64> {
        fn recurse(
            words: &mut Vec<u32>,
            mass: f64,
            p: f64,
            alpha: f64,
            n: usize,
            out: &mut BTreeMap<u64, f64>,
        ) {
            let k = words.len();
            if k == n {
                let mut counts = BTreeMap::new();
                for &w in words.iter() {
                    *counts.entry(w).or_insert(0u64) += 1;
                }
                let mut nu = BTreeMap::new();
                for &c in counts.values() {
                    *nu.entry(c).or_insert(0u64) += 1;
                }
                for (ell, c) in nu {
                    *out.entry(ell).or_insert(0.0) += mass * c as f64;
                }
                return;
            }
            let s_k: f64 = (1..=k).map(|j| math::powf(j as f64, alpha)).sum();
            let next_id = words.iter().max().unwrap() + 1;
            words.push(next_id);
            recurse(words, mass * p, p, alpha, n, out);
            words.pop();
            for j in 1..=k {
                let w = words[j - 1];
                words.push(w);
                let pj = (1.0 - p) * math::powf(j as f64, alpha) / s_k;
                recurse(words, mass * pj, p, alpha, n, out);
                words.pop();
            }
        }
        let mut out = BTreeMap::new();
        let mut words = alloc::vec![0u32];
        recurse(&mut words, 1.0, p, alpha, n, &mut out);
        out
    }

    #[test]
    fn guard_rejects_out_of_range() {
        assert!(enumerate_exact(0.5, 1.0, 1).is_err());
        assert!(enumerate_exact(0.5, 1.0, 13).is_err());
        assert!(enumerate_exact(0.0, 1.0, 4).is_err());
        assert!(enumerate_exact(0.5, -0.5, 4).is_err());
    }

    #[test]
    fn n2_expectations() {
        // E[nu_2(1)] = 2p, E[nu_2(2)] = 1-p.
        for &p in &[0.25, 0.5, 0.75] {
            let e = enumerate_exact(p, 1.0, 2).unwrap();
            assert!((e.expected(1) - 2.0 * p).abs() < 1e-15);
            assert!((e.expected(2) - (1.0 - p)).abs() < 1e-15);
            assert_eq!(e.path_count, 2);
        }
    }

    #[test]
    fn n3_expectations_are_alpha_free() {
        // A single repetition yields counts {2,1} regardless of which
        // index was copied, so the n=3 histogram cannot depend on alpha.
        for &alpha in &[0.0, 0.5, 1.0, 2.0] {
            let e = enumerate_exact(0.5, alpha, 3).unwrap();
            assert!((e.expected(1) - 1.25).abs() < 1e-14, "alpha {alpha}");
            assert!((e.expected(2) - 0.5).abs() < 1e-14);
            assert!((e.expected(3) - 0.25).abs() < 1e-14);
            assert_eq!(e.path_count, 6);
        }
    }

    #[test]
    fn high_innovation_limit() {
        let e = enumerate_exact(1.0 - 1e-12, 1.0, 6).unwrap();
        assert!((e.expected(1) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn conservation_and_mass() {
        for &(p, alpha) in &[(0.25, 0.0), (0.5, 1.0), (0.75, 2.0), (0.4, 0.5)] {
            for n in 2..=8u64 {
                let e = enumerate_exact(p, alpha, n).unwrap();
                let token_sum: f64 = e.expected_nu.iter().map(|(&l, &v)| l as f64 * v).sum();
                assert!(
                    (token_sum - n as f64).abs() < 1e-10,
                    "p={p} alpha={alpha} n={n}: {token_sum}"
                );
                assert!((e.probability_mass - 1.0).abs() < 1e-12);
                let fact: u64 = (2..=n).product();
                assert_eq!(e.path_count, fact);
            }
        }
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for &(p, alpha) in &[(0.3, 0.0), (0.5, 1.0), (0.7, 1.7)] {
            for n in 2..=6usize {
                let merged = enumerate_exact(p, alpha, n as u64).unwrap();
                let brute = brute_force(p, alpha, n);
                for (&ell, &v) in &brute {
                    assert!(
                        (merged.expected(ell) - v).abs() < 1e-12,
                        "p={p} alpha={alpha} n={n} ell={ell}"
                    );
                }
                assert_eq!(merged.expected_nu.len(), brute.len());
            }
        }
    }

    #[test]
    fn twelve_is_feasible() {
        let e = enumerate_exact(0.5, 1.0, 12).unwrap();
        assert!((e.probability_mass - 1.0).abs() < 1e-11);
        let token_sum: f64 = e.expected_nu.iter().map(|(&l, &v)| l as f64 * v).sum();
        assert!((token_sum - 12.0).abs() < 1e-9);
        assert_eq!(e.path_count, 479_001_600);
    }

    #[test]
    fn geometric_pmf_values() {
        // Parameter 1/2 at t = ln 2: pmf(2) = (1/2)(1/2) = 1/4.
        assert!((geometric_pmf(core::f64::consts::LN_2, 2) - 0.25).abs() < 1e-15);
        // As t -> 0 the population is still the single ancestor.
        assert!((geometric_pmf(1e-12, 1) - 1.0).abs() < 1e-9);
        // Normalization at moderate t.
        let t = 1.0;
        let total: f64 = (1..200).map(|k| geometric_pmf(t, k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
