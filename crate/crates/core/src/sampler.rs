//! Exact weighted sampling of a repetition index with weight `j^alpha`
//! over `j = 1..=k`, for a capacity `k` that grows one slot at a time.
//!
//! The table keeps the running prefix sums `s_j = Σ_{i≤j} i^alpha` and
//! samples by inverse CDF: binary search for the smallest `j` with
//! `s_j ≥ u·s_k`. Appends are O(1), draws O(log k), and the draw is a
//! deterministic function of `(table, k, u)`, which makes the sampler
//! testable value-by-value against its own pmf.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::Exponent;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplerError {
    /// `alpha` must be a finite nonnegative real.
    InvalidAlpha,
    /// Requested `k` is zero or exceeds the table capacity.
    IndexOutOfRange { k: usize, capacity: usize },
}

impl fmt::Display for SamplerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerError::InvalidAlpha => write!(f, "alpha must be finite and >= 0"),
            SamplerError::IndexOutOfRange { k, capacity } => {
                write!(f, "index k={k} out of range (capacity {capacity})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SamplerError {}

/// Growable prefix sums of `i^alpha`, supporting exact inverse-CDF
/// sampling over `1..=k` for any `k` up to the current capacity.
#[derive(Debug, Clone)]
pub struct PowerWeightTable {
    exponent: Exponent,
    /// prefix[j-1] = s_j; s_1 = 1 always.
    prefix: Vec<f64>,
}

impl PowerWeightTable {
    /// A table of capacity 1 (the string always starts with one word).
    pub fn new(alpha: f64) -> Result<Self, SamplerError> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(SamplerError::InvalidAlpha);
        }
        Ok(PowerWeightTable {
            exponent: Exponent::classify(alpha),
            prefix: vec![1.0],
        })
    }

    pub fn with_capacity(alpha: f64, k: usize) -> Result<Self, SamplerError> {
        let mut table = Self::new(alpha)?;
        table.prefix.reserve(k.saturating_sub(1));
        table.extend_to(k);
        Ok(table)
    }

    pub fn alpha(&self) -> f64 {
        self.exponent.value()
    }

    pub fn capacity(&self) -> usize {
        self.prefix.len()
    }

    /// The weight `j^alpha` of index `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.exponent.apply(j as f64)
    }

    /// `s_k`, the total weight of `1..=k`.
    pub fn total(&self, k: usize) -> Result<f64, SamplerError> {
        self.check(k)?;
        Ok(self.prefix[k - 1])
    }

    /// Grow capacity by one: `s_{k+1} = s_k + (k+1)^alpha`.
    #[inline]
    pub fn extend(&mut self) {
        let next = self.prefix.len() + 1;
        let s = self.prefix[self.prefix.len() - 1] + self.weight(next);
        self.prefix.push(s);
    }

    /// Grow capacity up to `k` (no-op if already there).
    pub fn extend_to(&mut self, k: usize) {
        while self.prefix.len() < k {
            self.extend();
        }
    }

    /// The smallest `j` with `s_j ≥ u·s_k`; marginally `P(J=j) = j^alpha/s_k`
    /// for `u` uniform on (0, 1).
    pub fn sample_index(&self, k: usize, u: f64) -> Result<usize, SamplerError> {
        self.check(k)?;
        debug_assert!(u > 0.0 && u < 1.0);
        let target = u * self.prefix[k - 1];
        // partition_point returns the count of leading entries < target,
        // i.e. the zero-based slot of the first prefix >= target.
        let j = self.prefix[..k].partition_point(|&s| s < target);
        Ok(j.min(k - 1) + 1)
    }

    /// The probability vector (`j^alpha/s_k`) over `1..=k`.
    pub fn pmf(&self, k: usize) -> Result<Vec<f64>, SamplerError> {
        self.check(k)?;
        let total = self.prefix[k - 1];
        Ok((1..=k).map(|j| self.weight(j) / total).collect())
    }

    #[inline]
    fn check(&self, k: usize) -> Result<(), SamplerError> {
        if k == 0 || k > self.prefix.len() {
            return Err(SamplerError::IndexOutOfRange {
                k,
                capacity: self.prefix.len(),
            });
        }
        Ok(())
    }
}
