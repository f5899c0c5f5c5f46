//! The power-weighted Simon string-growth dynamics.
//!
//! A string starts with one word. At length `k`, the next token is a
//! brand-new word with probability `p`; otherwise it copies the word at
//! index `J`, with `P(J=j) ∝ j^alpha` over `j = 1..=k`. The module records
//! occurrence histograms (how many distinct words occur exactly `ell`
//! times) and, for tagged birth positions, the joint trajectory of the
//! occurrence count `N_j` and the attraction
//! `A_j(n) = n^{-alpha} Σ_{k≤n} k^alpha · 1{w_k = w_j}`,
//! the pair that stays Markov when the plain count does not.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{self, Exponent};
use crate::rng::{derive_stream, Xoshiro256PlusPlus};
use crate::sampler::PowerWeightTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// p must lie strictly inside (0, 1).
    InvalidInnovation,
    /// alpha must be finite and nonnegative.
    InvalidAlpha,
    /// n must satisfy 1 <= n <= 2^32 (word ids are 32-bit).
    InvalidLength,
    /// Tag fractions must lie in (0, 1), grid times in (0, 1] ascending.
    InvalidTagSpec,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidInnovation => write!(f, "p must be in (0, 1)"),
            ModelError::InvalidAlpha => write!(f, "alpha must be finite and >= 0"),
            ModelError::InvalidLength => write!(f, "n must be in 1..=2^32"),
            ModelError::InvalidTagSpec => {
                write!(f, "tag fractions must be in (0,1) and grid in (0,1] ascending")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Parameters of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Innovation probability.
    pub p: f64,
    /// Weight exponent.
    pub alpha: f64,
    /// Target string length.
    pub n: u64,
    /// Stream seed; replicate r of a batch runs with
    /// `derive_stream(seed, r)`.
    pub seed: u64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(ModelError::InvalidInnovation);
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(ModelError::InvalidAlpha);
        }
        if self.n < 1 || self.n > (1u64 << 32) {
            return Err(ModelError::InvalidLength);
        }
        Ok(())
    }

    /// The same parameters with the stream seed for replicate `r`.
    pub fn for_replicate(&self, r: u64) -> ModelParams {
        ModelParams {
            seed: derive_stream(self.seed, r),
            ..*self
        }
    }
}

/// The growing string: word id per index plus occurrence count per word.
#[derive(Debug, Clone)]
pub struct StringState {
    words: Vec<u32>,
    counts: Vec<u64>,
}

impl StringState {
    /// The length-1 string: the first word is always new.
    pub fn new() -> Self {
        StringState {
            words: alloc::vec![0],
            counts: alloc::vec![1],
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut s = StringState {
            words: Vec::with_capacity(n),
            counts: Vec::with_capacity(1 + n / 2),
        };
        s.words.push(0);
        s.counts.push(1);
        s
    }

    /// Reset to the length-1 string, keeping allocations.
    pub fn reset(&mut self) {
        self.words.clear();
        self.counts.clear();
        self.words.push(0);
        self.counts.push(1);
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Word id at 1-based index `j`.
    pub fn word_at(&self, j: usize) -> u32 {
        self.words[j - 1]
    }

    pub fn count_of(&self, word: u32) -> u64 {
        self.counts[word as usize]
    }

    /// Occurrence count per word id.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn push_new(&mut self) -> u32 {
        let id = self.counts.len() as u32;
        self.words.push(id);
        self.counts.push(1);
        id
    }

    fn push_copy(&mut self, j: usize) -> u32 {
        let id = self.words[j - 1];
        self.words.push(id);
        self.counts[id as usize] += 1;
        id
    }
}

impl Default for StringState {
    fn default() -> Self {
        Self::new()
    }
}

/// One growth step at current length `k >= 1`: innovation with probability
/// `p`, else a copy of the index drawn from the weight table. The table is
/// extended to capacity `k + 1` so the next step can sample. Returns the
/// id of the appended word.
pub fn step(
    state: &mut StringState,
    table: &mut PowerWeightTable,
    p: f64,
    rng: &mut Xoshiro256PlusPlus,
) -> u32 {
    let k = state.len();
    debug_assert!(table.capacity() >= k);
    let id = if rng.bernoulli(p) {
        state.push_new()
    } else {
        let j = table
            .sample_index(k, rng.open01())
            .expect("table tracks string length");
        state.push_copy(j)
    };
    table.extend_to(k + 1);
    id
}

/// Number of distinct words occurring exactly `ell` times in a string of
/// length `n` (`nu_n(ell)`), as a sparse map. Merging replicates adds both
/// the counts and the lengths, which keeps per-length normalization exact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccurrenceHistogram {
    n: u64,
    counts: BTreeMap<u64, u64>,
}

impl OccurrenceHistogram {
    pub fn from_state(state: &StringState) -> Self {
        let mut counts = BTreeMap::new();
        for &c in state.counts() {
            *counts.entry(c).or_insert(0) += 1;
        }
        OccurrenceHistogram {
            n: state.len() as u64,
            counts,
        }
    }

    /// Total token count, summed over merged realizations.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn nu(&self, ell: u64) -> u64 {
        self.counts.get(&ell).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_ell(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Commutative merge: counts and lengths both add.
    pub fn merge(&mut self, other: &OccurrenceHistogram) {
        self.n += other.n;
        for (&ell, &c) in &other.counts {
            *self.counts.entry(ell).or_insert(0) += c;
        }
    }

    /// `ell -> nu(ell) / (n p)`, keeping every `ell` present.
    pub fn normalized(&self, p: f64) -> BTreeMap<u64, f64> {
        let scale = 1.0 / (self.n as f64 * p);
        self.counts
            .iter()
            .map(|(&ell, &c)| (ell, c as f64 * scale))
            .collect()
    }
}

/// Grow one realization of length `params.n` and return its histogram.
/// Deterministic in `params.seed`.
pub fn run(params: &ModelParams) -> Result<OccurrenceHistogram, ModelError> {
    params.validate()?;
    let mut scratch = Replicator::new(params)?;
    Ok(OccurrenceHistogram::from_state(scratch.run_once(params.seed)))
}

/// Reusable buffers for running many replicates without reallocating.
#[derive(Debug)]
pub struct Replicator {
    p: f64,
    n: usize,
    state: StringState,
    table: PowerWeightTable,
    table_alpha: f64,
}

impl Replicator {
    pub fn new(params: &ModelParams) -> Result<Self, ModelError> {
        params.validate()?;
        let n = params.n as usize;
        Ok(Replicator {
            p: params.p,
            n,
            state: StringState::with_capacity(n),
            table: PowerWeightTable::new(params.alpha).map_err(|_| ModelError::InvalidAlpha)?,
            table_alpha: params.alpha,
        })
    }

    /// One full realization from the given stream seed; returns the final
    /// string. The weight table persists across calls (it only depends on
    /// alpha), so repeated runs skip the prefix-sum rebuild.
    pub fn run_once(&mut self, seed: u64) -> &StringState {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        self.state.reset();
        self.table.extend_to(self.n.min(1));
        while self.state.len() < self.n {
            step(&mut self.state, &mut self.table, self.p, &mut rng);
        }
        &self.state
    }

    pub fn alpha(&self) -> f64 {
        self.table_alpha
    }
}

/// A tagged word's sampled trajectory: the word born at index `j ≈ u·n`,
/// with `(A_j(⌊t n⌋), N_j(⌊t n⌋))` recorded at each grid time, both zero
/// before birth. `increase_count` is the number of strict increases of
/// `A_j` over the whole run tracked at every step, and equals the final
/// occurrence count pathwise.
#[derive(Debug, Clone)]
pub struct TaggedTrajectory {
    pub j: u64,
    pub u: f64,
    /// (t, A, N) per grid time.
    pub samples: Vec<(f64, f64, u64)>,
    pub increase_count: u64,
    pub final_count: u64,
}

/// Result of one accepted tagged replicate.
#[derive(Debug, Clone)]
pub struct TaggedRun {
    pub trajectories: Vec<TaggedTrajectory>,
    /// Replicates simulated until one had every tagged position introduce
    /// a new word (acceptance probability p^m for m tags).
    pub attempts: u64,
}

/// Run replicates until one realization has a new word at every tagged
/// position, then record `(A, N)` for each tag on the grid.
///
/// Conditioning is by rejection of the whole replicate: a rejected
/// realization is discarded entirely and the next attempt uses the stream
/// `derive_stream(params.seed, attempt)`, so no partial randomness is
/// reused and the joint law of the accepted replicate is the conditional
/// one. Tags are the positions `ceil(u·n)`.
pub fn run_tagged(
    params: &ModelParams,
    tag_fractions: &[f64],
    grid: &[f64],
) -> Result<TaggedRun, ModelError> {
    params.validate()?;
    if tag_fractions.is_empty()
        || tag_fractions.iter().any(|&u| !(u > 0.0 && u < 1.0))
        || grid.iter().any(|&t| !(t > 0.0 && t <= 1.0))
        || grid.windows(2).any(|w| w[0] > w[1])
    {
        return Err(ModelError::InvalidTagSpec);
    }
    let n = params.n;
    let tags: Vec<u64> = tag_fractions
        .iter()
        .map(|&u| (math::ceil(u * n as f64) as u64).max(1))
        .collect();
    let grid_lengths: Vec<u64> = grid.iter().map(|&t| math::floor(t * n as f64) as u64).collect();
    let exponent = Exponent::classify(params.alpha);

    let mut state = StringState::with_capacity(n as usize);
    let mut table =
        PowerWeightTable::new(params.alpha).map_err(|_| ModelError::InvalidAlpha)?;

    let mut attempt = 0u64;
    'attempts: loop {
        attempt += 1;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(derive_stream(params.seed, attempt - 1));
        state.reset();

        // Per-tag tracking; tag_word[i] is set at birth.
        let mut tag_word: Vec<Option<u32>> = alloc::vec![None; tags.len()];
        let mut a: Vec<f64> = alloc::vec![0.0; tags.len()];
        let mut count: Vec<u64> = alloc::vec![0u64; tags.len()];
        let mut increases: Vec<u64> = alloc::vec![0u64; tags.len()];
        let mut samples: Vec<Vec<(f64, f64, u64)>> =
            alloc::vec![Vec::with_capacity(grid.len()); tags.len()];
        let mut grid_cursor = 0usize;

        // A tag at position 1 is new by construction.
        for (i, &tag) in tags.iter().enumerate() {
            if tag == 1 {
                tag_word[i] = Some(0);
                a[i] = 1.0;
                count[i] = 1;
                increases[i] = 1;
            }
        }

        let record_grid = |k: u64,
                               grid_cursor: &mut usize,
                               a: &[f64],
                               count: &[u64],
                               samples: &mut Vec<Vec<(f64, f64, u64)>>| {
            while *grid_cursor < grid_lengths.len() && grid_lengths[*grid_cursor] == k {
                for i in 0..tags.len() {
                    samples[i].push((grid[*grid_cursor], a[i], count[i]));
                }
                *grid_cursor += 1;
            }
        };

        // Grid entries that floor below the start of the string.
        record_grid(0, &mut grid_cursor, &a, &count, &mut samples);
        record_grid(1, &mut grid_cursor, &a, &count, &mut samples);

        while (state.len() as u64) < n {
            let k = state.len() as u64;
            let appended = step(&mut state, &mut table, params.p, &mut rng);
            // A copied word always has count >= 2 afterwards.
            let was_new = state.count_of(appended) == 1;

            // Decay factor (k/(k+1))^alpha shared by every tracked tag.
            let factor = exponent.apply(k as f64 / (k + 1) as f64);
            for i in 0..tags.len() {
                if tags[i] == k + 1 {
                    // Birth position of this tag: accept only innovations.
                    if !was_new {
                        continue 'attempts;
                    }
                    tag_word[i] = Some(appended);
                    a[i] = 1.0;
                    count[i] = 1;
                    increases[i] += 1;
                } else if let Some(w) = tag_word[i] {
                    let prev = a[i];
                    a[i] *= factor;
                    if appended == w {
                        a[i] += 1.0;
                        count[i] += 1;
                    }
                    if a[i] > prev {
                        increases[i] += 1;
                    }
                }
            }
            record_grid(k + 1, &mut grid_cursor, &a, &count, &mut samples);
        }

        let trajectories = tags
            .iter()
            .enumerate()
            .map(|(i, &j)| TaggedTrajectory {
                j,
                u: j as f64 / n as f64,
                samples: core::mem::take(&mut samples[i]),
                increase_count: increases[i],
                final_count: count[i],
            })
            .collect();
        return Ok(TaggedRun {
            trajectories,
            attempts: attempt,
        });
    }
}
