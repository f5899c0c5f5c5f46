//! Simulation and estimation kernels for the power-weighted Simon
//! string-growth model and the branching processes that arise as its
//! large-length limits.
//!
//! The model grows a string of words one token at a time: with probability
//! `p` the next token is a brand-new word, otherwise it copies the word at
//! position `j` of the current string, where `j` is drawn with probability
//! proportional to `j^alpha`. This crate provides:
//!
//! * [`sampler`] — exact inverse-CDF sampling of the copy index over the
//!   growing weight table `j^alpha`;
//! * [`simon`] — the string-growth dynamics, occurrence histograms, and
//!   tagged-word (attraction, count) trajectories;
//! * [`csbp`] — event-driven simulation of the limiting continuous-state
//!   branching process `Z`, its birth counter `B`, the Lévy/time-change
//!   construction, the equivalent age-dependent population process, and the
//!   moment ODE system;
//! * [`phi`] — the limit occurrence distribution estimated through two
//!   independent routes, tail-regime classification, tail fitting, and the
//!   power-tail constant;
//! * [`oracle`] — exact small-instance ground truth by exhaustive
//!   enumeration, kept independent of the samplers it validates;
//! * [`rng`] — the documented, seedable generator used everywhere;
//! * [`stats`] — the statistical helpers shared by the estimators and the
//!   validation suite.
//!
//! The crate is `no_std` (with `alloc`); all transcendental math goes
//! through [`libm`] so results are reproducible bit-for-bit across
//! platforms. Anything touching files, threads, or a command line lives in
//! the companion `ysm-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod csbp;
pub mod math;
pub mod oracle;
pub mod phi;
pub mod rng;
pub mod sampler;
pub mod simon;
pub mod stats;

pub use csbp::{CsbpParams, CsbpPath, Criticality};
pub use phi::{PhiEstimate, Regime, RegimeParams, TailFit};
pub use rng::Xoshiro256PlusPlus;
pub use sampler::PowerWeightTable;
pub use simon::{ModelParams, OccurrenceHistogram, StringState, TaggedTrajectory};

/// Per-path cap on simulated jump events; hitting it marks the result
/// truncated instead of looping forever.
pub const DEFAULT_EVENT_CAP: u64 = 100_000_000;
