//! The limiting branching process `Z` and its relatives.
//!
//! `Z` lives on (0, ∞), starts at 1, decays deterministically at rate
//! `b·Z` between events, and jumps by exactly +1 at rate `Z`. Simulation
//! is event-driven and exact: the waiting time to the next jump has
//! closed-form inverse hazard, so there is no discretization bias and
//! statistical tolerances are the only tolerances.
//!
//! Three constructions of the same object are provided and cross-checked:
//!
//! * [`simulate_z`] — the direct jump process;
//! * [`simulate_lamperti`] — a unit-rate Poisson path minus a drift,
//!   time-changed through the inverse of `t ↦ ∫ ds/ξ_s`;
//! * [`simulate_cmj`] — an age-structured population where each
//!   individual begets children at ages drawn from a Poisson process
//!   with intensity `e^{-b·a} da`; the population size born by time `t`
//!   has the law of the birth counter `B(t)`.
//!
//! `B(t) = Z(t) + b·∫₀^t Z(s) ds` counts birth events with the start at
//! `t = 0` included; the identity holds pathwise and exactly, and is
//! asserted by the validation suite at 1e-9.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::math;
use crate::rng::Xoshiro256PlusPlus;

#[derive(Debug, Clone, PartialEq)]
pub enum CsbpError {
    /// b must be finite and nonnegative.
    InvalidDrift,
    /// An infinite horizon needs b > 1; otherwise the event count
    /// diverges almost surely.
    NonTerminatingHorizon,
    /// Query time past the simulated horizon.
    BeyondHorizon { t: f64, horizon: f64 },
    /// Extinction statistics only exist for b > 1.
    SubcriticalRequired { b: f64 },
    InvalidParameter(&'static str),
}

impl fmt::Display for CsbpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsbpError::InvalidDrift => write!(f, "drift b must be finite and >= 0"),
            CsbpError::NonTerminatingHorizon => {
                write!(f, "infinite horizon requires b > 1")
            }
            CsbpError::BeyondHorizon { t, horizon } => {
                write!(f, "t={t} beyond simulated horizon {horizon}")
            }
            CsbpError::SubcriticalRequired { b } => {
                write!(f, "b={b}: extinction requires b > 1")
            }
            CsbpError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CsbpError {}

/// Drift parameter with its criticality classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsbpParams {
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    /// b < 1: growth, power-tailed birth counts.
    Supercritical,
    /// b = 1.
    Critical,
    /// b > 1: almost-sure extinction, exponential tails.
    Subcritical,
}

impl CsbpParams {
    pub fn new(b: f64) -> Result<Self, CsbpError> {
        if !b.is_finite() || b < 0.0 {
            return Err(CsbpError::InvalidDrift);
        }
        Ok(CsbpParams { b })
    }

    pub fn criticality(&self) -> Criticality {
        if self.b < 1.0 {
            Criticality::Supercritical
        } else if self.b == 1.0 {
            Criticality::Critical
        } else {
            Criticality::Subcritical
        }
    }
}

/// A simulated trajectory of `Z`: jump times (the initial state at
/// `t = 0` is recorded as the first birth event by convention) and the
/// value right after each jump. Between jumps the path is
/// `z·e^{-b(t-t0)}`, so every query below has closed form.
#[derive(Debug, Clone)]
pub struct CsbpPath {
    b: f64,
    /// jump_times[0] = 0.0 always.
    jump_times: Vec<f64>,
    /// values[i] = Z(jump_times[i]); values[0] = 1.
    values: Vec<f64>,
    /// Queries are valid on [0, horizon]; infinite when the path has
    /// provably no further jumps (extinction runs).
    horizon: f64,
    /// Event cap was hit before the requested horizon.
    truncated: bool,
}

impl CsbpPath {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn values_after_jump(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn check(&self, t: f64) -> Result<(), CsbpError> {
        if !(t >= 0.0) || t > self.horizon {
            return Err(CsbpError::BeyondHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Index of the last jump at or before `t`.
    #[inline]
    fn segment(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t) - 1
    }

    /// Z(t), exactly.
    pub fn z_at(&self, t: f64) -> Result<f64, CsbpError> {
        self.check(t)?;
        let i = self.segment(t);
        Ok(self.values[i] * math::exp(-self.b * (t - self.jump_times[i])))
    }

    /// B(t): the number of birth events on [0, t], counting t = 0 as the
    /// first one.
    pub fn count_births(&self, t: f64) -> Result<u64, CsbpError> {
        self.check(t)?;
        Ok(self.jump_times.partition_point(|&s| s <= t) as u64)
    }

    /// Total births over the whole (extinction) path.
    pub fn total_births(&self) -> u64 {
        self.jump_times.len() as u64
    }

    /// ∫₀^t Z(s) ds in piecewise closed form: each segment contributes
    /// z·(1 − e^{-bΔ})/b, degenerating to z·Δ at b = 0. `t = ∞` is
    /// allowed on extinction paths, where the final segment contributes
    /// its total mass z/b.
    pub fn integrated_z(&self, t: f64) -> Result<f64, CsbpError> {
        self.check(t)?;
        let mut acc = 0.0;
        let last = if t.is_infinite() {
            self.jump_times.len() - 1
        } else {
            self.segment(t)
        };
        for i in 0..last {
            acc += self.segment_mass(i, self.jump_times[i + 1] - self.jump_times[i]);
        }
        if t.is_infinite() {
            debug_assert!(self.b > 0.0);
            acc += self.values[last] / self.b;
        } else {
            acc += self.segment_mass(last, t - self.jump_times[last]);
        }
        Ok(acc)
    }

    #[inline]
    fn segment_mass(&self, i: usize, dt: f64) -> f64 {
        if self.b == 0.0 {
            self.values[i] * dt
        } else {
            self.values[i] * -math::exp_m1(-self.b * dt) / self.b
        }
    }

    /// W_t = e^{-(1-b)t} · Z(t).
    pub fn martingale_value(&self, t: f64) -> Result<f64, CsbpError> {
        Ok(math::exp(-(1.0 - self.b) * t) * self.z_at(t)?)
    }
}

/// Exact event-driven simulation of `Z` up to `t_max` (which may be
/// infinite only when b > 1, where the jump count is almost surely
/// finite). From state `z`, the residual jump mass is `z/b`; a standard
/// exponential `E` beyond it means no further jump ever, otherwise the
/// next jump is after `Δ = -ln(1 - bE/z)/b` (`E/z` at b = 0) and the
/// state moves to `z·e^{-bΔ} + 1`.
pub fn simulate_z(
    b: f64,
    t_max: f64,
    event_cap: u64,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<CsbpPath, CsbpError> {
    if !b.is_finite() || b < 0.0 {
        return Err(CsbpError::InvalidDrift);
    }
    if !(t_max > 0.0) {
        return Err(CsbpError::InvalidParameter("t_max must be positive"));
    }
    if t_max.is_infinite() && b <= 1.0 {
        return Err(CsbpError::NonTerminatingHorizon);
    }

    let mut jump_times = alloc::vec![0.0f64];
    let mut values = alloc::vec![1.0f64];
    let mut t = 0.0;
    let mut z = 1.0;
    let mut truncated = false;

    loop {
        let e = rng.exp1();
        let dt = if b == 0.0 {
            e / z
        } else {
            let ratio = b * e / z;
            if ratio >= 1.0 {
                // Residual hazard exhausted: the path decays forever.
                break;
            }
            -math::ln_1p(-ratio) / b
        };
        if t + dt > t_max {
            break;
        }
        t += dt;
        z = z * math::exp(-b * dt) + 1.0;
        jump_times.push(t);
        values.push(z);
        if jump_times.len() as u64 >= event_cap {
            truncated = true;
            break;
        }
    }

    let horizon = if truncated { t } else { t_max };
    Ok(CsbpPath {
        b,
        jump_times,
        values,
        horizon,
        truncated,
    })
}

/// Extinction summary of a subcritical path.
#[derive(Debug, Clone, Copy)]
pub struct ExtinctionStats {
    /// ∫₀^∞ Z(s) ds, which equals the hitting time of zero of the
    /// associated Lévy path.
    pub zeta: f64,
    /// B(∞) = 1 + total jumps.
    pub total_births: u64,
    pub truncated: bool,
}

/// Run a subcritical path (b > 1) to extinction and report
/// (ζ, B(∞)). The pathwise identity B(∞) = b·∫₀^∞ Z is asserted at
/// 1e-9; it holds by telescoping, so a failure means a broken
/// integrator.
pub fn extinction_stats(
    b: f64,
    event_cap: u64,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<ExtinctionStats, CsbpError> {
    if !(b > 1.0) {
        return Err(CsbpError::SubcriticalRequired { b });
    }
    let path = simulate_z(b, f64::INFINITY, event_cap, rng)?;
    let total_births = path.total_births();
    let stats = if path.truncated() {
        ExtinctionStats {
            zeta: path.integrated_z(path.horizon())?,
            total_births,
            truncated: true,
        }
    } else {
        let zeta = path.integrated_z(f64::INFINITY)?;
        let err = math::abs(b * zeta - total_births as f64);
        assert!(
            err < 1e-9 * (total_births as f64).max(1.0),
            "pathwise birth identity violated: |b·ζ − B(∞)| = {err}"
        );
        ExtinctionStats {
            zeta,
            total_births,
            truncated: false,
        }
    };
    Ok(stats)
}

/// How far to run a Lévy/time-change path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LampertiHorizon {
    /// Simulate the Lévy path up to this ξ-time.
    XiTime(f64),
    /// Simulate far enough that Z-time `t` is covered. Always terminates:
    /// expected events equal the expected birth count at `t`.
    ZTime(f64),
    /// Run until ξ hits zero (requires b > 1).
    ToAbsorption,
}

/// The Lévy path ξ_s = η_s − b·s (η a unit-rate Poisson process started
/// at 1) together with the bookkeeping to evaluate the time-changed
/// process: `Z(t) = ξ_{T(t)}` where T inverts `s ↦ ∫₀^s du/ξ_u`.
#[derive(Debug, Clone)]
pub struct LampertiPath {
    b: f64,
    /// Poisson arrival times, strictly increasing; η_s = 1 + #{arrivals ≤ s}.
    arrivals: Vec<f64>,
    /// ξ-time up to which the path is valid.
    horizon: f64,
    /// Hitting time of 0 if it happens within the horizon. ξ only hits 0
    /// along a drift segment, so it is found in closed form per segment
    /// with no root-finding tolerance.
    zeta: Option<f64>,
    truncated: bool,
}

impl LampertiPath {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn arrivals(&self) -> &[f64] {
        &self.arrivals
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// ξ at ξ-time `s` (valid up to the horizon and ζ).
    pub fn xi_at(&self, s: f64) -> Result<f64, CsbpError> {
        if !(s >= 0.0) || s > self.horizon || self.zeta.is_some_and(|z| s > z) {
            return Err(CsbpError::BeyondHorizon {
                t: s,
                horizon: self.zeta.unwrap_or(self.horizon),
            });
        }
        let eta = 1 + self.arrivals.partition_point(|&a| a <= s);
        Ok(eta as f64 - self.b * s)
    }

    /// The time-changed value Z(t) = ξ_{T(t)}, walking the segments and
    /// converting each linear piece of ξ to Z-time in closed form. On a
    /// segment starting at ξ = x with b > 0, Z-time advances by
    /// (1/b)·ln(x/(x − b·δ)), which diverges where ξ hits 0 — so any
    /// Z-time is reached strictly before ζ. Returns the value together
    /// with the ξ-time T(t) where it was found.
    pub fn z_at(&self, t: f64) -> Result<(f64, f64), CsbpError> {
        if !(t >= 0.0) {
            return Err(CsbpError::InvalidParameter("t must be >= 0"));
        }
        let mut remaining = t;
        let mut s = 0.0f64;
        let mut idx = 0usize;
        loop {
            let x = (1 + idx) as f64 - self.b * s;
            let seg_end = if idx < self.arrivals.len() {
                self.arrivals[idx]
            } else {
                self.horizon
            };
            let seg_len = seg_end - s;
            // Z-time capacity of this segment.
            let capacity = if self.b == 0.0 {
                seg_len / x
            } else {
                let tail = x - self.b * seg_len;
                if tail <= 0.0 {
                    f64::INFINITY
                } else {
                    math::ln(x / tail) / self.b
                }
            };
            if remaining <= capacity {
                return if self.b == 0.0 {
                    Ok((x, s + remaining * x))
                } else {
                    let value = x * math::exp(-self.b * remaining);
                    Ok((value, s + (x - value) / self.b))
                };
            }
            if idx >= self.arrivals.len() {
                return Err(CsbpError::BeyondHorizon {
                    t,
                    horizon: self.horizon,
                });
            }
            remaining -= capacity;
            s = seg_end;
            idx += 1;
        }
    }
}

/// Simulate the Lévy path with unit-rate Poisson arrivals until the
/// requested horizon is covered.
pub fn simulate_lamperti(
    b: f64,
    horizon: LampertiHorizon,
    event_cap: u64,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<LampertiPath, CsbpError> {
    if !b.is_finite() || b < 0.0 {
        return Err(CsbpError::InvalidDrift);
    }
    match horizon {
        LampertiHorizon::ToAbsorption if b <= 1.0 => {
            return Err(CsbpError::NonTerminatingHorizon)
        }
        LampertiHorizon::XiTime(s) | LampertiHorizon::ZTime(s) if !(s > 0.0) => {
            return Err(CsbpError::InvalidParameter("horizon must be positive"));
        }
        _ => {}
    }

    let mut arrivals: Vec<f64> = Vec::new();
    let mut s = 0.0f64; // current ξ-time (start of the open segment)
    let mut z_time = 0.0f64; // Z-time accumulated up to s
    let mut zeta = None;
    let mut truncated = false;

    loop {
        let x = (1 + arrivals.len()) as f64 - b * s; // ξ at segment start
        debug_assert!(x > 0.0);
        let wait = rng.exp1();
        let arrival = s + wait;

        // Does ξ hit 0 on this segment before the next arrival?
        let hit = if b > 0.0 {
            let hit_time = s + x / b;
            (hit_time <= arrival).then_some(hit_time)
        } else {
            None
        };

        if let Some(hit_time) = hit {
            if let LampertiHorizon::XiTime(s_max) = horizon {
                if hit_time > s_max {
                    s = s_max;
                    break;
                }
            }
            zeta = Some(hit_time);
            s = hit_time;
            break;
        }

        // Z-time capacity of the completed segment.
        if let LampertiHorizon::ZTime(target) = horizon {
            let cap = if b == 0.0 {
                wait / x
            } else {
                math::ln(x / (x - b * wait)) / b
            };
            if z_time + cap >= target {
                // Segment covers the target; keep the arrival as horizon.
                arrivals.push(arrival);
                s = arrival;
                break;
            }
            z_time += cap;
        }

        match horizon {
            LampertiHorizon::XiTime(s_max) if arrival > s_max => {
                s = s_max;
                break;
            }
            _ => {}
        }

        arrivals.push(arrival);
        s = arrival;
        if arrivals.len() as u64 >= event_cap {
            truncated = true;
            break;
        }
    }

    Ok(LampertiPath {
        b,
        arrivals,
        horizon: s,
        zeta,
        truncated,
    })
}

/// Min-heap entry for pending births.
#[derive(PartialEq)]
struct Pending(f64);

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other.0.total_cmp(&self.0)
    }
}

/// Births of the age-structured population on [0, t_max]: the ancestor at
/// time 0, and each individual begetting children at ages given by a
/// Poisson process with intensity e^{-b·a} da.
#[derive(Debug, Clone)]
pub struct CmjTrajectory {
    b: f64,
    /// Sorted birth times, starting with the ancestor at 0.
    birth_times: Vec<f64>,
    horizon: f64,
    truncated: bool,
}

impl CmjTrajectory {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn birth_times(&self) -> &[f64] {
        &self.birth_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Number of individuals born by time `t`.
    pub fn births_by(&self, t: f64) -> Result<u64, CsbpError> {
        if !(t >= 0.0) || t > self.horizon {
            return Err(CsbpError::BeyondHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.birth_times.partition_point(|&s| s <= t) as u64)
    }
}

/// Event-queue simulation of the population. Each popped birth at `s`
/// generates that individual's children by inverting the age hazard
/// e^{-b·a}: from age a₀, the residual mass is e^{-b·a₀}/b, and the next
/// child age solves (e^{-b·a₀} − e^{-b·a})/b = E. Ages increase, so the
/// first child past `t_max` ends that individual's enumeration.
pub fn simulate_cmj(
    b: f64,
    t_max: f64,
    event_cap: u64,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<CmjTrajectory, CsbpError> {
    if !b.is_finite() || b < 0.0 {
        return Err(CsbpError::InvalidDrift);
    }
    if !(t_max >= 0.0) || t_max.is_infinite() {
        return Err(CsbpError::InvalidParameter("t_max must be finite and >= 0"));
    }

    let mut births: Vec<f64> = Vec::new();
    let mut queue: BinaryHeap<Pending> = BinaryHeap::new();
    queue.push(Pending(0.0));
    let mut truncated = false;

    // Births pop in time order, so on truncation everything before the
    // last popped time is complete and the horizon shrinks to it.
    let mut horizon = t_max;
    while let Some(Pending(s)) = queue.pop() {
        births.push(s);
        if births.len() as u64 >= event_cap {
            truncated = true;
            horizon = s;
            break;
        }
        // Children of the individual born at s.
        let mut age = 0.0f64;
        loop {
            let e = rng.exp1();
            let next_age = if b == 0.0 {
                age + e
            } else {
                let mass = math::exp(-b * age) - b * e;
                if mass <= 0.0 {
                    break;
                }
                -math::ln(mass) / b
            };
            if s + next_age > t_max {
                break;
            }
            age = next_age;
            queue.push(Pending(s + next_age));
        }
    }

    Ok(CmjTrajectory {
        b,
        birth_times: births,
        horizon,
        truncated,
    })
}

/// E[Z(t)^ℓ] for ℓ = 1..=ell_max by integrating the Kolmogorov forward
/// system m'_ℓ = ℓ(1−b)·m_ℓ + Σ_{j=0}^{ℓ-2} C(ℓ,j)·m_{j+1}, m_ℓ(0) = 1,
/// with classical fixed-step RK4. The step is refined by halving until
/// the results move by less than 1e-9 relatively, and the refined values
/// are returned.
pub fn moment_ode(b: f64, ell_max: usize, t: f64) -> Result<Vec<f64>, CsbpError> {
    if !b.is_finite() || b < 0.0 {
        return Err(CsbpError::InvalidDrift);
    }
    if ell_max < 1 {
        return Err(CsbpError::InvalidParameter("ell_max must be >= 1"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(CsbpError::InvalidParameter("t must be finite and >= 0"));
    }
    if t == 0.0 {
        return Ok(alloc::vec![1.0; ell_max]);
    }

    // Binomial table C(ℓ, j) for ℓ ≤ ell_max.
    let mut binom = alloc::vec![alloc::vec![0.0f64; ell_max + 1]; ell_max + 1];
    for l in 0..=ell_max {
        binom[l][0] = 1.0;
        for j in 1..=l {
            binom[l][j] = binom[l - 1][j - 1] + if j <= l - 1 { binom[l - 1][j] } else { 0.0 };
        }
    }

    let deriv = |m: &[f64], out: &mut [f64]| {
        for l in 1..=ell_max {
            let mut d = l as f64 * (1.0 - b) * m[l - 1];
            if l >= 2 {
                for j in 0..=(l - 2) {
                    d += binom[l][j] * m[j]; // m[j] holds m_{j+1}
                }
            }
            out[l - 1] = d;
        }
    };

    let integrate = |steps: usize| -> Vec<f64> {
        let h = t / steps as f64;
        let mut m = alloc::vec![1.0f64; ell_max];
        let mut k1 = alloc::vec![0.0f64; ell_max];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        for _ in 0..steps {
            deriv(&m, &mut k1);
            for i in 0..ell_max {
                tmp[i] = m[i] + 0.5 * h * k1[i];
            }
            deriv(&tmp, &mut k2);
            for i in 0..ell_max {
                tmp[i] = m[i] + 0.5 * h * k2[i];
            }
            deriv(&tmp, &mut k3);
            for i in 0..ell_max {
                tmp[i] = m[i] + h * k3[i];
            }
            deriv(&tmp, &mut k4);
            for i in 0..ell_max {
                m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        m
    };

    let mut steps = ((t / 0.05).max(8.0)) as usize;
    let mut coarse = integrate(steps);
    for _ in 0..16 {
        steps *= 2;
        let fine = integrate(steps);
        let worst = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| math::abs(c - f) / f.max(1.0))
            .fold(0.0f64, f64::max);
        coarse = fine;
        if worst < 1e-9 {
            break;
        }
    }
    Ok(coarse)
}
