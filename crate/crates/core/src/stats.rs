//! Statistical helpers shared by the estimators and the validation suite:
//! summary statistics, distances, two-sample tests, binomial intervals,
//! and the tail-fitting primitives.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math;

/// Sample mean and standard error of the mean.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, math::sqrt(ss / (n - 1.0) / n))
}

/// Mean and standard error of `f(value)` under an integer-valued
/// empirical distribution given as value → count.
pub fn mean_se_weighted<F: Fn(u64) -> f64>(hist: &BTreeMap<u64, u64>, f: F) -> (f64, f64) {
    let n: u64 = hist.values().sum();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (&v, &c) in hist {
        let x = f(v);
        sum += x * c as f64;
        sumsq += x * x * c as f64;
    }
    let mean = sum / nf;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = (sumsq - nf * mean * mean) / (nf - 1.0);
    (mean, math::sqrt(var.max(0.0) / nf))
}

/// Total-variation distance between an empirical law (value → count) and
/// an exact pmf. The exact law's mass outside the empirical support is
/// accounted for through the final `1 − Σ pmf` term, so the result is a
/// true TV distance as long as `pmf` is evaluated over `0..=max_value`.
pub fn total_variation<F: Fn(u64) -> f64>(hist: &BTreeMap<u64, u64>, pmf: F) -> f64 {
    let n: u64 = hist.values().sum();
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let max = *hist.keys().next_back().unwrap();
    let mut sum_abs = 0.0;
    let mut covered = 0.0;
    for v in 0..=max {
        let p = pmf(v);
        let emp = hist.get(&v).map_or(0.0, |&c| c as f64 / nf);
        sum_abs += math::abs(emp - p);
        covered += p;
    }
    // Exact mass beyond the largest observation, where the empirical law
    // has none.
    sum_abs += math::abs(1.0 - covered);
    0.5 * sum_abs
}

/// Kolmogorov–Smirnov two-sample test. Returns (D, asymptotic p-value).
/// Inputs are sorted in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / na - j as f64 / nb));
    }
    let ne = na * nb / (na + nb);
    let sqrt_ne = math::sqrt(ne);
    // Small-sample correction from Numerical Recipes.
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    (d, ks_tail(lambda))
}

/// Q_KS(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
fn ks_tail(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = math::exp(-2.0 * (j as f64) * (j as f64) * lambda * lambda);
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Chi-squared two-sample homogeneity test on integer-valued data.
/// Adjacent values are pooled (from the right) until every pooled cell
/// has a combined count of at least `min_pooled`; returns
/// (statistic, degrees of freedom, p-value). Fails with `None` when
/// fewer than two pooled cells remain.
pub fn chi2_two_sample(
    a: &BTreeMap<u64, u64>,
    b: &BTreeMap<u64, u64>,
    min_pooled: u64,
) -> Option<(f64, u64, f64)> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return None;
    }
    let hi = (*a.keys().next_back().unwrap()).max(*b.keys().next_back().unwrap());
    let lo = (*a.keys().next().unwrap()).min(*b.keys().next().unwrap());

    // Pool left to right; the tail pool gets merged backward at the end
    // if it falls short.
    let mut cells: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for v in lo..=hi {
        acc.0 += a.get(&v).copied().unwrap_or(0);
        acc.1 += b.get(&v).copied().unwrap_or(0);
        if acc.0 + acc.1 >= min_pooled {
            cells.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            cells.push(acc);
        }
    }
    if cells.len() < 2 {
        return None;
    }

    let total = (na + nb) as f64;
    let mut stat = 0.0;
    for &(ca, cb) in &cells {
        let col = (ca + cb) as f64;
        let ea = na as f64 * col / total;
        let eb = nb as f64 * col / total;
        stat += (ca as f64 - ea) * (ca as f64 - ea) / ea;
        stat += (cb as f64 - eb) * (cb as f64 - eb) / eb;
    }
    let df = (cells.len() - 1) as u64;
    let p = math::gamma_q(df as f64 / 2.0, stat / 2.0);
    Some((stat, df, p))
}

/// Chi-squared goodness of fit of an integer-valued empirical law
/// against an exact pmf. Values are pooled from the left until each
/// pooled cell has expected count at least `min_expected`, with the
/// remainder (including all mass above the largest observation) folded
/// into a final cell. Returns (statistic, degrees of freedom, p-value).
pub fn chi2_goodness_of_fit<F: Fn(u64) -> f64>(
    hist: &BTreeMap<u64, u64>,
    pmf: F,
    min_expected: f64,
) -> Option<(f64, u64, f64)> {
    let n: u64 = hist.values().sum();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let max = *hist.keys().next_back().unwrap();
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc = (0.0f64, 0.0f64);
    let mut covered = 0.0;
    for v in 0..=max {
        acc.0 += hist.get(&v).map_or(0.0, |&c| c as f64);
        let p = pmf(v);
        acc.1 += nf * p;
        covered += p;
        if acc.1 >= min_expected {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    // Tail cell: mass beyond the largest observation.
    acc.1 += nf * (1.0 - covered).max(0.0);
    if acc.1 > 0.0 {
        cells.push(acc);
    }
    if cells.len() < 2 {
        return None;
    }
    let stat: f64 = cells
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (cells.len() - 1) as u64;
    Some((stat, df, math::gamma_q(df as f64 / 2.0, stat / 2.0)))
}

/// Exact two-sided binomial tail probability of observing a count at
/// least as extreme as `k` under Bin(n, p), via the beta integral
/// identity P(X ≥ k) = I_p(k, n−k+1). Used where a normal z-score is
/// meaningless because the expected count is small.
pub fn binomial_two_sided_p(k: u64, n: u64, p: f64) -> f64 {
    debug_assert!(k <= n && (0.0..=1.0).contains(&p));
    let upper = if k == 0 {
        1.0
    } else {
        math::beta_inc(k as f64, (n - k + 1) as f64, p)
    };
    let lower = if k == n {
        1.0
    } else {
        1.0 - math::beta_inc((k + 1) as f64, (n - k) as f64, p)
    };
    (2.0 * upper.min(lower)).min(1.0)
}

/// Two-sided binomial confidence interval at level `conf` for `k`
/// successes out of `n`: Clopper–Pearson (exact) bounds via the beta
/// quantiles.
pub fn clopper_pearson(k: u64, n: u64, conf: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n);
    let alpha = 1.0 - conf;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        math::beta_inc_inv(kf, nf - kf + 1.0, alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        math::beta_inc_inv(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Ordinary least squares of y on x. Returns (slope, intercept,
/// slope standard error, R²). Requires at least three points.
pub fn ols(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..n)
        .map(|i| {
            let r = y[i] - intercept - slope * x[i];
            r * r
        })
        .sum();
    let se = math::sqrt(ss_res / (nf - 2.0) / sxx);
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some((slope, intercept, se, r2))
}

/// Hill estimator of the tail index from an integer-valued histogram,
/// using the top `fraction` of the sample: with order statistics
/// x(1) ≥ … ≥ x(m) above the threshold x(m+1),
/// 1/α̂ = (1/m) Σ ln(x(i)/(x(m+1) + 1/2)).
///
/// The half-unit shift of the threshold is the usual continuity
/// correction for lattice data (an atom at k stands for mass on
/// [k−1/2, k+1/2]); without it the estimator is biased low whenever the
/// threshold sits at small integers.
pub fn hill_from_hist(hist: &BTreeMap<u64, u64>, fraction: f64) -> Option<f64> {
    let n: u64 = hist.values().sum();
    let m = ((n as f64) * fraction) as u64;
    if m < 10 {
        return None;
    }
    // Walk from the largest value down, collecting the top m points and
    // the threshold (the next order statistic below them).
    let mut remaining = m;
    let mut sum_ln = 0.0;
    let mut threshold = None;
    for (&v, &c) in hist.iter().rev() {
        if remaining == 0 {
            threshold = Some(v);
            break;
        }
        let take = c.min(remaining);
        sum_ln += take as f64 * math::ln(v as f64);
        remaining -= take;
        if take < c {
            threshold = Some(v);
            break;
        }
    }
    let thr = threshold? as f64;
    if thr <= 0.0 {
        return None;
    }
    let inv = sum_ln / m as f64 - math::ln(thr + 0.5);
    if inv <= 0.0 {
        return None;
    }
    Some(1.0 / inv)
}
