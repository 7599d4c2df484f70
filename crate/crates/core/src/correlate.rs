//! Rank-correlation engine.
//!
//! Kendall's tau-b is computed with Knight's O(n log n) algorithm. A company's
//! pair is first correlated without a shift; weak pairs are re-scanned over
//! integer weekly lags and a shift is accepted only when the tau gain is large
//! enough. Each company ends in one of three groups.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::calendar::WeekIndex;
use crate::preprocess::{aligned_slices, PreprocessError, WeeklySeries};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelateError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations, got {0}")]
    TooShort(usize),
    #[error("input contains NaN")]
    NotANumber,
    #[error("degenerate: one sequence is entirely tied")]
    Degenerate,
    #[error("tau {0} outside [-1, 1]")]
    TauOutOfRange(f64),
    #[error("significance approximation needs more than ten points, got {0}")]
    TooFewForSignificance(usize),
    #[error("significance level {0} outside (0, 0.5)")]
    AlphaOutOfRange(f64),
    #[error("empty feasible lag range ({min}..={max})")]
    EmptyLagRange { min: i64, max: i64 },
    #[error("no lag in {min}..={max} yields a defined tau")]
    NoValidLag { min: i64, max: i64 },
    #[error(transparent)]
    Align(#[from] PreprocessError),
}

pub type Result<T> = std::result::Result<T, CorrelateError>;

/// Tie-corrected Kendall rank correlation (tau-b).
///
/// `(C - D) / sqrt((n0 - n_x)(n0 - n_y))` where `n0 = n(n-1)/2` and `n_x`,
/// `n_y` count pairs tied in `x` and in `y`.
pub fn kendall_tau<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let counts = pair_counts(x, y)?;
    counts.tau_b()
}

/// Pair statistics behind tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub n0: u64,
    /// Pairs tied in x (including joint ties).
    pub tied_x: u64,
    /// Pairs tied in y (including joint ties).
    pub tied_y: u64,
    /// Concordant minus discordant pairs.
    pub score: i64,
}

impl PairCounts {
    pub fn tau_b<T: Scalar>(&self) -> Result<T> {
        let dx = self.n0 - self.tied_x;
        let dy = self.n0 - self.tied_y;
        if dx == 0 || dy == 0 {
            return Err(CorrelateError::Degenerate);
        }
        let num = T::from_i64(self.score).expect("pair score");
        let den = (T::from_u64(dx).expect("pair count") * T::from_u64(dy).expect("pair count")).sqrt();
        Ok((num / den).max(-T::one()).min(T::one()))
    }
}

fn cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("NaN filtered")
}

fn tie_pairs<T: Scalar>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `v` ascending, returning the number of swaps an insertion sort would
/// perform (strict inversions).
fn merge_count<T: Scalar>(v: &mut [T], buf: &mut Vec<T>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    if n <= 16 {
        let mut swaps = 0u64;
        for i in 1..n {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                j -= 1;
                swaps += 1;
            }
        }
        return swaps;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Knight's algorithm: sort by (x, y), count x and joint ties, merge-sort y
/// counting exchanges, then count y ties.
pub fn pair_counts<T: Scalar>(x: &[T], y: &[T]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(CorrelateError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(CorrelateError::TooShort(n));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(CorrelateError::NotANumber);
    }
    let mut pairs: Vec<(T, T)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| cmp(&a.0, &b.0).then_with(|| cmp(&a.1, &b.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let mut tied_x = 0u64;
    let mut joint = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                joint += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            joint += run_xy * (run_xy - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    joint += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(n);
    let swaps = merge_count(&mut ys, &mut buf);
    let tied_y = tie_pairs(&ys);

    let score = n0 as i64 - tied_x as i64 - tied_y as i64 + joint as i64 - 2 * swaps as i64;
    Ok(PairCounts {
        n0,
        tied_x,
        tied_y,
        score,
    })
}

/// Pearson correlation implied by a Kendall tau: `sin(pi tau / 2)`.
pub fn tau_to_pearson<T: Scalar>(tau: T) -> Result<T> {
    if !(tau >= -T::one() && tau <= T::one()) {
        return Err(CorrelateError::TauOutOfRange(tau.as_f64()));
    }
    Ok((T::FRAC_PI_2() * tau).sin())
}

/// Standard deviation of tau under independence:
/// `sqrt(2 (2n + 5) / (9 n (n - 1)))`.
pub fn tau_null_sd(n: usize) -> f64 {
    let n = n as f64;
    (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub significant: bool,
    pub threshold: f64,
}

/// One-sided test of a positive association: tau is significant when it
/// exceeds `z_(1 - alpha) * sd(n)`.
pub fn tau_significance(tau: f64, n: usize, alpha: f64) -> Result<Significance> {
    if n <= 10 {
        return Err(CorrelateError::TooFewForSignificance(n));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(CorrelateError::AlphaOutOfRange(alpha));
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha);
    let threshold = z * tau_null_sd(n);
    Ok(Significance {
        significant: tau > threshold,
        threshold,
    })
}

/// Classification thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    /// Tau at or above which a link counts as strong.
    pub strong_tau: f64,
    /// Minimum relative tau gain for accepting a shift.
    pub min_improvement: f64,
    pub significance_alpha: f64,
    /// Baselines at or below this make the relative gain unbounded.
    pub near_zero_baseline: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            strong_tau: 0.5,
            min_improvement: 0.5,
            significance_alpha: 0.01,
            near_zero_baseline: 0.05,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.strong_tau > 0.0 && self.strong_tau < 1.0) {
            return Err(format!("strong_tau {} outside (0, 1)", self.strong_tau));
        }
        if !(self.significance_alpha > 0.0 && self.significance_alpha < 0.5) {
            return Err(format!("significance_alpha {} outside (0, 0.5)", self.significance_alpha));
        }
        if !(self.min_improvement >= 0.0) {
            return Err(format!("min_improvement {} is negative", self.min_improvement));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    /// Strong link without a shift.
    G1,
    /// Strong link with a shift.
    G2,
    /// Weak link.
    G3,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::G1, Group::G2, Group::G3];

    pub fn label(&self) -> &'static str {
        match self {
            Group::G1 => "Strong link, without a shift",
            Group::G2 => "Strong link, with a shift",
            Group::G3 => "Weak link",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::G1 => "G1",
            Group::G2 => "G2",
            Group::G3 => "G3",
        })
    }
}

impl FromStr for Group {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "G1" => Ok(Group::G1),
            "G2" => Ok(Group::G2),
            "G3" => Ok(Group::G3),
            other => Err(format!("unknown group `{other}`")),
        }
    }
}

/// Feasible shifts of the valuation series in weeks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagBounds {
    pub min: i64,
    pub max: i64,
}

impl LagBounds {
    /// The shift may move the first round back no further than the founding
    /// week (and the interest start), and the last round no later than the
    /// last interest week.
    pub fn for_pair<T: Scalar>(
        interest: &WeeklySeries<T>,
        valuation: &WeeklySeries<T>,
        founding_week: WeekIndex,
    ) -> Result<LagBounds> {
        let floor = founding_week.max(interest.start);
        let min = -(valuation.start - floor);
        let max = interest.end() - valuation.end();
        if min > max {
            return Err(CorrelateError::EmptyLagRange { min, max });
        }
        Ok(LagBounds { min, max })
    }

    /// Lags in scan-priority order: increasing |lag|, negative before positive.
    pub fn by_priority(&self) -> Vec<i64> {
        let mut lags: Vec<i64> = (self.min..=self.max).collect();
        lags.sort_by_key(|&l| (l.unsigned_abs(), l > 0));
        lags
    }
}

/// Tau of the aligned pair at every lag in `bounds`; `None` where the aligned
/// slices are degenerate or the shift is infeasible.
pub fn tau_by_lag<T: Scalar>(
    interest: &WeeklySeries<T>,
    valuation: &WeeklySeries<T>,
    bounds: LagBounds,
) -> Vec<(i64, Option<T>)> {
    (bounds.min..=bounds.max)
        .into_par_iter()
        .map(|lag| {
            let tau = aligned_slices(interest, valuation, lag)
                .ok()
                .and_then(|(i, v)| kendall_tau(i, v).ok());
            (lag, tau)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagScan<T = f64> {
    pub lag: i64,
    pub tau: T,
}

/// Scans every integer lag in `bounds` and returns the one maximizing tau,
/// ties broken toward smaller |lag| (then toward the negative lag).
pub fn acc_lag_search<T: Scalar>(
    interest: &WeeklySeries<T>,
    valuation: &WeeklySeries<T>,
    bounds: LagBounds,
) -> Result<LagScan<T>> {
    let curve = tau_by_lag(interest, valuation, bounds);
    let mut best: Option<LagScan<T>> = None;
    for lag in bounds.by_priority() {
        let Some(tau) = curve[(lag - bounds.min) as usize].1 else {
            continue;
        };
        if best.is_none_or(|b| tau > b.tau) {
            best = Some(LagScan { lag, tau });
        }
    }
    best.ok_or(CorrelateError::NoValidLag {
        min: bounds.min,
        max: bounds.max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub group: Group,
    pub tau_best: f64,
    pub lag_weeks: i64,
    /// Relative tau gain of the best shift; infinite for near-zero baselines.
    pub improvement: f64,
}

/// Assigns G1/G2/G3 from the unshifted tau and the optional best shift.
pub fn classify_group(tau_zero: f64, shifted: Option<LagScan<f64>>, cfg: &ThresholdConfig) -> Classification {
    if tau_zero >= cfg.strong_tau {
        return Classification {
            group: Group::G1,
            tau_best: tau_zero,
            lag_weeks: 0,
            improvement: 0.0,
        };
    }
    let Some(scan) = shifted else {
        return Classification {
            group: Group::G3,
            tau_best: tau_zero,
            lag_weeks: 0,
            improvement: 0.0,
        };
    };
    let improvement = if tau_zero > cfg.near_zero_baseline {
        ((scan.tau - tau_zero) / tau_zero).max(0.0)
    } else {
        f64::INFINITY
    };
    if scan.lag != 0 && scan.tau >= cfg.strong_tau && improvement >= cfg.min_improvement {
        Classification {
            group: Group::G2,
            tau_best: scan.tau,
            lag_weeks: scan.lag,
            improvement,
        }
    } else {
        Classification {
            group: Group::G3,
            tau_best: tau_zero.max(scan.tau),
            lag_weeks: 0,
            improvement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub company_id: String,
    pub tau_zero: f64,
    pub tau_best: f64,
    pub lag_weeks: i64,
    pub n: usize,
    pub significant: bool,
    pub significance_threshold: f64,
    pub group: Group,
    pub improvement: f64,
}

/// Full per-company correlation: unshifted tau, lag scan when the link is
/// weak, classification and significance of the retained tau.
pub fn correlate_pair(
    company_id: &str,
    interest: &WeeklySeries<f64>,
    valuation: &WeeklySeries<f64>,
    founding_week: WeekIndex,
    cfg: &ThresholdConfig,
) -> Result<CorrelationResult> {
    let (i, v) = aligned_slices(interest, valuation, 0)?;
    let n = i.len();
    let tau_zero = kendall_tau(i, v)?;
    let shifted = if tau_zero < cfg.strong_tau {
        match LagBounds::for_pair(interest, valuation, founding_week) {
            Ok(bounds) => acc_lag_search(interest, valuation, bounds).ok(),
            Err(_) => None,
        }
    } else {
        None
    };
    let class = classify_group(tau_zero, shifted, cfg);
    let sig = tau_significance(class.tau_best, n, cfg.significance_alpha)?;
    Ok(CorrelationResult {
        company_id: company_id.to_string(),
        tau_zero,
        tau_best: class.tau_best,
        lag_weeks: class.lag_weeks,
        n,
        significant: sig.significant,
        significance_threshold: sig.threshold,
        group: class.group,
        improvement: class.improvement,
    })
}
