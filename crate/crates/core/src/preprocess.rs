//! Series preprocessing: window stitching, double exponential filtering,
//! weekly interpolation of valuation rounds, min-max normalization and lag
//! alignment.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{week_of, week_start, WeekIndex};
use crate::ingest::{GtWindow, ValuationSeries};
use crate::scalar::{mean, Scalar};

/// Minimum number of shared weeks between consecutive export windows.
pub const MIN_STITCH_OVERLAP: usize = 4;

/// Minimum number of paired weeks for an aligned pair.
pub const MIN_ALIGNED_WEEKS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("filter coefficient {0} outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("series is empty")]
    EmptySeries,
    #[error("no windows to stitch")]
    NoWindows,
    #[error("windows not sorted by start date (window {index})")]
    WindowsUnordered { index: u32 },
    #[error("insufficient overlap between windows {earlier} and {later}: {overlap} weeks (need {MIN_STITCH_OVERLAP})")]
    InsufficientStitchOverlap { earlier: u32, later: u32, overlap: usize },
    #[error("valuation needs rounds in at least two distinct weeks, found {0}")]
    TooFewRounds(usize),
    #[error("insufficient overlap: {0} paired weeks (need {MIN_ALIGNED_WEEKS})")]
    InsufficientOverlap(usize),
    #[error("valuation shifted by {lag} weeks spans weeks {start}..={end}, outside interest span {interest_start}..={interest_end}")]
    ShiftOutsideInterest {
        lag: i64,
        start: WeekIndex,
        end: WeekIndex,
        interest_start: WeekIndex,
        interest_end: WeekIndex,
    },
}

pub type Result<T> = std::result::Result<T, PreprocessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    RawInterest,
    StitchedInterest,
    FilteredInterest,
    RawValuation,
    FilteredValuation,
    InterpolatedValuation,
    Normalized,
}

/// Values on consecutive weeks starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries<T = f64> {
    pub start: WeekIndex,
    pub values: Vec<T>,
    pub kind: SeriesKind,
}

impl<T: Scalar> WeeklySeries<T> {
    pub fn new(start: WeekIndex, values: Vec<T>, kind: SeriesKind) -> Self {
        WeeklySeries { start, values, kind }
    }

    pub fn start_week(&self) -> NaiveDate {
        week_start(self.start)
    }

    /// Last covered week (inclusive).
    pub fn end(&self) -> WeekIndex {
        self.start + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, week: WeekIndex) -> Option<T> {
        if week < self.start {
            return None;
        }
        self.values.get((week - self.start) as usize).copied()
    }

    /// Restricts the series to weeks `from..=to`; `None` when disjoint.
    pub fn clip(&self, from: WeekIndex, to: WeekIndex) -> Option<Self> {
        let lo = from.max(self.start);
        let hi = to.min(self.end());
        if lo > hi {
            return None;
        }
        let a = (lo - self.start) as usize;
        let b = (hi - self.start) as usize;
        Some(WeeklySeries::new(lo, self.values[a..=b].to_vec(), self.kind))
    }

    pub fn filtered(&self, alpha: T, kind: SeriesKind) -> Result<Self> {
        Ok(WeeklySeries::new(self.start, des_filter(&self.values, alpha)?, kind))
    }

    /// Min-max normalized copy; the flag is set for a constant series.
    pub fn normalized(&self) -> Result<(Self, bool)> {
        let (values, degenerate) = minmax_normalize(&self.values)?;
        Ok((WeeklySeries::new(self.start, values, SeriesKind::Normalized), degenerate))
    }
}

/// Filter coefficients. `1` disables a pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub alpha_interest: f64,
    pub alpha_valuation_raw: f64,
    pub alpha_valuation_weekly: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            alpha_interest: 0.2,
            alpha_valuation_raw: 0.99,
            alpha_valuation_weekly: 0.9,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        for a in [self.alpha_interest, self.alpha_valuation_raw, self.alpha_valuation_weekly] {
            check_alpha(a)?;
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(PreprocessError::AlphaOutOfRange(alpha))
    }
}

/// Two cascaded exponential smoothing passes; the second pass is returned.
///
/// `s1[t] = a x[t] + (1 - a) s1[t-1]`, `s2[t] = a s1[t] + (1 - a) s2[t-1]`,
/// both seeded with the first input value.
pub fn des_filter<T: Scalar>(values: &[T], alpha: T) -> Result<Vec<T>> {
    check_alpha(alpha.as_f64())?;
    let Some(&first) = values.first() else {
        return Err(PreprocessError::EmptySeries);
    };
    let keep = T::one() - alpha;
    let mut s1 = first;
    let mut s2 = first;
    let mut out = Vec::with_capacity(values.len());
    out.push(s2);
    for &x in &values[1..] {
        s1 = alpha * x + keep * s1;
        s2 = alpha * s1 + keep * s2;
        out.push(s2);
    }
    Ok(out)
}

/// `(x - min) / (max - min)`. A constant series maps to all `0.5` and the
/// returned flag is set.
pub fn minmax_normalize<T: Scalar>(values: &[T]) -> Result<(Vec<T>, bool)> {
    if values.is_empty() {
        return Err(PreprocessError::EmptySeries);
    }
    let (lo, hi) = values
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range <= T::zero() {
        return Ok((vec![T::lit(0.5); values.len()], true));
    }
    Ok((values.iter().map(|&v| ((v - lo) / range).min(T::one())).collect(), false))
}

/// Per-company record of how windows were merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StitchReport {
    /// Scale applied to each window, in window order (the first is 1).
    pub scale_factors: Vec<f64>,
    /// Global divisor applied after concatenation so that the maximum is 100.
    pub renormalization_divisor: f64,
    pub warnings: Vec<String>,
}

/// Merges overlapping windows into one series whose global maximum is 100.
///
/// Each later window is rescaled by the ratio of the earlier (already
/// rescaled) series' mean to its own mean over the shared weeks on which both
/// are positive. Shared weeks keep the earlier values.
pub fn stitch_windows(windows: &[GtWindow]) -> Result<(WeeklySeries<f64>, StitchReport)> {
    let first = windows.first().ok_or(PreprocessError::NoWindows)?;
    let first_week = first.first_week().ok_or(PreprocessError::EmptySeries)?;
    let start = week_of(first_week);
    let mut values: Vec<f64> = first.points.iter().map(|p| p.value).collect();
    let mut report = StitchReport {
        scale_factors: vec![1.0],
        ..StitchReport::default()
    };
    let mut prev_start = start;
    let mut prev_index = first.index;

    for w in &windows[1..] {
        let w_week = w.first_week().ok_or(PreprocessError::EmptySeries)?;
        let w_start = week_of(w_week);
        if w_start < prev_start {
            return Err(PreprocessError::WindowsUnordered { index: w.index });
        }
        let cur_end = start + values.len() as i64 - 1;
        let w_end = w_start + w.points.len() as i64 - 1;
        let overlap = (cur_end.min(w_end) - w_start + 1).max(0) as usize;
        if overlap < MIN_STITCH_OVERLAP {
            return Err(PreprocessError::InsufficientStitchOverlap {
                earlier: prev_index,
                later: w.index,
                overlap,
            });
        }
        let (mut earlier, mut later) = (Vec::new(), Vec::new());
        for k in 0..overlap {
            let a = values[(w_start - start) as usize + k];
            let b = w.points[k].value;
            if a > 0.0 && b > 0.0 {
                earlier.push(a);
                later.push(b);
            }
        }
        let scale = match (mean(&earlier), mean(&later)) {
            (Some(a), Some(b)) => a / b,
            _ => {
                report.warnings.push(format!(
                    "windows {prev_index} and {}: overlap is zero on one side, scale 1 used",
                    w.index
                ));
                1.0
            }
        };
        report.scale_factors.push(scale);
        values.extend(w.points[overlap..].iter().map(|p| p.value * scale));
        prev_start = w_start;
        prev_index = w.index;
    }

    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        let divisor = max / 100.0;
        for v in values.iter_mut() {
            *v = if *v == max { 100.0 } else { *v / divisor };
        }
        report.renormalization_divisor = divisor;
    } else {
        report.renormalization_divisor = 1.0;
        report.warnings.push("stitched series is identically zero".to_string());
    }
    Ok((WeeklySeries::new(start, values, SeriesKind::StitchedInterest), report))
}

/// Weekly valuation series: rounds are smoothed in date order with
/// `alpha_valuation_raw`, linearly interpolated onto the weekly grid between
/// the first and last round week, then smoothed with `alpha_valuation_weekly`.
///
/// Several rounds inside one week collapse to the latest of them.
pub fn interpolate_valuation(series: &ValuationSeries, filter: &FilterConfig) -> Result<WeeklySeries<f64>> {
    filter.validate()?;
    if series.rounds.len() < 2 {
        return Err(PreprocessError::TooFewRounds(series.rounds.len()));
    }
    let raw: Vec<f64> = series.rounds.iter().map(|r| r.valuation).collect();
    let smoothed = des_filter(&raw, filter.alpha_valuation_raw)?;
    let mut knots: Vec<(WeekIndex, f64)> = Vec::with_capacity(raw.len());
    for (r, v) in series.rounds.iter().zip(smoothed) {
        let w = week_of(r.date);
        match knots.last_mut() {
            Some(last) if last.0 == w => last.1 = v,
            _ => knots.push((w, v)),
        }
    }
    if knots.len() < 2 {
        return Err(PreprocessError::TooFewRounds(knots.len()));
    }
    let weekly = interpolate_knots(&knots);
    let filtered = des_filter(&weekly, filter.alpha_valuation_weekly)?;
    Ok(WeeklySeries::new(knots[0].0, filtered, SeriesKind::InterpolatedValuation))
}

/// Linear interpolation through `(week, value)` knots with increasing weeks.
pub fn interpolate_knots<T: Scalar>(knots: &[(WeekIndex, T)]) -> Vec<T> {
    let mut out = Vec::new();
    if let Some(&(_, v0)) = knots.first() {
        out.push(v0);
    }
    for pair in knots.windows(2) {
        let (wa, va) = pair[0];
        let (wb, vb) = pair[1];
        let span = T::from_i64(wb - wa).expect("week span");
        for step in 1..=(wb - wa) {
            if step == wb - wa {
                out.push(vb);
            } else {
                let t = T::from_i64(step).expect("week step") / span;
                out.push(va + (vb - va) * t);
            }
        }
    }
    out
}

/// Filtered interest and weekly valuation for one company, ready for
/// correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPair {
    pub interest: WeeklySeries<f64>,
    pub valuation: WeeklySeries<f64>,
    pub stitch: StitchReport,
    /// Valuation weeks dropped because they fall outside the interest span.
    pub clipped_weeks: usize,
}

/// Stitches and filters the interest windows, interpolates the valuation and
/// clips it to the interest span.
pub fn prepare_pair(windows: &[GtWindow], valuation: &ValuationSeries, filter: &FilterConfig) -> Result<PreparedPair> {
    filter.validate()?;
    let (stitched, stitch) = stitch_windows(windows)?;
    let interest = stitched.filtered(filter.alpha_interest, SeriesKind::FilteredInterest)?;
    let weekly = interpolate_valuation(valuation, filter)?;
    let clipped = weekly
        .clip(interest.start, interest.end())
        .ok_or(PreprocessError::InsufficientOverlap(0))?;
    if clipped.len() < MIN_ALIGNED_WEEKS {
        return Err(PreprocessError::InsufficientOverlap(clipped.len()));
    }
    Ok(PreparedPair {
        clipped_weeks: weekly.len() - clipped.len(),
        interest,
        valuation: clipped,
        stitch,
    })
}

/// Interest and valuation values paired week by week, both min-max
/// normalized over the pairing span.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair<T = f64> {
    pub interest: WeeklySeries<T>,
    pub valuation: WeeklySeries<T>,
    pub lag: i64,
    pub n: usize,
}

/// Raw (unnormalized) slices paired after shifting `valuation` by `lag`
/// weeks. The shifted valuation span must lie inside the interest span.
pub fn aligned_slices<'a, T: Scalar>(
    interest: &'a WeeklySeries<T>,
    valuation: &'a WeeklySeries<T>,
    lag: i64,
) -> Result<(&'a [T], &'a [T])> {
    if valuation.is_empty() || interest.is_empty() {
        return Err(PreprocessError::EmptySeries);
    }
    let start = valuation.start + lag;
    let end = valuation.end() + lag;
    if start < interest.start || end > interest.end() {
        return Err(PreprocessError::ShiftOutsideInterest {
            lag,
            start,
            end,
            interest_start: interest.start,
            interest_end: interest.end(),
        });
    }
    let n = valuation.len();
    if n < MIN_ALIGNED_WEEKS {
        return Err(PreprocessError::InsufficientOverlap(n));
    }
    let offset = (start - interest.start) as usize;
    Ok((&interest.values[offset..offset + n], &valuation.values))
}

/// Pairs the series after moving the valuation by `lag` weeks (negative =
/// earlier in time) and normalizes both sides over the paired span.
pub fn align<T: Scalar>(interest: &WeeklySeries<T>, valuation: &WeeklySeries<T>, lag: i64) -> Result<AlignedPair<T>> {
    let (i, v) = aligned_slices(interest, valuation, lag)?;
    let start = valuation.start + lag;
    let (i_norm, _) = minmax_normalize(i)?;
    let (v_norm, _) = minmax_normalize(v)?;
    Ok(AlignedPair {
        interest: WeeklySeries::new(start, i_norm, SeriesKind::Normalized),
        valuation: WeeklySeries::new(start, v_norm, SeriesKind::Normalized),
        lag,
        n: i.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{GtPoint, ValuationRound};
    use chrono::Duration;
    use proptest::prelude::*;

    fn window(index: u32, start: NaiveDate, values: &[f64]) -> GtWindow {
        let points = values
            .iter()
            .enumerate()
            .map(|(k, &v)| GtPoint {
                week: start + Duration::weeks(k as i64),
                value: v,
            })
            .collect();
        GtWindow::new("c", index, points)
    }

    fn sunday(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn des_cascade_hand_values() {
        assert_eq!(des_filter(&[0.0, 0.0, 100.0, 100.0], 0.5).unwrap(), vec![0.0, 0.0, 25.0, 50.0]);
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(des_filter(&x, 1.0).unwrap(), x.to_vec());
        assert_eq!(des_filter(&[7.0f32; 6], 0.3).unwrap(), vec![7.0f32; 6]);
        assert_eq!(des_filter(&x, 0.0), Err(PreprocessError::AlphaOutOfRange(0.0)));
        assert_eq!(des_filter(&x, 1.5), Err(PreprocessError::AlphaOutOfRange(1.5)));
        assert_eq!(des_filter::<f64>(&[], 0.5), Err(PreprocessError::EmptySeries));
    }

    #[test]
    fn des_approaches_identity_as_alpha_grows() {
        let x: Vec<f64> = (0..80).map(|k| ((k as f64) * 0.37).sin() * 40.0 + k as f64).collect();
        let dev = |a: f64| {
            des_filter(&x, a)
                .unwrap()
                .iter()
                .zip(&x)
                .map(|(y, x)| (y - x).abs())
                .fold(0.0, f64::max)
        };
        let devs: Vec<f64> = [0.5, 0.9, 0.99, 1.0].iter().map(|&a| dev(a)).collect();
        assert!(devs.windows(2).all(|p| p[1] < p[0]), "{devs:?}");
        assert_eq!(devs[3], 0.0);
    }

    #[test]
    fn minmax_cases() {
        assert_eq!(minmax_normalize(&[2.0, 4.0, 6.0]).unwrap(), (vec![0.0, 0.5, 1.0], false));
        let n = vec![0.0, 0.25, 1.0, 0.5];
        assert_eq!(minmax_normalize(&n).unwrap().0, n);
        assert_eq!(minmax_normalize(&[3.0; 4]).unwrap(), (vec![0.5; 4], true));
    }

    #[test]
    fn stitch_single_window_renormalizes() {
        let w = window(0, sunday(2010, 1, 3), &[10.0, 20.0, 40.0, 50.0]);
        let (s, r) = stitch_windows(&[w]).unwrap();
        assert_eq!(s.values, vec![20.0, 40.0, 80.0, 100.0]);
        assert_eq!(r.scale_factors, vec![1.0]);
        assert_eq!(s.kind, SeriesKind::StitchedInterest);
    }

    #[test]
    fn stitch_uses_overlap_mean_ratio() {
        // A's last four weeks average 85; B's first four average 42.5.
        let a = window(0, sunday(2010, 1, 3), &[10.0, 100.0, 80.0, 90.0, 85.0, 85.0]);
        let b = window(1, sunday(2010, 1, 17), &[40.0, 45.0, 42.5, 42.5, 90.0]);
        let (s, r) = stitch_windows(&[a, b]).unwrap();
        assert_eq!(r.scale_factors, vec![1.0, 2.0]);
        // Post-stitch maximum 180 -> division by 1.8.
        assert!((r.renormalization_divisor - 1.8).abs() < 1e-12);
        assert_eq!(s.len(), 7);
        assert_eq!(s.values[6], 100.0);
        assert!((s.values[1] - 100.0 / 1.8).abs() < 1e-9);
    }

    #[test]
    fn stitch_rejects_short_overlap_and_disorder() {
        let a = window(0, sunday(2010, 1, 3), &[1.0; 10]);
        let b = window(1, sunday(2010, 2, 21), &[1.0; 10]); // 3 shared weeks
        assert!(matches!(
            stitch_windows(&[a.clone(), b.clone()]),
            Err(PreprocessError::InsufficientStitchOverlap { overlap: 3, .. })
        ));
        assert!(matches!(stitch_windows(&[b, a]), Err(PreprocessError::WindowsUnordered { .. })));
        assert_eq!(stitch_windows(&[]).unwrap_err(), PreprocessError::NoWindows);
    }

    #[test]
    fn stitch_zero_overlap_side_warns() {
        let a = window(0, sunday(2010, 1, 3), &[100.0, 0.0, 0.0, 0.0, 0.0]);
        let b = window(1, sunday(2010, 1, 10), &[5.0, 6.0, 7.0, 8.0, 100.0]);
        let (_, r) = stitch_windows(&[a, b]).unwrap();
        assert_eq!(r.scale_factors[1], 1.0);
        assert_eq!(r.warnings.len(), 1);
    }

    fn rounds(points: &[(NaiveDate, f64)]) -> ValuationSeries {
        ValuationSeries::from_rounds(
            "c",
            points
                .iter()
                .map(|&(date, valuation)| ValuationRound {
                    company_id: "c".into(),
                    date,
                    valuation,
                })
                .collect(),
        )
        .unwrap()
    }

    fn no_filter() -> FilterConfig {
        FilterConfig {
            alpha_interest: 1.0,
            alpha_valuation_raw: 1.0,
            alpha_valuation_weekly: 1.0,
        }
    }

    #[test]
    fn interpolation_without_filtering() {
        let d0 = sunday(2010, 1, 3);
        let s = rounds(&[(d0, 100.0), (d0 + Duration::weeks(4), 300.0)]);
        let w = interpolate_valuation(&s, &no_filter()).unwrap();
        assert_eq!(w.values, vec![100.0, 150.0, 200.0, 250.0, 300.0]);
        assert_eq!(w.start, week_of(d0));
        let flat = rounds(&[(d0, 100.0), (d0 + Duration::weeks(9), 100.0)]);
        assert!(interpolate_valuation(&flat, &FilterConfig::default())
            .unwrap()
            .values
            .iter()
            .all(|&v| (v - 100.0).abs() < 1e-9));
        let one = rounds(&[(d0, 1.0)]);
        assert_eq!(interpolate_valuation(&one, &no_filter()), Err(PreprocessError::TooFewRounds(1)));
    }

    #[test]
    fn raw_round_filter_barely_moves_interior_round() {
        // Direct evaluation of the two passes at index 1 with a = 0.99:
        // s1 = .99 x1 + .01 x0, s2 = .99 s1 + .01 x0 = .9801 x1 + .0199 x0,
        // i.e. the round moves by 1.99% of the preceding gap.
        let d0 = sunday(2010, 1, 3);
        let (x0, x1, x2) = (100.0, 500.0, 900.0);
        let s = rounds(&[(d0, x0), (d0 + Duration::weeks(10), x1), (d0 + Duration::weeks(20), x2)]);
        let cfg = FilterConfig {
            alpha_valuation_raw: 0.99,
            ..no_filter()
        };
        let w = interpolate_valuation(&s, &cfg).unwrap();
        let shift = (x1 - w.values[10]) / (x1 - x0);
        assert!((shift - 0.0199).abs() < 1e-12, "{shift}");
        assert!(shift < 0.02);
    }

    #[test]
    fn align_examples() {
        let interest = WeeklySeries::new(0, (0..400).map(|k| k as f64).collect(), SeriesKind::FilteredInterest);
        let valuation = WeeklySeries::new(120, (120..=380).map(|k| (k * 2) as f64).collect(), SeriesKind::InterpolatedValuation);
        let p = align(&interest, &valuation, 0).unwrap();
        assert_eq!(p.n, 261);
        let p = align(&interest, &valuation, -120).unwrap();
        assert_eq!(p.n, 261);
        assert_eq!(p.interest.start, 0);
        assert!(matches!(
            align(&interest, &valuation, -130),
            Err(PreprocessError::ShiftOutsideInterest { start: -10, .. })
        ));
        let short = WeeklySeries::new(10, vec![1.0; 9], SeriesKind::InterpolatedValuation);
        assert_eq!(align(&interest, &short, 0).unwrap_err(), PreprocessError::InsufficientOverlap(9));
    }

    proptest! {
        #[test]
        fn des_output_stays_within_input_range(
            xs in prop::collection::vec(-1e3f64..1e3, 1..60),
            alpha in 0.01f64..=1.0,
        ) {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for y in des_filter(&xs, alpha).unwrap() {
                prop_assert!(y >= lo - 1e-9 && y <= hi + 1e-9);
            }
        }

        #[test]
        fn minmax_preserves_order(xs in prop::collection::vec(-1e3f64..1e3, 2..40)) {
            let (ys, degenerate) = minmax_normalize(&xs).unwrap();
            prop_assume!(!degenerate);
            for i in 0..xs.len() {
                prop_assert!((0.0..=1.0).contains(&ys[i]));
                for j in 0..xs.len() {
                    prop_assert_eq!(xs[i].partial_cmp(&xs[j]), ys[i].partial_cmp(&ys[j]));
                }
            }
        }

        #[test]
        fn stitch_ignores_window_prescaling(
            base in prop::collection::vec(1.0f64..100.0, 30..60),
            which in 0usize..3,
            factor in 0.05f64..20.0,
        ) {
            // Three windows of 20 weeks stepping by 15 weeks.
            let start = sunday(2010, 1, 3);
            let n = base.len();
            let mk = |scale_idx: Option<(usize, f64)>| -> Vec<GtWindow> {
                (0..3usize)
                    .filter(|k| k * 15 < n)
                    .map(|k| {
                        let lo = k * 15;
                        let hi = (lo + 20).min(n);
                        let f = match scale_idx { Some((i, c)) if i == k => c, _ => 1.0 };
                        let vals: Vec<f64> = base[lo..hi].iter().map(|v| v * f).collect();
                        window(k as u32, start + Duration::weeks(lo as i64), &vals)
                    })
                    .collect()
            };
            let plain = mk(None);
            prop_assume!(which < plain.len() && plain.iter().skip(1).all(|w| w.points.len() >= MIN_STITCH_OVERLAP));
            let (a, _) = stitch_windows(&plain).unwrap();
            let (b, _) = stitch_windows(&mk(Some((which, factor)))).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-9 * 100.0, "{} vs {}", x, y);
            }
        }

        #[test]
        fn unfiltered_interpolation_hits_rounds(
            gaps in prop::collection::vec(1i64..20, 1..8),
            vals in prop::collection::vec(1.0f64..5000.0, 9),
        ) {
            let d0 = sunday(2012, 1, 1);
            let mut week = 0;
            let mut pts = vec![(d0, vals[0])];
            for (k, g) in gaps.iter().enumerate() {
                week += g;
                pts.push((d0 + Duration::weeks(week), vals[k + 1]));
            }
            let s = rounds(&pts);
            let w = interpolate_valuation(&s, &no_filter()).unwrap();
            for (date, v) in pts {
                prop_assert_eq!(w.get(week_of(date)), Some(v));
            }
        }
    }
}
