//! Search-interest data-quality index.
//!
//! Four sub-scores (brand/category, systematic noise, fast noise, related
//! queries) are combined in two steps; a total of at least 0.6 admits the
//! company into the analysis.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::week_of;
use crate::ingest::{CategoryGroup, GtMetadata};
use crate::preprocess::WeeklySeries;

/// Weekly points considered "the first year".
pub const FIRST_YEAR_WEEKS: usize = 52;

pub const GOOD_THRESHOLD: f64 = 0.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("no signal: interest series is empty or identically zero")]
    NoSignal,
    #[error("no metadata variants supplied")]
    NoMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Good,
    Bad,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Good => "good",
            Verdict::Bad => "bad",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubScores {
    pub brand_category: f64,
    pub systematic_noise: f64,
    pub fast_noise: f64,
    pub related_queries: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub brand_category_points: f64,
    pub systematic_noise_points: f64,
    pub fast_noise_points: f64,
    pub related_query_points: f64,
    pub total: f64,
    pub verdict: Verdict,
    pub ratio_of_means: f64,
    pub overall_mean: f64,
    pub warnings: Vec<String>,
}

pub fn score_brand_category(unique: bool, group: CategoryGroup) -> f64 {
    match (unique, group) {
        (true, CategoryGroup::A) => 1.0,
        (false, CategoryGroup::A) => 0.7,
        (true, CategoryGroup::B) => 0.3,
        (false, CategoryGroup::B) => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystematicNoise {
    pub points: f64,
    pub ratio: f64,
    /// Set when fewer than 52 weeks were available for the first year.
    pub warning: Option<String>,
}

/// Ratio of the first-year mean (52 weeks from the founding week) to the
/// overall mean, and its points.
pub fn score_systematic_noise(series: &WeeklySeries<f64>, founded: NaiveDate) -> Result<SystematicNoise, QualityError> {
    let values = &series.values;
    let overall = crate::scalar::mean(values).ok_or(QualityError::NoSignal)?;
    if overall <= 0.0 {
        return Err(QualityError::NoSignal);
    }
    let from = (week_of(founded) - series.start).clamp(0, values.len() as i64) as usize;
    let mut first_year = &values[from..];
    if first_year.is_empty() {
        first_year = values;
    }
    let mut warning = None;
    if first_year.len() < FIRST_YEAR_WEEKS {
        warning = Some(format!(
            "series covers {} weeks from founding; first-year mean taken over the available prefix",
            first_year.len()
        ));
    } else {
        first_year = &first_year[..FIRST_YEAR_WEEKS];
    }
    let ratio = crate::scalar::mean(first_year).unwrap_or(0.0) / overall;
    let points = if ratio <= 0.5 {
        1.0
    } else if ratio <= 0.85 {
        0.5
    } else {
        0.0
    };
    Ok(SystematicNoise { points, ratio, warning })
}

/// Points for the overall mean level, with the mean itself. Exactly 4 scores 1.
pub fn score_fast_noise(values: &[f64]) -> (f64, f64) {
    let mean = crate::scalar::mean(values).unwrap_or(0.0);
    let points = if mean >= 4.0 {
        1.0
    } else if mean >= 2.0 {
        0.5
    } else {
        0.0
    };
    (points, mean)
}

pub fn score_related_queries(count: u32) -> f64 {
    if count >= 10 {
        1.0
    } else if count >= 5 {
        0.5
    } else {
        0.0
    }
}

/// Two-step average: brand, fast noise and related queries are averaged,
/// then averaged with the systematic-noise points.
pub fn total_points(s: &SubScores) -> f64 {
    ((s.brand_category + s.fast_noise + s.related_queries) / 3.0 + s.systematic_noise) / 2.0
}

pub fn verdict_for(total: f64) -> Verdict {
    // Grid totals are sums of thirds; absorb representation error at the cut.
    if total >= GOOD_THRESHOLD - 1e-12 {
        Verdict::Good
    } else {
        Verdict::Bad
    }
}

pub fn total_quality(s: SubScores, ratio_of_means: f64, overall_mean: f64) -> QualityScore {
    let total = total_points(&s);
    QualityScore {
        brand_category_points: s.brand_category,
        systematic_noise_points: s.systematic_noise,
        fast_noise_points: s.fast_noise,
        related_query_points: s.related_queries,
        total,
        verdict: verdict_for(total),
        ratio_of_means,
        overall_mean,
        warnings: Vec::new(),
    }
}

/// Scores a stitched interest series against every metadata variant and
/// keeps the best total (earliest variant on ties).
pub fn score_company(
    series: &WeeklySeries<f64>,
    founded: NaiveDate,
    variants: &[GtMetadata],
) -> Result<QualityScore, QualityError> {
    if variants.is_empty() {
        return Err(QualityError::NoMetadata);
    }
    let sys = score_systematic_noise(series, founded)?;
    let (fast, overall_mean) = score_fast_noise(&series.values);
    let mut best: Option<QualityScore> = None;
    for m in variants {
        let score = total_quality(
            SubScores {
                brand_category: score_brand_category(m.brand_unique, m.category_group),
                systematic_noise: sys.points,
                fast_noise: fast,
                related_queries: score_related_queries(m.related_query_count),
            },
            sys.ratio,
            overall_mean,
        );
        if best.as_ref().is_none_or(|b| score.total > b.total) {
            best = Some(score);
        }
    }
    let mut best = best.expect("nonempty variants");
    best.warnings.extend(sys.warning);
    Ok(best)
}
