//! Corpus-level roll-ups: growth rate, descriptive statistics per group and
//! per dimension pole, industry tables and the tau histogram.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlate::{CorrelationResult, Group};
use crate::ingest::{CompanyRecord, ValuationSeries};
use crate::scalar::{mean, percentile_sorted};

pub const DAYS_PER_YEAR: f64 = 365.25;
pub const UNTAGGED: &str = "(untagged)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortfolioError {
    #[error("company {0} has no valuation rounds")]
    NoRounds(String),
    #[error("company {company}: maximum valuation dated {date_of_max}, before founding {founded}")]
    MaxBeforeFounding {
        company: String,
        date_of_max: NaiveDate,
        founded: NaiveDate,
    },
    #[error("company {0}: degenerate growth interval (maximum reached less than a week after founding)")]
    DegenerateInterval(String),
    #[error("no results to summarize")]
    Empty,
    #[error("bin width {0} must be positive")]
    BinWidth(f64),
}

/// Market capitalization growth rate, millions of USD per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McapGr {
    pub company_id: String,
    pub max_valuation: f64,
    pub date_of_max: NaiveDate,
    pub years_to_max: f64,
    pub rate: f64,
}

/// Maximum valuation divided by the years from founding to the earliest round
/// reaching it.
pub fn mcap_gr(series: &ValuationSeries, founded: NaiveDate) -> Result<McapGr, PortfolioError> {
    let mut best: Option<(f64, NaiveDate)> = None;
    for r in &series.rounds {
        match best {
            Some((v, d)) if v > r.valuation || (v == r.valuation && d <= r.date) => {}
            _ => best = Some((r.valuation, r.date)),
        }
    }
    let (max_valuation, date_of_max) = best.ok_or_else(|| PortfolioError::NoRounds(series.company_id.clone()))?;
    let days = (date_of_max - founded).num_days();
    if days < 0 {
        return Err(PortfolioError::MaxBeforeFounding {
            company: series.company_id.clone(),
            date_of_max,
            founded,
        });
    }
    if days < 7 {
        return Err(PortfolioError::DegenerateInterval(series.company_id.clone()));
    }
    let years_to_max = days as f64 / DAYS_PER_YEAR;
    Ok(McapGr {
        company_id: series.company_id.clone(),
        max_valuation,
        date_of_max,
        years_to_max,
        rate: max_valuation / years_to_max,
    })
}

/// The three binary features used for poles and for set-theoretic analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFeatures {
    pub is_b2c: bool,
    pub is_platform: bool,
    pub is_unicorn: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    Success,
    CustomerType,
    ProductType,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Success, Dimension::CustomerType, Dimension::ProductType];

    /// Pole labels as (positive pole, negative pole).
    pub fn poles(&self) -> (&'static str, &'static str) {
        match self {
            Dimension::Success => ("unicorn", "non-unicorn"),
            Dimension::CustomerType => ("b2c", "b2b"),
            Dimension::ProductType => ("platform", "traditional product"),
        }
    }

    pub fn holds(&self, f: &CaseFeatures) -> bool {
        match self {
            Dimension::Success => f.is_unicorn,
            Dimension::CustomerType => f.is_b2c,
            Dimension::ProductType => f.is_platform,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Success => "success",
            Dimension::CustomerType => "customer type",
            Dimension::ProductType => "product type",
        })
    }
}

/// Row of a group statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupRow {
    Group(Group),
    /// G2 cases with lag > 0.
    PositiveShift,
    /// G2 cases with lag < 0.
    NegativeShift,
    Total,
}

impl fmt::Display for GroupRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupRow::Group(g) => write!(f, "{g}"),
            GroupRow::PositiveShift => f.write_str("G2+"),
            GroupRow::NegativeShift => f.write_str("G2-"),
            GroupRow::Total => f.write_str("total"),
        }
    }
}

/// Mean and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        let mean = mean(values)?;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Summary {
            mean,
            p25: percentile_sorted(&sorted, 0.25),
            median: percentile_sorted(&sorted, 0.5),
            p75: percentile_sorted(&sorted, 0.75),
        })
    }

    /// Percent deviation of each statistic from `base`.
    pub fn deviation_pct(&self, base: &Summary) -> Summary {
        let dev = |a: f64, b: f64| if b == 0.0 { f64::NAN } else { (a - b) / b * 100.0 };
        Summary {
            mean: dev(self.mean, base.mean),
            p25: dev(self.p25, base.p25),
            median: dev(self.median, base.median),
            p75: dev(self.p75, base.p75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub dimension: Option<Dimension>,
    pub pole: Option<String>,
    pub row: GroupRow,
    pub count: usize,
    pub share_of_sample: f64,
    pub share_of_dimension: f64,
    pub share_of_group: f64,
    pub tau: Option<Summary>,
    /// Lag statistics, populated on G2 rows only.
    pub lag: Option<Summary>,
    /// Deviation (%) of the tau statistics from the same row over the whole
    /// sample; dimension tables only.
    pub tau_deviation_pct: Option<Summary>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn row_members<'a>(results: &[&'a CorrelationResult], row: GroupRow) -> Vec<&'a CorrelationResult> {
    results
        .iter()
        .copied()
        .filter(|r| match row {
            GroupRow::Group(g) => r.group == g,
            GroupRow::PositiveShift => r.group == Group::G2 && r.lag_weeks > 0,
            GroupRow::NegativeShift => r.group == Group::G2 && r.lag_weeks < 0,
            GroupRow::Total => true,
        })
        .collect()
}

fn is_lag_row(row: GroupRow) -> bool {
    matches!(
        row,
        GroupRow::Group(Group::G2) | GroupRow::PositiveShift | GroupRow::NegativeShift
    )
}

/// Group table over the whole sample, or per pole of `dimension`.
///
/// Without a dimension the rows are G1, G2, G2+, G2-, G3 and total. With a
/// dimension each pole contributes G1, G2, G3 and a pole total. Shares are of
/// the sample, of the pole (or sample), and of the corpus-wide group.
pub fn group_stats(
    results: &[CorrelationResult],
    features: &BTreeMap<String, CaseFeatures>,
    dimension: Option<Dimension>,
) -> Result<Vec<GroupStats>, PortfolioError> {
    if results.is_empty() {
        return Err(PortfolioError::Empty);
    }
    let all: Vec<&CorrelationResult> = results.iter().collect();
    let n = all.len();
    let group_size = |row: GroupRow| match row {
        GroupRow::Group(g) => all.iter().filter(|r| r.group == g).count(),
        GroupRow::PositiveShift | GroupRow::NegativeShift => all.iter().filter(|r| r.group == Group::G2).count(),
        GroupRow::Total => n,
    };
    let summarize = |members: &[&CorrelationResult], row: GroupRow| {
        let taus: Vec<f64> = members.iter().map(|r| r.tau_best).collect();
        let lags: Vec<f64> = members.iter().map(|r| r.lag_weeks as f64).collect();
        (Summary::of(&taus), if is_lag_row(row) { Summary::of(&lags) } else { None })
    };

    let Some(dim) = dimension else {
        let rows = [
            GroupRow::Group(Group::G1),
            GroupRow::Group(Group::G2),
            GroupRow::PositiveShift,
            GroupRow::NegativeShift,
            GroupRow::Group(Group::G3),
            GroupRow::Total,
        ];
        return Ok(rows
            .into_iter()
            .map(|row| {
                let members = row_members(&all, row);
                let (tau, lag) = summarize(&members, row);
                GroupStats {
                    dimension: None,
                    pole: None,
                    row,
                    count: members.len(),
                    share_of_sample: ratio(members.len(), n),
                    share_of_dimension: ratio(members.len(), n),
                    share_of_group: ratio(members.len(), group_size(row)),
                    tau,
                    lag,
                    tau_deviation_pct: None,
                }
            })
            .collect());
    };

    let (pos_label, neg_label) = dim.poles();
    let mut out = Vec::new();
    for (label, want) in [(pos_label, true), (neg_label, false)] {
        let pole: Vec<&CorrelationResult> = all
            .iter()
            .copied()
            .filter(|r| features.get(&r.company_id).is_some_and(|f| dim.holds(f) == want))
            .collect();
        for row in [
            GroupRow::Group(Group::G1),
            GroupRow::Group(Group::G2),
            GroupRow::Group(Group::G3),
            GroupRow::Total,
        ] {
            let members = row_members(&pole, row);
            let (tau, lag) = summarize(&members, row);
            let (sample_tau, _) = summarize(&row_members(&all, row), row);
            let tau_deviation_pct = match (tau, sample_tau) {
                (Some(t), Some(s)) => Some(t.deviation_pct(&s)),
                _ => None,
            };
            out.push(GroupStats {
                dimension: Some(dim),
                pole: Some(label.to_string()),
                row,
                count: members.len(),
                share_of_sample: ratio(members.len(), n),
                share_of_dimension: ratio(members.len(), pole.len()),
                share_of_group: ratio(members.len(), group_size(row)),
                tau,
                lag,
                tau_deviation_pct,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagLevel {
    Sector,
    Industry,
    SubIndustry,
}

impl TagLevel {
    pub fn tag<'a>(&self, c: &'a CompanyRecord) -> &'a str {
        match self {
            TagLevel::Sector => &c.sector,
            TagLevel::Industry => &c.industry,
            TagLevel::SubIndustry => &c.sub_industry,
        }
    }
}

impl fmt::Display for TagLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TagLevel::Sector => "sector",
            TagLevel::Industry => "industry",
            TagLevel::SubIndustry => "sub_industry",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryRow {
    pub level: TagLevel,
    pub tag: String,
    /// G1 and G2 cases.
    pub high_correlation: usize,
    pub total: usize,
    pub share: f64,
}

/// High-correlation (G1 or G2) counts per tag, largest tags first.
pub fn industry_rollup(
    results: &[CorrelationResult],
    companies: &BTreeMap<String, CompanyRecord>,
    level: TagLevel,
) -> Vec<IndustryRow> {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in results {
        let tag = companies
            .get(&r.company_id)
            .map(|c| level.tag(c).trim())
            .filter(|t| !t.is_empty())
            .unwrap_or(UNTAGGED);
        let e = counts.entry(tag.to_string()).or_default();
        e.1 += 1;
        if matches!(r.group, Group::G1 | Group::G2) {
            e.0 += 1;
        }
    }
    let mut rows: Vec<IndustryRow> = counts
        .into_iter()
        .map(|(tag, (high, total))| IndustryRow {
            level,
            tag,
            high_correlation: high,
            total,
            share: ratio(high, total),
        })
        .collect();
    rows.sort_by(|a, b| b.total.cmp(&a.total).then_with(|| a.tag.cmp(&b.tag)));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// Lower edge of each bin; bins are `[lo, lo + width)`, the last one
    /// closed at 1.
    pub lower_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn mid(&self, i: usize) -> f64 {
        (self.lower_edges[i] + (self.lower_edges[i] + self.bin_width).min(1.0)) / 2.0
    }

    /// Mean of bin midpoints weighted by counts.
    pub fn approx_mean(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let s: f64 = self.counts.iter().enumerate().map(|(i, &c)| c as f64 * self.mid(i)).sum();
        Some(s / total as f64)
    }

    /// Median by linear interpolation inside the bin holding the middle case.
    pub fn approx_median(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let half = total as f64 / 2.0;
        let mut acc = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 && acc + c as f64 >= half {
                let frac = (half - acc) / c as f64;
                return Some(self.lower_edges[i] + frac * self.bin_width);
            }
            acc += c as f64;
        }
        None
    }
}

/// Bins covering `[-1, 1]`.
pub fn tau_histogram(taus: &[f64], bin_width: f64) -> Result<Histogram, PortfolioError> {
    if !(bin_width > 0.0) {
        return Err(PortfolioError::BinWidth(bin_width));
    }
    let bins = (2.0 / bin_width - 1e-9).ceil().max(1.0) as usize;
    let lower_edges: Vec<f64> = (0..bins).map(|i| -1.0 + i as f64 * bin_width).collect();
    let mut counts = vec![0usize; bins];
    for &t in taus {
        let t = t.clamp(-1.0, 1.0);
        let idx = (((t + 1.0) / bin_width) + 1e-9).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    Ok(Histogram {
        bin_width,
        lower_edges,
        counts,
    })
}
