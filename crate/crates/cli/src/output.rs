//! Output files, their CSV row shapes, and the bookkeeping behind the
//! manifest's validity flags.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use trendcap_core::correlate::{CorrelationResult, Group};
use trendcap_core::fsqca::{NecessityRow, Outcome, TruthTableRow};
use trendcap_core::portfolio::{GroupStats, Histogram, IndustryRow, McapGr, Summary};
use trendcap_core::quality::QualityScore;

use crate::pipeline::{Exclusion, Stage};

pub const CORRELATIONS_FILE: &str = "correlations.csv";
pub const QUALITY_FILE: &str = "quality.csv";
pub const EXCLUSIONS_FILE: &str = "exclusions.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SERIES_DIR: &str = "series";
pub const PLOTS_DIR: &str = "plots";
pub const STITCH_REPORT_FILE: &str = "stitch_report.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    /// Path relative to the output directory, `/`-separated.
    pub file: String,
    pub stage: Stage,
    pub valid: bool,
}

/// Writes files under one root and remembers what was written by which stage.
#[derive(Debug)]
pub struct OutputSet {
    root: PathBuf,
    pub records: Vec<OutputRecord>,
}

impl OutputSet {
    pub fn new(root: &Path) -> Result<OutputSet> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutputSet {
            root: root.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write_with<F>(&mut self, stage: Stage, rel: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.root.join(rel);
        let result = (|| -> Result<()> {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            let mut w = BufWriter::new(File::create(&path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        })();
        self.records.push(OutputRecord {
            file: rel.to_string(),
            stage,
            valid: result.is_ok(),
        });
        result.with_context(|| format!("writing {}", path.display()))
    }

    pub fn csv<T, I>(&mut self, stage: Stage, rel: &str, rows: I) -> Result<()>
    where
        T: Serialize,
        I: IntoIterator<Item = T>,
    {
        self.write_with(stage, rel, |w| {
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
            Ok(())
        })
    }

    /// CSV with an explicit header, for tables that may be empty.
    pub fn csv_with_header<T, I>(&mut self, stage: Stage, rel: &str, header: &[&str], rows: I) -> Result<()>
    where
        T: Serialize,
        I: IntoIterator<Item = T>,
    {
        self.write_with(stage, rel, |w| {
            let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            out.write_record(header)?;
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
            Ok(())
        })
    }

    pub fn json<T: Serialize>(&mut self, stage: Stage, rel: &str, value: &T) -> Result<()> {
        self.write_with(stage, rel, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn text(&mut self, stage: Stage, rel: &str, text: &str) -> Result<()> {
        self.write_with(stage, rel, |w| {
            w.write_all(text.as_bytes())?;
            Ok(())
        })
    }

    /// Marks every file written by `stage` invalid.
    pub fn invalidate(&mut self, stage: Stage) {
        for r in self.records.iter_mut().filter(|r| r.stage == stage) {
            r.valid = false;
        }
    }
}

/// Rounds away binary noise from grid values such as histogram edges.
fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub company_id: String,
    pub tau_zero: f64,
    pub tau_best: f64,
    pub lag_weeks: i64,
    pub n: usize,
    pub significant: bool,
    pub threshold: f64,
    pub group: Group,
    pub improvement: f64,
}

pub const CORRELATIONS_HEADER: [&str; 9] = [
    "company_id",
    "tau_zero",
    "tau_best",
    "lag_weeks",
    "n",
    "significant",
    "threshold",
    "group",
    "improvement",
];

impl From<&CorrelationResult> for CorrelationRow {
    fn from(r: &CorrelationResult) -> Self {
        CorrelationRow {
            company_id: r.company_id.clone(),
            tau_zero: r.tau_zero,
            tau_best: r.tau_best,
            lag_weeks: r.lag_weeks,
            n: r.n,
            significant: r.significant,
            threshold: r.significance_threshold,
            group: r.group,
            improvement: r.improvement,
        }
    }
}

impl From<CorrelationRow> for CorrelationResult {
    fn from(r: CorrelationRow) -> Self {
        CorrelationResult {
            company_id: r.company_id,
            tau_zero: r.tau_zero,
            tau_best: r.tau_best,
            lag_weeks: r.lag_weeks,
            n: r.n,
            significant: r.significant,
            significance_threshold: r.threshold,
            group: r.group,
            improvement: r.improvement,
        }
    }
}

pub fn read_correlations(path: &Path) -> Result<Vec<CorrelationResult>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CORRELATIONS_HEADER {
        anyhow::bail!(
            "{}: header mismatch: expected `{}`, found `{}`",
            path.display(),
            CORRELATIONS_HEADER.join(","),
            header.join(",")
        );
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CorrelationRow>().enumerate() {
        let row = row.with_context(|| format!("{}, row {}", path.display(), i + 1))?;
        out.push(row.into());
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct QualityRow<'a> {
    pub company_id: &'a str,
    pub brand_pts: f64,
    pub sys_pts: f64,
    pub fast_pts: f64,
    pub rel_pts: f64,
    pub total: f64,
    pub verdict: String,
    pub ratio_of_means: f64,
    pub overall_mean: f64,
}

impl<'a> QualityRow<'a> {
    pub fn new(company_id: &'a str, s: &QualityScore) -> Self {
        QualityRow {
            company_id,
            brand_pts: s.brand_category_points,
            sys_pts: s.systematic_noise_points,
            fast_pts: s.fast_noise_points,
            rel_pts: s.related_query_points,
            total: s.total,
            verdict: s.verdict.to_string(),
            ratio_of_means: s.ratio_of_means,
            overall_mean: s.overall_mean,
        }
    }
}

pub const EXCLUSIONS_HEADER: [&str; 3] = ["company_id", "stage", "reason"];

#[derive(Debug, Serialize)]
pub struct ExclusionRow<'a> {
    pub company_id: &'a str,
    pub stage: Stage,
    pub reason: &'a str,
}

impl<'a> From<&'a Exclusion> for ExclusionRow<'a> {
    fn from(e: &'a Exclusion) -> Self {
        ExclusionRow {
            company_id: &e.company_id,
            stage: e.stage,
            reason: &e.reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub week: NaiveDate,
    pub interest_norm: f64,
    pub valuation_norm: f64,
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<SeriesRow>, _>>()
        .with_context(|| format!("reading {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct GroupStatsRow {
    pub dimension: String,
    pub pole: String,
    pub row: String,
    pub count: usize,
    pub share_of_sample: f64,
    pub share_of_dimension: f64,
    pub share_of_group: f64,
    pub tau_mean: Option<f64>,
    pub tau_p25: Option<f64>,
    pub tau_median: Option<f64>,
    pub tau_p75: Option<f64>,
    pub lag_mean: Option<f64>,
    pub lag_p25: Option<f64>,
    pub lag_median: Option<f64>,
    pub lag_p75: Option<f64>,
    pub tau_mean_dev_pct: Option<f64>,
    pub tau_p25_dev_pct: Option<f64>,
    pub tau_median_dev_pct: Option<f64>,
    pub tau_p75_dev_pct: Option<f64>,
}

impl From<&GroupStats> for GroupStatsRow {
    fn from(g: &GroupStats) -> Self {
        let parts = |s: Option<Summary>| match s {
            Some(s) => [Some(s.mean), Some(s.p25), Some(s.median), Some(s.p75)],
            None => [None; 4],
        };
        let [tau_mean, tau_p25, tau_median, tau_p75] = parts(g.tau);
        let [lag_mean, lag_p25, lag_median, lag_p75] = parts(g.lag);
        let [tau_mean_dev_pct, tau_p25_dev_pct, tau_median_dev_pct, tau_p75_dev_pct] = parts(g.tau_deviation_pct);
        GroupStatsRow {
            dimension: g.dimension.map(|d| d.to_string()).unwrap_or_else(|| "sample".into()),
            pole: g.pole.clone().unwrap_or_default(),
            row: g.row.to_string(),
            count: g.count,
            share_of_sample: g.share_of_sample,
            share_of_dimension: g.share_of_dimension,
            share_of_group: g.share_of_group,
            tau_mean,
            tau_p25,
            tau_median,
            tau_p75,
            lag_mean,
            lag_p25,
            lag_median,
            lag_p75,
            tau_mean_dev_pct,
            tau_p25_dev_pct,
            tau_median_dev_pct,
            tau_p75_dev_pct,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IndustryCsvRow<'a> {
    pub level: String,
    pub tag: &'a str,
    pub high_correlation: usize,
    pub total: usize,
    pub share: f64,
}

impl<'a> From<&'a IndustryRow> for IndustryCsvRow<'a> {
    fn from(r: &'a IndustryRow) -> Self {
        IndustryCsvRow {
            level: r.level.to_string(),
            tag: &r.tag,
            high_correlation: r.high_correlation,
            total: r.total,
            share: r.share,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct McapRow<'a> {
    pub company_id: &'a str,
    pub group: Group,
    pub max_valuation_musd: f64,
    pub date_of_max: NaiveDate,
    pub years_to_max: f64,
    pub rate_musd_per_year: f64,
}

impl<'a> McapRow<'a> {
    pub fn new(m: &'a McapGr, group: Group) -> Self {
        McapRow {
            company_id: &m.company_id,
            group,
            max_valuation_musd: m.max_valuation,
            date_of_max: m.date_of_max,
            years_to_max: m.years_to_max,
            rate_musd_per_year: m.rate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HistogramRow {
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
}

pub fn histogram_rows(h: &Histogram) -> Vec<HistogramRow> {
    h.lower_edges
        .iter()
        .zip(&h.counts)
        .map(|(&lo, &count)| HistogramRow {
            bin_lower: tidy(lo),
            bin_upper: tidy((lo + h.bin_width).min(1.0)),
            count,
        })
        .collect()
}

pub fn outcome_key(o: Outcome) -> &'static str {
    match o {
        Outcome::High => "high",
        Outcome::Low => "low",
    }
}

#[derive(Debug, Serialize)]
pub struct NecessityCsvRow<'a> {
    pub outcome: &'static str,
    pub condition: &'a str,
    pub consistency: f64,
    pub coverage: Option<f64>,
    pub relevance: Option<f64>,
    pub necessary: bool,
}

impl<'a> From<&'a NecessityRow> for NecessityCsvRow<'a> {
    fn from(r: &'a NecessityRow) -> Self {
        NecessityCsvRow {
            outcome: outcome_key(r.outcome),
            condition: &r.condition,
            consistency: r.consistency,
            coverage: r.coverage,
            relevance: r.relevance,
            necessary: r.necessary,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TruthTableCsvRow {
    pub outcome: &'static str,
    pub configuration: String,
    pub case_count: usize,
    pub consistency: Option<f64>,
    pub included: bool,
}

impl TruthTableCsvRow {
    pub fn new(outcome: Outcome, conditions: &[String], r: &TruthTableRow) -> Self {
        TruthTableCsvRow {
            outcome: outcome_key(outcome),
            configuration: trendcap_core::fsqca::configuration_label(conditions, r.configuration),
            case_count: r.case_count,
            consistency: r.consistency,
            included: r.included,
        }
    }
}
