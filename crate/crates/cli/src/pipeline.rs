//! Stage functions and the end-to-end run.
//!
//! Per-company work is a parallel map whose results are collected in company
//! id order; everything after correlation is a sequential fold.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use trendcap_core::calendar::week_of;
use trendcap_core::correlate::{correlate_pair, CorrelationResult, Group};
use trendcap_core::fsqca::{
    analyze_both_outcomes, calibrate_direct, necessity_analysis, CaseMembership, NecessityRow, Outcome,
    OutcomeAnalysis, QcaData, SufficiencyResult,
};
use trendcap_core::ingest::{founding_date_warnings, load_corpus, CompanyRecord, Corpus};
use trendcap_core::portfolio::{
    group_stats, industry_rollup, mcap_gr, tau_histogram, CaseFeatures, Dimension, GroupStats, Histogram,
    IndustryRow, McapGr, TagLevel,
};
use trendcap_core::preprocess::{align, prepare_pair, stitch_windows, PreparedPair, StitchReport};
use trendcap_core::quality::{score_company, QualityScore, Verdict, GOOD_THRESHOLD};
use trendcap_core::synth::{evaluate_recovery, read_truth, RecoveryReport, TruthRow, TRUTH_FILE};

use crate::config::{QcaConfig, RunConfig};
use crate::output::{self, *};
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Quality,
    Preprocess,
    Correlate,
    Portfolio,
    Fsqca,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Quality => "quality",
            Stage::Preprocess => "preprocess",
            Stage::Correlate => "correlate",
            Stage::Portfolio => "portfolio",
            Stage::Fsqca => "fsqca",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input error: {0:#}")]
    Input(anyhow::Error),
    #[error("{stage} stage failed: {source:#}")]
    Stage {
        stage: Stage,
        #[source]
        source: anyhow::Error,
    },
}

impl PipelineError {
    pub fn stage(stage: Stage, source: impl Into<anyhow::Error>) -> Self {
        PipelineError::Stage {
            stage,
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Input(_) => 1,
            PipelineError::Stage { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub company_id: String,
    pub stage: Stage,
    pub reason: String,
}

/// Companies remaining after a funnel step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunnelCount {
    pub step: String,
    pub companies: usize,
}

/// Per-company results of the stages up to correlation.
#[derive(Debug, Default)]
pub struct Analysis {
    pub corpus: Corpus,
    pub companies: BTreeMap<String, CompanyRecord>,
    pub funnel: Vec<FunnelCount>,
    pub exclusions: Vec<Exclusion>,
    pub warnings: Vec<String>,
    pub quality: BTreeMap<String, QualityScore>,
    pub prepared: BTreeMap<String, PreparedPair>,
    pub results: Vec<CorrelationResult>,
}

impl Analysis {
    fn exclude(&mut self, company_id: &str, stage: Stage, reason: impl Into<String>) {
        self.exclusions.push(Exclusion {
            company_id: company_id.to_string(),
            stage,
            reason: reason.into(),
        });
    }

    fn count(&mut self, step: impl Into<String>, companies: usize) {
        self.funnel.push(FunnelCount {
            step: step.into(),
            companies,
        });
    }

    pub fn features(&self) -> BTreeMap<String, CaseFeatures> {
        features_of(&self.corpus)
    }
}

/// Crisp features per company; unicorn status comes from the valuation rounds.
pub fn features_of(corpus: &Corpus) -> BTreeMap<String, CaseFeatures> {
    corpus
        .companies
        .iter()
        .map(|c| {
            let features = CaseFeatures {
                is_b2c: c.is_b2c,
                is_platform: c.is_platform,
                is_unicorn: corpus.valuations.get(&c.id).is_some_and(|v| v.is_unicorn),
            };
            (c.id.clone(), features)
        })
        .collect()
}

pub fn load(cfg: &RunConfig) -> Result<Corpus> {
    let dir = cfg.corpus_dir().map_err(PipelineError::Input)?;
    load_corpus(dir, cfg.analysis_end).map_err(|e| PipelineError::Input(e.into()))
}

/// Drops companies without enough rounds, windows or metadata.
fn ingest_stage(a: &mut Analysis, cfg: &RunConfig) -> Vec<String> {
    for id in founding_date_warnings(&a.corpus.companies, &a.corpus.valuations) {
        a.warnings.push(format!("{id}: founding date after a valuation round"));
    }
    for id in a.corpus.valuations.keys() {
        if !a.companies.contains_key(id) {
            a.warnings.push(format!("{id}: valuation rounds for an unknown company"));
        }
    }
    let mut kept = Vec::new();
    let ids: Vec<String> = a.companies.keys().cloned().collect();
    for id in ids {
        let rounds = a.corpus.valuations.get(&id).map_or(0, |v| v.rounds.len());
        let reason = if rounds == 0 {
            Some("no valuation rounds".to_string())
        } else if rounds < cfg.min_rounds {
            Some(format!("{rounds} valuation rounds, fewer than the minimum of {}", cfg.min_rounds))
        } else if a.corpus.windows.get(&id).is_none_or(|w| w.is_empty()) {
            Some("no search-interest windows".to_string())
        } else if cfg.quality_gate && a.corpus.metadata.get(&id).is_none_or(|m| m.is_empty()) {
            Some("no search-interest metadata".to_string())
        } else {
            None
        };
        match reason {
            Some(r) => a.exclude(&id, Stage::Ingest, r),
            None => kept.push(id),
        }
    }
    kept
}

/// Scores every company; with the gate on, bad and unscorable companies are
/// dropped.
fn quality_stage(a: &mut Analysis, ids: Vec<String>, cfg: &RunConfig) -> Vec<String> {
    let corpus = &a.corpus;
    let companies = &a.companies;
    let scored: Vec<(String, std::result::Result<QualityScore, String>)> = ids
        .into_par_iter()
        .map(|id| {
            let windows = &corpus.windows[&id];
            let variants = corpus.metadata.get(&id).map(Vec::as_slice).unwrap_or(&[]);
            let founded = companies[&id].founded;
            let score = stitch_windows(windows)
                .map_err(|e| format!("stitching failed: {e}"))
                .and_then(|(series, _)| score_company(&series, founded, variants).map_err(|e| e.to_string()));
            (id, score)
        })
        .collect();
    let mut kept = Vec::new();
    for (id, score) in scored {
        match score {
            Ok(s) => {
                for w in &s.warnings {
                    a.warnings.push(format!("{id}: {w}"));
                }
                let bad = s.verdict == Verdict::Bad;
                let total = s.total;
                a.quality.insert(id.clone(), s);
                if cfg.quality_gate && bad {
                    a.exclude(
                        &id,
                        Stage::Quality,
                        format!("quality total {total:.4} below {GOOD_THRESHOLD}"),
                    );
                } else {
                    kept.push(id);
                }
            }
            Err(reason) if cfg.quality_gate => a.exclude(&id, Stage::Quality, reason),
            Err(reason) => {
                a.warnings.push(format!("{id}: not scored: {reason}"));
                kept.push(id);
            }
        }
    }
    kept
}

fn preprocess_stage(a: &mut Analysis, ids: Vec<String>, cfg: &RunConfig) -> Vec<String> {
    let corpus = &a.corpus;
    let prepared: Vec<(String, std::result::Result<PreparedPair, String>)> = ids
        .into_par_iter()
        .map(|id| {
            let p = prepare_pair(&corpus.windows[&id], &corpus.valuations[&id], &cfg.filter).map_err(|e| e.to_string());
            (id, p)
        })
        .collect();
    let mut kept = Vec::new();
    for (id, p) in prepared {
        match p {
            Ok(p) => {
                for w in &p.stitch.warnings {
                    a.warnings.push(format!("{id}: {w}"));
                }
                a.prepared.insert(id.clone(), p);
                kept.push(id);
            }
            Err(reason) => a.exclude(&id, Stage::Preprocess, reason),
        }
    }
    kept
}

fn correlate_stage(a: &mut Analysis, ids: Vec<String>, cfg: &RunConfig) {
    let prepared = &a.prepared;
    let companies = &a.companies;
    let results: Vec<(String, std::result::Result<CorrelationResult, String>)> = ids
        .into_par_iter()
        .map(|id| {
            let p = &prepared[&id];
            let founding_week = week_of(companies[&id].founded);
            let r = correlate_pair(&id, &p.interest, &p.valuation, founding_week, &cfg.thresholds)
                .map_err(|e| e.to_string());
            (id, r)
        })
        .collect();
    for (id, r) in results {
        match r {
            Ok(r) => a.results.push(r),
            Err(reason) => a.exclude(&id, Stage::Correlate, reason),
        }
    }
}

/// Runs the per-company stages through `until` (at most `Correlate`).
pub fn analyze(cfg: &RunConfig, until: Stage) -> Result<Analysis> {
    let corpus = load(cfg)?;
    let mut a = Analysis {
        companies: corpus.companies.iter().map(|c| (c.id.clone(), c.clone())).collect(),
        corpus,
        ..Default::default()
    };
    a.count("input", a.companies.len());
    let ids = ingest_stage(&mut a, cfg);
    a.count(Stage::Ingest.to_string(), ids.len());
    if until == Stage::Ingest {
        return Ok(a);
    }
    let ids = quality_stage(&mut a, ids, cfg);
    a.count(Stage::Quality.to_string(), ids.len());
    if until == Stage::Quality {
        return Ok(a);
    }
    let ids = preprocess_stage(&mut a, ids, cfg);
    a.count(Stage::Preprocess.to_string(), ids.len());
    if until == Stage::Preprocess {
        return Ok(a);
    }
    correlate_stage(&mut a, ids, cfg);
    let n = a.results.len();
    a.count(Stage::Correlate.to_string(), n);
    Ok(a)
}

/// Normalized weekly values of a prepared pair at lag 0.
pub fn series_rows(p: &PreparedPair) -> anyhow::Result<Vec<SeriesRow>> {
    let pair = align(&p.interest, &p.valuation, 0)?;
    Ok((0..pair.n)
        .map(|k| SeriesRow {
            week: trendcap_core::calendar::week_start(pair.interest.start + k as i64),
            interest_norm: pair.interest.values[k],
            valuation_norm: pair.valuation.values[k],
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct StitchEntry<'a> {
    #[serde(flatten)]
    pub report: &'a StitchReport,
    pub clipped_valuation_weeks: usize,
}

#[derive(Debug)]
pub struct PortfolioReport {
    pub groups: Vec<GroupStats>,
    pub dimensions: Vec<GroupStats>,
    pub industry: Vec<IndustryRow>,
    pub mcapgr: Vec<(McapGr, Group)>,
    pub histogram: Histogram,
    pub warnings: Vec<String>,
}

pub fn portfolio_stage(
    results: &[CorrelationResult],
    corpus: &Corpus,
    features: &BTreeMap<String, CaseFeatures>,
    bin_width: f64,
) -> anyhow::Result<PortfolioReport> {
    if results.is_empty() {
        anyhow::bail!("no correlation results to report");
    }
    let groups = group_stats(results, features, None)?;
    let mut dimensions = Vec::new();
    for d in Dimension::ALL {
        dimensions.extend(group_stats(results, features, Some(d))?);
    }
    let companies: BTreeMap<String, CompanyRecord> =
        corpus.companies.iter().map(|c| (c.id.clone(), c.clone())).collect();
    let mut industry = Vec::new();
    for level in [TagLevel::Sector, TagLevel::Industry, TagLevel::SubIndustry] {
        industry.extend(industry_rollup(results, &companies, level));
    }
    let mut mcapgr = Vec::new();
    let mut warnings = Vec::new();
    for r in results {
        let (Some(series), Some(company)) = (corpus.valuations.get(&r.company_id), companies.get(&r.company_id))
        else {
            warnings.push(format!("{}: no company or valuation record for growth rate", r.company_id));
            continue;
        };
        match mcap_gr(series, company.founded) {
            Ok(m) => mcapgr.push((m, r.group)),
            Err(e) => warnings.push(format!("{}: growth rate skipped: {e}", r.company_id)),
        }
    }
    let taus: Vec<f64> = results.iter().map(|r| r.tau_best).collect();
    let histogram = tau_histogram(&taus, bin_width)?;
    Ok(PortfolioReport {
        groups,
        dimensions,
        industry,
        mcapgr,
        histogram,
        warnings,
    })
}

pub const QCA_CONDITIONS: [&str; 3] = ["unicorn", "b2c", "platform"];

#[derive(Debug, Serialize)]
pub struct QcaReport {
    pub conditions: Vec<String>,
    pub cases: usize,
    pub settings: QcaConfig,
    pub necessity: Vec<NecessityRow>,
    pub high: OutcomeAnalysis,
    pub low: OutcomeAnalysis,
}

/// Crisp feature memberships and the calibrated best tau as the outcome.
pub fn qca_data(
    results: &[CorrelationResult],
    features: &BTreeMap<String, CaseFeatures>,
    settings: &QcaConfig,
) -> anyhow::Result<QcaData<f64>> {
    let anchors = settings.anchors()?;
    let crisp = |b: bool| if b { 1.0 } else { 0.0 };
    let cases = results
        .iter()
        .map(|r| {
            let f = features
                .get(&r.company_id)
                .ok_or_else(|| anyhow!("{}: no company record", r.company_id))?;
            Ok(CaseMembership::with_high_outcome(
                r.company_id.clone(),
                vec![crisp(f.is_unicorn), crisp(f.is_b2c), crisp(f.is_platform)],
                calibrate_direct(r.tau_best, &anchors),
            ))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(QcaData::new(QCA_CONDITIONS.iter().map(|s| s.to_string()).collect(), cases)?)
}

pub fn fsqca_stage(
    results: &[CorrelationResult],
    features: &BTreeMap<String, CaseFeatures>,
    settings: &QcaConfig,
) -> anyhow::Result<QcaReport> {
    let data = qca_data(results, features, settings)?;
    let mut necessity = necessity_analysis(&data, Outcome::High, &settings.necessity())?;
    necessity.extend(necessity_analysis(&data, Outcome::Low, &settings.necessity())?);
    let (high, low) = analyze_both_outcomes(&data, &settings.sufficiency())?;
    Ok(QcaReport {
        conditions: data.conditions.clone(),
        cases: data.cases.len(),
        settings: *settings,
        necessity,
        high,
        low,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Plain-text table of both solutions.
pub fn solution_text(q: &QcaReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("Conditions: {}\n", q.conditions.join(", ")));
    s.push_str(&format!("Cases: {}\n", q.cases));
    let [lo, mid, hi] = q.settings.anchors;
    s.push_str(&format!(
        "Outcome calibration anchors (non-membership, crossover, membership): {lo}, {mid}, {hi}\n"
    ));
    s.push_str(&format!(
        "Sufficiency thresholds: consistency {}, frequency {}\n",
        q.settings.cons_suff, q.settings.freq
    ));
    for a in [&q.high, &q.low] {
        s.push_str(&format!("\nOutcome: {}\n", a.outcome));
        match &a.result {
            SufficiencyResult::NoSolution => s.push_str("No solution: no configuration passes the thresholds.\n"),
            SufficiencyResult::Solution(sol) => {
                let width = sol.terms.iter().map(|t| t.expression.len()).max().unwrap_or(4).max(4);
                s.push_str(&format!(
                    "{:<width$}  {:>12}  {:>15}  {:>11}\n",
                    "Term", "Raw coverage", "Unique coverage", "Consistency"
                ));
                for t in &sol.terms {
                    s.push_str(&format!(
                        "{:<width$}  {:>12.3}  {:>15.3}  {:>11}\n",
                        t.expression,
                        t.raw_coverage,
                        t.unique_coverage,
                        fmt_opt(t.consistency)
                    ));
                }
                s.push_str(&format!("Solution coverage: {:.3}\n", sol.coverage));
                s.push_str(&format!("Solution consistency: {}\n", fmt_opt(sol.consistency)));
                s.push_str(&format!("Cases covered: {}\n", sol.covered_cases.len()));
            }
        }
    }
    s
}

pub fn write_quality(out: &mut OutputSet, a: &Analysis) -> anyhow::Result<()> {
    out.csv(
        Stage::Quality,
        QUALITY_FILE,
        a.quality.iter().map(|(id, s)| QualityRow::new(id, s)),
    )
}

pub fn write_preprocess(out: &mut OutputSet, a: &Analysis) -> anyhow::Result<()> {
    let mut report = BTreeMap::new();
    for (id, p) in &a.prepared {
        out.csv(Stage::Preprocess, &format!("{SERIES_DIR}/{id}.csv"), series_rows(p)?)?;
        report.insert(
            id.as_str(),
            StitchEntry {
                report: &p.stitch,
                clipped_valuation_weeks: p.clipped_weeks,
            },
        );
    }
    out.json(Stage::Preprocess, STITCH_REPORT_FILE, &report)
}

pub fn write_correlations(out: &mut OutputSet, results: &[CorrelationResult]) -> anyhow::Result<()> {
    out.csv_with_header(
        Stage::Correlate,
        CORRELATIONS_FILE,
        &CORRELATIONS_HEADER,
        results.iter().map(CorrelationRow::from),
    )
}

pub fn write_exclusions(out: &mut OutputSet, stage: Stage, exclusions: &[Exclusion]) -> anyhow::Result<()> {
    out.csv_with_header(stage, EXCLUSIONS_FILE, &EXCLUSIONS_HEADER, exclusions.iter().map(ExclusionRow::from))
}

/// Overlay inputs for one company: normalized rows and its correlation.
pub struct Overlay<'a> {
    pub rows: &'a [SeriesRow],
    pub result: &'a CorrelationResult,
}

pub fn write_portfolio(
    out: &mut OutputSet,
    report: &PortfolioReport,
    overlays: &[Overlay<'_>],
    reproducible: bool,
) -> anyhow::Result<()> {
    out.csv(Stage::Portfolio, "report_groups.csv", report.groups.iter().map(GroupStatsRow::from))?;
    out.csv(
        Stage::Portfolio,
        "report_dimensions.csv",
        report.dimensions.iter().map(GroupStatsRow::from),
    )?;
    out.csv(
        Stage::Portfolio,
        "report_industry.csv",
        report.industry.iter().map(IndustryCsvRow::from),
    )?;
    out.csv_with_header(
        Stage::Portfolio,
        "mcapgr.csv",
        &[
            "company_id",
            "group",
            "max_valuation_musd",
            "date_of_max",
            "years_to_max",
            "rate_musd_per_year",
        ],
        report.mcapgr.iter().map(|(m, g)| McapRow::new(m, *g)),
    )?;
    out.csv(Stage::Portfolio, "tau_histogram.csv", histogram_rows(&report.histogram))?;
    out.text(
        Stage::Portfolio,
        "tau_histogram.svg",
        &svg::histogram(&report.histogram, reproducible)?,
    )?;
    for o in overlays {
        out.text(
            Stage::Portfolio,
            &format!("{PLOTS_DIR}/{}.svg", o.result.company_id),
            &svg::overlay(o.rows, o.result, reproducible)?,
        )?;
    }
    Ok(())
}

pub fn write_fsqca(out: &mut OutputSet, q: &QcaReport) -> anyhow::Result<()> {
    out.csv(Stage::Fsqca, "qca_necessity.csv", q.necessity.iter().map(NecessityCsvRow::from))?;
    let rows = q
        .high
        .truth_table
        .iter()
        .map(|r| TruthTableCsvRow::new(Outcome::High, &q.conditions, r))
        .chain(q.low.truth_table.iter().map(|r| TruthTableCsvRow::new(Outcome::Low, &q.conditions, r)));
    out.csv(Stage::Fsqca, "qca_truthtable.csv", rows)?;
    out.text(Stage::Fsqca, "qca_solution.txt", &solution_text(q))?;
    out.json(Stage::Fsqca, "qca_solution.json", q)
}

#[derive(Debug, Serialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Recovery {
    /// Planted companies that were excluded before correlation.
    pub excluded: Vec<String>,
    #[serde(flatten)]
    pub report: RecoveryReport,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub status: &'static str,
    pub failure: Option<StageFailure>,
    pub config: RunConfig,
    pub funnel: Vec<FunnelCount>,
    pub exclusions_by_stage: BTreeMap<Stage, usize>,
    pub groups: BTreeMap<Group, usize>,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

fn recovery(a: &Analysis, truths: Vec<TruthRow>) -> anyhow::Result<Recovery> {
    let correlated: BTreeMap<&str, ()> = a.results.iter().map(|r| (r.company_id.as_str(), ())).collect();
    let (kept, dropped): (Vec<TruthRow>, Vec<TruthRow>) =
        truths.into_iter().partition(|t| correlated.contains_key(t.company_id.as_str()));
    Ok(Recovery {
        excluded: dropped.into_iter().map(|t| t.company_id).collect(),
        report: evaluate_recovery(&kept, &a.results)?,
    })
}

/// Full pipeline. The manifest is written whether or not a stage fails.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate().map_err(PipelineError::Input)?;
    let out_dir = cfg.out_dir().map_err(PipelineError::Input)?;
    let mut out = OutputSet::new(out_dir).map_err(PipelineError::Input)?;
    let mut a = analyze(cfg, Stage::Correlate)?;

    let mut stage = Stage::Quality;
    let outcome: anyhow::Result<()> = (|| {
        write_quality(&mut out, &a)?;
        stage = Stage::Preprocess;
        write_preprocess(&mut out, &a)?;
        stage = Stage::Correlate;
        write_correlations(&mut out, &a.results)?;
        write_exclusions(&mut out, Stage::Correlate, &a.exclusions)?;
        let truth_path = cfg.corpus_dir()?.join(TRUTH_FILE);
        if truth_path.is_file() {
            let file = File::open(&truth_path).with_context(|| format!("opening {}", truth_path.display()))?;
            let truths = read_truth(file)?;
            out.json(Stage::Correlate, "recovery.json", &recovery(&a, truths)?)?;
        }

        stage = Stage::Portfolio;
        let features = a.features();
        let report = portfolio_stage(&a.results, &a.corpus, &features, cfg.histogram_bin_width)?;
        a.warnings.extend(report.warnings.iter().cloned());
        let rows: BTreeMap<&str, Vec<SeriesRow>> = a
            .prepared
            .iter()
            .map(|(id, p)| Ok((id.as_str(), series_rows(p)?)))
            .collect::<anyhow::Result<_>>()?;
        let overlays: Vec<Overlay<'_>> = a
            .results
            .iter()
            .filter_map(|r| rows.get(r.company_id.as_str()).map(|rows| Overlay { rows, result: r }))
            .collect();
        write_portfolio(&mut out, &report, &overlays, cfg.reproducible)?;

        stage = Stage::Fsqca;
        let q = fsqca_stage(&a.results, &features, &cfg.qca)?;
        write_fsqca(&mut out, &q)?;
        Ok(())
    })();

    let failure = outcome.as_ref().err().map(|e| StageFailure {
        stage,
        message: format!("{e:#}"),
    });
    if failure.is_some() {
        out.invalidate(stage);
    }
    let mut exclusions_by_stage = BTreeMap::new();
    for e in &a.exclusions {
        *exclusions_by_stage.entry(e.stage).or_insert(0) += 1;
    }
    let mut groups: BTreeMap<Group, usize> = Group::ALL.iter().map(|&g| (g, 0)).collect();
    for r in &a.results {
        *groups.entry(r.group).or_insert(0) += 1;
    }
    let mut config = cfg.clone();
    config.corpus = None;
    config.out = None;
    let mut manifest = Manifest {
        status: if failure.is_some() { "failed" } else { "complete" },
        failure,
        config,
        funnel: a.funnel.clone(),
        exclusions_by_stage,
        groups,
        warnings: a.warnings.clone(),
        outputs: Vec::new(),
    };
    manifest.outputs = out.records.clone();
    let path = out.root().join(output::MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::stage(stage, e))?;
    std::fs::write(&path, text + "\n")
        .with_context(|| format!("writing {}", path.display()))
        .map_err(|e| PipelineError::stage(stage, e))?;
    match outcome {
        Ok(()) => Ok(manifest),
        Err(e) => Err(PipelineError::stage(stage, e)),
    }
}
