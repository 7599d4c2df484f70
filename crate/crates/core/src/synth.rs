//! Synthetic ventures with a planted correlation group, lag and noise level,
//! plus a recovery report comparing pipeline output with the planted truth.
//!
//! The planted lag is measured against the pipeline's smoothing: the
//! valuation at week `w` follows the filtered latent at week `w + lag`,
//! advanced by the expected delay of the valuation filters, so a pipeline
//! using the same [`FilterConfig`] finds its optimum at `lag`. Each accepted
//! draw is checked by scanning every feasible lag on the noise-free export.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calendar::{week_of, week_start, WeekIndex};
use crate::correlate::{kendall_tau, tau_by_lag, CorrelationResult, Group, LagBounds};
use crate::ingest::{
    CategoryGroup, CompanyRecord, Corpus, GtMetadata, GtPoint, GtWindow, ValuationRound, ValuationSeries,
    MAX_WINDOW_POINTS,
};
use crate::preprocess::{des_filter, prepare_pair, FilterConfig, MIN_STITCH_OVERLAP};
use crate::quality::FIRST_YEAR_WEEKS;

/// Weeks shared by consecutive synthetic windows.
pub const WINDOW_OVERLAP: usize = 26;
/// Latent draws tried before a configuration is declared infeasible.
pub const MAX_ATTEMPTS: usize = 400;
pub const MIN_WEEKS: usize = 120;
pub const MIN_ROUNDS: usize = 6;

const _: () = assert!(WINDOW_OVERLAP >= MIN_STITCH_OVERLAP);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("{rounds} rounds do not fit into {weeks} weeks (at most one round per four weeks)")]
    RoundsTooDense { rounds: usize, weeks: usize },
    #[error("{company}: no latent draw satisfied the {group} target within {attempts} attempts")]
    Infeasible { company: String, group: Group, attempts: usize },
    #[error("truth and results disagree on company ids: {0}")]
    IdMismatch(String),
    #[error("truth file: {0}")]
    Truth(String),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatentKind {
    Logistic,
    PiecewiseExponential,
}

impl fmt::Display for LatentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatentKind::Logistic => "logistic",
            LatentKind::PiecewiseExponential => "piecewise-exponential",
        })
    }
}

impl FromStr for LatentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "logistic" => Ok(LatentKind::Logistic),
            "piecewise-exponential" => Ok(LatentKind::PiecewiseExponential),
            other => Err(format!("unknown latent kind `{other}`")),
        }
    }
}

/// Gaussian bump added on top of the trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// Latent adoption curve over weeks since founding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentParams {
    pub kind: LatentKind,
    pub trend_weight: f64,
    /// Logistic midpoint, or the peak week of the piecewise exponential.
    pub midpoint: f64,
    /// Logistic rate, or the growth rate before the peak.
    pub rate: f64,
    /// Decay rate after the peak (piecewise exponential only).
    pub decay: f64,
    pub bumps: Vec<Bump>,
    pub floor: f64,
}

impl LatentParams {
    pub fn eval(&self, t: f64) -> f64 {
        let trend = match self.kind {
            LatentKind::Logistic => 1.0 / (1.0 + (-self.rate * (t - self.midpoint)).exp()),
            LatentKind::PiecewiseExponential => {
                if t <= self.midpoint {
                    (self.rate * (t - self.midpoint)).exp()
                } else {
                    (-self.decay * (t - self.midpoint)).exp()
                }
            }
        };
        let bumps: f64 = self
            .bumps
            .iter()
            .map(|b| b.amplitude * (-0.5 * ((t - b.center) / b.width).powi(2)).exp())
            .sum();
        self.floor + self.trend_weight * trend + bumps
    }

    pub fn curve(&self, weeks: usize) -> Vec<f64> {
        (0..weeks).map(|t| self.eval(t as f64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub company_id: String,
    pub founded: NaiveDate,
    /// Length of the interest series, starting at the founding week.
    pub weeks: usize,
    pub latent: LatentKind,
    pub lag_weeks: i64,
    /// Standard deviation of the interest noise as a fraction of the latent
    /// range.
    pub noise_sigma: f64,
    pub round_count: usize,
    pub target_group: Group,
    pub unicorn_scale: bool,
    /// Weak metadata and a flat baseline, so the venture fails the quality
    /// gate.
    pub poor_quality: bool,
    /// Filter settings the planted lag refers to.
    pub filter: FilterConfig,
    /// Reject draws whose noise-free curves would fall outside
    /// `target_group`. When off, G2 draws only need a clear optimum at the
    /// planted lag.
    pub strict_group: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            company_id: "syn0000".to_string(),
            founded: NaiveDate::from_ymd_opt(2008, 1, 6).expect("valid date"),
            weeks: 520,
            latent: LatentKind::Logistic,
            lag_weeks: 0,
            noise_sigma: 0.0,
            round_count: 60,
            target_group: Group::G1,
            unicorn_scale: false,
            poor_quality: false,
            filter: FilterConfig::default(),
            strict_group: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.weeks < MIN_WEEKS {
            return bad(format!("weeks {} below {MIN_WEEKS}", self.weeks));
        }
        if self.lag_weeks.unsigned_abs() as usize * 2 >= self.weeks {
            return bad(format!("|lag| {} not below half of {} weeks", self.lag_weeks, self.weeks));
        }
        if self.round_count < MIN_ROUNDS {
            return bad(format!("round_count {} below {MIN_ROUNDS}", self.round_count));
        }
        if self.round_count > self.weeks / 4 {
            return Err(SynthError::RoundsTooDense {
                rounds: self.round_count,
                weeks: self.weeks,
            });
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma {} must be finite and non-negative", self.noise_sigma));
        }
        if let Err(e) = self.filter.validate() {
            return bad(e.to_string());
        }
        match (self.target_group, self.lag_weeks) {
            (Group::G1, l) if l != 0 => bad("G1 targets need lag 0".to_string()),
            (Group::G2, 0) => bad("G2 targets need a nonzero lag".to_string()),
            (Group::G3, l) if l != 0 => bad("G3 targets carry no lag".to_string()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub company_id: String,
    pub planted_group: Group,
    pub planted_lag: i64,
    pub latent: LatentParams,
    /// Independent valuation latent of G3 ventures.
    pub valuation_latent: Option<LatentParams>,
    pub noise_sigma: f64,
    pub round_count: usize,
    pub unicorn: bool,
    pub poor_quality: bool,
    /// Weeks since founding spanned by the valuation rounds.
    pub valuation_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticVenture {
    pub company: CompanyRecord,
    pub windows: Vec<GtWindow>,
    pub valuation: ValuationSeries,
    pub metadata: GtMetadata,
    pub truth: SynthTruth,
}

const STREAM_LATENT: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_ATTRIBUTES: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Shape family of a latent draw.
#[derive(Debug, Clone, Copy)]
enum Style {
    /// Dominant monotone or single-peaked trend with small bumps.
    Trend,
    /// Weak trend under a train of bumps whose width scales with the
    /// argument in weeks.
    Oscillating(f64),
}

fn sample_latent<R: Rng>(rng: &mut R, kind: LatentKind, weeks: usize, style: Style) -> LatentParams {
    let w = weeks as f64;
    let (midpoint, rate, decay) = match kind {
        LatentKind::Logistic => (rng.random_range(0.3 * w..0.6 * w), rng.random_range(0.02..0.1), 0.0),
        LatentKind::PiecewiseExponential => (
            rng.random_range(0.4 * w..0.8 * w),
            rng.random_range(0.01..0.04),
            rng.random_range(0.002..0.02),
        ),
    };
    let (trend_weight, bumps) = match style {
        Style::Trend => {
            let count = rng.random_range(0..=2);
            let bumps = (0..count)
                .map(|_| Bump {
                    center: rng.random_range(80.0..w - 10.0),
                    width: rng.random_range(5.0..20.0),
                    amplitude: rng.random_range(0.05..0.3),
                })
                .collect();
            (1.0, bumps)
        }
        Style::Oscillating(scale) => {
            let mut bumps = Vec::new();
            let mut center = 60.0 + rng.random_range(0.0..scale);
            while center < w - 5.0 {
                let width = rng.random_range(0.2..0.5) * scale + 2.0;
                bumps.push(Bump {
                    center,
                    width,
                    amplitude: rng.random_range(0.3..1.0),
                });
                center += rng.random_range(1.5..3.5) * width;
            }
            (rng.random_range(0.0..0.2), bumps)
        }
    };
    LatentParams {
        kind,
        trend_weight,
        midpoint,
        rate,
        decay,
        bumps,
        floor: 0.01,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Tau between the ideal filtered interest at `t + lag` and the ideal
/// valuation curve over `span`.
fn ideal_tau(filtered: &[f64], valuation: &[f64], span: (usize, usize), lag: i64) -> Option<f64> {
    let from = span.0 as i64 + lag;
    let to = span.1 as i64 + lag;
    if from < 0 || to >= filtered.len() as i64 {
        return None;
    }
    kendall_tau(&filtered[from as usize..=to as usize], valuation).ok()
}

/// Checks the planted group on the noise-free curves with margins. G2
/// draws also need a clear optimum at the planted lag.
fn ideal_group_holds(cfg: &SynthConfig, filtered: &[f64], valuation: &[f64], span: (usize, usize)) -> bool {
    let weeks = filtered.len() as i64;
    let mut lags = -(span.0 as i64)..=(weeks - 1 - span.1 as i64);
    let tau0 = ideal_tau(filtered, valuation, span, 0).unwrap_or(0.0);
    match cfg.target_group {
        // The span must rise well above the noise floor, not sit on a plateau.
        Group::G1 => {
            let (lo, hi) = range(filtered);
            let (vlo, vhi) = range(valuation);
            tau0 >= 0.7 && vhi - vlo >= 0.5 * (hi - lo)
        }
        Group::G2 => {
            (!cfg.strict_group || tau0 <= 0.3)
                && lags.filter(|&l| l != cfg.lag_weeks).all(|l| {
                    ideal_tau(filtered, valuation, span, l)
                        .is_none_or(|t| t <= 0.99 && ((l - cfg.lag_weeks).abs() < 5 || t <= 0.95))
                })
        }
        Group::G3 => {
            !cfg.strict_group
                || (tau0 <= 0.3 && lags.all(|l| ideal_tau(filtered, valuation, span, l).is_none_or(|t| t <= 0.45)))
        }
    }
}

/// Expected delay in weeks of the valuation filters for a slowly varying
/// signal: each exponential pass delays by `(1 - a) / a` samples, and the
/// raw pass runs on rounds `spacing` weeks apart.
pub fn valuation_delay(filter: &FilterConfig, spacing: f64) -> f64 {
    let pass = |a: f64| (1.0 - a) / a;
    2.0 * pass(filter.alpha_valuation_weekly) + 2.0 * pass(filter.alpha_valuation_raw) * spacing
}

/// Linear interpolation of `values` at fractional index `x`, clamped to the
/// ends.
fn sample_at(values: &[f64], x: f64) -> f64 {
    let last = values.len() - 1;
    if x <= 0.0 {
        return values[0];
    }
    let i = x.floor() as usize;
    if i >= last {
        return values[last];
    }
    let t = x - i as f64;
    values[i] * (1.0 - t) + values[i + 1] * t
}

struct Draw {
    latent: LatentParams,
    valuation_latent: Option<LatentParams>,
    curve: Vec<f64>,
    span: (usize, usize),
    valuation: Vec<f64>,
}

fn draw_latents(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Draw> {
    let weeks = cfg.weeks;
    let lag = cfg.lag_weeks;
    for _ in 0..MAX_ATTEMPTS {
        let style = match cfg.target_group {
            Group::G1 => Style::Trend,
            Group::G2 => Style::Oscillating(lag.abs().max(8) as f64),
            Group::G3 => Style::Oscillating(rng.random_range(8.0..20.0)),
        };
        let latent = sample_latent(rng, cfg.latent, weeks, style);
        let curve = latent.curve(weeks);
        if mean(&curve[..FIRST_YEAR_WEEKS.min(weeks)]) > 0.45 * mean(&curve) {
            continue;
        }
        let filtered = des_filter(&curve, cfg.filter.alpha_interest).expect("validated alpha");

        let spare = 2;
        let room = weeks - lag.unsigned_abs() as usize - spare;
        let hi = ((0.6 * weeks as f64) as usize).min(room - 1);
        let lo = ((0.35 * weeks as f64) as usize).min(hi).max(cfg.round_count);
        let len = rng.random_range(lo..=hi);
        let first = (-lag).max(0) as usize;
        let last = weeks - len - lag.max(0) as usize - spare;
        let a = rng.random_range(first..=last);
        let span = (a, a + len - 1);

        let (valuation_latent, valuation) = if cfg.target_group == Group::G3 {
            let scale = rng.random_range(40.0..80.0);
            let other = sample_latent(rng, cfg.latent, weeks, Style::Oscillating(scale));
            let f = des_filter(&other.curve(weeks), cfg.filter.alpha_interest).expect("validated alpha");
            (Some(other), f[span.0..=span.1].to_vec())
        } else {
            let spacing = (len - 1) as f64 / (cfg.round_count - 1) as f64;
            let shift = lag as f64 + valuation_delay(&cfg.filter, spacing).min(spare as f64);
            let values = (span.0..=span.1).map(|t| sample_at(&filtered, t as f64 + shift)).collect();
            (None, values)
        };
        if ideal_group_holds(cfg, &filtered, &valuation, span) {
            return Ok(Draw {
                latent,
                valuation_latent,
                curve,
                span,
                valuation,
            });
        }
    }
    Err(SynthError::Infeasible {
        company: cfg.company_id.clone(),
        group: cfg.target_group,
        attempts: MAX_ATTEMPTS,
    })
}

fn split_windows(company_id: &str, first_week: WeekIndex, values: &[f64]) -> Vec<GtWindow> {
    let step = MAX_WINDOW_POINTS - WINDOW_OVERLAP;
    let mut windows = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + MAX_WINDOW_POINTS).min(values.len());
        let slice = &values[start..end];
        let (_, max) = range(slice);
        let points = slice
            .iter()
            .enumerate()
            .map(|(k, &v)| GtPoint {
                week: week_start(first_week + (start + k) as i64),
                value: if v == max { 100.0 } else { 100.0 * v / max },
            })
            .collect();
        windows.push(GtWindow::new(company_id, windows.len() as u32, points));
        if end == values.len() {
            return windows;
        }
        start += step;
    }
}

const SECTORS: [(&str, &str, &str); 5] = [
    ("Information Technology", "Software", "Application Software"),
    ("Information Technology", "IT Services", "Internet Services & Infrastructure"),
    ("Consumer Discretionary", "Internet & Direct Marketing Retail", "Internet & Direct Marketing Retail"),
    ("Health Care", "Health Care Technology", "Health Care Technology"),
    ("Financials", "Diversified Financials", "Consumer Finance"),
];

/// Generates one venture. Deterministic in the config.
/// Round placements tried per latent draw before the draw is abandoned.
const PLACEMENT_ATTEMPTS: usize = 8;

/// Valuation rounds on distinct weeks, first and last at the span ends.
fn place_rounds(cfg: &SynthConfig, draw: &Draw, founding_week: WeekIndex, rng: &mut ChaCha8Rng) -> Result<ValuationSeries> {
    let (a, b) = draw.span;
    let mut inner: Vec<usize> = (a + 1..b).collect();
    inner.shuffle(rng);
    let mut weeks: Vec<usize> = inner.into_iter().take(cfg.round_count - 2).collect();
    weeks.push(a);
    weeks.push(b);
    weeks.sort_unstable();
    let peak = if cfg.unicorn_scale {
        rng.random_range(1000.0..20000.0)
    } else {
        rng.random_range(50.0..900.0)
    };
    let (vmin, vmax) = range(&draw.valuation);
    let rounds = weeks
        .iter()
        .map(|&t| {
            let u = (draw.valuation[t - a] - vmin) / (vmax - vmin);
            ValuationRound {
                company_id: cfg.company_id.clone(),
                date: week_start(founding_week + t as i64) + Duration::days(rng.random_range(0..7)),
                valuation: peak * (0.02 + 0.98 * u),
            }
        })
        .collect();
    ValuationSeries::from_rounds(cfg.company_id.clone(), rounds).map_err(|e| SynthError::InvalidConfig(e.to_string()))
}

/// Brute-force scan of the noise-free export: the planted lag must be the
/// strict maximum of tau over every feasible lag.
fn planted_lag_is_peak(cfg: &SynthConfig, windows: &[GtWindow], valuation: &ValuationSeries, founding_week: WeekIndex) -> bool {
    let Ok(pair) = prepare_pair(windows, valuation, &cfg.filter) else {
        return false;
    };
    let Ok(bounds) = LagBounds::for_pair(&pair.interest, &pair.valuation, founding_week) else {
        return false;
    };
    let taus = tau_by_lag(&pair.interest, &pair.valuation, bounds);
    let Some(planted) = taus.iter().find(|(l, _)| *l == cfg.lag_weeks).and_then(|(_, t)| *t) else {
        return false;
    };
    taus.iter()
        .filter(|(l, _)| *l != cfg.lag_weeks)
        .all(|(_, t)| t.is_none_or(|t| t < planted))
}

pub fn generate_venture(cfg: &SynthConfig) -> Result<SyntheticVenture> {
    cfg.validate()?;
    let founding_week = week_of(cfg.founded);
    let baseline_of = |curve: &[f64]| if cfg.poor_quality { 4.0 * range(curve).1 } else { 0.0 };

    let mut latent_rng = stream(cfg.seed, STREAM_LATENT);
    let mut rng = stream(cfg.seed, STREAM_ATTRIBUTES);
    let mut accepted = None;
    'draws: for _ in 0..MAX_ATTEMPTS {
        let draw = draw_latents(cfg, &mut latent_rng)?;
        let baseline = baseline_of(&draw.curve);
        let clean: Vec<f64> = draw.curve.iter().map(|&v| v + baseline).collect();
        let clean_windows = split_windows(&cfg.company_id, founding_week, &clean);
        for _ in 0..PLACEMENT_ATTEMPTS {
            let valuation = place_rounds(cfg, &draw, founding_week, &mut rng)?;
            if cfg.target_group == Group::G3 || planted_lag_is_peak(cfg, &clean_windows, &valuation, founding_week) {
                accepted = Some((draw, valuation));
                break 'draws;
            }
        }
    }
    let Some((draw, valuation)) = accepted else {
        return Err(SynthError::Infeasible {
            company: cfg.company_id.clone(),
            group: cfg.target_group,
            attempts: MAX_ATTEMPTS,
        });
    };

    // Interest: noisy latent, optionally lifted by a flat baseline.
    let mut noise_rng = stream(cfg.seed, STREAM_NOISE);
    let (lo, hi) = range(&draw.curve);
    let sd = cfg.noise_sigma * (hi - lo);
    let normal = Normal::new(0.0, sd.max(0.0)).expect("finite sigma");
    let baseline = baseline_of(&draw.curve);
    let interest: Vec<f64> = draw
        .curve
        .iter()
        .map(|&v| {
            let e = if sd > 0.0 { normal.sample(&mut noise_rng) } else { 0.0 };
            (v + e).max(0.0) + baseline
        })
        .collect();
    let windows = split_windows(&cfg.company_id, founding_week, &interest);

    let metadata = if cfg.poor_quality {
        GtMetadata {
            company_id: cfg.company_id.clone(),
            brand_unique: false,
            category_group: CategoryGroup::B,
            related_query_count: rng.random_range(0..=3),
        }
    } else {
        GtMetadata {
            company_id: cfg.company_id.clone(),
            brand_unique: true,
            category_group: CategoryGroup::A,
            related_query_count: rng.random_range(10..=60),
        }
    };
    let (sector, industry, sub_industry) = SECTORS[rng.random_range(0..SECTORS.len())];
    let company = CompanyRecord {
        id: cfg.company_id.clone(),
        name: format!("Synthetic Venture {}", cfg.company_id),
        founded: cfg.founded,
        is_b2c: rng.random_bool(0.5),
        is_platform: rng.random_bool(0.5),
        sector: sector.to_string(),
        industry: industry.to_string(),
        sub_industry: sub_industry.to_string(),
    };
    let truth = SynthTruth {
        company_id: cfg.company_id.clone(),
        planted_group: cfg.target_group,
        planted_lag: cfg.lag_weeks,
        latent: draw.latent,
        valuation_latent: draw.valuation_latent,
        noise_sigma: cfg.noise_sigma,
        round_count: cfg.round_count,
        unicorn: valuation.is_unicorn,
        poor_quality: cfg.poor_quality,
        valuation_span: draw.span,
    };
    Ok(SyntheticVenture {
        company,
        windows,
        valuation,
        metadata,
        truth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub seed: u64,
    pub ventures: usize,
    /// Shares of planted G1, G2 and G3 ventures.
    pub group_shares: [f64; 3],
    pub weeks: usize,
    pub noise_sigma: f64,
    /// Smallest and largest |lag| of G2 ventures.
    pub lag_abs_range: (i64, i64),
    pub round_count: usize,
    pub unicorn_share: f64,
    /// Ventures made to fail the quality gate.
    pub poor_quality: usize,
    pub founded_from: NaiveDate,
    pub founded_to: NaiveDate,
    pub filter: FilterConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 1,
            ventures: 200,
            group_shares: [0.67, 0.16, 0.17],
            weeks: 520,
            noise_sigma: 0.05,
            lag_abs_range: (10, 120),
            round_count: 60,
            unicorn_share: 0.5,
            poor_quality: 0,
            founded_from: NaiveDate::from_ymd_opt(2004, 1, 4).expect("valid date"),
            founded_to: NaiveDate::from_ymd_opt(2009, 6, 28).expect("valid date"),
            filter: FilterConfig::default(),
        }
    }
}

/// Rounds `total * share` per group with largest remainders.
pub fn group_counts(total: usize, shares: [f64; 3]) -> [usize; 3] {
    let sum: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares.iter().map(|s| total as f64 * s / sum).collect();
    let mut counts: [usize; 3] = [0; 3];
    for i in 0..3 {
        counts[i] = exact[i].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    let mut left = total - counts.iter().sum::<usize>();
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Per-venture configs with seeds split off the corpus seed.
pub fn venture_configs(cfg: &CorpusConfig) -> Result<Vec<SynthConfig>> {
    if cfg.ventures == 0 {
        return Err(SynthError::InvalidConfig("corpus needs at least one venture".to_string()));
    }
    if cfg.poor_quality > cfg.ventures {
        return Err(SynthError::InvalidConfig("more poor-quality ventures than ventures".to_string()));
    }
    let (lag_lo, lag_hi) = cfg.lag_abs_range;
    if lag_lo < 1 || lag_lo > lag_hi {
        return Err(SynthError::InvalidConfig(format!("lag range {lag_lo}..={lag_hi} invalid")));
    }
    if cfg.founded_from > cfg.founded_to {
        return Err(SynthError::InvalidConfig("founded_from after founded_to".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let counts = group_counts(cfg.ventures, cfg.group_shares);
    let mut groups: Vec<Group> = Group::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&g, c)| std::iter::repeat_n(g, c))
        .collect();
    groups.shuffle(&mut rng);
    let mut poor: Vec<bool> = (0..cfg.ventures).map(|i| i < cfg.poor_quality).collect();
    poor.shuffle(&mut rng);
    let days = (cfg.founded_to - cfg.founded_from).num_days();
    Ok(groups
        .into_iter()
        .zip(poor)
        .enumerate()
        .map(|(i, (group, poor_quality))| {
            let lag = match group {
                Group::G2 => {
                    let m = rng.random_range(lag_lo..=lag_hi);
                    if rng.random_bool(0.5) {
                        -m
                    } else {
                        m
                    }
                }
                _ => 0,
            };
            SynthConfig {
                seed: rng.next_u64(),
                company_id: format!("syn{i:04}"),
                founded: cfg.founded_from + Duration::days(rng.random_range(0..=days)),
                weeks: cfg.weeks,
                latent: if rng.random_bool(0.5) {
                    LatentKind::Logistic
                } else {
                    LatentKind::PiecewiseExponential
                },
                lag_weeks: lag,
                noise_sigma: cfg.noise_sigma,
                round_count: cfg.round_count,
                target_group: group,
                unicorn_scale: rng.random_bool(cfg.unicorn_share.clamp(0.0, 1.0)),
                poor_quality,
                filter: cfg.filter,
                strict_group: true,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truths: Vec<SynthTruth>,
}

pub fn generate_corpus(cfg: &CorpusConfig) -> Result<SyntheticCorpus> {
    let configs = venture_configs(cfg)?;
    let ventures: Vec<SyntheticVenture> = configs.par_iter().map(generate_venture).collect::<Result<_>>()?;
    let mut corpus = Corpus::default();
    let mut truths = Vec::with_capacity(ventures.len());
    for v in ventures {
        let id = v.company.id.clone();
        corpus.companies.push(v.company);
        corpus.valuations.insert(id.clone(), v.valuation);
        corpus.metadata.insert(id.clone(), vec![v.metadata]);
        corpus.windows.insert(id, v.windows);
        truths.push(v.truth);
    }
    Ok(SyntheticCorpus { corpus, truths })
}

pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub company_id: String,
    pub planted_group: Group,
    pub planted_lag: i64,
    pub latent: LatentKind,
    pub noise_sigma: f64,
    pub round_count: usize,
    pub unicorn: bool,
    pub poor_quality: bool,
}

impl From<&SynthTruth> for TruthRow {
    fn from(t: &SynthTruth) -> Self {
        TruthRow {
            company_id: t.company_id.clone(),
            planted_group: t.planted_group,
            planted_lag: t.planted_lag,
            latent: t.latent.kind,
            noise_sigma: t.noise_sigma,
            round_count: t.round_count,
            unicorn: t.unicorn,
            poor_quality: t.poor_quality,
        }
    }
}

pub fn write_truth<W: Write>(writer: W, truths: &[SynthTruth]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for t in truths {
        w.serialize(TruthRow::from(t)).map_err(|e| SynthError::Truth(e.to_string()))?;
    }
    w.flush().map_err(|e| SynthError::Truth(e.to_string()))
}

pub fn read_truth<R: Read>(reader: R) -> Result<Vec<TruthRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| SynthError::Truth(e.to_string()))
}

/// Planted versus recovered groups and lag errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// `confusion[planted][recovered]`, groups in G1, G2, G3 order.
    pub confusion: [[usize; 3]; 3],
    pub accuracy: f64,
    /// Recovered minus planted lag, for planted G2 cases recovered as G2.
    pub lag_errors: BTreeMap<String, i64>,
    pub mean_abs_lag_error: Option<f64>,
    pub max_abs_lag_error: Option<i64>,
}

impl RecoveryReport {
    /// Share of planted G2 cases recovered as G2 with |lag error| <= `tol`.
    pub fn g2_within(&self, tol: i64) -> Option<f64> {
        let planted: usize = self.confusion[1].iter().sum();
        (planted > 0).then(|| {
            self.lag_errors.values().filter(|e| e.abs() <= tol).count() as f64 / planted as f64
        })
    }
}

fn group_index(g: Group) -> usize {
    match g {
        Group::G1 => 0,
        Group::G2 => 1,
        Group::G3 => 2,
    }
}

/// Compares planted truth with correlation results; both must cover the
/// same companies.
pub fn evaluate_recovery(truths: &[TruthRow], results: &[CorrelationResult]) -> Result<RecoveryReport> {
    let by_id: BTreeMap<&str, &CorrelationResult> = results.iter().map(|r| (r.company_id.as_str(), r)).collect();
    if by_id.len() != results.len() || truths.len() != results.len() {
        return Err(SynthError::IdMismatch(format!(
            "{} truth rows, {} results",
            truths.len(),
            results.len()
        )));
    }
    let mut confusion = [[0usize; 3]; 3];
    let mut lag_errors = BTreeMap::new();
    for t in truths {
        let r = by_id
            .get(t.company_id.as_str())
            .ok_or_else(|| SynthError::IdMismatch(format!("no result for {}", t.company_id)))?;
        confusion[group_index(t.planted_group)][group_index(r.group)] += 1;
        if t.planted_group == Group::G2 && r.group == Group::G2 {
            lag_errors.insert(t.company_id.clone(), r.lag_weeks - t.planted_lag);
        }
    }
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    let abs: Vec<i64> = lag_errors.values().map(|e| e.abs()).collect();
    Ok(RecoveryReport {
        confusion,
        accuracy: correct as f64 / truths.len().max(1) as f64,
        mean_abs_lag_error: (!abs.is_empty()).then(|| abs.iter().sum::<i64>() as f64 / abs.len() as f64),
        max_abs_lag_error: abs.iter().copied().max(),
        lag_errors,
    })
}
