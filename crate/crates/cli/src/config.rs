use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use trendcap_core::correlate::ThresholdConfig;
use trendcap_core::fsqca::{CalibrationAnchors, NecessityThresholds, SufficiencyThresholds};
use trendcap_core::preprocess::FilterConfig;

/// Fuzzy-set analysis settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcaConfig {
    /// Sufficiency consistency threshold for including a truth-table row.
    pub cons_suff: f64,
    /// Minimum number of cases in a truth-table row.
    pub freq: usize,
    /// Necessity consistency threshold.
    pub cons_nec: f64,
    /// Relevance-of-necessity threshold.
    pub ron: f64,
    /// Tau anchors: full non-membership, crossover, full membership.
    pub anchors: [f64; 3],
}

impl Default for QcaConfig {
    fn default() -> Self {
        QcaConfig {
            cons_suff: 0.75,
            freq: 1,
            cons_nec: 0.9,
            ron: 0.6,
            anchors: [0.1, 0.499, 0.9],
        }
    }
}

impl QcaConfig {
    pub fn sufficiency(&self) -> SufficiencyThresholds {
        SufficiencyThresholds {
            consistency: self.cons_suff,
            frequency: self.freq,
        }
    }

    pub fn necessity(&self) -> NecessityThresholds {
        NecessityThresholds {
            consistency: self.cons_nec,
            relevance: self.ron,
        }
    }

    pub fn anchors(&self) -> Result<CalibrationAnchors<f64>> {
        let [lo, mid, hi] = self.anchors;
        CalibrationAnchors::new(lo, mid, hi).map_err(Into::into)
    }
}

/// Everything `run` and the stage subcommands need. Every key has a default,
/// so an empty file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus directory in the ingest layout.
    pub corpus: Option<PathBuf>,
    /// Output directory.
    pub out: Option<PathBuf>,
    /// Founding dates after this day are rejected at parse time.
    pub analysis_end: NaiveDate,
    /// Companies with fewer valuation rounds are dropped at ingest.
    pub min_rounds: usize,
    /// Drop companies whose quality verdict is bad.
    pub quality_gate: bool,
    /// Width of the tau histogram bins.
    pub histogram_bin_width: f64,
    /// Omit the generation timestamp from SVG files.
    pub reproducible: bool,
    pub filter: FilterConfig,
    pub thresholds: ThresholdConfig,
    pub qca: QcaConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            out: None,
            analysis_end: NaiveDate::from_ymd_opt(2019, 8, 31).expect("valid date"),
            min_rounds: 6,
            quality_gate: true,
            histogram_bin_width: 0.1,
            reproducible: false,
            filter: FilterConfig::default(),
            thresholds: ThresholdConfig::default(),
            qca: QcaConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if let Err(e) = self.thresholds.validate() {
            bail!(e);
        }
        if !(self.histogram_bin_width > 0.0 && self.histogram_bin_width <= 2.0) {
            bail!("histogram_bin_width {} outside (0, 2]", self.histogram_bin_width);
        }
        for (name, v) in [("cons_suff", self.qca.cons_suff), ("cons_nec", self.qca.cons_nec), ("ron", self.qca.ron)] {
            if !(0.0..=1.0).contains(&v) {
                bail!("qca.{name} {v} outside [0, 1]");
            }
        }
        self.qca.anchors()?;
        if let Some(dir) = &self.corpus {
            if !dir.is_dir() {
                bail!("corpus directory {} does not exist", dir.display());
            }
        }
        Ok(())
    }

    pub fn corpus_dir(&self) -> Result<&Path> {
        self.corpus.as_deref().context("no corpus directory given (--corpus or `corpus` key)")
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().context("no output directory given (--out or `out` key)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.filter.alpha_interest, 0.2);
        assert_eq!(cfg.thresholds.strong_tau, 0.5);
        assert_eq!(cfg.qca.anchors, [0.1, 0.499, 0.9]);
    }

    #[test]
    fn nested_keys_override() {
        let cfg: RunConfig = toml::from_str(
            "min_rounds = 4\nquality_gate = false\n[filter]\nalpha_interest = 0.3\n[qca]\ncons_suff = 0.8\n",
        )
        .unwrap();
        assert_eq!(cfg.min_rounds, 4);
        assert!(!cfg.quality_gate);
        assert_eq!(cfg.filter.alpha_interest, 0.3);
        assert_eq!(cfg.filter.alpha_valuation_weekly, 0.9);
        assert_eq!(cfg.qca.cons_suff, 0.8);
        assert_eq!(cfg.qca.freq, 1);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<RunConfig>("min_round = 4").is_err());
        let mut cfg = RunConfig::default();
        cfg.qca.anchors = [0.5, 0.4, 0.9];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.filter.alpha_interest = 0.0;
        assert!(cfg.validate().is_err());
    }
}
