//! Fuzzy-set Qualitative Comparative Analysis.
//!
//! Cases carry memberships in a fixed list of conditions and in two outcome
//! sets (high and low correlation). Necessity is screened per condition and
//! negated condition; sufficiency runs through a truth table and a
//! conservative Quine-McCluskey minimization.

mod calibrate;
mod necessity;
mod qm;
mod solution;
mod truth_table;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use calibrate::{calibrate_direct, negate, CalibrationAnchors, ANCHOR_LOG_ODDS};
pub use necessity::{necessity_analysis, NecessityRow, NecessityThresholds};
pub use qm::{prime_implicants, quine_mccluskey, Implicant};
pub use solution::{solution_metrics, Solution, TermMetrics};
pub use truth_table::{build_truth_table, configuration_label, TruthTableRow};

/// Largest supported number of conditions.
pub const MAX_CONDITIONS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcaError {
    #[error("invalid anchors: {0}")]
    Anchors(String),
    #[error("no cases")]
    NoCases,
    #[error("empty outcome set: outcome memberships sum to zero")]
    EmptyOutcome,
    #[error("{0} conditions exceed the supported maximum of {MAX_CONDITIONS}")]
    TooManyConditions(usize),
    #[error("case {case} has {found} condition memberships, expected {expected}")]
    ConditionCount { case: String, expected: usize, found: usize },
    #[error("no minterms to minimize")]
    NoMinterms,
    #[error("minterm {minterm} out of range for {k} conditions")]
    MintermRange { minterm: u32, k: usize },
    #[error("solution needs at least one term")]
    NoTerms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    High,
    Low,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::High => "high correlation",
            Outcome::Low => "low correlation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMembership<T = f64> {
    pub company_id: String,
    /// Memberships in the conditions, in [`QcaData::conditions`] order.
    pub conditions: Vec<T>,
    pub outcome_high: T,
    pub outcome_low: T,
}

impl<T: Scalar> CaseMembership<T> {
    /// Builds a case whose low-outcome membership is the negation of the high
    /// one.
    pub fn with_high_outcome(company_id: impl Into<String>, conditions: Vec<T>, outcome_high: T) -> Self {
        CaseMembership {
            company_id: company_id.into(),
            conditions,
            outcome_high,
            outcome_low: negate(outcome_high),
        }
    }

    pub fn outcome(&self, outcome: Outcome) -> T {
        match outcome {
            Outcome::High => self.outcome_high,
            Outcome::Low => self.outcome_low,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcaData<T = f64> {
    pub conditions: Vec<String>,
    pub cases: Vec<CaseMembership<T>>,
}

impl<T: Scalar> QcaData<T> {
    pub fn new(conditions: Vec<String>, cases: Vec<CaseMembership<T>>) -> Result<Self, QcaError> {
        if conditions.len() > MAX_CONDITIONS {
            return Err(QcaError::TooManyConditions(conditions.len()));
        }
        for c in &cases {
            if c.conditions.len() != conditions.len() {
                return Err(QcaError::ConditionCount {
                    case: c.company_id.clone(),
                    expected: conditions.len(),
                    found: c.conditions.len(),
                });
            }
        }
        Ok(QcaData { conditions, cases })
    }

    pub fn k(&self) -> usize {
        self.conditions.len()
    }

    pub(crate) fn outcome_values(&self, outcome: Outcome) -> Vec<T> {
        self.cases.iter().map(|c| c.outcome(outcome)).collect()
    }
}

/// Sufficiency thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SufficiencyThresholds {
    pub consistency: f64,
    pub frequency: usize,
}

impl Default for SufficiencyThresholds {
    fn default() -> Self {
        SufficiencyThresholds {
            consistency: 0.75,
            frequency: 1,
        }
    }
}

/// Sufficiency result for one outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SufficiencyResult {
    Solution(Solution),
    NoSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeAnalysis {
    pub outcome: Outcome,
    pub truth_table: Vec<TruthTableRow>,
    pub result: SufficiencyResult,
}

/// Truth table, minimization and solution metrics for one outcome.
pub fn analyze_outcome(
    data: &QcaData<f64>,
    outcome: Outcome,
    thresholds: &SufficiencyThresholds,
) -> Result<OutcomeAnalysis, QcaError> {
    let truth_table = build_truth_table(data, outcome, thresholds.consistency, thresholds.frequency)?;
    let minterms: Vec<u32> = truth_table.iter().filter(|r| r.included).map(|r| r.configuration).collect();
    let result = if minterms.is_empty() {
        SufficiencyResult::NoSolution
    } else {
        let terms = quine_mccluskey(&minterms, data.k())?;
        SufficiencyResult::Solution(solution_metrics(&terms, data, outcome)?)
    };
    Ok(OutcomeAnalysis {
        outcome,
        truth_table,
        result,
    })
}

/// Runs the sufficiency pipeline independently for the high and the low
/// outcome.
pub fn analyze_both_outcomes(
    data: &QcaData<f64>,
    thresholds: &SufficiencyThresholds,
) -> Result<(OutcomeAnalysis, OutcomeAnalysis), QcaError> {
    Ok((
        analyze_outcome(data, Outcome::High, thresholds)?,
        analyze_outcome(data, Outcome::Low, thresholds)?,
    ))
}
