use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::{negate, Outcome, QcaData, QcaError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NecessityThresholds {
    pub consistency: f64,
    pub relevance: f64,
}

impl Default for NecessityThresholds {
    fn default() -> Self {
        NecessityThresholds {
            consistency: 0.9,
            relevance: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityRow {
    /// Condition name, prefixed with `~` for the negated condition.
    pub condition: String,
    pub outcome: Outcome,
    /// `sum min(x, y) / sum y`.
    pub consistency: f64,
    /// `sum min(x, y) / sum x`; `None` when the condition set is empty.
    pub coverage: Option<f64>,
    /// Relevance of necessity, `sum (1 - x) / sum (1 - min(x, y))`; `None`
    /// when every case is fully in both sets.
    pub relevance: Option<f64>,
    pub necessary: bool,
}

/// Necessity of every single condition and its negation for `outcome`.
pub fn necessity_analysis<T: Scalar>(
    data: &QcaData<T>,
    outcome: Outcome,
    thresholds: &NecessityThresholds,
) -> Result<Vec<NecessityRow>, QcaError> {
    if data.cases.is_empty() {
        return Err(QcaError::NoCases);
    }
    let y = data.outcome_values(outcome);
    let sum_y = y.iter().fold(T::zero(), |a, &v| a + v);
    if sum_y <= T::zero() {
        return Err(QcaError::EmptyOutcome);
    }
    let mut rows = Vec::with_capacity(2 * data.k());
    for (idx, name) in data.conditions.iter().enumerate() {
        for negated in [false, true] {
            let x: Vec<T> = data
                .cases
                .iter()
                .map(|c| if negated { negate(c.conditions[idx]) } else { c.conditions[idx] })
                .collect();
            let (mut overlap, mut sum_x, mut out_x, mut out_overlap) = (T::zero(), T::zero(), T::zero(), T::zero());
            for (&xi, &yi) in x.iter().zip(&y) {
                let m = xi.min(yi);
                overlap += m;
                sum_x += xi;
                out_x += T::one() - xi;
                out_overlap += T::one() - m;
            }
            let consistency = (overlap / sum_y).as_f64();
            let coverage = (sum_x > T::zero()).then(|| (overlap / sum_x).as_f64());
            let relevance = (out_overlap > T::zero()).then(|| (out_x / out_overlap).as_f64());
            let necessary =
                consistency >= thresholds.consistency && relevance.is_some_and(|r| r >= thresholds.relevance);
            rows.push(NecessityRow {
                condition: if negated { format!("~{name}") } else { name.clone() },
                outcome,
                consistency,
                coverage,
                relevance,
                necessary,
            });
        }
    }
    Ok(rows)
}
