//! Direct-method calibration of raw scores into set memberships.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::QcaError;

/// Log-odds assigned at the full-membership and full-non-membership anchors.
pub const ANCHOR_LOG_ODDS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAnchors<T = f64> {
    pub full_non_membership: T,
    pub crossover: T,
    pub full_membership: T,
}

impl<T: Scalar> CalibrationAnchors<T> {
    pub fn new(full_non_membership: T, crossover: T, full_membership: T) -> Result<Self, QcaError> {
        if !(full_non_membership < crossover && crossover < full_membership) {
            return Err(QcaError::Anchors(format!(
                "need full_non_membership < crossover < full_membership, got {full_non_membership}, {crossover}, {full_membership}"
            )));
        }
        Ok(CalibrationAnchors {
            full_non_membership,
            crossover,
            full_membership,
        })
    }
}

impl Default for CalibrationAnchors<f64> {
    fn default() -> Self {
        CalibrationAnchors {
            full_non_membership: 0.1,
            crossover: 0.499,
            full_membership: 0.9,
        }
    }
}

/// Logistic membership with log-odds scaled to +-3 at the outer anchors.
pub fn calibrate_direct<T: Scalar>(score: T, anchors: &CalibrationAnchors<T>) -> T {
    let c = anchors.crossover;
    let k = T::lit(ANCHOR_LOG_ODDS);
    let log_odds = if score >= c {
        k * (score - c) / (anchors.full_membership - c)
    } else {
        k * (score - c) / (c - anchors.full_non_membership)
    };
    T::one() / (T::one() + (-log_odds).exp())
}

/// Set negation.
pub fn negate<T: Scalar>(membership: T) -> T {
    T::one() - membership
}
