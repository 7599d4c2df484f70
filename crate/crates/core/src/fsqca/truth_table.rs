use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::{negate, Outcome, QcaData, QcaError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTableRow {
    /// Bit `i` set means condition `i` is present.
    pub configuration: u32,
    /// Cases with membership above 0.5 in this configuration.
    pub case_count: usize,
    /// `sum min(m, y) / sum m`; `None` when no case has positive membership.
    pub consistency: Option<f64>,
    pub included: bool,
}

/// Membership of a case in a configuration: minimum over conditions of the
/// condition or its negation.
pub(crate) fn configuration_membership<T: Scalar>(memberships: &[T], configuration: u32) -> T {
    memberships.iter().enumerate().fold(T::one(), |acc, (i, &x)| {
        let lit = if (configuration >> i) & 1 == 1 { x } else { negate(x) };
        acc.min(lit)
    })
}

/// `unicorn*~b2c*platform`-style label for a full configuration.
pub fn configuration_label(conditions: &[String], configuration: u32) -> String {
    conditions
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if (configuration >> i) & 1 == 1 {
                c.clone()
            } else {
                format!("~{c}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// All `2^k` configuration rows, empty ones included (never included in the
/// minimization).
pub fn build_truth_table<T: Scalar>(
    data: &QcaData<T>,
    outcome: Outcome,
    consistency_threshold: f64,
    frequency_threshold: usize,
) -> Result<Vec<TruthTableRow>, QcaError> {
    let k = data.k();
    if k > super::MAX_CONDITIONS {
        return Err(QcaError::TooManyConditions(k));
    }
    let half = T::lit(0.5);
    Ok((0..(1u32 << k))
        .map(|configuration| {
            let (mut count, mut sum_m, mut sum_overlap) = (0usize, T::zero(), T::zero());
            for case in &data.cases {
                let m = configuration_membership(&case.conditions, configuration);
                if m > half {
                    count += 1;
                }
                sum_m += m;
                sum_overlap += m.min(case.outcome(outcome));
            }
            let consistency = (sum_m > T::zero()).then(|| (sum_overlap / sum_m).as_f64());
            let included = count >= frequency_threshold.max(1)
                && consistency.is_some_and(|c| c >= consistency_threshold - 1e-12);
            TruthTableRow {
                configuration,
                case_count: count,
                consistency,
                included,
            }
        })
        .collect())
}
