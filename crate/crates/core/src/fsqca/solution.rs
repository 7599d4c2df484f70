use serde::{Deserialize, Serialize};

use super::{negate, Implicant, Outcome, QcaData, QcaError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermMetrics {
    pub expression: String,
    pub implicant: Implicant,
    /// `None` when no case has positive membership in the term.
    pub consistency: Option<f64>,
    pub raw_coverage: f64,
    /// Coverage lost when this term is dropped from the solution.
    pub unique_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub terms: Vec<TermMetrics>,
    pub consistency: Option<f64>,
    pub coverage: f64,
    /// Cases with solution membership above 0.5.
    pub covered_cases: Vec<String>,
}

fn term_membership(term: &Implicant, memberships: &[f64]) -> f64 {
    memberships
        .iter()
        .enumerate()
        .filter(|(i, _)| (term.mask >> i) & 1 == 1)
        .fold(1.0f64, |acc, (i, &x)| {
            let lit = if (term.value >> i) & 1 == 1 { x } else { negate(x) };
            acc.min(lit)
        })
}

/// Consistency and coverage of a set membership vector against the outcome.
fn fit(membership: &[f64], y: &[f64], sum_y: f64) -> (Option<f64>, f64) {
    let overlap: f64 = membership.iter().zip(y).map(|(m, v)| m.min(*v)).sum();
    let total: f64 = membership.iter().sum();
    ((total > 0.0).then(|| overlap / total), overlap / sum_y)
}

fn union(per_term: &[Vec<f64>], skip: Option<usize>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|c| {
            per_term
                .iter()
                .enumerate()
                .filter(|(t, _)| Some(*t) != skip)
                .fold(0.0f64, |acc, (_, m)| acc.max(m[c]))
        })
        .collect()
}

/// Term and solution consistency and coverage for `outcome`.
pub fn solution_metrics(terms: &[Implicant], data: &QcaData<f64>, outcome: Outcome) -> Result<Solution, QcaError> {
    if terms.is_empty() {
        return Err(QcaError::NoTerms);
    }
    if data.cases.is_empty() {
        return Err(QcaError::NoCases);
    }
    let y = data.outcome_values(outcome);
    let sum_y: f64 = y.iter().sum();
    if sum_y <= 0.0 {
        return Err(QcaError::EmptyOutcome);
    }
    let n = data.cases.len();
    let per_term: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| data.cases.iter().map(|c| term_membership(t, &c.conditions)).collect())
        .collect();
    let whole = union(&per_term, None, n);
    let (consistency, coverage) = fit(&whole, &y, sum_y);
    let metrics = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (cons, raw) = fit(&per_term[i], &y, sum_y);
            let without = if terms.len() == 1 {
                0.0
            } else {
                fit(&union(&per_term, Some(i), n), &y, sum_y).1
            };
            TermMetrics {
                expression: t.expression(&data.conditions),
                implicant: *t,
                consistency: cons,
                raw_coverage: raw,
                unique_coverage: (coverage - without).max(0.0),
            }
        })
        .collect();
    let covered_cases = data
        .cases
        .iter()
        .zip(&whole)
        .filter(|(_, &m)| m > 0.5)
        .map(|(c, _)| c.company_id.clone())
        .collect();
    Ok(Solution {
        terms: metrics,
        consistency,
        coverage,
        covered_cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsqca::CaseMembership;
    use rand::{Rng, SeedableRng};

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn crisp_coverage_counts() {
        // Three positive cases: one only in A, one in A and B, one only in B.
        let cases = vec![
            CaseMembership::with_high_outcome("x", vec![1.0, 0.0], 1.0),
            CaseMembership::with_high_outcome("y", vec![1.0, 1.0], 1.0),
            CaseMembership::with_high_outcome("z", vec![0.0, 1.0], 1.0),
            CaseMembership::with_high_outcome("w", vec![0.0, 0.0], 0.0),
        ];
        let data = QcaData::new(names(), cases).unwrap();
        let a = Implicant { mask: 0b01, value: 0b01 };
        let b = Implicant { mask: 0b10, value: 0b10 };
        let s = solution_metrics(&[a, b], &data, Outcome::High).unwrap();
        assert!((s.terms[0].raw_coverage - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.terms[0].unique_coverage - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.coverage, 1.0);
        assert_eq!(s.consistency, Some(1.0));
        assert_eq!(s.covered_cases, vec!["x", "y", "z"]);
        assert_eq!(s.terms[1].expression, "b");
        assert_eq!(solution_metrics(&[], &data, Outcome::High), Err(QcaError::NoTerms));
    }

    #[test]
    fn metric_ordering_invariants() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.random_range(3..30);
            let cases: Vec<_> = (0..n)
                .map(|i| {
                    CaseMembership::with_high_outcome(
                        format!("c{i}"),
                        vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
                        rng.random_range(0.05..1.0),
                    )
                })
                .collect();
            let data = QcaData::new(names(), cases).unwrap();
            let terms = [
                Implicant { mask: 0b01, value: 0b01 },
                Implicant { mask: 0b10, value: 0b00 },
            ];
            let s = solution_metrics(&terms, &data, Outcome::High).unwrap();
            for t in &s.terms {
                assert!(t.unique_coverage <= t.raw_coverage + 1e-12);
                assert!(t.raw_coverage <= s.coverage + 1e-12);
            }
            assert!(s.coverage <= 1.0 + 1e-12);
        }
    }
}
