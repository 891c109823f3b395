//! How unevenly the training split spreads over its instructions.

use serde::Serialize;
use thiserror::Error;

use crate::taskgen::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("training split is empty")]
    EmptyTrain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionAudit {
    /// Example counts per instruction, sorted descending. Instructions the
    /// spec declares but that drew no examples appear as zeros.
    pub counts: Vec<usize>,
    pub total: usize,
    /// `counts[i] / total`, same order.
    pub proportions: Vec<f64>,
}

impl DistributionAudit {
    pub fn from_counts(counts: &[usize], declared: usize) -> Result<Self, AuditError> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(AuditError::EmptyTrain);
        }
        let mut counts = counts.to_vec();
        if counts.len() < declared {
            counts.resize(declared, 0);
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let proportions = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(DistributionAudit { counts, total, proportions })
    }

    pub fn instructions(&self) -> usize {
        self.counts.len()
    }

    /// Share of instructions whose proportion is strictly below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        let below = self.proportions.iter().filter(|&&p| p < threshold).count();
        below as f64 / self.instructions() as f64
    }

    /// Number of instructions with proportion at or above `threshold`.
    pub fn effective_instruction_count(&self, threshold: f64) -> usize {
        self.proportions.iter().filter(|&&p| p >= threshold).count()
    }
}

pub fn audit_distribution(dataset: &Dataset) -> Result<DistributionAudit, AuditError> {
    let counts: Vec<usize> = dataset.instruction_census.values().copied().collect();
    DistributionAudit::from_counts(&counts, dataset.spec.num_instructions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub fraction_below: f64,
    pub effective_instruction_count: usize,
}

pub fn threshold_rows(audit: &DistributionAudit, thresholds: &[f64]) -> Vec<ThresholdRow> {
    thresholds
        .iter()
        .map(|&t| ThresholdRow {
            threshold: t,
            fraction_below: audit.fraction_below(t),
            effective_instruction_count: audit.effective_instruction_count(t),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::{build_dataset, DatasetSpec, TaskKind, TrainSize};

    #[test]
    fn uniform_allocation_has_nothing_below_half_share() {
        let mut spec = DatasetSpec::defaults(TaskKind::Replace);
        spec.num_instructions = 40;
        spec.size = TrainSize::PerInstruction(5);
        spec.test_size = 10;
        spec.test_instructions = 10;
        let a = audit_distribution(&build_dataset(&spec).unwrap()).unwrap();
        assert_eq!(a.instructions(), 40);
        assert_eq!(a.fraction_below(1.0 / 80.0), 0.0);
        assert_eq!(a.effective_instruction_count(1.0 / 40.0), 40);
    }

    #[test]
    fn single_instruction() {
        let a = DistributionAudit::from_counts(&[7], 1).unwrap();
        assert_eq!(a.proportions, vec![1.0]);
    }

    #[test]
    fn missing_instructions_count_as_zero() {
        let a = DistributionAudit::from_counts(&[1, 9], 4).unwrap();
        assert_eq!(a.counts, vec![9, 1, 0, 0]);
        assert_eq!(a.fraction_below(0.05), 0.5);
        assert_eq!(a.effective_instruction_count(0.1), 2);
    }

    #[test]
    fn proportions_reconstruct_counts() {
        let counts = [3, 500, 17, 0, 480];
        let a = DistributionAudit::from_counts(&counts, 5).unwrap();
        assert!((a.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (p, c) in a.proportions.iter().zip(&a.counts) {
            assert_eq!((p * a.total as f64).round() as usize, *c);
        }
        assert!(a.proportions.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn empty_train_is_rejected() {
        assert_eq!(DistributionAudit::from_counts(&[], 3), Err(AuditError::EmptyTrain));
    }
}
