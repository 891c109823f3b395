//! Scoring, distribution audits and dataset certification.

mod audit;
mod certify;
pub mod oracle;
mod score;

pub use audit::{audit_distribution, threshold_rows, AuditError, DistributionAudit, ThresholdRow};
pub use certify::{certify_dataset, CertifyReport, Finding, FindingKind};
pub use oracle::oracle_answer;
pub use score::{parse_predictions, score, score_instances, Cell, EvalReport, Prediction, ScoreError};
