//! Idiomaticity metrics over translated programs: lint alert count, unsafe
//! token fraction, and dataset-level summaries.

pub mod lints;
pub mod unsafe_metric;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lints::{count_lint_alerts, LINT_PROFILE};
pub use unsafe_metric::{unsafe_fraction, unsafe_token_counts};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("linter unavailable: {0}")]
    LinterUnavailable(String),
    #[error("lex error: {0}")]
    Lex(#[from] crate::rustsrc::LexError),
    #[error("summarize requires at least one report")]
    EmptyInput,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdiomaticityReport {
    pub program: String,
    pub stage: String,
    pub lint_alert_count: u64,
    pub unsafe_fraction: f64,
    pub unsafe_free: bool,
    /// Verification attempts consumed across all fragments of the stage.
    pub attempts_used: u64,
    pub queries: u64,
    pub tokens: u64,
    pub lint_profile: String,
}

impl IdiomaticityReport {
    pub fn new(program: &str, stage: &str) -> Self {
        IdiomaticityReport {
            program: program.to_string(),
            stage: stage.to_string(),
            lint_alert_count: 0,
            unsafe_fraction: 0.0,
            unsafe_free: true,
            attempts_used: 0,
            queries: 0,
            tokens: 0,
            lint_profile: LINT_PROFILE.to_string(),
        }
    }

    pub fn set_unsafe_fraction(&mut self, fraction: f64) {
        self.unsafe_fraction = fraction;
        self.unsafe_free = fraction == 0.0;
    }
}

/// One program's outcome across both stages, the unit `summarize` works on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub program: String,
    /// Passed end-to-end verification for both stages.
    pub success: bool,
    pub idiomatic: Option<IdiomaticityReport>,
    pub unidiomatic: Option<IdiomaticityReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetSummary {
    pub programs: usize,
    pub success_rate: f64,
    pub unsafe_free_fraction: f64,
    pub avg_unsafe: f64,
    /// Lint alert count per successful program, ascending.
    pub lint_distribution: Vec<u64>,
}

/// Aggregates per-program records. Idiomatic-stage reports feed the unsafe
/// and lint statistics; programs without one count only toward success rate.
pub fn summarize(records: &[ProgramRecord]) -> Result<DatasetSummary, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let programs = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let reports: Vec<&IdiomaticityReport> =
        records.iter().filter_map(|r| r.idiomatic.as_ref()).collect();
    let (unsafe_free, avg_unsafe) = if reports.is_empty() {
        (0.0, 0.0)
    } else {
        let free = reports.iter().filter(|r| r.unsafe_free).count();
        let sum: f64 = reports.iter().map(|r| r.unsafe_fraction).sum();
        (free as f64 / reports.len() as f64, sum / reports.len() as f64)
    };
    let mut lints: Vec<u64> = reports.iter().map(|r| r.lint_alert_count).collect();
    lints.sort_unstable();
    Ok(DatasetSummary {
        programs,
        success_rate: successes as f64 / programs as f64,
        unsafe_free_fraction: unsafe_free,
        avg_unsafe,
        lint_distribution: lints,
    })
}

/// CSV rendering of a summary plus one row per record, documented in the
/// repository README.
pub fn summary_csv(records: &[ProgramRecord], summary: &DatasetSummary) -> String {
    let mut out = String::from("program,success,stage,lint_alert_count,unsafe_fraction,unsafe_free,attempts_used,queries,tokens\n");
    for rec in records {
        for report in [rec.unidiomatic.as_ref(), rec.idiomatic.as_ref()].into_iter().flatten() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                rec.program,
                rec.success,
                report.stage,
                report.lint_alert_count,
                report.unsafe_fraction,
                report.unsafe_free,
                report.attempts_used,
                report.queries,
                report.tokens
            ));
        }
    }
    out.push_str(&format!(
        "summary,,,{},{},{},,,\n",
        summary.lint_distribution.iter().sum::<u64>(),
        summary.avg_unsafe,
        summary.unsafe_free_fraction
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(stage: &str, unsafe_fraction: f64, lints: u64) -> IdiomaticityReport {
        let mut r = IdiomaticityReport::new("p", stage);
        r.set_unsafe_fraction(unsafe_fraction);
        r.lint_alert_count = lints;
        r
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(summarize(&[]), Err(MetricsError::EmptyInput)));
    }

    #[test]
    fn all_unsafe_free_gives_fraction_one() {
        let records: Vec<ProgramRecord> = (0..3)
            .map(|i| ProgramRecord {
                program: format!("p{i}"),
                success: true,
                idiomatic: Some(report("idiomatic", 0.0, 0)),
                unidiomatic: None,
            })
            .collect();
        let s = summarize(&records).unwrap();
        assert_eq!(s.unsafe_free_fraction, 1.0);
        assert_eq!(s.success_rate, 1.0);
    }

    #[test]
    fn mixed_three_of_four_success() {
        let mut records: Vec<ProgramRecord> = (0..4)
            .map(|i| ProgramRecord {
                program: format!("p{i}"),
                success: true,
                idiomatic: Some(report("idiomatic", 0.0, 1)),
                unidiomatic: None,
            })
            .collect();
        records[3].success = false;
        let s = summarize(&records).unwrap();
        assert_eq!(s.success_rate, 0.75);
    }

    #[test]
    fn unsafe_free_flag_tracks_fraction() {
        let mut r = IdiomaticityReport::new("p", "idiomatic");
        r.set_unsafe_fraction(0.0);
        assert!(r.unsafe_free);
        r.set_unsafe_fraction(0.25);
        assert!(!r.unsafe_free);
    }

    // Spreadsheet-checked: five reports with fractions 0 .5 .25 0 1 ->
    // mean .35; two unsafe-free of five -> .4; successes 4/5 -> .8.
    #[test]
    fn five_program_desk_dataset_matches_hand_computation() {
        let fractions = [0.0, 0.5, 0.25, 0.0, 1.0];
        let mut records = Vec::new();
        for (i, f) in fractions.iter().enumerate() {
            records.push(ProgramRecord {
                program: format!("p{i}"),
                success: i != 4,
                idiomatic: Some(report("idiomatic", *f, i as u64)),
                unidiomatic: Some(report("unidiomatic", 0.9, 10)),
            });
        }
        let s = summarize(&records).unwrap();
        assert_eq!(s.success_rate, 0.8);
        assert!((s.avg_unsafe - 0.35).abs() < 1e-12);
        assert!((s.unsafe_free_fraction - 0.4).abs() < 1e-12);
        assert_eq!(s.lint_distribution, vec![0, 1, 2, 3, 4]);
    }
}
