//! Lint alert counting over a generated crate, using the linter's
//! machine-readable JSON output.

use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use crate::proc::{run_cmd, tool_available, EnvPolicy};

use super::MetricsError;

/// Lint levels pinned so counts stay comparable across reports. Recorded in
/// every report that carries a lint count.
pub const LINT_PROFILE: &str = "clippy-default";

#[derive(Deserialize)]
struct CargoRecord {
    reason: String,
    message: Option<DiagnosticMessage>,
}

#[derive(Deserialize)]
struct DiagnosticMessage {
    level: String,
}

/// Runs clippy over the crate at `crate_dir` and sums warnings + errors.
/// A non-compiling crate is not an error here: the compile errors reported
/// by the linter pass count toward the total.
pub fn count_lint_alerts(crate_dir: &Path, target_dir: &Path) -> Result<u64, MetricsError> {
    if !tool_available("cargo", "--version") {
        return Err(MetricsError::LinterUnavailable("cargo not found on PATH".into()));
    }
    let out = run_cmd(
        "cargo",
        &["clippy", "--message-format=json", "--quiet"],
        Some(crate_dir),
        None,
        Some(Duration::from_secs(600)),
        EnvPolicy::Build,
        &[("CARGO_TARGET_DIR", &target_dir.display().to_string())],
    )
    .map_err(|e| MetricsError::LinterUnavailable(format!("failed to launch clippy: {e}")))?;
    if out.stdout.is_empty() && !out.success() {
        return Err(MetricsError::LinterUnavailable(format!(
            "clippy produced no diagnostics and failed: {}",
            out.stderr_text()
        )));
    }
    Ok(count_from_json_lines(&out.stdout_text()))
}

/// Counts `compiler-message` records at warning or error level. Summary
/// records ("N warnings emitted") and failure notes carry other levels or
/// reasons and are excluded.
pub fn count_from_json_lines(json_lines: &str) -> u64 {
    let mut count = 0;
    for line in json_lines.lines() {
        let Ok(rec) = serde_json::from_str::<CargoRecord>(line) else {
            continue;
        };
        if rec.reason != "compiler-message" {
            continue;
        }
        if let Some(msg) = rec.message {
            if msg.level == "warning" || msg.level == "error" {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_warnings_and_errors_only() {
        let lines = concat!(
            r#"{"reason":"compiler-message","message":{"level":"warning","message":"unneeded return"}}"#,
            "\n",
            r#"{"reason":"compiler-message","message":{"level":"error","message":"mismatched types"}}"#,
            "\n",
            r#"{"reason":"compiler-message","message":{"level":"failure-note","message":"see rustc --explain"}}"#,
            "\n",
            r#"{"reason":"build-finished","success":false}"#,
            "\n",
            "not json\n",
        );
        assert_eq!(count_from_json_lines(lines), 2);
    }

    #[test]
    fn empty_stream_counts_zero() {
        assert_eq!(count_from_json_lines(""), 0);
    }
}
