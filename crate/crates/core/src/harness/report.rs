use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::Report;
use crate::error::Result;

pub(crate) use crate::density::csv_field;

/// Human-readable report text, ending with the `VERDICT:` line.
pub fn render(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", report.config.name);
    let _ = writeln!(out, "config: {}", report.config.echo());
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} [{}] {}: {} ({})",
            c.claim,
            if c.pass { "PASS" } else { "FAIL" },
            c.label,
            c.measured,
            c.anchor
        );
    }
    let _ = writeln!(out, "wall-clock: {:.3} s", report.elapsed.as_secs_f64());
    let _ = writeln!(out, "VERDICT: {}", report.verdict());
    out
}

/// The CSV written next to a report file.
pub fn csv_path(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

/// Writes the text report to `path` and the CSV next to it.
pub fn emit(report: &Report, path: &Path) -> Result<PathBuf> {
    std::fs::write(path, render(report))?;
    let csv = csv_path(path);
    std::fs::write(&csv, &report.csv)?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Check, ExperimentConfig};

    fn report(pass: bool) -> Report {
        Report {
            config: ExperimentConfig::defaults("dual-law").unwrap(),
            checks: vec![Check {
                claim: "C2".into(),
                anchor: "a".into(),
                label: "l".into(),
                pass,
                measured: "m".into(),
            }],
            csv: "a,b\n1,2\n".into(),
            elapsed: std::time::Duration::from_millis(5),
        }
    }

    #[test]
    fn emits_text_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.txt");
        let csv = emit(&report(true), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().any(|l| l == "VERDICT: PASS"));
        assert_eq!(std::fs::read_to_string(csv).unwrap(), "a,b\n1,2\n");
        assert!(render(&report(false)).ends_with("VERDICT: FAIL\n"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit(&report(true), Path::new("/nonexistent-dir/x/r.txt")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn quotes_fields() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("ab"), "ab");
    }
}
