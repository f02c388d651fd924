use std::fmt::Write as _;

use serde::Serialize;

/// One line of the machine-readable report table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub statistic: String,
    pub mean: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Result of one experiment. It passes iff the violation list is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_digest: String,
    pub seed: u64,
    pub trials: u64,
    pub rows: Vec<ReportRow>,
    pub violations: Vec<String>,
    /// Free-form lines such as pairing digests.
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, trials: u64) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            config_digest: String::new(),
            seed,
            trials,
            rows: Vec::new(),
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Adds a row; a failing row also records a violation.
    pub fn push(&mut self, scenario: impl Into<String>, statistic: impl Into<String>, mean: f64, stderr: f64, pass: bool) {
        let row = ReportRow { scenario: scenario.into(), statistic: statistic.into(), mean, stderr, pass };
        if !pass {
            self.violations.push(format!(
                "{} {}: mean {} stderr {}",
                row.scenario,
                row.statistic,
                fmt_num(mean),
                fmt_num(stderr)
            ));
        }
        self.rows.push(row);
    }

    /// Exact check with no standard error.
    pub fn push_exact(&mut self, scenario: impl Into<String>, statistic: impl Into<String>, value: f64, pass: bool) {
        self.push(scenario, statistic, value, 0.0, pass);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// Absorbs the rows, violations and notes of another report.
    pub fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,statistic,mean,stderr,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&r.scenario),
                csv_field(&r.statistic),
                fmt_num(r.mean),
                fmt_num(r.stderr),
                r.pass
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.experiment);
        let _ = writeln!(out, "config digest: {}", self.config_digest);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "trials: {}", self.trials);
        let _ = writeln!(out, "rows: {}", self.rows.len());
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for v in &self.violations {
            let _ = writeln!(out, "violation: {v}");
        }
        out
    }

    /// Summary followed by the table, separated by a blank line.
    pub fn render(&self) -> String {
        format!("{}\n{}", self.summary(), self.to_csv())
    }
}

/// Fixed formatting so identical runs produce identical bytes.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_rows_become_violations() {
        let mut r = ExperimentReport::new("x", 1, 10);
        r.push("a", "gain", 0.1, 0.01, true);
        assert!(r.passed());
        r.push("b", "gain", 0.5, 0.01, false);
        assert!(!r.passed());
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("x", 1, 10);
        r.push("v=0.5, singleton", "gain", 0.25, 0.0, true);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("scenario,statistic,mean,stderr,pass"));
        assert_eq!(lines.next(), Some("\"v=0.5, singleton\",gain,2.500000000e-1,0.000000000e0,true"));
    }
}
