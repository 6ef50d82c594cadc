//! Machine-readable pass/fail records shared by the oracle comparisons and
//! the end-to-end verification scenarios.

/// One named comparison: a measured discrepancy against a pinned tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Sup-norm or relative discrepancy; which one is stated in `name`'s docs.
    pub discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Wall-clock seconds; carried in the JSONL log stream only, never in
    /// the deterministic data files.
    pub runtime_s: f64,
}

impl CheckReport {
    /// passed ⇔ discrepancy ≤ tolerance (and finite).
    pub fn new(name: impl Into<String>, discrepancy: f64, tolerance: f64, runtime_s: f64) -> Self {
        CheckReport {
            name: name.into(),
            passed: discrepancy.is_finite() && discrepancy <= tolerance,
            discrepancy,
            tolerance,
            runtime_s,
        }
    }

    /// JSON line including runtime; one record per line, for reports.jsonl.
    pub fn jsonl(&self) -> String {
        format!(
            "{{\"name\":\"{}\",\"discrepancy\":{:e},\"tolerance\":{:e},\"passed\":{},\"runtime_s\":{:.3e}}}",
            escape(&self.name),
            self.discrepancy,
            self.tolerance,
            self.passed,
            self.runtime_s
        )
    }

    /// Deterministic CSV row (no runtime): `name,discrepancy,tolerance,passed`.
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:e},{:e},{}",
            self.name, self.discrepancy, self.tolerance, self.passed
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
