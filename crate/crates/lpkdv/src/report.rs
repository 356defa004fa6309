//! Machine-readable verification reports.
//!
//! Reports are intended to be reproducible: with a fixed seed two runs must
//! produce byte-identical JSON except for the wallclock line, which is why
//! `wallclock_seconds` is serialised last.

use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub metric: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub cases: Vec<CaseReport>,
    pub wallclock_seconds: f64,
}

impl VerificationReport {
    pub fn new(suite: &str) -> Self {
        VerificationReport {
            schema: "1".into(),
            suite: suite.into(),
            cases: Vec::new(),
            wallclock_seconds: 0.0,
        }
    }

    /// Standard case: passes when `metric <= tolerance`.
    pub fn push(&mut self, name: &str, metric: f64, tolerance: f64, details: impl Into<String>) {
        let pass = metric.is_finite() && metric <= tolerance;
        self.cases.push(CaseReport {
            name: name.into(),
            metric,
            tolerance,
            pass,
            details: details.into(),
        });
    }

    /// Witness case: a deliberately broken input, passing when the metric
    /// *exceeds* the tolerance.
    pub fn push_witness(
        &mut self,
        name: &str,
        metric: f64,
        tolerance: f64,
        details: impl Into<String>,
    ) {
        let pass = metric.is_finite() && metric > tolerance;
        self.cases.push(CaseReport {
            name: name.into(),
            metric,
            tolerance,
            pass,
            details: format!("witness, passes when metric exceeds tolerance; {}", details.into()),
        });
    }

    /// Records a computation that failed outright.
    pub fn push_error(&mut self, name: &str, tolerance: f64, err: &Error) {
        self.cases.push(CaseReport {
            name: name.into(),
            metric: -1.0,
            tolerance,
            pass: false,
            details: format!("error: {} {}", err.code(), err),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> usize {
        self.cases.iter().filter(|c| !c.pass).count()
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.cases.extend(other.cases);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wallclock_is_the_last_field() {
        let mut r = VerificationReport::new("demo");
        r.push("alpha", 1e-12, 1e-9, "fine");
        r.wallclock_seconds = 0.25;
        let json = r.to_json();
        let lines: Vec<&str> = json.lines().collect();
        assert!(lines[lines.len() - 2].contains("wallclock_seconds"));
        assert!(json.starts_with("{\n  \"schema\": \"1\""));
    }

    #[test]
    fn witness_inverts_the_comparison() {
        let mut r = VerificationReport::new("demo");
        r.push_witness("broken", 0.5, 1e-2, "perturbed field");
        r.push_witness("too-quiet", 1e-5, 1e-2, "should have been loud");
        assert!(r.cases[0].pass);
        assert!(!r.cases[1].pass);
        assert_eq!(r.failed(), 1);
    }

    #[test]
    fn errors_fail_and_keep_the_code() {
        let mut r = VerificationReport::new("demo");
        r.push_error("exploded", 1e-9, &Error::PoleAtQ);
        assert!(!r.all_pass());
        assert!(r.cases[0].details.starts_with("error: POLE_AT_Q"));
    }

    #[test]
    fn non_finite_metrics_never_pass() {
        let mut r = VerificationReport::new("demo");
        r.push("nan", f64::NAN, 1e-9, "");
        assert!(!r.cases[0].pass);
    }
}
