//! Check records, the verification report, and their text forms.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// One compared quantity. `pass` holds iff `rel_err ≤ tolerance` and both sides are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `rel_err = |lhs - rhs| / scale`.
    pub fn compare(name: impl Into<String>, lhs: f64, rhs: f64, scale: f64, tolerance: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        Self::with_errors(name, lhs, rhs, abs_err, abs_err / scale, tolerance)
    }

    /// `rel_err = |lhs - rhs| / max(|rhs|, tiny)`.
    pub fn relative(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::compare(name, lhs, rhs, rhs.abs().max(f64::MIN_POSITIVE), tolerance)
    }

    /// A precomputed error measure reported against zero.
    pub fn error(name: impl Into<String>, err: f64, tolerance: f64) -> Self {
        Self::with_errors(name, err, 0.0, err, err, tolerance)
    }

    /// `lhs ≥ bound`, with `rel_err = bound / lhs`, passing iff `lhs ≥ bound`.
    pub fn at_least(name: impl Into<String>, lhs: f64, bound: f64) -> Self {
        let pass = lhs.is_finite() && lhs >= bound;
        Check {
            name: name.into(),
            lhs,
            rhs: bound,
            abs_err: (lhs - bound).abs(),
            rel_err: bound / lhs,
            tolerance: 1.0,
            pass,
        }
    }

    /// `lo ≤ lhs ≤ hi`, with the distance to the interval as the error.
    pub fn within(name: impl Into<String>, lhs: f64, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let abs_err = (lhs - mid).abs();
        Check {
            name: name.into(),
            lhs,
            rhs: mid,
            abs_err,
            rel_err: abs_err / half,
            tolerance: 1.0,
            pass: lhs.is_finite() && (lo..=hi).contains(&lhs),
        }
    }

    pub fn with_errors(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        abs_err: f64,
        rel_err: f64,
        tolerance: f64,
    ) -> Self {
        Check {
            name: name.into(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            tolerance,
            pass: lhs.is_finite() && rhs.is_finite() && rel_err <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub group: crate::group_model::GroupDescriptor,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Fixed-width summary, one line per check.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let width = self.checks().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        writeln!(
            out,
            "{:<width$}  {:>23}  {:>23}  {:>9}  {:>9}  result",
            "check", "lhs", "rhs", "rel_err", "tol"
        )?;
        for c in self.checks() {
            writeln!(
                out,
                "{:<width$}  {:>23.16e}  {:>23.16e}  {:>9.2e}  {:>9.2e}  {}",
                c.name,
                c.lhs,
                c.rhs,
                c.rel_err,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        let failed = self.checks().filter(|c| !c.pass).count();
        writeln!(
            out,
            "{} checks, {} failed: {}",
            self.checks().count(),
            failed,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// CSV text of a float with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
