//! Check reports and their deterministic text and JSON renderings.
//!
//! JSON output is assembled by hand so that floating-point fields are
//! always printed with 17 significant digits, making byte-identical output
//! a property of the computation alone. Text tables round to 3 significant
//! digits.

use std::fmt;

/// Outcome of one check. Audit-mode checks are always `Reported`; they
/// never fail a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Reported,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Reported => "reported",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Record of one executed check.
///
/// `max_abs_residual` is the worst absolute residual seen over all sampled
/// points and frames. A check that could not be evaluated at some sample
/// (for example a singular metric in a user spec) reports `f64::MAX` with
/// the diagnostic appended to the description. The verdict is `Pass`
/// exactly when the residual does not exceed the tolerance; a residual
/// equal to the tolerance passes.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_id: String,
    pub description: String,
    pub points_sampled: usize,
    pub seed: u64,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckReport {
    /// Build a report whose verdict follows from residual and tolerance.
    pub fn graded(
        check_id: impl Into<String>,
        description: impl Into<String>,
        points_sampled: usize,
        seed: u64,
        max_abs_residual: f64,
        tolerance: f64,
    ) -> CheckReport {
        let verdict = if max_abs_residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckReport {
            check_id: check_id.into(),
            description: description.into(),
            points_sampled,
            seed,
            max_abs_residual,
            tolerance,
            verdict,
        }
    }

    /// Build an audit report: residuals are recorded, never asserted.
    pub fn reported(
        check_id: impl Into<String>,
        description: impl Into<String>,
        points_sampled: usize,
        seed: u64,
        max_abs_residual: f64,
        tolerance: f64,
    ) -> CheckReport {
        CheckReport {
            check_id: check_id.into(),
            description: description.into(),
            points_sampled,
            seed,
            max_abs_residual,
            tolerance,
            verdict: Verdict::Reported,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// 17 significant digits, scientific notation; total order over finite
/// values and stable across platforms.
pub fn fmt_real_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// 3 significant digits for text tables.
pub fn fmt_real_short(x: f64) -> String {
    format!("{x:.2e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn json_object(report: &CheckReport) -> String {
    format!(
        "{{\"check_id\":\"{}\",\"description\":\"{}\",\"points_sampled\":{},\"seed\":{},\"max_abs_residual\":{},\"tolerance\":{},\"verdict\":\"{}\"}}",
        json_escape(&report.check_id),
        json_escape(&report.description),
        report.points_sampled,
        report.seed,
        fmt_real_full(report.max_abs_residual),
        fmt_real_full(report.tolerance),
        report.verdict
    )
}

/// Render reports as a JSON array, one object per line, trailing newline.
pub fn render_json(reports: &[CheckReport]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&json_object(r));
        if i + 1 < reports.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// Render reports as an aligned text table. `mode_of` supplies the mode
/// column, which is registry information rather than part of the report.
pub fn render_text(reports: &[CheckReport], mode_of: &dyn Fn(&CheckReport) -> String) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:<18} {:>7} {:>10} {:>10}  {}\n",
        "check", "mode", "points", "residual", "tol", "verdict"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<16} {:<18} {:>7} {:>10} {:>10}  {}\n",
            r.check_id,
            mode_of(r),
            r.points_sampled,
            fmt_real_short(r.max_abs_residual),
            fmt_real_short(r.tolerance),
            r.verdict
        ));
        if r.verdict == Verdict::Fail {
            out.push_str(&format!("    {}\n", r.description));
        }
    }
    out
}
