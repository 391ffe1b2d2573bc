use scriptlang::{ExecOutcome, ExecStatus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub kind: String,
    pub verdict: Verdict,
    pub message: String,
    /// The fallback "not the expected value" message, with no task-specific
    /// template or matched common mistake behind it.
    #[serde(default)]
    pub generic: bool,
}

impl CheckResult {
    pub fn pass(id: impl Into<String>, kind: &str) -> Self {
        Self::new(id, kind, Verdict::Pass, String::new())
    }

    pub fn fail(id: impl Into<String>, kind: &str, message: impl Into<String>) -> Self {
        Self::new(id, kind, Verdict::Fail, message.into())
    }

    pub fn skipped(id: impl Into<String>, kind: &str, reason: impl Into<String>) -> Self {
        Self::new(id, kind, Verdict::Skipped, reason.into())
    }

    fn new(id: impl Into<String>, kind: &str, verdict: Verdict, message: String) -> Self {
        Self {
            id: id.into(),
            kind: kind.to_string(),
            verdict,
            message,
            generic: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecSummary {
    pub status: ExecStatus,
    pub printed: String,
    pub figure_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExecSummary {
    pub fn of(outcome: &ExecOutcome) -> Self {
        Self {
            status: outcome.status,
            printed: outcome.printed.clone(),
            figure_count: outcome.figures.len(),
            error: outcome.error.as_ref().map(ToString::to_string),
        }
    }
}

/// Seeds of the student and reference runs. They always differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub student: u64,
    pub reference: u64,
}

const SEED_SPLIT: u64 = 0x9e37_79b9_7f4a_7c15;

impl Seeds {
    pub fn new(student: u64, reference: u64) -> Self {
        let reference = if reference == student {
            student ^ SEED_SPLIT
        } else {
            reference
        };
        Self { student, reference }
    }

    /// Reference seed derived from the student seed.
    pub fn from_student(student: u64) -> Self {
        Self::new(student, student ^ SEED_SPLIT)
    }

    pub fn fresh() -> Self {
        Self::new(rand::random(), rand::random())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub task: String,
    /// `pass` iff no check failed.
    pub verdict: Verdict,
    pub checks: Vec<CheckResult>,
    /// Absent when the submission was rejected before running.
    pub execution: Option<ExecSummary>,
    pub seeds: Seeds,
}

impl GradeReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.failed())
    }

    /// Human-readable rendering used by the command line.
    pub fn render_text(&self) -> String {
        let mut out = format!("{} {}\n", self.task, if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let tag = match c.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Skipped => "skip",
            };
            out.push_str(&format!("  [{tag}] {}\n", c.id));
            if c.verdict != Verdict::Pass {
                for line in c.message.lines() {
                    out.push_str(&format!("         {line}\n"));
                }
            }
        }
        out
    }
}
