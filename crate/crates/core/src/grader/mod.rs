//! Assessment of student submissions.
//!
//! [`Grader::grade`] runs a fixed pipeline over one submission:
//!
//! 1. parse the source;
//! 2. reject banned functions;
//! 3. execute the student script through the task's driver;
//! 4. check protected inputs in the final workspace;
//! 5. run the reference script with a different seed;
//! 6. evaluate the manifest checks in order, trying the task's common
//!    mistakes on the first value mismatch of each variable.
//!
//! Script errors are reported with the interpreter's message. The protected
//! inputs are still checked against the partial workspace, and every later
//! check is marked skipped.

pub mod checks;
pub mod compare;
pub mod driver;
pub mod figures;
pub mod gates;
pub mod protocol;
pub mod report;

use std::collections::HashSet;
use std::sync::Arc;

use indexmap::IndexMap;
use scriptlang::{ExecLimits, ExecOutcome, Program, Registry, Value};

pub use checks::{CheckRule, CheckSpec, DEFAULT_EPS_MULTIPLE};
pub use compare::{compare_close, compare_exact, compare_mse, Comparison, Mismatch};
pub use driver::{DriverRegistry, DriverRun, ScriptDriver, StopWaitDriver, StopWaitParams, TaskDriver};
pub use figures::{compare_figures, ValueRule};
pub use gates::{check_banned, check_protected_inputs};
pub use protocol::{check_protocol_trace, ProtocolVerdict, Rule, Violation};
pub use report::{CheckResult, ExecSummary, GradeReport, Seeds, Verdict};

use crate::exercise::{profiles, TaskManifest};

pub const EXECUTION_ID: &str = "execution";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GradeError {
    /// A fault in the task or the platform, never the student's.
    #[error("internal grading error in {task}: {message}")]
    Internal { task: String, message: String },
}

/// Builtin profiles, task drivers and execution limits shared by every grade.
#[derive(Clone)]
pub struct Grader {
    profiles: IndexMap<String, Arc<Registry>>,
    drivers: DriverRegistry,
    limits: ExecLimits,
}

impl Default for Grader {
    fn default() -> Self {
        Self::new(profiles::standard(), DriverRegistry::standard(), ExecLimits::default())
    }
}

impl Grader {
    pub fn new(profiles: IndexMap<String, Arc<Registry>>, drivers: DriverRegistry, limits: ExecLimits) -> Self {
        Self {
            profiles,
            drivers,
            limits,
        }
    }

    pub fn with_limits(mut self, limits: ExecLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn registry(&self, profile: &str) -> Option<&Arc<Registry>> {
        self.profiles.get(profile)
    }

    pub fn drivers(&self) -> &DriverRegistry {
        &self.drivers
    }

    pub fn limits(&self) -> ExecLimits {
        self.limits
    }

    fn internal(task: &TaskManifest, message: impl Into<String>) -> GradeError {
        GradeError::Internal {
            task: task.key(),
            message: message.into(),
        }
    }

    fn execute(&self, task: &TaskManifest, program: &Program, seed: u64) -> Result<DriverRun, GradeError> {
        let registry = self
            .registry(&task.profile)
            .ok_or_else(|| Self::internal(task, format!("unknown profile '{}'", task.profile)))?;
        let driver = self
            .drivers
            .get(&task.driver.name)
            .ok_or_else(|| Self::internal(task, format!("unknown driver '{}'", task.driver.name)))?;
        driver
            .run(program, registry, self.limits.with_seed(seed), &task.driver.params)
            .map_err(|m| Self::internal(task, m))
    }

    /// What the Run button does: execute the source under the task's
    /// profile and driver. Parse failures become script-error outcomes.
    pub fn run(&self, task: &TaskManifest, source: &str, seed: u64) -> Result<DriverRun, GradeError> {
        match scriptlang::parse_source(source) {
            Ok(program) => self.execute(task, &program, seed),
            Err(e) => Ok(DriverRun {
                outcome: ExecOutcome::from_error(e),
                protocol: None,
            }),
        }
    }

    /// Runs `source` (a reference or alternate script) and requires success.
    fn run_trusted(&self, task: &TaskManifest, what: &str, source: &str, seed: u64) -> Result<DriverRun, GradeError> {
        let run = self.run(task, source, seed)?;
        match &run.outcome.error {
            None => Ok(run),
            Some(e) => Err(Self::internal(task, format!("{what} failed: {e}"))),
        }
    }

    pub fn grade(&self, task: &TaskManifest, source: &str, seeds: Seeds) -> Result<GradeReport, GradeError> {
        let seeds = Seeds::new(seeds.student, seeds.reference);
        let mut results = Vec::new();
        let protected = task.protected_values();

        let program = match scriptlang::parse_source(source) {
            Ok(p) => p,
            Err(e) => {
                let outcome = ExecOutcome::from_error(e);
                if !task.banned.is_empty() {
                    results.push(skipped_gate(gates::BANNED_ID));
                }
                results.push(execution_result(&outcome));
                return Ok(self.finish(task, results, Some(&outcome), seeds, true));
            }
        };

        if !task.banned.is_empty() {
            let r = check_banned(&program, &task.banned, task.banned_message.as_deref());
            let failed = r.failed();
            results.push(r);
            if failed {
                results.push(CheckResult::skipped(
                    EXECUTION_ID,
                    EXECUTION_ID,
                    "Not run: the script uses a banned function.",
                ));
                return Ok(self.finish(task, results, None, seeds, true));
            }
        }

        let student = self.execute(task, &program, seeds.student)?;
        results.push(execution_result(&student.outcome));
        // A failed run still leaves a partial workspace; a deleted or altered
        // input is often the cause of the failure, so it is reported too.
        let mut aborted = !student.outcome.is_ok();
        if !protected.is_empty() {
            let r = check_protected_inputs(&student.outcome.workspace, &protected);
            aborted |= r.failed();
            results.push(r);
        }
        if aborted {
            return Ok(self.finish(task, results, Some(&student.outcome), seeds, true));
        }

        let reference = self.run_trusted(task, "reference script", &task.reference, seeds.reference)?;
        let mut ctx = CheckContext {
            grader: self,
            task,
            student: &student,
            reference: &reference,
            seed: seeds.reference,
            missing: HashSet::new(),
            mistakes_tried: HashSet::new(),
        };
        for spec in &task.checks {
            let r = ctx.evaluate(spec)?;
            results.push(r);
        }
        Ok(self.finish(task, results, Some(&student.outcome), seeds, false))
    }

    fn finish(
        &self,
        task: &TaskManifest,
        mut results: Vec<CheckResult>,
        outcome: Option<&ExecOutcome>,
        seeds: Seeds,
        aborted: bool,
    ) -> GradeReport {
        if aborted {
            let done: HashSet<String> = results.iter().map(|r| r.id.clone()).collect();
            let reason = "Not checked because an earlier step failed.";
            if !task.protected.is_empty() && !done.contains(gates::PROTECTED_ID) {
                results.push(skipped_gate(gates::PROTECTED_ID));
            }
            for spec in &task.checks {
                results.push(CheckResult::skipped(spec.id(), spec.rule.kind(), reason));
            }
        }
        let verdict = if results.iter().any(CheckResult::failed) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        GradeReport {
            task: task.key(),
            verdict,
            checks: results,
            execution: outcome.map(ExecSummary::of),
            seeds,
        }
    }
}

fn skipped_gate(id: &str) -> CheckResult {
    CheckResult::skipped(id, id, "Not checked because an earlier step failed.")
}

fn execution_result(outcome: &ExecOutcome) -> CheckResult {
    match &outcome.error {
        None => CheckResult::pass(EXECUTION_ID, EXECUTION_ID),
        Some(e) => CheckResult::fail(EXECUTION_ID, EXECUTION_ID, e.to_string()),
    }
}

struct CheckContext<'a> {
    grader: &'a Grader,
    task: &'a TaskManifest,
    student: &'a DriverRun,
    reference: &'a DriverRun,
    seed: u64,
    missing: HashSet<String>,
    mistakes_tried: HashSet<String>,
}

/// Which comparison a variable check uses.
#[derive(Clone, Copy)]
enum ValueCheck {
    Exact,
    Close(f64),
    Mse(f64),
}

impl ValueCheck {
    fn compare(self, student: &Value, reference: &Value) -> Comparison {
        match self {
            ValueCheck::Exact => compare_exact(student, reference),
            ValueCheck::Close(m) => compare_close(student, reference, m),
            ValueCheck::Mse(t) => compare_mse(student, reference, t),
        }
    }
}

impl CheckContext<'_> {
    fn reference_value(&self, var: &str) -> Result<&Value, GradeError> {
        self.reference
            .outcome
            .workspace
            .get(var)
            .ok_or_else(|| Grader::internal(self.task, format!("the reference script does not define '{var}'")))
    }

    fn evaluate(&mut self, spec: &CheckSpec) -> Result<CheckResult, GradeError> {
        let id = spec.id();
        let kind = spec.rule.kind();
        match &spec.rule {
            CheckRule::VarExists { var } => {
                self.reference_value(var)?;
                if self.student.outcome.workspace.contains(var) {
                    Ok(CheckResult::pass(id, kind))
                } else {
                    self.missing.insert(var.clone());
                    Ok(CheckResult::fail(id, kind, gates::missing_message(var)))
                }
            }
            CheckRule::VarEquals { var } => self.value_check(spec, var, ValueCheck::Exact),
            CheckRule::VarClose { var, eps_multiple } => self.value_check(spec, var, ValueCheck::Close(*eps_multiple)),
            CheckRule::VarCloseMse { var, mse_tolerance } => {
                self.value_check(spec, var, ValueCheck::Mse(*mse_tolerance))
            }
            CheckRule::FigureMatch {
                figure,
                eps_multiple,
                mse_tolerance,
            } => {
                let rule = match mse_tolerance {
                    Some(t) => ValueRule::Mse { tolerance: *t },
                    None => ValueRule::Close {
                        eps_multiple: *eps_multiple,
                    },
                };
                let reference = &self.reference.outcome.figures;
                if let Some(k) = figure {
                    if *k > reference.len() {
                        return Err(Grader::internal(
                            self.task,
                            format!("the reference script draws no figure {k}"),
                        ));
                    }
                }
                let c = compare_figures(&self.student.outcome.figures, reference, *figure, rule);
                if c.passed() {
                    return Ok(CheckResult::pass(id, kind));
                }
                let message = match &spec.message {
                    Some(t) => format!("{}\n{}", checks::render(t, &[]), c.detail),
                    None => c.detail,
                };
                Ok(CheckResult::fail(id, kind, message))
            }
            CheckRule::ProtocolTrace => {
                let (trace, cfg) = self
                    .student
                    .protocol
                    .as_ref()
                    .ok_or_else(|| Grader::internal(self.task, "protocol_trace needs the stopwait driver"))?;
                let verdict = check_protocol_trace(trace, cfg);
                if verdict.passed() {
                    return Ok(CheckResult::pass(id, kind));
                }
                let mut lines = verdict.messages();
                if let Some(t) = &spec.message {
                    lines.insert(0, checks::render(t, &[]));
                }
                Ok(CheckResult::fail(id, kind, lines.join("\n")))
            }
        }
    }

    fn value_check(&mut self, spec: &CheckSpec, var: &str, how: ValueCheck) -> Result<CheckResult, GradeError> {
        let id = spec.id();
        let kind = spec.rule.kind();
        let reference = self.reference_value(var)?;
        if self.missing.contains(var) {
            return Ok(CheckResult::skipped(
                id,
                kind,
                format!("Not checked because '{var}' is missing."),
            ));
        }
        let Some(student) = self.student.outcome.workspace.get(var) else {
            self.missing.insert(var.to_string());
            return Ok(CheckResult::fail(id, kind, gates::missing_message(var)));
        };
        let c = how.compare(student, reference);
        if c.passed() {
            return Ok(CheckResult::pass(id, kind));
        }
        let observed = compare::summary(student);
        let expected = compare::summary(reference);
        let fill = |t: &str| checks::render(t, &[("var", var), ("observed", &observed), ("expected", &expected)]);
        if self.mistakes_tried.insert(var.to_string()) {
            if let Some(m) = self.match_mistake(var, student, how) {
                return Ok(CheckResult::fail(id, kind, fill(&m)));
            }
        }
        match &spec.message {
            Some(t) => Ok(CheckResult::fail(id, kind, format!("{}\n{}", fill(t), c.detail))),
            None => {
                let mut r = CheckResult::fail(
                    id,
                    kind,
                    format!("The variable {var} does not have the expected value. {}", c.detail),
                );
                r.generic = true;
                Ok(r)
            }
        }
    }

    /// The message of the first alternate script whose `var` matches the
    /// student's value. Alternates that fail to run are ignored.
    fn match_mistake(&self, var: &str, student: &Value, how: ValueCheck) -> Option<String> {
        self.task.mistakes.iter().filter(|m| m.var == var).find_map(|m| {
            let run = self.grader.run(self.task, &m.source, self.seed).ok()?;
            if !run.outcome.is_ok() {
                return None;
            }
            let alt = run.outcome.workspace.get(var)?;
            how.compare(student, alt).passed().then(|| m.message.clone())
        })
    }
}
