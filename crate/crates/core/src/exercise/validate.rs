//! Authoring rules checked by running a task's own scripts.

use serde::{Deserialize, Serialize};

use super::manifest::{static_problems, TaskKind, TaskManifest};
use crate::grader::{GradeReport, Grader, Seeds};

/// Seed pairs every rule is exercised with, so tolerance choices that only
/// work for one noise realisation are caught.
pub const VALIDATION_SEEDS: [Seeds; 2] = [
    Seeds {
        student: 11,
        reference: 12,
    },
    Seeds {
        student: 2024,
        reference: 7,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub task: String,
    pub rules: Vec<RuleOutcome>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.rules.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RuleOutcome> {
        self.rules.iter().filter(|r| !r.passed)
    }
}

fn outcome(rule: &str, result: Result<(), String>) -> RuleOutcome {
    RuleOutcome {
        rule: rule.to_string(),
        passed: result.is_ok(),
        detail: result.err().unwrap_or_default(),
    }
}

fn first_failure(r: &GradeReport) -> String {
    r.failures()
        .next()
        .map(|c| format!("{}: {}", c.id, c.message))
        .unwrap_or_default()
}

pub fn validate_manifest(m: &TaskManifest, grader: &Grader) -> ValidationReport {
    let mut rules = Vec::new();
    let problems = static_problems(m, grader);
    rules.push(outcome(
        "manifest-structure",
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        },
    ));
    if !problems.is_empty() {
        return ValidationReport { task: m.key(), rules };
    }

    rules.push(outcome(
        "starter-executes",
        match grader.run(m, &m.starter, VALIDATION_SEEDS[0].student) {
            Ok(run) => match run.outcome.error {
                None => Ok(()),
                Some(e) => Err(e.to_string()),
            },
            Err(e) => Err(e.to_string()),
        },
    ));

    rules.push(outcome(
        "reference-passes",
        VALIDATION_SEEDS
            .iter()
            .try_for_each(|&s| match grader.grade(m, &m.reference, s) {
                Ok(r) if r.passed() => Ok(()),
                Ok(r) => Err(format!("seeds {}/{}: {}", s.student, s.reference, first_failure(&r))),
                Err(e) => Err(e.to_string()),
            }),
    ));

    if m.kind == TaskKind::Overview {
        rules.push(outcome(
            "overview-starter-is-reference",
            if m.starter == m.reference {
                Ok(())
            } else {
                Err("an overview task hands out its reference solution as starter code".into())
            },
        ));
    } else {
        rules.push(outcome(
            "starter-fails-specifically",
            VALIDATION_SEEDS
                .iter()
                .try_for_each(|&s| match grader.grade(m, &m.starter, s) {
                    Ok(r) if r.passed() => Err("the starter code already passes every check".into()),
                    Ok(r) if r.failures().all(|c| c.generic) => Err(format!(
                        "the starter code only gets generic feedback: {}",
                        first_failure(&r)
                    )),
                    Ok(_) => Ok(()),
                    Err(e) => Err(e.to_string()),
                }),
        ));
    }

    rules.push(outcome(
        "mistakes-run",
        m.mistakes
            .iter()
            .try_for_each(|mk| match grader.run(m, &mk.source, VALIDATION_SEEDS[0].reference) {
                Ok(run) if run.outcome.is_ok() && run.outcome.workspace.contains(&mk.var) => Ok(()),
                Ok(run) => Err(format!(
                    "mistake '{}': {}",
                    mk.id,
                    run.outcome
                        .error
                        .map(|e| e.to_string())
                        .unwrap_or_else(|| format!("does not define '{}'", mk.var))
                )),
                Err(e) => Err(e.to_string()),
            }),
    ));

    ValidationReport { task: m.key(), rules }
}
