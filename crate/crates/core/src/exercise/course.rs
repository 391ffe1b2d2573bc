//! The course file (`course.toml`) and the tasks it lists.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::manifest::{load_manifest, ManifestError, TaskKind, TaskManifest};
use crate::grader::Grader;

pub const COURSE_FILE: &str = "course.toml";
pub const TASK_FILE: &str = "task.toml";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub quiz: f64,
    pub lab: f64,
    pub exam: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            quiz: 0.2,
            lab: 0.3,
            exam: 0.5,
        }
    }
}

impl Weights {
    /// Weighted sum of the three completion fractions, each clamped to [0, 1].
    /// Rounded to 12 decimals so that, say, 0.2 + 0.4 is exactly 0.6 when
    /// compared with the threshold.
    pub fn score(&self, quiz: f64, lab: f64, exam: f64) -> f64 {
        let c = |x: f64| x.clamp(0.0, 1.0);
        let s = self.quiz * c(quiz) + self.lab * c(lab) + self.exam * c(exam);
        (s * 1e12).round() / 1e12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabExercise {
    pub id: String,
    pub title: String,
    #[serde(default = "one")]
    pub part: u32,
    pub tasks: Vec<String>,
    /// Demonstration text shown with the lab.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<String>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum QuizAnswer {
    Numeric {
        value: f64,
        tolerance: f64,
    },
    /// Compared after trimming and case folding.
    Exact {
        value: String,
    },
    Choice {
        options: Vec<String>,
        correct: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuizItem {
    pub id: String,
    pub prompt: String,
    pub answer: QuizAnswer,
    /// `lab/task` key of the task the question interprets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizOutcome {
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

impl QuizItem {
    /// Malformed answers are simply incorrect, with a note saying why.
    pub fn grade(&self, answer: &str) -> QuizOutcome {
        match &self.answer {
            QuizAnswer::Numeric { value, tolerance } => match answer.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => QuizOutcome {
                    correct: (x - value).abs() <= *tolerance,
                    note: None,
                },
                _ => QuizOutcome {
                    correct: false,
                    note: Some(format!("'{}' is not a number.", answer.trim())),
                },
            },
            QuizAnswer::Exact { value } => QuizOutcome {
                correct: fold(answer) == fold(value),
                note: None,
            },
            QuizAnswer::Choice { options, correct } => {
                if options.iter().any(|o| fold(o) == fold(answer)) {
                    QuizOutcome {
                        correct: fold(answer) == fold(correct),
                        note: None,
                    }
                } else {
                    QuizOutcome {
                        correct: false,
                        note: Some(format!("'{}' is not one of the options.", answer.trim())),
                    }
                }
            }
        }
    }

    /// Choice options, if any; safe to show to students.
    pub fn options(&self) -> Option<&[String]> {
        match &self.answer {
            QuizAnswer::Choice { options, .. } => Some(options),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseConfig {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub labs: Vec<LabExercise>,
    #[serde(default)]
    pub quizzes: Vec<QuizItem>,
}

fn default_threshold() -> f64 {
    0.6
}

impl CourseConfig {
    /// Eligibility requires a score strictly above the threshold.
    pub fn eligible(&self, score: f64) -> bool {
        score > self.threshold
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let w = self.weights;
        if [w.quiz, w.lab, w.exam].iter().any(|x| !(0.0..=1.0).contains(x))
            || (w.quiz + w.lab + w.exam - 1.0).abs() > 1e-9
        {
            out.push(format!(
                "weights must lie in [0, 1] and sum to 1 (got {}, {}, {})",
                w.quiz, w.lab, w.exam
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            out.push(format!(
                "threshold must lie strictly between 0 and 1 (got {})",
                self.threshold
            ));
        }
        let mut seen = HashSet::new();
        for lab in &self.labs {
            if !seen.insert(&lab.id) {
                out.push(format!("duplicate lab id '{}'", lab.id));
            }
            let mut tasks = HashSet::new();
            for t in &lab.tasks {
                if !tasks.insert(t) {
                    out.push(format!("{}: duplicate task id '{t}'", lab.id));
                }
            }
        }
        let mut seen = HashSet::new();
        for q in &self.quizzes {
            if !seen.insert(&q.id) {
                out.push(format!("duplicate quiz id '{}'", q.id));
            }
            match &q.answer {
                QuizAnswer::Numeric { tolerance, .. } if !(*tolerance >= 0.0) => {
                    out.push(format!("quiz {}: tolerance must be non-negative", q.id))
                }
                QuizAnswer::Choice { options, correct } if !options.iter().any(|o| fold(o) == fold(correct)) => {
                    out.push(format!("quiz {}: the correct answer is not among the options", q.id))
                }
                _ => {}
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CourseError {
    #[error("no course found at {0}")]
    NotFound(PathBuf),
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

/// A loaded course: the configuration plus every task manifest, keyed
/// `lab/task` in course order.
#[derive(Debug, Clone)]
pub struct Course {
    pub root: PathBuf,
    pub config: CourseConfig,
    pub tasks: IndexMap<String, TaskManifest>,
}

impl Course {
    pub fn load(root: &Path, grader: &Grader) -> Result<Course, CourseError> {
        let file = root.join(COURSE_FILE);
        if !file.is_file() {
            return Err(CourseError::NotFound(root.to_path_buf()));
        }
        let invalid = |message: String| CourseError::Invalid {
            path: file.clone(),
            message,
        };
        let text = fs::read_to_string(&file).map_err(|e| invalid(e.to_string()))?;
        let config: CourseConfig = toml::from_str(&text).map_err(|e| invalid(e.to_string()))?;
        let problems = config.problems();
        if !problems.is_empty() {
            return Err(invalid(problems.join("; ")));
        }
        let mut tasks = IndexMap::new();
        for lab in &config.labs {
            let mut kinds = Vec::new();
            for t in &lab.tasks {
                let m = load_manifest(&root.join(&lab.id).join(t).join(TASK_FILE), grader)?;
                kinds.push(m.kind);
                tasks.insert(m.key(), m);
            }
            if let Some(msg) = ordering_problem(&kinds) {
                return Err(invalid(format!("{}: {msg}", lab.id)));
            }
        }
        for q in &config.quizzes {
            if let Some(t) = &q.task {
                if !tasks.contains_key(t) {
                    return Err(invalid(format!("quiz {} refers to unknown task '{t}'", q.id)));
                }
            }
        }
        for m in tasks.values() {
            for q in &m.quizzes {
                if !config.quizzes.iter().any(|item| &item.id == q) {
                    return Err(invalid(format!("task {} lists unknown quiz '{q}'", m.key())));
                }
            }
        }
        Ok(Course {
            root: root.to_path_buf(),
            config,
            tasks,
        })
    }

    pub fn task(&self, lab: &str, task: &str) -> Option<&TaskManifest> {
        self.tasks.get(&format!("{lab}/{task}"))
    }

    pub fn quiz(&self, id: &str) -> Option<&QuizItem> {
        self.config.quizzes.iter().find(|q| q.id == id)
    }
}

/// Overview tasks come first and evaluation tasks last.
fn ordering_problem(kinds: &[TaskKind]) -> Option<&'static str> {
    let rank = |k: &TaskKind| match k {
        TaskKind::Overview => 0,
        TaskKind::Implementation => 1,
        TaskKind::Evaluation => 2,
    };
    kinds
        .windows(2)
        .any(|w| rank(&w[0]) > rank(&w[1]))
        .then_some("tasks must run overview first and evaluation last")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub id: String,
    pub title: String,
    pub kind: TaskKind,
    /// Filled in per student by the service.
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabSummary {
    pub id: String,
    pub title: String,
    pub part: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<String>,
    pub tasks: Vec<TaskSummary>,
}

pub fn list_course(course: &Course) -> Vec<LabSummary> {
    course
        .config
        .labs
        .iter()
        .map(|lab| LabSummary {
            id: lab.id.clone(),
            title: lab.title.clone(),
            part: lab.part,
            demo: lab.demo.clone(),
            tasks: lab
                .tasks
                .iter()
                .filter_map(|t| course.task(&lab.id, t))
                .map(|m| TaskSummary {
                    id: m.id.clone(),
                    title: m.title.clone(),
                    kind: m.kind,
                    completed: false,
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiz(answer: QuizAnswer) -> QuizItem {
        QuizItem {
            id: "q".into(),
            prompt: "?".into(),
            answer,
            task: None,
        }
    }

    #[test]
    fn quiz_rules() {
        let q = quiz(QuizAnswer::Numeric {
            value: 0.5,
            tolerance: 0.01,
        });
        assert!(q.grade("0.495").correct);
        assert!(!q.grade("0.52").correct);
        let bad = q.grade("half");
        assert!(!bad.correct && bad.note.is_some());
        let q = quiz(QuizAnswer::Exact {
            value: "Gaussian".into(),
        });
        assert!(q.grade(" gaussian ").correct);
        let q = quiz(QuizAnswer::Choice {
            options: vec!["a".into(), "b".into()],
            correct: "b".into(),
        });
        assert!(!q.grade("a").correct);
        assert!(q.grade("B").correct);
        assert!(q.grade("c").note.is_some());
    }

    #[test]
    fn weights_and_threshold() {
        let c: CourseConfig = toml::from_str("").unwrap();
        assert!(c.problems().is_empty());
        assert!((c.weights.score(1.0, 1.0, 0.0) - 0.5).abs() < 1e-12);
        assert!((c.weights.score(1.0, 0.5, 0.0) - 0.35).abs() < 1e-12);
        assert!(!c.eligible(0.6));
        assert!(c.eligible(0.6000001));
        assert!(!c.eligible(c.weights.score(1.0, 0.0, 0.8)));
        assert!(c.eligible(c.weights.score(1.0, 0.0, 0.81)));
        let bad: CourseConfig =
            toml::from_str("threshold = 1.0\n[weights]\nquiz = 0.5\nlab = 0.5\nexam = 0.5").unwrap();
        assert_eq!(bad.problems().len(), 2);
    }

    #[test]
    fn kind_ordering() {
        use TaskKind::*;
        assert!(ordering_problem(&[Overview, Implementation, Implementation, Evaluation]).is_none());
        assert!(ordering_problem(&[Implementation, Overview]).is_some());
        assert!(ordering_problem(&[Evaluation, Implementation]).is_some());
    }
}
