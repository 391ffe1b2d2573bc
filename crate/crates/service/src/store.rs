//! Attempt records and the scores derived from them.
//!
//! Every request that changes a student's standing appends one [`Attempt`]
//! to the log. Student state is only ever updated by applying an attempt,
//! so replaying the log rebuilds the same [`ScoreRecord`]s.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use commlab::exercise::CourseConfig;
use commlab::grader::{Seeds, Verdict};
use indexmap::IndexMap;
use scriptlang::ExecStatus;
use serde::{Deserialize, Serialize};

pub const LOG_FILE: &str = "attempts.ndjson";
pub const SCORES_FILE: &str = "scores.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttemptKind {
    Run,
    Check,
    Quiz,
    /// An administrator setting the exam fraction.
    Exam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<ExecStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    /// First line of the first failure, if any.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub message: String,
}

/// One line of the attempt log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub id: u64,
    pub student: String,
    pub kind: AttemptKind,
    /// `lab/task` for runs and checks, the quiz id for quizzes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exam: Option<f64>,
    pub timestamp_ms: u64,
    pub outcome: OutcomeSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Seeds>,
}

impl Attempt {
    /// An attempt with no id or timestamp yet; [`Store::record`] fills both.
    pub fn new(student: &str, kind: AttemptKind, outcome: OutcomeSummary) -> Self {
        Self {
            id: 0,
            student: student.to_string(),
            kind,
            task: None,
            source: None,
            answer: None,
            exam: None,
            timestamp_ms: 0,
            outcome,
            seed: None,
            seeds: None,
        }
    }

    fn invariant_problem(&self) -> Option<&'static str> {
        match self.kind {
            AttemptKind::Run | AttemptKind::Check if self.task.is_none() || self.source.is_none() => {
                Some("run and check attempts need a task and a source")
            }
            AttemptKind::Check if self.outcome.verdict.is_none() => Some("check attempts carry a verdict"),
            AttemptKind::Quiz if self.task.is_none() || self.outcome.correct.is_none() => {
                Some("quiz attempts need a quiz id and a result")
            }
            AttemptKind::Exam if !self.exam.is_some_and(|x| (0.0..=1.0).contains(&x)) => {
                Some("exam attempts need a fraction in [0, 1]")
            }
            _ => None,
        }
    }
}

/// A student's standing as shown by `/progress`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub student: String,
    /// Completion of every course task, in course order.
    pub tasks: IndexMap<String, bool>,
    /// Correctness of every quiz, in course order.
    pub quizzes: IndexMap<String, bool>,
    pub quiz_fraction: f64,
    pub lab_fraction: f64,
    pub exam_fraction: f64,
    pub score: f64,
    pub eligible: bool,
    pub attempts: u64,
}

#[derive(Debug, Clone, Default)]
struct StudentState {
    completed: HashSet<String>,
    quizzes_correct: HashSet<String>,
    exam: f64,
    attempts: u64,
    checks: HashMap<String, u64>,
    last_source: HashMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path} line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid attempt: {0}")]
    Invalid(&'static str),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> StoreError + '_ {
    move |e| StoreError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// All student state plus the optional on-disk log. Callers serialize
/// access, which also makes the log single-writer.
pub struct Store {
    config: CourseConfig,
    task_keys: Vec<String>,
    students: BTreeMap<String, StudentState>,
    next_id: u64,
    dir: Option<PathBuf>,
    log: Option<File>,
}

impl Store {
    pub fn in_memory(config: CourseConfig, task_keys: Vec<String>) -> Self {
        Self {
            config,
            task_keys,
            students: BTreeMap::new(),
            next_id: 1,
            dir: None,
            log: None,
        }
    }

    /// Opens `dir`, replaying any existing log and rewriting the score
    /// snapshot.
    pub fn open(dir: &Path, config: CourseConfig, task_keys: Vec<String>) -> Result<Self, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(LOG_FILE);
        let mut store = Self::in_memory(config, task_keys);
        if path.exists() {
            for a in read_log(&path)? {
                store.apply(&a);
            }
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        store.dir = Some(dir.to_path_buf());
        store.log = Some(log);
        store.write_snapshot()?;
        Ok(store)
    }

    /// Rebuilds state from attempts alone.
    pub fn replay(config: CourseConfig, task_keys: Vec<String>, attempts: &[Attempt]) -> Self {
        let mut store = Self::in_memory(config, task_keys);
        for a in attempts {
            store.apply(a);
        }
        store
    }

    /// Assigns an id and timestamp, appends to the log, then updates the
    /// student's state.
    pub fn record(&mut self, mut attempt: Attempt) -> Result<Attempt, StoreError> {
        if let Some(p) = attempt.invariant_problem() {
            return Err(StoreError::Invalid(p));
        }
        attempt.id = self.next_id;
        attempt.timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        if let (Some(log), Some(dir)) = (&mut self.log, &self.dir) {
            let path = dir.join(LOG_FILE);
            let mut line = serde_json::to_string(&attempt).expect("attempts serialize");
            line.push('\n');
            log.write_all(line.as_bytes()).map_err(io_err(&path))?;
            log.flush().map_err(io_err(&path))?;
        }
        self.apply(&attempt);
        self.write_snapshot()?;
        Ok(attempt)
    }

    fn apply(&mut self, a: &Attempt) {
        self.next_id = self.next_id.max(a.id + 1);
        let s = self.students.entry(a.student.clone()).or_default();
        s.attempts += 1;
        match a.kind {
            AttemptKind::Run | AttemptKind::Check => {
                let (Some(task), Some(source)) = (&a.task, &a.source) else {
                    return;
                };
                s.last_source.insert(task.clone(), source.clone());
                if a.kind == AttemptKind::Check {
                    *s.checks.entry(task.clone()).or_default() += 1;
                    if a.outcome.verdict == Some(Verdict::Pass) {
                        s.completed.insert(task.clone());
                    }
                }
            }
            AttemptKind::Quiz => {
                if let (Some(quiz), Some(true)) = (&a.task, a.outcome.correct) {
                    s.quizzes_correct.insert(quiz.clone());
                }
            }
            AttemptKind::Exam => {
                if let Some(x) = a.exam {
                    s.exam = x;
                }
            }
        }
    }

    pub fn knows(&self, student: &str) -> bool {
        self.students.contains_key(student)
    }

    pub fn last_source(&self, student: &str, task: &str) -> Option<&str> {
        self.students.get(student)?.last_source.get(task).map(String::as_str)
    }

    pub fn completed(&self, student: &str, task: &str) -> bool {
        self.students.get(student).is_some_and(|s| s.completed.contains(task))
    }

    pub fn check_count(&self, student: &str, task: &str) -> u64 {
        self.students
            .get(student)
            .and_then(|s| s.checks.get(task).copied())
            .unwrap_or(0)
    }

    pub fn score(&self, student: &str) -> Option<ScoreRecord> {
        let s = self.students.get(student)?;
        let tasks: IndexMap<String, bool> = self
            .task_keys
            .iter()
            .map(|k| (k.clone(), s.completed.contains(k)))
            .collect();
        let quizzes: IndexMap<String, bool> = self
            .config
            .quizzes
            .iter()
            .map(|q| (q.id.clone(), s.quizzes_correct.contains(&q.id)))
            .collect();
        let frac = |m: &IndexMap<String, bool>| {
            if m.is_empty() {
                0.0
            } else {
                m.values().filter(|&&b| b).count() as f64 / m.len() as f64
            }
        };
        let quiz_fraction = frac(&quizzes);
        let lab_fraction = frac(&tasks);
        let score = self.config.weights.score(quiz_fraction, lab_fraction, s.exam);
        Some(ScoreRecord {
            student: student.to_string(),
            tasks,
            quizzes,
            quiz_fraction,
            lab_fraction,
            exam_fraction: s.exam,
            score,
            eligible: self.config.eligible(score),
            attempts: s.attempts,
        })
    }

    pub fn scores(&self) -> BTreeMap<String, ScoreRecord> {
        self.students
            .keys()
            .filter_map(|k| self.score(k).map(|r| (k.clone(), r)))
            .collect()
    }

    fn write_snapshot(&self) -> Result<(), StoreError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(SCORES_FILE);
        let tmp = dir.join(format!("{SCORES_FILE}.tmp"));
        let text = serde_json::to_string_pretty(&self.scores()).expect("scores serialize");
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }
}

pub fn read_log(path: &Path) -> Result<Vec<Attempt>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: Attempt = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(a);
    }
    Ok(out)
}

pub fn read_snapshot(path: &Path) -> Result<BTreeMap<String, ScoreRecord>, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use commlab::exercise::{QuizAnswer, QuizItem};

    fn config() -> CourseConfig {
        let quiz = |id: &str| QuizItem {
            id: id.into(),
            prompt: String::new(),
            answer: QuizAnswer::Exact { value: "x".into() },
            task: None,
        };
        CourseConfig {
            title: "t".into(),
            weights: Default::default(),
            threshold: 0.6,
            labs: vec![],
            quizzes: vec![quiz("q1"), quiz("q2")],
        }
    }

    fn keys() -> Vec<String> {
        vec!["l/a".into(), "l/b".into()]
    }

    fn check(student: &str, task: &str, verdict: Verdict) -> Attempt {
        let mut a = Attempt::new(
            student,
            AttemptKind::Check,
            OutcomeSummary {
                status: Some(ExecStatus::Ok),
                verdict: Some(verdict),
                correct: None,
                message: String::new(),
            },
        );
        a.task = Some(task.into());
        a.source = Some(format!("% {verdict:?}"));
        a
    }

    #[test]
    fn completion_survives_later_failures() {
        let mut s = Store::in_memory(config(), keys());
        s.record(check("ann", "l/a", Verdict::Pass)).unwrap();
        s.record(check("ann", "l/a", Verdict::Fail)).unwrap();
        assert!(s.completed("ann", "l/a"));
        assert_eq!(s.check_count("ann", "l/a"), 2);
        assert_eq!(s.last_source("ann", "l/a"), Some("% Fail"));
        let r = s.score("ann").unwrap();
        assert_eq!(r.lab_fraction, 0.5);
        assert!((r.score - 0.15).abs() < 1e-12);
        assert!(!r.eligible);
    }

    #[test]
    fn checks_without_verdict_are_refused() {
        let mut s = Store::in_memory(config(), keys());
        let mut a = check("ann", "l/a", Verdict::Pass);
        a.outcome.verdict = None;
        assert!(s.record(a).is_err());
        assert!(!s.knows("ann"));
    }

    #[test]
    fn log_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = Store::open(dir.path(), config(), keys()).unwrap();
            s.record(check("ann", "l/a", Verdict::Pass)).unwrap();
            let mut q = Attempt::new(
                "bob",
                AttemptKind::Quiz,
                OutcomeSummary {
                    status: None,
                    verdict: None,
                    correct: Some(true),
                    message: String::new(),
                },
            );
            q.task = Some("q2".into());
            q.answer = Some("x".into());
            s.record(q).unwrap();
        }
        let reopened = Store::open(dir.path(), config(), keys()).unwrap();
        assert!(reopened.completed("ann", "l/a"));
        assert_eq!(reopened.score("bob").unwrap().quiz_fraction, 0.5);
        assert_eq!(reopened.next_id, 3);
        assert_eq!(read_snapshot(&dir.path().join(SCORES_FILE)).unwrap(), reopened.scores());
    }

    #[test]
    fn corrupt_lines_name_their_position() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(LOG_FILE), "\n{not json}\n").unwrap();
        let err = Store::open(dir.path(), config(), keys()).err().unwrap();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
