//! Task manifests: one `task.toml` per task directory, with the scripts it
//! names stored next to it.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use scriptlang::{is_identifier, Value};
use serde::{Deserialize, Serialize};

use crate::grader::{CheckSpec, Grader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Overview,
    Implementation,
    Evaluation,
}

/// A constant in a manifest: boolean, number, string or numeric vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Bool(bool),
    Num(f64),
    Text(String),
    Vector(Vec<f64>),
}

impl Literal {
    pub fn to_value(&self) -> Value {
        match self {
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Num(n) => Value::Num(*n),
            Literal::Text(s) => Value::Str(s.clone()),
            Literal::Vector(v) => Value::from_vec(v.clone()),
        }
    }
}

/// A known-wrong solution. When the student's value of `var` matches what
/// this script produces, `message` replaces the generic feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mistake {
    pub id: String,
    pub var: String,
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl Default for DriverSpec {
    fn default() -> Self {
        Self {
            name: "script".into(),
            params: serde_json::Value::Null,
        }
    }
}

/// A fully resolved task with every script inlined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskManifest {
    pub lab: String,
    pub id: String,
    pub title: String,
    pub kind: TaskKind,
    pub instructions: String,
    pub starter: String,
    pub reference: String,
    pub mistakes: Vec<Mistake>,
    pub banned: Vec<String>,
    pub banned_message: Option<String>,
    pub protected: IndexMap<String, Literal>,
    pub checks: Vec<CheckSpec>,
    pub profile: String,
    pub driver: DriverSpec,
    pub quizzes: Vec<String>,
}

impl TaskManifest {
    /// `lab/task`, the key used by the service and the command line.
    pub fn key(&self) -> String {
        format!("{}/{}", self.lab, self.id)
    }

    pub fn protected_values(&self) -> IndexMap<String, Value> {
        self.protected.iter().map(|(k, v)| (k.clone(), v.to_value())).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

impl ManifestError {
    fn schema(path: &Path, message: impl Into<String>) -> Self {
        ManifestError::Schema {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    title: String,
    kind: TaskKind,
    #[serde(default)]
    instructions: Option<String>,
    #[serde(default)]
    instructions_file: Option<String>,
    starter: String,
    reference: String,
    #[serde(default = "default_profile")]
    profile: String,
    #[serde(default)]
    banned: Vec<String>,
    #[serde(default)]
    banned_message: Option<String>,
    #[serde(default)]
    protected: IndexMap<String, Literal>,
    #[serde(default)]
    checks: Vec<CheckSpec>,
    #[serde(default)]
    mistakes: Vec<MistakeFile>,
    #[serde(default)]
    driver: Option<DriverFile>,
    #[serde(default)]
    quizzes: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MistakeFile {
    id: String,
    var: String,
    script: String,
    message: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverFile {
    name: String,
    #[serde(default)]
    params: Option<toml::Table>,
}

fn default_profile() -> String {
    "comm".into()
}

fn read(path: &Path) -> Result<String, ManifestError> {
    fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads `<lab>/<task>/task.toml`; the lab and task ids are the directory
/// names. Static rules (profile, driver, banned names, check structure) are
/// enforced here; behavioural rules live in [`super::validate_manifest`].
pub fn load_manifest(path: &Path, grader: &Grader) -> Result<TaskManifest, ManifestError> {
    let text = read(path)?;
    let file: TaskFile = toml::from_str(&text).map_err(|e| ManifestError::schema(path, e.to_string()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let name_of = |p: &Path| {
        p.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let id = name_of(dir);
    let lab = dir.parent().map(name_of).unwrap_or_default();

    let instructions = match (file.instructions, file.instructions_file) {
        (Some(text), None) => text,
        (None, Some(f)) => read(&dir.join(f))?,
        (None, None) => String::new(),
        (Some(_), Some(_)) => {
            return Err(ManifestError::schema(
                path,
                "give either instructions or instructions_file, not both",
            ))
        }
    };
    let mistakes = file
        .mistakes
        .into_iter()
        .map(|m| {
            Ok(Mistake {
                source: read(&dir.join(&m.script))?,
                id: m.id,
                var: m.var,
                message: m.message,
            })
        })
        .collect::<Result<Vec<_>, ManifestError>>()?;
    let driver = match file.driver {
        None => DriverSpec::default(),
        Some(d) => DriverSpec {
            name: d.name,
            params: match d.params {
                None => serde_json::Value::Null,
                Some(t) => {
                    serde_json::to_value(t).map_err(|e| ManifestError::schema(path, format!("driver.params: {e}")))?
                }
            },
        },
    };
    let manifest = TaskManifest {
        lab,
        id,
        title: file.title,
        kind: file.kind,
        instructions,
        starter: read(&dir.join(&file.starter))?,
        reference: read(&dir.join(&file.reference))?,
        mistakes,
        banned: file.banned,
        banned_message: file.banned_message,
        protected: file.protected,
        checks: file.checks,
        profile: file.profile,
        driver,
        quizzes: file.quizzes,
    };
    let problems = static_problems(&manifest, grader);
    if problems.is_empty() {
        Ok(manifest)
    } else {
        Err(ManifestError::schema(path, problems.join("; ")))
    }
}

/// Rule violations detectable without running anything.
pub fn static_problems(m: &TaskManifest, grader: &Grader) -> Vec<String> {
    let mut out = Vec::new();
    match grader.registry(&m.profile) {
        None => out.push(format!("unknown builtin profile '{}'", m.profile)),
        Some(reg) => {
            for name in &m.banned {
                if !reg.contains(name) {
                    out.push(format!(
                        "banned name '{name}' is not a builtin of profile '{}'",
                        m.profile
                    ));
                }
            }
        }
    }
    match grader.drivers().get(&m.driver.name) {
        None => out.push(format!("unknown driver '{}'", m.driver.name)),
        Some(d) => {
            if let Err(e) = d.check_params(&m.driver.params) {
                out.push(format!("driver.params: {e}"));
            }
        }
    }
    for name in m.protected.keys() {
        if !is_identifier(name) {
            out.push(format!("protected: '{name}' is not a valid variable name"));
        }
    }
    for c in &m.checks {
        out.extend(c.problems());
    }
    if let Some(t) = &m.banned_message {
        out.extend(
            crate::grader::checks::template_problems(t)
                .into_iter()
                .map(|p| format!("banned_message: {p}")),
        );
    }
    for mistake in &m.mistakes {
        if !m.checks.iter().any(|c| c.rule.var() == Some(mistake.var.as_str())) {
            out.push(format!(
                "mistake '{}': no check compares variable '{}'",
                mistake.id, mistake.var
            ));
        }
    }
    out
}
