//! Routes under `/api/v1`.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/course` | |
//! | GET | `/labs/{lab}/tasks/{task}` | |
//! | POST | `/run` | `{student, task, source}` |
//! | POST | `/check` | `{student, task, source, seed?}` |
//! | POST | `/quiz/{id}` | `{student, answer}` |
//! | GET | `/progress/{student}` | |
//! | POST | `/admin/exam` | `{student, fraction}` |
//!
//! The student id may also come from the `x-student-id` header (or the
//! `student` query parameter on GET). Errors are `{"error": message}`.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use commlab::commsim::ProtocolTrace;
use commlab::exercise::{list_course, Course, LabSummary, QuizAnswer, QuizItem, TaskKind, TaskManifest};
use commlab::grader::{GradeReport, Grader, Seeds};
use scriptlang::{ExecStatus, FigureData, ScriptError};
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::store::{Attempt, AttemptKind, OutcomeSummary, ScoreRecord, Store};

pub const STUDENT_HEADER: &str = "x-student-id";
pub const ADMIN_HEADER: &str = "x-admin-token";
const MAX_STUDENT_ID: usize = 128;
const DIGEST_CHARS: usize = 200;

/// Shared by every handler.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    course: Course,
    grader: Grader,
    store: Mutex<Store>,
    max_source_bytes: usize,
    admin_token: Option<String>,
}

impl AppState {
    pub fn new(course: Course, grader: Grader, store: Store, config: &ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                course,
                grader: grader.with_limits(config.limits.exec()),
                store: Mutex::new(store),
                max_source_bytes: config.limits.max_source_bytes,
                admin_token: config.admin_token.clone(),
            }),
        }
    }

    pub fn course(&self) -> &Course {
        &self.inner.course
    }

    /// A poisoned lock only means another handler panicked; the store
    /// itself is updated atomically per attempt.
    pub fn store(&self) -> MutexGuard<'_, Store> {
        self.inner.store.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    // JSON escaping can grow a source up to six times.
    let body_limit = state.inner.max_source_bytes * 6 + 64 * 1024;
    let api = Router::new()
        .route("/course", get(course))
        .route("/labs/{lab}/tasks/{task}", get(task_view))
        .route("/run", post(run))
        .route("/check", post(check))
        .route("/quiz/{id}", post(quiz))
        .route("/progress/{student}", get(progress))
        .route("/admin/exam", post(set_exam));
    Router::new()
        .nest("/api/v1", api)
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such endpoint") })
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, what)
    }

    fn unprocessable(what: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, what)
    }

    fn internal(what: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, what)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(r.status(), r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(t)| t).map_err(ApiError::from)
}

fn student_id(from_body: Option<String>, headers: &HeaderMap) -> Result<String, ApiError> {
    let id = from_body.or_else(|| {
        headers
            .get(STUDENT_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string)
    });
    let Some(id) = id else {
        return Err(ApiError::unprocessable("missing field `student`"));
    };
    let id = id.trim().to_string();
    if id.is_empty() || id.len() > MAX_STUDENT_ID || id.chars().any(char::is_control) {
        return Err(ApiError::unprocessable(format!(
            "student ids are 1 to {MAX_STUDENT_ID} printable characters"
        )));
    }
    Ok(id)
}

fn find_task<'a>(state: &'a AppState, key: &str) -> Result<&'a TaskManifest, ApiError> {
    state
        .course()
        .tasks
        .get(key)
        .ok_or_else(|| ApiError::not_found(format!("unknown task '{key}'")))
}

fn check_size(state: &AppState, source: &str) -> Result<(), ApiError> {
    let max = state.inner.max_source_bytes;
    if source.len() > max {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("source is {} bytes; the limit is {max}", source.len()),
        ));
    }
    Ok(())
}

fn digest(message: &str) -> String {
    message
        .lines()
        .next()
        .unwrap_or("")
        .chars()
        .take(DIGEST_CHARS)
        .collect()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

/// Quiz as shown to students: no answer key.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuizView {
    pub id: String,
    pub prompt: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

impl QuizView {
    fn of(q: &QuizItem) -> Self {
        let kind = match q.answer {
            QuizAnswer::Numeric { .. } => "numeric",
            QuizAnswer::Exact { .. } => "exact",
            QuizAnswer::Choice { .. } => "choice",
        };
        Self {
            id: q.id.clone(),
            prompt: q.prompt.clone(),
            kind: kind.into(),
            options: q.options().map(<[String]>::to_vec),
            task: q.task.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CourseView {
    pub title: String,
    pub threshold: f64,
    pub weights: commlab::exercise::Weights,
    pub labs: Vec<LabSummary>,
    pub quizzes: Vec<QuizView>,
}

#[derive(Deserialize)]
struct StudentQuery {
    student: Option<String>,
}

fn optional_student(q: StudentQuery, headers: &HeaderMap) -> Result<Option<String>, ApiError> {
    let present = q.student.is_some() || headers.contains_key(STUDENT_HEADER);
    present.then(|| student_id(q.student, headers)).transpose()
}

async fn course(
    State(state): State<AppState>,
    Query(q): Query<StudentQuery>,
    headers: HeaderMap,
) -> ApiResult<CourseView> {
    let student = optional_student(q, &headers)?;
    let c = state.course();
    let mut labs = list_course(c);
    if let Some(s) = &student {
        let store = state.store();
        for lab in &mut labs {
            for t in &mut lab.tasks {
                t.completed = store.completed(s, &format!("{}/{}", lab.id, t.id));
            }
        }
    }
    Ok(Json(CourseView {
        title: c.config.title.clone(),
        threshold: c.config.threshold,
        weights: c.config.weights,
        labs,
        quizzes: c.config.quizzes.iter().map(QuizView::of).collect(),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskView {
    pub lab: String,
    pub id: String,
    pub title: String,
    pub kind: TaskKind,
    pub instructions: String,
    /// The student's last submitted source, or the starter code.
    pub source: String,
    pub starter: String,
    pub saved: bool,
    pub completed: bool,
    pub checks: u64,
    pub quizzes: Vec<QuizView>,
}

async fn task_view(
    State(state): State<AppState>,
    Path((lab, task)): Path<(String, String)>,
    Query(q): Query<StudentQuery>,
    headers: HeaderMap,
) -> ApiResult<TaskView> {
    let student = optional_student(q, &headers)?;
    let key = format!("{lab}/{task}");
    let m = find_task(&state, &key)?;
    let (saved, completed, checks) = match &student {
        Some(s) => {
            let store = state.store();
            (
                store.last_source(s, &key).map(str::to_string),
                store.completed(s, &key),
                store.check_count(s, &key),
            )
        }
        None => (None, false, 0),
    };
    let quizzes = m
        .quizzes
        .iter()
        .filter_map(|id| state.course().quiz(id))
        .map(QuizView::of)
        .collect();
    Ok(Json(TaskView {
        lab: m.lab.clone(),
        id: m.id.clone(),
        title: m.title.clone(),
        kind: m.kind,
        instructions: m.instructions.clone(),
        saved: saved.is_some(),
        source: saved.unwrap_or_else(|| m.starter.clone()),
        starter: m.starter.clone(),
        completed,
        checks,
        quizzes,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRequest {
    #[serde(default)]
    pub student: Option<String>,
    pub task: String,
    pub source: String,
    /// Student seed for a reproducible check; ignored by /run.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarSummary {
    pub name: String,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResponse {
    pub attempt: u64,
    pub status: ExecStatus,
    pub printed: String,
    pub figures: Vec<FigureData>,
    pub workspace: Vec<VarSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ScriptError>,
    /// The error as the interpreter renders it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolTrace>,
    pub seed: u64,
}

async fn run(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<SubmitRequest>, JsonRejection>,
) -> ApiResult<RunResponse> {
    let req = body(payload)?;
    let student = student_id(req.student.clone(), &headers)?;
    check_size(&state, &req.source)?;
    let m = find_task(&state, &req.task)?.clone();
    let seed = Seeds::fresh().student;
    let grader = state.inner.grader.clone();
    let source = req.source.clone();
    let run = blocking(move || grader.run(&m, &source, seed))
        .await?
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let out = run.outcome;

    let mut attempt = Attempt::new(
        &student,
        AttemptKind::Run,
        OutcomeSummary {
            status: Some(out.status),
            verdict: None,
            correct: None,
            message: out.error.as_ref().map(|e| digest(&e.to_string())).unwrap_or_default(),
        },
    );
    attempt.task = Some(req.task);
    attempt.source = Some(req.source);
    attempt.seed = Some(seed);
    let attempt = state
        .store()
        .record(attempt)
        .map_err(|e| ApiError::internal(e.to_string()))?;

    Ok(Json(RunResponse {
        attempt: attempt.id,
        status: out.status,
        printed: out.printed,
        workspace: out
            .workspace
            .visible()
            .map(|(name, v)| VarSummary {
                name: name.to_string(),
                summary: v.summary(16),
            })
            .collect(),
        figures: out.figures,
        error_message: out.error.as_ref().map(ToString::to_string),
        error: out.error,
        protocol: run.protocol.map(|(trace, _)| trace),
        seed,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResponse {
    pub attempt: u64,
    /// Whether the task is complete for this student, counting earlier passes.
    pub completed: bool,
    pub report: GradeReport,
}

async fn check(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<SubmitRequest>, JsonRejection>,
) -> ApiResult<CheckResponse> {
    let req = body(payload)?;
    let student = student_id(req.student.clone(), &headers)?;
    check_size(&state, &req.source)?;
    let m = find_task(&state, &req.task)?.clone();
    let seeds = req.seed.map(Seeds::from_student).unwrap_or_else(Seeds::fresh);
    let grader = state.inner.grader.clone();
    let source = req.source.clone();
    let report = blocking(move || grader.grade(&m, &source, seeds))
        .await?
        .map_err(|e| ApiError::internal(e.to_string()))?;

    let mut attempt = Attempt::new(
        &student,
        AttemptKind::Check,
        OutcomeSummary {
            status: report.execution.as_ref().map(|e| e.status),
            verdict: Some(report.verdict),
            correct: None,
            message: report.failures().next().map(|c| digest(&c.message)).unwrap_or_default(),
        },
    );
    attempt.task = Some(req.task.clone());
    attempt.source = Some(req.source);
    attempt.seeds = Some(report.seeds);
    let (attempt, completed) = {
        let mut store = state.store();
        let a = store.record(attempt).map_err(|e| ApiError::internal(e.to_string()))?;
        let done = store.completed(&student, &req.task);
        (a, done)
    };
    Ok(Json(CheckResponse {
        attempt: attempt.id,
        completed,
        report,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuizRequest {
    #[serde(default)]
    pub student: Option<String>,
    pub answer: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuizResponse {
    pub attempt: u64,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

async fn quiz(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    payload: Result<Json<QuizRequest>, JsonRejection>,
) -> ApiResult<QuizResponse> {
    let item = state
        .course()
        .quiz(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown quiz '{id}'")))?;
    let req = body(payload)?;
    let student = student_id(req.student.clone(), &headers)?;
    check_size(&state, &req.answer)?;
    let outcome = item.grade(&req.answer);
    let mut attempt = Attempt::new(
        &student,
        AttemptKind::Quiz,
        OutcomeSummary {
            status: None,
            verdict: None,
            correct: Some(outcome.correct),
            message: outcome.note.clone().unwrap_or_default(),
        },
    );
    attempt.task = Some(id);
    attempt.answer = Some(req.answer);
    let attempt = state
        .store()
        .record(attempt)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(QuizResponse {
        attempt: attempt.id,
        correct: outcome.correct,
        note: outcome.note,
    }))
}

async fn progress(State(state): State<AppState>, Path(student): Path<String>) -> ApiResult<ScoreRecord> {
    state
        .store()
        .score(&student)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown student '{student}'")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExamRequest {
    pub student: String,
    pub fraction: f64,
}

async fn set_exam(
    State(state): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<ExamRequest>, JsonRejection>,
) -> ApiResult<ScoreRecord> {
    let Some(token) = &state.inner.admin_token else {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin endpoints are disabled"));
    };
    if headers.get(ADMIN_HEADER).and_then(|v| v.to_str().ok()) != Some(token.as_str()) {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "missing or wrong admin token"));
    }
    let req = body(payload)?;
    let student = student_id(Some(req.student), &headers)?;
    if !(0.0..=1.0).contains(&req.fraction) {
        return Err(ApiError::unprocessable("fraction must lie in [0, 1]"));
    }
    let mut attempt = Attempt::new(
        &student,
        AttemptKind::Exam,
        OutcomeSummary {
            status: None,
            verdict: None,
            correct: None,
            message: String::new(),
        },
    );
    attempt.exam = Some(req.fraction);
    let mut store = state.store();
    store.record(attempt).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(store.score(&student).expect("just recorded")))
}
