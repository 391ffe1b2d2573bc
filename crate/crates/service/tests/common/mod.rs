#![allow(dead_code)]

use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use commlab_service::{build_state, router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const ADMIN_TOKEN: &str = "secret";

pub fn course_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../course")
}

pub fn config(data_dir: Option<&Path>) -> ServiceConfig {
    let mut cfg = ServiceConfig::for_course(course_dir());
    cfg.data_dir = data_dir.map(Path::to_path_buf);
    cfg.admin_token = Some(ADMIN_TOKEN.into());
    cfg
}

pub fn start(cfg: &ServiceConfig) -> (AppState, Router) {
    let state = build_state(cfg).expect("service starts");
    (state.clone(), router(state))
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

pub async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>, headers: &[(&str, &str)]) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, "GET", uri, None, &[]).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    send(app, "POST", uri, Some(body), &[]).await
}

pub async fn submit(app: &Router, kind: &str, student: &str, task: &str, source: &str) -> Reply {
    post(
        app,
        &format!("/api/v1/{kind}"),
        serde_json::json!({ "student": student, "task": task, "source": source }),
    )
    .await
}

pub async fn quiz(app: &Router, student: &str, id: &str, answer: &str) -> Reply {
    post(
        app,
        &format!("/api/v1/quiz/{id}"),
        serde_json::json!({ "student": student, "answer": answer }),
    )
    .await
}

pub async fn exam(app: &Router, token: &str, student: &str, fraction: f64) -> Reply {
    send(
        app,
        "POST",
        "/api/v1/admin/exam",
        Some(serde_json::json!({ "student": student, "fraction": fraction })),
        &[("x-admin-token", token)],
    )
    .await
}
