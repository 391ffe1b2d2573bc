//! HTTP service for the communication labs: serves tasks, executes Run
//! requests, grades Check requests and quizzes, and keeps an append-only
//! attempt log from which every score is derived.

pub mod api;
pub mod config;
pub mod store;

use std::net::SocketAddr;

use commlab::exercise::Course;
use commlab::grader::Grader;

pub use api::{router, AppState};
pub use config::{ConfigError, ServiceConfig};
pub use store::{Attempt, AttemptKind, ScoreRecord, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Course(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot listen on {addr}: {message}")]
    Bind { addr: String, message: String },
    #[error("{0}")]
    Runtime(String),
}

/// Loads the course and opens the store named by `config`.
pub fn build_state(config: &ServiceConfig) -> Result<AppState, ServiceError> {
    let grader = Grader::default();
    let course = Course::load(&config.course, &grader).map_err(|e| ServiceError::Course(e.to_string()))?;
    let keys: Vec<String> = course.tasks.keys().cloned().collect();
    let store = match &config.data_dir {
        Some(dir) => Store::open(dir, course.config.clone(), keys)?,
        None => Store::in_memory(course.config.clone(), keys),
    };
    Ok(AppState::new(course, grader, store, config))
}

/// Serves until interrupted. `on_ready` is called once the socket is bound.
pub fn serve(config: &ServiceConfig, on_ready: impl FnOnce(SocketAddr, &AppState)) -> Result<(), ServiceError> {
    let state = build_state(config)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| ServiceError::Runtime(e.to_string()))?;
    rt.block_on(async {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| ServiceError::Bind {
                addr: addr.clone(),
                message: e.to_string(),
            })?;
        let local = listener
            .local_addr()
            .map_err(|e| ServiceError::Runtime(e.to_string()))?;
        on_ready(local, &state);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| ServiceError::Runtime(e.to_string()))
    })
}
