//! In-process HTTP helpers for driving the router without a socket.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rpys::server::{self, AppState, OP_LOG_HEADER};
use serde_json::Value;
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn app() -> Router {
    server::router(AppState::new(fixtures()))
}

#[derive(Debug)]
pub struct Reply {
    pub status: StatusCode,
    pub token: Option<usize>,
    pub body: Bytes,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {:?}", self.body))
    }
}

pub async fn send(app: &Router, method: Method, uri: &str, content_type: &str, body: impl Into<Body>) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", content_type)
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let token = resp
        .headers()
        .get(OP_LOG_HEADER)
        .map(|v| v.to_str().unwrap().parse().unwrap());
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    Reply { status, token, body }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Method::GET, uri, "application/json", Body::empty()).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    send(app, Method::POST, uri, "application/json", body.to_string()).await
}

/// Creates a session from fixture files and returns its id.
pub async fn create(app: &Router, files: &[&str]) -> String {
    let r = post(app, "/sessions", serde_json::json!({ "files": files })).await;
    assert_eq!(r.status, StatusCode::CREATED, "{:?}", r.body);
    r.json()["session_id"].as_str().unwrap().to_string()
}

pub fn app_state() -> Arc<AppState> {
    AppState::new(fixtures())
}
