//! HTTP API over in-memory analysis sessions.

mod store;

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path as UrlPath, Query, Request, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use rpys_core::cluster::{ClusterConfig, ClusterError};
use rpys_core::export::{self, TopReference, UiBundle};
use rpys_core::model::ModelError;
use rpys_core::script::{parse_script, Step};
use rpys_core::spectro::{peak_report, PeakReport};
use rpys_core::wos::parse_wos_named;
use rpys_core::{Analysis, Dataset, DatasetStats, Session, SessionError, SessionOp, SpectrogramRow, YearFilter};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use store::{Progress, SessionSlot, Snapshot, Store, MAX_UNDO};

/// Consistency token: the op log length of the snapshot a response was
/// computed from.
pub const OP_LOG_HEADER: &str = "x-op-log-len";

const UPLOAD_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Debug)]
pub struct AppState {
    pub store: Store,
    /// Root for server-side imports.
    pub workdir: PathBuf,
}

impl AppState {
    pub fn new(workdir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self { store: Store::default(), workdir: workdir.into() })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_handle).delete(delete_session))
        .route("/sessions/{id}/stats", get(get_stats))
        .route("/sessions/{id}/spectrogram", get(get_spectrogram))
        .route("/sessions/{id}/bundle", get(get_bundle))
        .route("/sessions/{id}/references", get(get_references))
        .route("/sessions/{id}/years/{rpy}/references", get(get_year_references))
        .route("/sessions/{id}/years/{rpy}/peak", get(get_peak_report))
        .route("/sessions/{id}/progress", get(get_progress))
        .route("/sessions/{id}/ops", post(post_op))
        .route("/sessions/{id}/undo", post(post_undo))
        .route("/sessions/{id}/export", get(get_export))
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, workdir: PathBuf) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(workdir)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    token: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), token: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    fn at(mut self, snapshot: &Snapshot) -> Self {
        self.token = Some(snapshot.op_log_len());
        self
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let conflict = e.is_ordering()
            || matches!(
                e,
                SessionError::Model(ModelError::EmptyDataset)
                    | SessionError::Cluster(ClusterError::Model(ModelError::EmptyDataset))
            );
        if conflict {
            Self::conflict(e.to_string())
        } else {
            Self::bad_request(e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut resp = (self.status, Json(serde_json::json!({ "error": self.message }))).into_response();
        if let Some(t) = self.token {
            set_token(&mut resp, t);
        }
        resp
    }
}

fn set_token(resp: &mut Response, token: usize) {
    resp.headers_mut().insert(HeaderName::from_static(OP_LOG_HEADER), HeaderValue::from(token));
}

fn reply<T: Serialize>(status: StatusCode, snapshot: &Snapshot, body: &T) -> Response {
    let mut resp = (status, Json(body)).into_response();
    set_token(&mut resp, snapshot.op_log_len());
    resp
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SessionHandle {
    pub session_id: Uuid,
    pub created_at: DateTime<Utc>,
    pub stats: Option<DatasetStats>,
    pub undo_depth: usize,
    pub op_log_len: usize,
}

fn handle(slot: &SessionSlot, snapshot: &Snapshot) -> SessionHandle {
    SessionHandle {
        session_id: slot.id,
        created_at: slot.created_at,
        stats: snapshot.session.dataset.as_ref().map(Dataset::stats),
        undo_depth: slot.undo_depth(),
        op_log_len: snapshot.op_log_len(),
    }
}

fn slot(state: &AppState, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
    let uuid = Uuid::parse_str(id).map_err(|_| ApiError::not_found(format!("unknown session {id}")))?;
    state.store.get(&uuid).ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
}

fn analysis(snapshot: &Snapshot) -> Result<(&Dataset, &Analysis), ApiError> {
    match (snapshot.session.dataset.as_ref(), snapshot.analysis.as_ref()) {
        (Some(d), Some(a)) => Ok((d, a)),
        _ => Err(ApiError::conflict("the dataset is empty").at(snapshot)),
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct ImportRange(i32, i32, bool);

impl From<ImportRange> for YearFilter {
    fn from(r: ImportRange) -> Self {
        YearFilter::new(r.0, r.1, r.2)
    }
}

/// JSON form of session creation: files relative to the server workdir.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateFromFiles {
    files: Vec<String>,
    #[serde(rename = "RPY")]
    rpy: Option<ImportRange>,
    #[serde(rename = "PY")]
    py: Option<ImportRange>,
    #[serde(rename = "maxCR", default)]
    max_cr: u64,
}

#[derive(Debug, Serialize)]
struct Created {
    #[serde(flatten)]
    handle: SessionHandle,
    diagnostics: usize,
}

struct Upload {
    files: Vec<(String, Vec<u8>)>,
    rpy: YearFilter,
    py: YearFilter,
    max_cr: u64,
}

fn parse_range(field: &str, text: &str) -> Result<YearFilter, ApiError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || ApiError::bad_request(format!("field {field} must look like `lo,hi,true`"));
    match parts.as_slice() {
        [lo, hi, missing] => Ok(YearFilter::new(
            lo.parse().map_err(|_| bad())?,
            hi.parse().map_err(|_| bad())?,
            missing.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

async fn read_multipart(mut mp: Multipart) -> Result<Upload, ApiError> {
    let mut up = Upload { files: Vec::new(), rpy: YearFilter::default(), py: YearFilter::default(), max_cr: 0 };
    while let Some(field) = mp.next_field().await.map_err(|e| ApiError::bad_request(e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(str::to_string);
        let data = field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
        let text = || String::from_utf8_lossy(&data).into_owned();
        match name.as_str() {
            "file" | "files" => {
                let n = file_name.unwrap_or_else(|| format!("upload{}.txt", up.files.len() + 1));
                up.files.push((n, data.to_vec()));
            }
            "RPY" | "rpy" => up.rpy = parse_range(&name, &text())?,
            "PY" | "py" => up.py = parse_range(&name, &text())?,
            "maxCR" | "max_cr" => {
                up.max_cr = text().trim().parse().map_err(|_| ApiError::bad_request("maxCR must be an integer"))?
            }
            other => return Err(ApiError::bad_request(format!("unexpected form field `{other}`"))),
        }
    }
    Ok(up)
}

fn within_workdir(root: &Path, name: &str) -> Result<PathBuf, ApiError> {
    let rel = Path::new(name);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Err(ApiError::bad_request(format!("{name}: only plain relative paths inside the workdir are allowed")));
    }
    Ok(root.join(rel))
}

async fn create_session(State(state): State<Arc<AppState>>, req: Request) -> Result<Response, ApiError> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let upload = if is_multipart {
        let mp = Multipart::from_request(req, &()).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        read_multipart(mp).await?
    } else {
        let body = Bytes::from_request(req, &()).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        let request: CreateFromFiles =
            serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let mut files = Vec::new();
        for name in &request.files {
            let path = within_workdir(&state.workdir, name)?;
            let bytes = tokio::fs::read(&path)
                .await
                .map_err(|e| ApiError::not_found(format!("{}: {e}", path.display())))?;
            files.push((name.clone(), bytes));
        }
        Upload {
            files,
            rpy: request.rpy.map(Into::into).unwrap_or_default(),
            py: request.py.map(Into::into).unwrap_or_default(),
            max_cr: request.max_cr,
        }
    };
    if upload.files.is_empty() {
        return Err(ApiError::bad_request("no input files"));
    }

    let built = tokio::task::spawn_blocking(move || -> Result<(Dataset, usize), ApiError> {
        let mut records = Vec::new();
        let mut diagnostics = 0;
        let mut names = Vec::new();
        for (name, bytes) in &upload.files {
            let parsed = parse_wos_named(name, bytes).map_err(|e| ApiError::bad_request(format!("{name}: {e}")))?;
            diagnostics += parsed.diagnostics.len();
            records.extend(parsed.records);
            names.push(name.clone());
        }
        let ds = Dataset::build(records, names, upload.rpy, upload.py, upload.max_cr)
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        Ok((ds, diagnostics))
    })
    .await
    .expect("import task panicked")?;

    let (dataset, diagnostics) = built;
    let slot = state.store.insert(Session::new(dataset));
    let snapshot = slot.current();
    Ok(reply(StatusCode::CREATED, &snapshot, &Created { handle: handle(&slot, &snapshot), diagnostics }))
}

async fn get_handle(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = slot(&state, &id)?;
    let snapshot = slot.current();
    Ok(reply(StatusCode::OK, &snapshot, &handle(&slot, &snapshot)))
}

async fn delete_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<StatusCode, ApiError> {
    let slot = slot(&state, &id)?;
    state.store.remove(&slot.id);
    Ok(StatusCode::NO_CONTENT)
}

async fn get_stats(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let stats = snapshot.session.dataset.as_ref().map(Dataset::stats);
    Ok(reply(StatusCode::OK, &snapshot, &stats))
}

async fn get_spectrogram(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let (_, a) = analysis(&snapshot)?;
    let rows: &[SpectrogramRow] = &a.spectrogram;
    Ok(reply(StatusCode::OK, &snapshot, &rows))
}

async fn get_bundle(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let (d, a) = analysis(&snapshot)?;
    let bundle: UiBundle = export::export_ui_bundle(d, a);
    Ok(reply(StatusCode::OK, &snapshot, &bundle))
}

#[derive(Debug, Deserialize)]
struct LimitQuery {
    limit: Option<usize>,
}

fn year_in_span(snapshot: &Snapshot, a: &Analysis, rpy: i32) -> Result<(), ApiError> {
    match (a.spectrogram.first(), a.spectrogram.last()) {
        (Some(lo), Some(hi)) if (lo.rpy..=hi.rpy).contains(&rpy) => Ok(()),
        _ => Err(ApiError::not_found(format!("year {rpy} lies outside the spectrogram span")).at(snapshot)),
    }
}

async fn get_year_references(
    State(state): State<Arc<AppState>>,
    UrlPath((id, rpy)): UrlPath<(String, i32)>,
    Query(q): Query<LimitQuery>,
) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let (d, a) = analysis(&snapshot)?;
    year_in_span(&snapshot, a, rpy)?;
    let rows: Vec<TopReference> =
        export::top_references(d, a, rpy, q.limit.unwrap_or(export::bundle::TOOLTIP_LIMIT));
    Ok(reply(StatusCode::OK, &snapshot, &rows))
}

async fn get_peak_report(
    State(state): State<Arc<AppState>>,
    UrlPath((id, rpy)): UrlPath<(String, i32)>,
) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let (d, a) = analysis(&snapshot)?;
    let report: PeakReport =
        peak_report(d, &a.indicators, rpy).map_err(|e| ApiError::not_found(e.to_string()).at(&snapshot))?;
    Ok(reply(StatusCode::OK, &snapshot, &report))
}

#[derive(Debug, Deserialize)]
struct ReferenceQuery {
    sort: Option<String>,
    desc: Option<String>,
    limit: Option<usize>,
    offset: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ReferenceRow<'a> {
    cr_id: u64,
    #[serde(rename = "CR")]
    cr: &'a str,
    #[serde(rename = "RPY")]
    rpy: Option<i32>,
    #[serde(rename = "N_CR")]
    n_cr: u64,
    #[serde(rename = "PERC_YR")]
    perc_yr: Option<f64>,
    #[serde(rename = "N_PYEARS")]
    n_pyears: u32,
    #[serde(rename = "N_TOP10")]
    n_top10: u32,
    #[serde(rename = "N_TOP1")]
    n_top1: u32,
    #[serde(rename = "N_TOP0_1")]
    n_top0_1: u32,
}

#[derive(Debug, Serialize)]
struct ReferencePage<'a> {
    total: usize,
    rows: Vec<ReferenceRow<'a>>,
}

async fn get_references(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ReferenceQuery>,
) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let (d, a) = analysis(&snapshot)?;
    let by_top10 = match q.sort.as_deref() {
        None | Some("n_cr") => false,
        Some("n_top10") => true,
        Some(other) => return Err(ApiError::bad_request(format!("unknown sort key `{other}`")).at(&snapshot)),
    };
    let desc = q.desc.as_deref().is_some_and(|v| !matches!(v, "false" | "0"));
    let mut rows: Vec<ReferenceRow> = d
        .references
        .iter()
        .zip(&a.indicators)
        .map(|(r, i)| ReferenceRow {
            cr_id: r.cr_id,
            cr: r.raw(),
            rpy: r.rpy(),
            n_cr: r.n_cr,
            perc_yr: i.perc_yr,
            n_pyears: i.n_pyears,
            n_top10: i.n_top10,
            n_top1: i.n_top1,
            n_top0_1: i.n_top0_1,
        })
        .collect();
    rows.sort_by(|x, y| {
        let key = |r: &ReferenceRow| if by_top10 { (u64::from(r.n_top10), r.n_cr) } else { (r.n_cr, 0) };
        let ord = key(x).cmp(&key(y));
        (if desc { ord.reverse() } else { ord }).then_with(|| x.cr.cmp(y.cr))
    });
    let total = rows.len();
    let rows = rows.into_iter().skip(q.offset.unwrap_or(0)).take(q.limit.unwrap_or(usize::MAX)).collect();
    Ok(reply(StatusCode::OK, &snapshot, &ReferencePage { total, rows }))
}

async fn get_progress(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = slot(&state, &id)?;
    let snapshot = slot.current();
    Ok(reply(StatusCode::OK, &snapshot, &slot.progress()))
}

/// JSON operation body. A `script` member holds script text instead.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", deny_unknown_fields)]
enum OpRequest {
    #[serde(rename = "cluster")]
    Cluster {
        threshold: Option<f64>,
        volume: Option<bool>,
        page: Option<bool>,
        #[serde(rename = "DOI", alias = "doi")]
        doi: Option<bool>,
    },
    #[serde(rename = "merge")]
    Merge,
    #[serde(rename = "removeCR")]
    RemoveCr {
        lo: Option<u64>,
        hi: Option<u64>,
        #[serde(rename = "N_CR")]
        n_cr: Option<[u64; 2]>,
    },
}

impl OpRequest {
    fn into_op(self) -> Result<SessionOp, ApiError> {
        match self {
            OpRequest::Cluster { threshold, volume, page, doi } => {
                let d = ClusterConfig::default();
                Ok(SessionOp::Cluster(ClusterConfig {
                    threshold: threshold.unwrap_or(d.threshold),
                    use_volume: volume.unwrap_or(d.use_volume),
                    use_page: page.unwrap_or(d.use_page),
                    use_doi: doi.unwrap_or(d.use_doi),
                }))
            }
            OpRequest::Merge => Ok(SessionOp::Merge),
            OpRequest::RemoveCr { lo, hi, n_cr } => match (lo, hi, n_cr) {
                (Some(lo), Some(hi), None) | (None, None, Some([lo, hi])) => Ok(SessionOp::RemoveCr { lo, hi }),
                _ => Err(ApiError::bad_request("removeCR needs either `lo` and `hi` or `N_CR: [lo, hi]`")),
            },
        }
    }
}

fn ops_from_body(body: &[u8]) -> Result<(String, Vec<SessionOp>), ApiError> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if let Some(script) = value.get("script") {
        let text = script.as_str().ok_or_else(|| ApiError::bad_request("`script` must be a string"))?;
        let commands = parse_script(text).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let mut ops = Vec::new();
        for c in &commands {
            let op = match c.step().map_err(|e| ApiError::bad_request(e.to_string()))? {
                Step::Cluster(config) => SessionOp::Cluster(config),
                Step::Merge => SessionOp::Merge,
                Step::RemoveCr { lo, hi } => SessionOp::RemoveCr { lo, hi },
                _ => {
                    return Err(ApiError::bad_request(format!(
                        "{} is not available over HTTP; use session creation or /export",
                        c.name
                    )))
                }
            };
            ops.push(op);
        }
        if ops.is_empty() {
            return Err(ApiError::bad_request("the script contains no commands"));
        }
        let label = commands.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("+");
        return Ok((label, ops));
    }
    let req: OpRequest = serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let op = req.into_op()?;
    let label = match op {
        SessionOp::Cluster(_) => "cluster",
        SessionOp::Merge => "merge",
        SessionOp::RemoveCr { .. } => "removeCR",
    };
    Ok((label.to_string(), vec![op]))
}

async fn post_op(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let slot = slot(&state, &id)?;
    let (label, ops) = ops_from_body(&body).map_err(|e| e.at(&slot.current()))?;
    let result = slot
        .mutate(&label, move |session| ops.iter().try_for_each(|op| session.apply(op)))
        .await;
    match result {
        Ok(snapshot) => Ok(reply(StatusCode::OK, &snapshot, &handle(&slot, &snapshot))),
        Err(e) => Err(ApiError::from(e).at(&slot.current())),
    }
}

async fn post_undo(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let slot = slot(&state, &id)?;
    match slot.undo().await {
        Some(snapshot) => Ok(reply(StatusCode::OK, &snapshot, &handle(&slot, &snapshot))),
        None => Err(ApiError::conflict("nothing to undo").at(&slot.current())),
    }
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(rename = "type")]
    kind: String,
}

async fn get_export(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let snapshot = slot(&state, &id)?.current();
    let fail = |e: export::ExportError| ApiError::conflict(e.to_string()).at(&snapshot);
    let (bytes, mime) = match q.kind.as_str() {
        "CSV_CR" => {
            let (d, a) = analysis(&snapshot)?;
            (export::csv_cr_bytes(d, a).map_err(fail)?, "text/csv; charset=utf-8")
        }
        "CSV_GRAPH" => {
            let (d, a) = analysis(&snapshot)?;
            (export::csv_graph_bytes(d, a).map_err(fail)?, "text/csv; charset=utf-8")
        }
        "CRE" => (export::encode_cre(&snapshot.session), "application/octet-stream"),
        other => return Err(ApiError::bad_request(format!("unknown export type `{other}`")).at(&snapshot)),
    };
    let mut resp = ([(header::CONTENT_TYPE, mime)], bytes).into_response();
    set_token(&mut resp, snapshot.op_log_len());
    Ok(resp)
}
