//! HTTP routes and their JSON bodies.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clickwise::corpus::{content_tokens, tokenize};
use clickwise::decoder::{
    final_scores, parse_grid, positive_guidance, rewrite, sweep_cell, DecodeConfig, DecodeMode, GuidanceSpace, Omega,
    StepTrace, SweepRow, SWEEP_CSV_HEADER,
};
use clickwise::rubric::{list_tactics, rubric_json, TACTIC_COUNT};
use serde::{Deserialize, Serialize};
use tokio_stream::wrappers::ReceiverStream;
use tokio_stream::StreamExt;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::trace::TraceLayer;

use crate::config::ServiceConfig;
use crate::state::{AppState, ServiceState};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub step: Option<usize>,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            step: None,
        }
    }

    fn unavailable() -> Self {
        ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            message: "models are not loaded".into(),
            step: None,
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
            step: None,
        }
    }
}

impl From<clickwise::Error> for ApiError {
    fn from(e: clickwise::Error) -> Self {
        use clickwise::Error as E;
        match e {
            E::EmptyInput(_) | E::InvalidArgument(_) | E::UnknownTactic(_) => ApiError::bad_request(e.to_string()),
            E::Decode { step, .. } => ApiError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                message: e.to_string(),
                step: Some(step),
            },
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.message,
            step: self.step,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs `f` on the blocking pool with the current snapshot. Snapshots are
/// only ever held (and dropped) there, since a remote base model owns a
/// blocking HTTP client.
async fn with_snapshot<T, F>(app: Arc<AppState>, f: F) -> ApiResult<T>
where
    F: FnOnce(&AppState, Arc<ServiceState>) -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(move || {
        let snap = app.snapshot().ok_or_else(ApiError::unavailable)?;
        f(&app, snap)
    })
    .await
    .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

pub fn named_scores(scores: &[f64; TACTIC_COUNT]) -> BTreeMap<&'static str, f64> {
    list_tactics().iter().map(|t| (t.name, scores[t.id])).collect()
}

fn owned_names(scores: &[f64; TACTIC_COUNT]) -> BTreeMap<String, f64> {
    named_scores(scores).into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

async fn health(State(app): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    tokio::task::spawn_blocking(move || {
        let snap = app.snapshot();
        Json(serde_json::json!({
            "status": "ok",
            "models_loaded": snap.is_some(),
            "versions": snap.as_ref().map(|s| &s.versions),
            "started_at": app.started_at,
            "loaded_at": snap.as_ref().map(|s| s.loaded_at),
        }))
    })
    .await
    .map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

async fn tactics() -> Json<serde_json::Value> {
    Json(rubric_json())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub clickbait_score: f64,
    pub attribute_scores: BTreeMap<String, f64>,
}

/// Scores `text` as a finished headline with both guides.
pub fn handle_score(snap: &ServiceState, req: &ScoreRequest) -> ApiResult<ScoreResponse> {
    let tokens = tokenize(&req.text)?;
    if content_tokens(&tokens).is_empty() {
        return Err(ApiError::bad_request("text has no content tokens"));
    }
    let (cb, attrs) = final_scores(&tokens, snap.providers());
    Ok(ScoreResponse {
        clickbait_score: cb,
        attribute_scores: owned_names(&attrs),
    })
}

async fn score(State(app): State<Arc<AppState>>, body: Result<Json<ScoreRequest>, JsonRejection>) -> ApiResult<Json<ScoreResponse>> {
    let Json(req) = body?;
    with_snapshot(app, move |_, snap| handle_score(&snap, &req).map(Json)).await
}

/// Unset optional knobs fall back to the service defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewriteRequest {
    pub headline: String,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default)]
    pub suppress: Vec<String>,
    /// Raw ω vector; must agree with `targets`/`suppress` when both given.
    #[serde(default)]
    pub omega: Option<Vec<i8>>,
    #[serde(default)]
    pub lambda_pos: f64,
    #[serde(default)]
    pub lambda_neg: f64,
    #[serde(default)]
    pub mode: DecodeMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub anchor_len: Option<usize>,
    #[serde(default)]
    pub guidance_space: Option<GuidanceSpace>,
    #[serde(default)]
    pub n_candidates: Option<usize>,
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteCandidate {
    pub text: String,
    pub clickbait_score: f64,
    pub attribute_scores: BTreeMap<String, f64>,
    pub s_pos: f64,
    pub fidelity: f64,
    pub logprob: f64,
    pub seed: u64,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<StepTrace>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteResponse {
    pub candidates: Vec<RewriteCandidate>,
    /// Fully resolved request; posting it again reproduces this response.
    pub config: RewriteRequest,
}

fn resolve_omega(targets: &[String], suppress: &[String], raw: Option<&[i8]>) -> ApiResult<Omega> {
    let named = Omega::from_names(targets, suppress)?;
    let Some(raw) = raw else { return Ok(named) };
    let raw = Omega::try_from(raw.to_vec())?;
    if (!targets.is_empty() || !suppress.is_empty()) && raw != named {
        return Err(ApiError::bad_request("omega disagrees with targets/suppress"));
    }
    Ok(raw)
}

fn omega_names(omega: &Omega, sign: i8) -> Vec<String> {
    list_tactics()
        .iter()
        .filter(|t| omega.values()[t.id] == sign)
        .map(|t| t.name.to_string())
        .collect()
}

struct Resolved {
    config: DecodeConfig,
    echo: RewriteRequest,
    n: usize,
}

fn resolve_rewrite(req: RewriteRequest, svc: &ServiceConfig) -> ApiResult<Resolved> {
    if req.headline.trim().is_empty() {
        return Err(ApiError::bad_request("headline is empty"));
    }
    let omega = resolve_omega(&req.targets, &req.suppress, req.omega.as_deref())?;
    let defaults = DecodeConfig::default();
    let config = DecodeConfig {
        lambda_pos: req.lambda_pos,
        lambda_neg: req.lambda_neg,
        omega,
        k: req.k.unwrap_or(svc.default_k),
        max_len: req.max_len.unwrap_or(svc.default_max_len),
        mode: req.mode,
        temperature: req.temperature.unwrap_or(defaults.temperature),
        seed: req.seed,
        anchor_len: req.anchor_len.unwrap_or(defaults.anchor_len),
        guidance_space: req.guidance_space.unwrap_or(defaults.guidance_space),
        ..defaults
    };
    config.validate()?;
    let n = match req.mode {
        DecodeMode::Greedy => 1,
        DecodeMode::Sample => req.n_candidates.unwrap_or(1),
    };
    if n == 0 || n > svc.max_candidates {
        return Err(ApiError::bad_request(format!(
            "n_candidates must be between 1 and {}",
            svc.max_candidates
        )));
    }
    let echo = RewriteRequest {
        headline: req.headline,
        targets: omega_names(&omega, 1),
        suppress: omega_names(&omega, -1),
        omega: Some(omega.values().to_vec()),
        lambda_pos: config.lambda_pos,
        lambda_neg: config.lambda_neg,
        mode: config.mode,
        seed: config.seed,
        k: Some(config.k),
        max_len: Some(config.max_len),
        temperature: Some(config.temperature),
        anchor_len: Some(config.anchor_len),
        guidance_space: Some(config.guidance_space),
        n_candidates: Some(n),
        trace: req.trace,
    };
    Ok(Resolved { config, echo, n })
}

/// Decodes `n` candidates with seeds `seed, seed + 1, ...` and sorts them by
/// positive guidance on the final text, best first.
fn run_rewrite(snap: &ServiceState, resolved: &Resolved) -> ApiResult<Vec<RewriteCandidate>> {
    let mut out = Vec::with_capacity(resolved.n);
    for i in 0..resolved.n {
        let config = DecodeConfig {
            seed: resolved.config.seed.wrapping_add(i as u64),
            ..resolved.config.clone()
        };
        let r = rewrite(&resolved.echo.headline, &config, snap.providers())?;
        out.push(RewriteCandidate {
            clickbait_score: r.clickbait_score,
            attribute_scores: owned_names(&r.attribute_scores),
            s_pos: positive_guidance(&r.attribute_scores, &config.omega),
            fidelity: r.fidelity,
            logprob: r.logprob,
            seed: config.seed,
            completed: r.completed,
            trace: resolved.echo.trace.then_some(r.trace),
            text: r.text,
        });
    }
    out.sort_by(|a, b| b.s_pos.total_cmp(&a.s_pos));
    Ok(out)
}

/// Resolves defaults, decodes, and echoes the resolved request.
pub fn handle_rewrite(snap: &ServiceState, svc: &ServiceConfig, req: RewriteRequest) -> ApiResult<RewriteResponse> {
    let resolved = resolve_rewrite(req, svc)?;
    let candidates = run_rewrite(snap, &resolved)?;
    Ok(RewriteResponse {
        candidates,
        config: resolved.echo,
    })
}

async fn rewrite_handler(
    State(app): State<Arc<AppState>>,
    body: Result<Json<RewriteRequest>, JsonRejection>,
) -> ApiResult<Json<RewriteResponse>> {
    let Json(req) = body?;
    with_snapshot(app, move |app, snap| handle_rewrite(&snap, &app.config, req).map(Json)).await
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepFormat {
    /// One JSON document once every cell is done.
    #[default]
    Json,
    /// CSV streamed one row per finished cell.
    Csv,
    /// Newline-delimited JSON streamed one row per finished cell.
    Ndjson,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    #[serde(default)]
    pub headlines: Vec<String>,
    /// Record ids looked up in the configured dataset.
    #[serde(default)]
    pub record_ids: Vec<String>,
    /// `"<λ_pos values>x<λ_neg values>"`, e.g. `"0,0.5,1x0,1"`.
    pub grid: String,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default)]
    pub suppress: Vec<String>,
    #[serde(default)]
    pub omega: Option<Vec<i8>>,
    #[serde(default)]
    pub mode: DecodeMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub anchor_len: Option<usize>,
    #[serde(default)]
    pub guidance_space: Option<GuidanceSpace>,
    #[serde(default)]
    pub format: SweepFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResponse {
    pub rows: Vec<SweepRow>,
    /// True when any cell lost headlines to decode failures.
    pub partial: bool,
    pub omega: Vec<i8>,
}

/// A validated sweep, ready to run cell by cell.
pub struct PreparedSweep {
    pub headlines: Vec<String>,
    pub grid: Vec<(f64, f64)>,
    pub omega: Omega,
    pub base: DecodeConfig,
    pub format: SweepFormat,
}

impl PreparedSweep {
    pub fn run_cell(&self, snap: &ServiceState, cell: (f64, f64)) -> SweepRow {
        sweep_cell(&self.headlines, cell, self.omega, &self.base, snap.providers())
    }

    pub fn run(&self, snap: &ServiceState) -> SweepResponse {
        let rows: Vec<SweepRow> = self.grid.iter().map(|&c| self.run_cell(snap, c)).collect();
        SweepResponse {
            partial: rows.iter().any(SweepRow::is_partial),
            rows,
            omega: self.omega.values().to_vec(),
        }
    }
}

pub fn prepare_sweep(snap: &ServiceState, svc: &ServiceConfig, req: SweepRequest) -> ApiResult<PreparedSweep> {
    let grid = parse_grid(&req.grid)?;
    let mut headlines = req.headlines;
    for id in &req.record_ids {
        if snap.headlines.is_empty() {
            return Err(ApiError::bad_request("record_ids given but no dataset is configured"));
        }
        let text = snap
            .headlines
            .get(id)
            .ok_or_else(|| ApiError::bad_request(format!("unknown record id {id:?}")))?;
        headlines.push(text.clone());
    }
    if headlines.is_empty() {
        return Err(ApiError::bad_request("no headlines given"));
    }
    if headlines.len() > svc.max_sweep_headlines {
        return Err(ApiError::bad_request(format!(
            "at most {} headlines per sweep",
            svc.max_sweep_headlines
        )));
    }
    let omega = resolve_omega(&req.targets, &req.suppress, req.omega.as_deref())?;
    let defaults = DecodeConfig::default();
    let base = DecodeConfig {
        omega,
        k: req.k.unwrap_or(svc.default_k),
        max_len: req.max_len.unwrap_or(svc.default_max_len),
        mode: req.mode,
        temperature: req.temperature.unwrap_or(defaults.temperature),
        seed: req.seed,
        anchor_len: req.anchor_len.unwrap_or(defaults.anchor_len),
        guidance_space: req.guidance_space.unwrap_or(defaults.guidance_space),
        ..defaults
    };
    base.validate()?;
    Ok(PreparedSweep {
        headlines,
        grid,
        omega,
        base,
        format: req.format,
    })
}

/// Streams one line per finished cell from a blocking producer.
fn stream_sweep(prepared: PreparedSweep, snap: Arc<ServiceState>) -> Response {
    let format = prepared.format;
    let (tx, rx) = tokio::sync::mpsc::channel::<String>(4);
    tokio::task::spawn_blocking(move || {
        if format == SweepFormat::Csv && tx.blocking_send(format!("{SWEEP_CSV_HEADER}\n")).is_err() {
            return;
        }
        for &cell in &prepared.grid {
            let row = prepared.run_cell(&snap, cell);
            let line = match format {
                SweepFormat::Csv => format!("{}\n", row.csv_line()),
                _ => format!("{}\n", serde_json::to_string(&row).expect("row serializes")),
            };
            if tx.blocking_send(line).is_err() {
                // Client went away.
                return;
            }
        }
    });
    let content_type = match format {
        SweepFormat::Csv => "text/csv",
        _ => "application/x-ndjson",
    };
    let stream = ReceiverStream::new(rx).map(Ok::<_, Infallible>);
    ([(header::CONTENT_TYPE, content_type)], Body::from_stream(stream)).into_response()
}

async fn sweep_handler(State(app): State<Arc<AppState>>, body: Result<Json<SweepRequest>, JsonRejection>) -> ApiResult<Response> {
    let Json(req) = body?;
    with_snapshot(app, move |app, snap| {
        let prepared = prepare_sweep(&snap, &app.config, req)?;
        Ok(match prepared.format {
            SweepFormat::Json => Json(prepared.run(&snap)).into_response(),
            _ => stream_sweep(prepared, snap),
        })
    })
    .await
}

fn cors(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    if origins.iter().any(|o| o == "*") {
        return Some(layer.allow_origin(Any));
    }
    let values: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    Some(layer.allow_origin(AllowOrigin::list(values)))
}

pub fn router(app: Arc<AppState>) -> Router {
    let cors = cors(&app.config.cors_origins);
    let router = Router::new()
        .route("/health", get(health))
        .route("/tactics", get(tactics))
        .route("/score", post(score))
        .route("/rewrite", post(rewrite_handler))
        .route("/sweep", post(sweep_handler))
        .with_state(app)
        .layer(TraceLayer::new_for_http());
    match cors {
        Some(layer) => router.layer(layer),
        None => router,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_from_names_and_raw() {
        let t = vec!["emphasis_intensity".to_string()];
        let o = resolve_omega(&t, &[], None).unwrap();
        assert_eq!(o.values(), [0, 1, 0, 0, 0, 0, 0, 0, 0, 0]);
        let raw = [0, 1, 0, 0, 0, 0, 0, 0, 0, 0];
        assert_eq!(resolve_omega(&t, &[], Some(&raw)).unwrap(), o);
        assert_eq!(resolve_omega(&[], &[], Some(&raw)).unwrap(), o);
        let other = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        assert_eq!(resolve_omega(&t, &[], Some(&other)).unwrap_err().status, StatusCode::BAD_REQUEST);
        let err = resolve_omega(&["x".to_string()], &[], None).unwrap_err();
        assert!(err.message.contains("\"x\""), "{}", err.message);
        assert!(resolve_omega(&t, &t, None).is_err());
    }

    #[test]
    fn decode_errors_carry_the_step() {
        let e = clickwise::Error::Decode {
            step: 3,
            source: Box::new(clickwise::Error::Transport("down".into())),
        };
        let api = ApiError::from(e);
        assert_eq!(api.status, StatusCode::INTERNAL_SERVER_ERROR);
        assert_eq!(api.step, Some(3));
    }

    #[test]
    fn names_follow_rubric() {
        let mut s = [0.0; TACTIC_COUNT];
        s[9] = 0.5;
        let named = named_scores(&s);
        assert_eq!(named.len(), 10);
        assert_eq!(named["interrogative_form"], 0.5);
    }
}
