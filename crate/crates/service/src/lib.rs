//! Read-only HTTP API over an exported index and optional word vectors.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lexcomp_core::corpus::{ingest_plain, CorpusError, Document, Pos, Token};
use lexcomp_core::embeddings::EmbeddingError;
use lexcomp_core::{suggest, ContentPos, EmbeddingTable, LemmaEntry, LexIndex, LixBand, SuggestOptions, Suggestion};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const DEFAULT_K: usize = 10;

#[derive(Clone)]
pub struct AppState {
    pub index: Arc<LexIndex>,
    pub vectors: Option<Arc<EmbeddingTable>>,
}

impl AppState {
    pub fn new(index: LexIndex, vectors: Option<EmbeddingTable>) -> Self {
        AppState {
            index: Arc::new(index),
            vectors: vectors.map(Arc::new),
        }
    }

    pub fn load(index_path: &Path, vectors_path: Option<&Path>) -> anyhow::Result<Self> {
        let index = LexIndex::import_aggregates(index_path)
            .with_context(|| format!("loading index {}", index_path.display()))?;
        let vectors = vectors_path
            .map(|p| EmbeddingTable::load(p).with_context(|| format!("loading vectors {}", p.display())))
            .transpose()?;
        Ok(AppState::new(index, vectors))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, r.body_text())
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
    pub m: usize,
    pub entries: usize,
    pub dim: Option<usize>,
}

/// One pre-annotated token, mirroring the FORM, LEMMA and UPOS columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub form: String,
    #[serde(default)]
    pub lemma: Option<String>,
    #[serde(default)]
    pub upos: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    #[serde(default)]
    pub text: String,
    /// Sentences of pre-annotated tokens; used instead of `text` when present.
    #[serde(default)]
    pub tokens: Option<Vec<Vec<AnnotatedToken>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TokenAnnotation {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub cs: Option<f64>,
    pub content_word: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AnalyzeResponse {
    pub tokens: Vec<TokenAnnotation>,
    pub sentence_lix: f64,
    pub band: LixBand,
}

#[derive(Debug, Deserialize)]
pub struct SuggestParams {
    pub lemma: String,
    pub k: Option<usize>,
    pub exclude: Option<String>,
    pub pos: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct LemmaParams {
    pub pos: Option<String>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/analyze", post(analyze))
        .route("/suggest", get(suggest_handler))
        .route("/lemma/{lemma}", get(lemma_handler))
        .with_state(state)
}

/// Adds a CORS layer for `origin` ("*" allows any origin).
pub fn with_cors(router: Router, origin: &str) -> anyhow::Result<Router> {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        AllowOrigin::exact(HeaderValue::from_str(origin).context("invalid CORS origin")?)
    };
    let layer = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Ok(router.layer(layer))
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        m: state.index.m(),
        entries: state.index.len(),
        dim: state.vectors.as_ref().map(|v| v.dim()),
    })
}

fn parse_pos(raw: Option<&str>) -> Result<Option<ContentPos>, ApiError> {
    raw.filter(|s| !s.is_empty())
        .map(|s| s.parse::<ContentPos>().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string())))
        .transpose()
}

/// Annotates a document against the index.
pub fn annotate(index: &LexIndex, doc: &Document) -> AnalyzeResponse {
    let tokens = doc
        .tokens()
        .map(|t| {
            let entry = ContentPos::try_from(t.pos)
                .ok()
                .and_then(|p| index.get(&t.lemma, p));
            TokenAnnotation {
                surface: t.surface.clone(),
                lemma: t.lemma.clone(),
                pos: t.pos,
                cs: entry.map(|e| e.cs),
                content_word: t.pos.is_content(),
            }
        })
        .collect();
    AnalyzeResponse {
        tokens,
        sentence_lix: doc.stats.lix,
        band: LixBand::from_score(doc.stats.lix),
    }
}

/// Builds the request document. Plain-text tokens take the part of speech of
/// their lemma's most frequent index entry, falling back to OTHER.
pub fn request_document(index: &LexIndex, req: &AnalyzeRequest) -> Result<Document, CorpusError> {
    const ID: &str = "request";
    match &req.tokens {
        Some(sentences) => {
            let sentences = sentences
                .iter()
                .map(|s| {
                    s.iter()
                        .filter(|t| t.form.chars().any(char::is_alphanumeric))
                        .map(|t| {
                            let pos = t.upos.as_deref().map(Pos::from_upos).unwrap_or(Pos::Other);
                            Token::new(t.form.clone(), t.lemma.as_deref(), pos)
                        })
                        .collect()
                })
                .collect();
            Document::new(ID, ID, sentences)
        }
        None => {
            let mut doc = ingest_plain(&req.text, ID, ID)?;
            for token in doc.sentences.iter_mut().flatten() {
                if let Some(entry) = index.primary_entry(&token.lemma) {
                    token.pos = entry.pos.into();
                }
            }
            Ok(doc)
        }
    }
}

async fn analyze(State(state): State<AppState>, body: Bytes) -> Result<Json<AnalyzeResponse>, ApiError> {
    if body.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "empty request body"));
    }
    let req: AnalyzeRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("invalid JSON: {e}")))?;
    let doc = request_document(&state.index, &req).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    Ok(Json(annotate(&state.index, &doc)))
}

async fn suggest_handler(
    State(state): State<AppState>,
    params: Result<Query<SuggestParams>, QueryRejection>,
) -> Result<Json<Vec<Suggestion>>, ApiError> {
    let Query(params) = params?;
    let table = state
        .vectors
        .as_ref()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no word vectors loaded"))?;
    let exclude: HashSet<&str> = params
        .exclude
        .as_deref()
        .unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .collect();
    let options = SuggestOptions::new(params.k.unwrap_or(DEFAULT_K))
        .exclude(exclude)
        .pos(parse_pos(params.pos.as_deref())?);
    match suggest(&state.index, table, &params.lemma, &options) {
        Ok(rows) => Ok(Json(rows)),
        Err(EmbeddingError::EmptySuggestions(_)) => Ok(Json(Vec::new())),
        Err(e @ EmbeddingError::UnknownWord(_)) => Err(ApiError::new(StatusCode::NOT_FOUND, e.to_string())),
        Err(e @ EmbeddingError::InvalidK) => Err(ApiError::new(StatusCode::BAD_REQUEST, e.to_string())),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

async fn lemma_handler(
    State(state): State<AppState>,
    UrlPath(lemma): UrlPath<String>,
    params: Result<Query<LemmaParams>, QueryRejection>,
) -> Result<Json<Vec<LemmaEntry>>, ApiError> {
    let Query(params) = params?;
    let pos = parse_pos(params.pos.as_deref())?;
    let entries: Vec<LemmaEntry> = state.index.lookup(&lemma, pos).into_iter().cloned().collect();
    if entries.is_empty() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown lemma '{lemma}'")));
    }
    Ok(Json(entries))
}
