//! HTTP backend for labeling candidate cuts.
//!
//! The corpus is analyzed once at startup; every word's candidate cuts (the
//! heuristic boundaries, in input-image columns) become the columns a label
//! may be attached to. Labels live in a [`LabelStore`].
//!
//! | method | path | result |
//! |--------|------|--------|
//! | GET | `/api/words` | word list with label progress |
//! | GET | `/api/words/{id}/image` | PGM, or PNG when `Accept` asks for it |
//! | GET | `/api/words/{id}/cuts` | cut list merged with labels |
//! | PUT | `/api/words/{id}/cuts/{column}` | `{"label":"valid"\|"invalid"}` → 204 |
//! | DELETE | `/api/words/{id}/cuts/{column}` | 204 |
//! | POST | `/api/export` | `{rows, path}` |
//!
//! Anything else under `/` is served from the static asset directory, if
//! one is configured.

mod store;

pub use store::{Label, LabelStore, StoredLabel};

use std::collections::{BTreeMap, BTreeSet};
use std::future::Future;
use std::io::Cursor;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use cursive_cut::corpus::{export_training_set, load_corpus, write_training_set, CutLabel, LabeledCut, WordRecord};
use cursive_cut::imgproc::encode_pgm;
use cursive_cut::pipeline::{analyze_word, PipelineConfig};
use cursive_cut::segmenter::{CandidateCut, CutStatus};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] cursive_cut::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt label log: {0}")]
    CorruptLog(String),
    #[error("unknown word {0:?}")]
    UnknownWord(String),
    #[error("word {word_id:?} has no candidate cut at column {column}")]
    NotACandidate { word_id: String, column: usize },
    #[error("malformed request: {0}")]
    BadRequest(String),
    #[error("image encoding failed: {0}")]
    Encode(String),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub corpus_dir: PathBuf,
    pub labels_path: PathBuf,
    /// Where `POST /api/export` writes the training set.
    pub export_path: PathBuf,
    pub pipeline: PipelineConfig,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    /// Labels and export file inside the corpus directory, default pipeline.
    pub fn for_corpus(corpus_dir: impl Into<PathBuf>) -> Self {
        let corpus_dir = corpus_dir.into();
        ServiceConfig {
            labels_path: corpus_dir.join("labels.jsonl"),
            export_path: corpus_dir.join("training.jsonl"),
            corpus_dir,
            pipeline: PipelineConfig::default(),
            static_dir: None,
        }
    }
}

struct Word {
    record: WordRecord,
    width: usize,
    height: usize,
    cuts: Vec<CandidateCut>,
    candidates: BTreeSet<usize>,
}

pub struct AppState {
    words: BTreeMap<String, Word>,
    order: Vec<String>,
    store: Mutex<LabelStore>,
    config: ServiceConfig,
}

impl AppState {
    /// Loads and analyzes the corpus and opens the label log.
    pub fn load(config: ServiceConfig) -> Result<Self, ServiceError> {
        let records = load_corpus(&config.corpus_dir)?;
        let mut words = BTreeMap::new();
        let mut order = Vec::with_capacity(records.len());
        for record in records {
            let image = record.load_image()?;
            let analysis = analyze_word(&image, &config.pipeline)?;
            let cuts = analysis.source_cuts();
            let candidates = cuts
                .iter()
                .filter(|c| c.status == CutStatus::HeuristicValid)
                .map(|c| c.column)
                .collect();
            order.push(record.word_id.clone());
            words.insert(
                record.word_id.clone(),
                Word {
                    record,
                    width: image.width(),
                    height: image.height(),
                    cuts,
                    candidates,
                },
            );
        }
        let store = LabelStore::open(&config.labels_path)?;
        Ok(AppState {
            words,
            order,
            store: Mutex::new(store),
            config,
        })
    }

    fn word(&self, id: &str) -> Result<&Word, ServiceError> {
        self.words.get(id).ok_or_else(|| ServiceError::UnknownWord(id.to_string()))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, LabelStore> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Corpus records with their current labels attached.
    pub fn labeled_records(&self) -> Vec<WordRecord> {
        let store = self.lock();
        self.order
            .iter()
            .map(|id| {
                let word = &self.words[id];
                let labels = store.word_labels(id);
                let mut record = word.record.clone();
                record.cuts = word
                    .candidates
                    .iter()
                    .map(|&column| LabeledCut {
                        column,
                        label: match labels.get(&column).map(|l| l.label) {
                            Some(Label::Valid) => CutLabel::Valid,
                            Some(Label::Invalid) => CutLabel::Invalid,
                            None => CutLabel::Unlabeled,
                        },
                    })
                    .collect();
                record
            })
            .collect()
    }

    pub fn label_count(&self) -> usize {
        self.lock().len()
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownWord(_) => StatusCode::NOT_FOUND,
            ServiceError::NotACandidate { .. } => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Core(cursive_cut::Error::NoLabels) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            log::error!("{self}");
        }
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = Arc<AppState>;

#[derive(Serialize)]
struct WordSummary {
    word_id: String,
    width: usize,
    height: usize,
    /// Candidate cuts that carry a label.
    labeled_count: usize,
    cut_count: usize,
}

async fn list_words(State(state): State<Shared>) -> Json<Vec<WordSummary>> {
    let store = state.lock();
    let out = state
        .order
        .iter()
        .map(|id| {
            let w = &state.words[id];
            WordSummary {
                word_id: id.clone(),
                width: w.width,
                height: w.height,
                labeled_count: store.word_labels(id).len(),
                cut_count: w.candidates.len(),
            }
        })
        .collect();
    Json(out)
}

async fn word_image(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Response, ServiceError> {
    let word = state.word(&id)?;
    let img = word.record.load_image()?;
    let wants_png = headers
        .get(header::ACCEPT)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("image/png"));
    if wants_png {
        let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.pixels().to_vec())
            .ok_or_else(|| ServiceError::Encode("pixel buffer size".into()))?;
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| ServiceError::Encode(e.to_string()))?;
        Ok(([(header::CONTENT_TYPE, "image/png")], out.into_inner()).into_response())
    } else {
        Ok(([(header::CONTENT_TYPE, "image/x-portable-graymap")], encode_pgm(&img)).into_response())
    }
}

#[derive(Serialize)]
struct CutView {
    #[serde(flatten)]
    cut: CandidateCut,
    candidate: bool,
    label: &'static str,
}

async fn word_cuts(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Result<Json<Vec<CutView>>, ServiceError> {
    let word = state.word(&id)?;
    let labels = state.lock().word_labels(&id);
    let views = word
        .cuts
        .iter()
        .map(|c| CutView {
            cut: *c,
            candidate: c.status == CutStatus::HeuristicValid,
            label: match labels.get(&c.column).map(|l| l.label) {
                Some(Label::Valid) if c.status == CutStatus::HeuristicValid => "valid",
                Some(Label::Invalid) if c.status == CutStatus::HeuristicValid => "invalid",
                _ => "unlabeled",
            },
        })
        .collect();
    Ok(Json(views))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelBody {
    label: Label,
}

fn parse_column(raw: &str) -> Result<usize, ServiceError> {
    raw.parse()
        .map_err(|_| ServiceError::BadRequest(format!("column {raw:?} is not a non-negative integer")))
}

async fn put_label(
    State(state): State<Shared>,
    UrlPath((id, column)): UrlPath<(String, String)>,
    body: Bytes,
) -> Result<StatusCode, ServiceError> {
    let word = state.word(&id)?;
    let column = parse_column(&column)?;
    let body: LabelBody = serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
    if !word.candidates.contains(&column) {
        return Err(ServiceError::NotACandidate { word_id: id, column });
    }
    let st = state.clone();
    tokio::task::spawn_blocking(move || st.lock().set(&id, column, body.label))
        .await
        .expect("label writer panicked")?;
    Ok(StatusCode::NO_CONTENT)
}

async fn delete_label(
    State(state): State<Shared>,
    UrlPath((id, column)): UrlPath<(String, String)>,
) -> Result<StatusCode, ServiceError> {
    let word = state.word(&id)?;
    let column = parse_column(&column)?;
    if !word.candidates.contains(&column) {
        return Err(ServiceError::UnknownWord(format!("{id}/cuts/{column}")));
    }
    let st = state.clone();
    tokio::task::spawn_blocking(move || st.lock().remove(&id, column))
        .await
        .expect("label writer panicked")?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Serialize)]
struct ExportResult {
    rows: usize,
    path: PathBuf,
}

async fn export(State(state): State<Shared>) -> Result<Json<ExportResult>, ServiceError> {
    let st = state.clone();
    tokio::task::spawn_blocking(move || {
        let records = st.labeled_records();
        let rows = export_training_set(&records, &st.config.pipeline)?;
        write_training_set(&st.config.export_path, &rows)?;
        Ok(Json(ExportResult {
            rows: rows.len(),
            path: st.config.export_path.clone(),
        }))
    })
    .await
    .expect("export task panicked")
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>cursive-cut labeling</title>\
         <p>No UI assets configured. The JSON API lives under <code>/api</code>.</p>",
    )
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/words", get(list_words))
        .route("/api/words/{id}/image", get(word_image))
        .route("/api/words/{id}/cuts", get(word_cuts))
        .route("/api/words/{id}/cuts/{column}", put(put_label).delete(delete_label))
        .route("/api/export", post(export));
    let router = match &state.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder_index)),
    };
    router.with_state(state)
}

/// Binds `127.0.0.1:port`; port 0 picks a free port.
pub async fn bind(port: u16) -> Result<TcpListener, ServiceError> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    TcpListener::bind(addr).await.map_err(|e| ServiceError::Io {
        path: Path::new(&addr.to_string()).to_path_buf(),
        source: e,
    })
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let local = listener.local_addr().ok();
    if let Some(addr) = local {
        log::info!("listening on http://{addr}");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| ServiceError::Io {
            path: PathBuf::from("server"),
            source: e,
        })
}
