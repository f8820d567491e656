use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::{CONTENT_TYPE, ETAG, IF_MATCH};
use axum::http::{HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use descry_core::dictionary::{Category, CategoryDictionary, CategoryEntry, SubgroupDictionarySet};
use descry_core::embedding::{EmbeddingStore, EmbeddingVector, StoreKind};
use descry_core::scoring::{Aggregation, ClassificationResult, ExplanationView};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::state::{AppState, Snapshot};

pub const VERSION_HEADER: HeaderName = HeaderName::from_static("x-descry-version");

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/categories", get(list_categories))
        .route("/categories/{id}", get(get_category))
        .route("/categories/{id}/descriptors", put(put_descriptors))
        .route("/classify", post(classify))
        .route("/explain", post(explain))
        .route("/embeddings", post(ingest_embeddings))
        .route("/save", post(save))
        .with_state(state)
}

fn versioned(version: u64, content_type: &'static str, body: String) -> Response {
    let mut headers = HeaderMap::new();
    headers.insert(CONTENT_TYPE, HeaderValue::from_static(content_type));
    headers.insert(VERSION_HEADER, HeaderValue::from(version));
    headers.insert(
        ETAG,
        HeaderValue::from_str(&format!("\"{version}\"")).expect("digits are valid header text"),
    );
    (StatusCode::OK, headers, body).into_response()
}

fn json_response(version: u64, value: &impl Serialize) -> Response {
    versioned(
        version,
        "application/json",
        serde_json::to_string(value).expect("response serializes"),
    )
}

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

#[derive(Serialize)]
struct CategorySummary<'a> {
    category_id: &'a str,
    display_name: &'a str,
    n_descriptors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    subgroups: Option<Vec<&'a str>>,
}

async fn list_categories(State(state): State<Arc<AppState>>) -> Response {
    let snapshot = state.snapshot();
    let list: Vec<CategorySummary> = snapshot
        .dictionaries
        .iter()
        .map(|c| CategorySummary {
            category_id: c.id(),
            display_name: c.display_name(),
            n_descriptors: c.descriptor_count(),
            subgroups: match c {
                Category::Simple(_) => None,
                Category::Subgroups(s) => Some(s.subgroups().keys().map(String::as_str).collect()),
            },
        })
        .collect();
    json_response(snapshot.version, &list)
}

async fn get_category(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let snapshot = state.snapshot();
    let category = snapshot
        .dictionaries
        .get(&id)
        .ok_or_else(|| descry_core::Error::UnknownCategory(id.clone()))?;
    let mut body = serde_json::to_value(CategoryEntry::from_category(category)).expect("entry serializes");
    body["category_id"] = Value::String(id);
    Ok(json_response(snapshot.version, &body))
}

/// Parses an `If-Match` value: `"3"`, `W/"3"`, `3` or `*`.
fn expected_version(headers: &HeaderMap) -> ApiResult<Option<u64>> {
    let Some(raw) = headers.get(IF_MATCH) else {
        return Ok(None);
    };
    let text = raw
        .to_str()
        .map_err(|_| ApiError::bad_request("If-Match is not valid text"))?
        .trim();
    if text == "*" {
        return Ok(None);
    }
    let bare = text.trim_start_matches("W/").trim_matches('"');
    bare.parse()
        .map(Some)
        .map_err(|_| ApiError::bad_request(format!("If-Match {text:?} is not a version")))
}

fn conflict(expected: u64, current: u64) -> ApiError {
    ApiError::new(
        StatusCode::CONFLICT,
        "version_conflict",
        format!("edit made against version {expected}, current version is {current}"),
    )
    .with_details(json!({ "expected": expected, "current": current }))
}

/// Replacement forms accepted by `PUT /categories/{id}/descriptors`.
fn category_from_body(id: &str, body: Value, existing: Option<&Category>) -> ApiResult<Category> {
    let display = || {
        existing
            .map(|c| c.display_name().to_owned())
            .ok_or_else(|| ApiError::from(descry_core::Error::UnknownCategory(id.to_owned())))
    };
    let category = match body {
        Value::Array(_) => {
            let phrases: Vec<String> =
                serde_json::from_value(body).map_err(|_| ApiError::bad_request("descriptor list must hold strings"))?;
            CategoryDictionary::new(id, &display()?, phrases)?.into()
        }
        Value::Object(ref map) if map.get("display_name").is_some_and(Value::is_string) => {
            let entry: CategoryEntry = serde_json::from_value(body)
                .map_err(|e| ApiError::bad_request(format!("invalid category entry: {e}")))?;
            entry.into_category(id)?
        }
        Value::Object(_) => {
            let subgroups: BTreeMap<String, Vec<String>> = serde_json::from_value(body)
                .map_err(|_| ApiError::bad_request("subgroup map must hold string lists"))?;
            SubgroupDictionarySet::new(id, &display()?, subgroups)?.into()
        }
        _ => {
            return Err(ApiError::bad_request(
                "expected a phrase list, a subgroup map or a category entry",
            ))
        }
    };
    Ok(category)
}

#[derive(Serialize)]
struct EditResponse {
    version: u64,
    category_id: String,
    pending_texts: Vec<String>,
}

async fn put_descriptors(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let expected = expected_version(&headers)?;
    let body: Value = parse_json(&body)?;
    let response = state.update(|current| {
        if let Some(expected) = expected.filter(|v| *v != current.version) {
            return Err(conflict(expected, current.version));
        }
        let category = category_from_body(&id, body, current.dictionaries.get(&id))?;
        let pending_texts: Vec<String> = category
            .grounded_texts()
            .into_iter()
            .filter(|t| !current.texts.contains(t))
            .map(str::to_owned)
            .collect();
        let mut dictionaries = (*current.dictionaries).clone();
        dictionaries.insert(category);
        let version = current.version + 1;
        let next = Snapshot::new(
            version,
            Arc::new(dictionaries),
            current.images.clone(),
            current.texts.clone(),
        );
        log::info!("category {id} replaced, version {version}");
        Ok((
            Some(next),
            EditResponse {
                version,
                category_id: id.clone(),
                pending_texts,
            },
        ))
    })?;
    Ok(json_response(response.version, &response))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BaselineArg {
    Flag(bool),
    Named(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyRequest {
    image_id: String,
    #[serde(default)]
    mode: Option<Aggregation>,
    #[serde(default)]
    baseline: Option<BaselineArg>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplainRequest {
    image_id: String,
    #[serde(default)]
    contrast: Option<String>,
    #[serde(default)]
    mode: Option<Aggregation>,
}

/// `None` scores with descriptors; `Some(ensemble)` with class names.
fn baseline_choice(arg: Option<BaselineArg>) -> ApiResult<Option<bool>> {
    match arg {
        None | Some(BaselineArg::Flag(false)) => Ok(None),
        Some(BaselineArg::Flag(true)) => Ok(Some(false)),
        Some(BaselineArg::Named(name)) => match name.as_str() {
            "single" => Ok(Some(false)),
            "ensemble" => Ok(Some(true)),
            other => Err(ApiError::bad_request(format!(
                "baseline must be true, false, \"single\" or \"ensemble\", got {other:?}"
            ))),
        },
    }
}

fn classify_on(
    snapshot: &Snapshot,
    image_id: &str,
    mode: Aggregation,
    baseline: Option<bool>,
) -> ApiResult<ClassificationResult> {
    if !snapshot.images.contains(image_id) {
        return Err(descry_core::Error::UnknownImage(image_id.to_owned()).into());
    }
    let result = match baseline {
        None => snapshot.method_index()?.classify(image_id, &snapshot.images, mode)?,
        Some(ensemble) => snapshot
            .baseline_index(ensemble)?
            .classify(image_id, &snapshot.images, Aggregation::Mean)?,
    };
    Ok(result)
}

async fn blocking<T: Send + 'static>(work: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn classify(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let request: ClassifyRequest = parse_json(&body)?;
    let baseline = baseline_choice(request.baseline)?;
    let snapshot = state.snapshot();
    let version = snapshot.version;
    let result =
        blocking(move || classify_on(&snapshot, &request.image_id, request.mode.unwrap_or_default(), baseline)).await?;
    Ok(versioned(version, "application/json", result.to_json()))
}

async fn explain(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let request: ExplainRequest = parse_json(&body)?;
    let snapshot = state.snapshot();
    let version = snapshot.version;
    let view = blocking(move || {
        let result = classify_on(&snapshot, &request.image_id, request.mode.unwrap_or_default(), None)?;
        Ok(ExplanationView::from_result(&result, request.contrast.as_deref())?)
    })
    .await?;
    Ok(versioned(version, "application/json", view.to_json()))
}

/// Decodes either a binary text-store chunk or a `{text: vector}` JSON map.
fn decode_embeddings(headers: &HeaderMap, body: &[u8]) -> ApiResult<Vec<(String, EmbeddingVector)>> {
    let binary = headers
        .get(CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/octet-stream"));
    if binary {
        let chunk = EmbeddingStore::from_bytes(body)?;
        if chunk.kind() != StoreKind::Text {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_input",
                "embedding chunks must be text stores",
            ));
        }
        return Ok(chunk.iter().map(|(id, v)| (id.to_owned(), v.clone())).collect());
    }
    let map: BTreeMap<String, Vec<f32>> = parse_json(body)?;
    map.into_iter()
        .map(|(text, v)| Ok((text, EmbeddingVector::new(v)?)))
        .collect()
}

#[derive(Serialize)]
struct IngestResponse {
    ingested: usize,
    version: u64,
}

async fn ingest_embeddings(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let entries = decode_embeddings(&headers, &body)?;
    let response = state.update(|current| -> ApiResult<_> {
        if entries.is_empty() {
            return Ok((
                None,
                IngestResponse {
                    ingested: 0,
                    version: current.version,
                },
            ));
        }
        let mut texts = (*current.texts).clone();
        for (text, vector) in &entries {
            texts.upsert(text.clone(), vector.clone()).map_err(ApiError::from)?;
        }
        let version = current.version + 1;
        let next = Snapshot::new(
            version,
            current.dictionaries.clone(),
            current.images.clone(),
            Arc::new(texts),
        );
        log::info!("{} text embeddings ingested, version {version}", entries.len());
        Ok((
            Some(next),
            IngestResponse {
                ingested: entries.len(),
                version,
            },
        ))
    })?;
    Ok(json_response(response.version, &response))
}

async fn save(State(state): State<Arc<AppState>>) -> ApiResult<Response> {
    match state.save()? {
        Some((path, version)) => Ok(json_response(version, &json!({ "path": path, "version": version }))),
        None => Err(ApiError::new(
            StatusCode::CONFLICT,
            "no_dictionary_path",
            "the service was started without a dictionary file",
        )),
    }
}
