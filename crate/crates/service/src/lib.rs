//! HTTP+JSON teaching service: sessions wrapping a knowledge graph and its
//! present/reward loop.
//!
//! | route | body | response |
//! |---|---|---|
//! | `POST /sessions` | [`CreateSessionRequest`] | 201 [`CreateSessionResponse`] |
//! | `POST /sessions/{id}/present` | [`PresentRequest`] | [`PresentResponse`] |
//! | `POST /sessions/{id}/reward` | [`RewardRequest`] | [`RewardResponse`] |
//! | `GET /sessions/{id}` | | [`InspectResponse`] |
//! | `GET /sessions/{id}/events?since=N` | | NDJSON event records |
//! | `POST /sessions/{id}/save` | [`SaveRequest`] | [`SaveResponse`] |
//! | `POST /sessions/{id}/load` | [`LoadRequest`] | [`InspectResponse`] |
//!
//! Errors are `{code, message}` with 400 (validation), 404 (unknown session) or 409
//! (interaction out of order).

pub mod api;
pub mod error;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use objcat::harness::{wcst_default_parameters, write_event_log, ScenarioKind};
use objcat::knowledge::{Agent, KnowledgeGraph, OrderedWeights, Parameters, Percept};
use objcat::scenarios::{
    example_actions, example_percept, example_schema, wcst_actions, wcst_percept, wcst_schema, WcstCard,
};
use tower_http::services::ServeDir;

pub use api::*;
pub use error::{ApiError, ApiResult, ErrorBody};

/// One teaching session.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub agent: Agent,
    pub scenario: Option<ScenarioKind>,
    pub pending: Option<PendingInteraction>,
}

impl Session {
    fn inspect(&self) -> InspectResponse {
        let graph = self.agent.graph();
        InspectResponse {
            session_id: self.id.clone(),
            scenario: self.scenario,
            graph: graph.to_document(),
            similarity_matrix: SimilarityMatrix::of(graph),
            weights: OrderedWeights::of(graph.schema(), graph.weights()),
            history: self.agent.history().to_vec(),
            pending: self.pending.clone(),
        }
    }

    fn compose(&self, req: &PresentRequest) -> ApiResult<Percept> {
        let schema = self.agent.graph().schema();
        let bound = |kind: ScenarioKind, what: &str| {
            if self.scenario == Some(kind) {
                Ok(())
            } else {
                Err(ApiError::validation(format!(
                    "`{what}` needs a session bound to that scenario"
                )))
            }
        };
        if (req.variant.is_some() || req.seed.is_some()) && req.object.is_none() {
            return Err(ApiError::validation("`variant` and `seed` only apply to `object`"));
        }
        match (&req.features, req.object, req.card) {
            (Some(features), None, None) => Ok(Percept::from_map(schema, features)?),
            (None, Some(kind), None) => {
                bound(ScenarioKind::Example, "object")?;
                Ok(example_percept(
                    kind,
                    req.variant.unwrap_or_default(),
                    req.seed.unwrap_or(0),
                ))
            }
            (None, None, Some(card)) => {
                bound(ScenarioKind::Wcst, "card")?;
                let card = WcstCard::new(card.color, card.form, card.number)?;
                Ok(wcst_percept(&card))
            }
            _ => Err(ApiError::validation(
                "give exactly one of `features`, `object` or `card`",
            )),
        }
    }

    fn check_binding(&self, graph: &KnowledgeGraph) -> ApiResult<()> {
        let expected = match self.scenario {
            None => return Ok(()),
            Some(ScenarioKind::Example) => (example_schema(), example_actions()),
            Some(ScenarioKind::Wcst) => (wcst_schema(), wcst_actions()),
        };
        if graph.schema() != &expected.0 || graph.actions() != expected.1.as_slice() {
            return Err(ApiError::validation(
                "graph schema or actions do not match the session's scenario",
            ));
        }
        Ok(())
    }
}

/// Shared state: sessions by id, each behind its own lock.
#[derive(Debug, Default)]
pub struct AppState {
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

fn lock(session: &Mutex<Session>) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        let sessions = self.sessions.read().unwrap_or_else(|e| e.into_inner());
        sessions.get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }

    pub fn create(&self, req: CreateSessionRequest) -> ApiResult<CreateSessionResponse> {
        let (schema, actions, defaults) = match req.scenario {
            Some(ScenarioKind::Example) => (example_schema(), example_actions(), Parameters::default()),
            Some(ScenarioKind::Wcst) => (wcst_schema(), wcst_actions(), wcst_default_parameters()),
            None => {
                let schema = req
                    .feature_schema
                    .clone()
                    .ok_or_else(|| ApiError::validation("`featureSchema` is required without a scenario"))?;
                let actions = req
                    .action_set
                    .clone()
                    .ok_or_else(|| ApiError::validation("`actionSet` is required without a scenario"))?;
                (schema, actions, Parameters::default())
            }
        };
        if req.scenario.is_some() {
            if req.feature_schema.as_ref().is_some_and(|s| s != &schema) {
                return Err(ApiError::validation(
                    "`featureSchema` differs from the scenario's schema",
                ));
            }
            if req.action_set.as_ref().is_some_and(|a| a != &actions) {
                return Err(ApiError::validation("`actionSet` differs from the scenario's actions"));
            }
        }
        let parameters = req.parameters.unwrap_or(defaults);
        let graph = KnowledgeGraph::new(schema.clone(), actions.clone(), parameters, req.seed)?;

        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1);
        let session = Session {
            id: id.clone(),
            agent: Agent::new(graph),
            scenario: req.scenario,
            pending: None,
        };
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(CreateSessionResponse {
            session_id: id,
            scenario: req.scenario,
            parameters,
            action_set: actions,
            feature_schema: schema,
            seed: req.seed,
        })
    }

    pub fn present(&self, id: &str, req: PresentRequest) -> ApiResult<PresentResponse> {
        let session = self.session(id)?;
        let mut s = lock(&session);
        if s.agent.has_pending() {
            return Err(ApiError::conflict("reward the pending interaction first"));
        }
        let percept = s.compose(&req)?;
        let percept_id = req
            .percept_id
            .unwrap_or_else(|| format!("p{}", s.agent.history().len() + 1));
        let features = percept.to_map();
        let p = s.agent.present(percept_id.clone(), percept)?;
        s.pending = Some(PendingInteraction {
            percept_id: percept_id.clone(),
            features,
            category_id: p.category_id,
            chosen_action: p.chosen_action.clone(),
        });
        Ok(PresentResponse {
            percept_id,
            category_id: p.category_id,
            is_new: p.is_new,
            chosen_action: p.chosen_action,
            similarities: p
                .similarities
                .into_iter()
                .map(|(category_id, value)| SimilarityView { category_id, value })
                .collect(),
        })
    }

    pub fn reward(&self, id: &str, req: RewardRequest) -> ApiResult<RewardResponse> {
        let session = self.session(id)?;
        let mut s = lock(&session);
        let r = s.agent.reward(req.reward)?;
        s.pending = None;
        Ok(RewardResponse {
            outcome: r.outcome,
            merges: r.event.merges.clone(),
            splits: r.event.splits.clone(),
            weights_after: r.event.weights_after.clone(),
            adaptations: r.adaptations,
            event: r.event,
        })
    }

    pub fn inspect(&self, id: &str) -> ApiResult<InspectResponse> {
        let session = self.session(id)?;
        let s = lock(&session);
        Ok(s.inspect())
    }

    /// Event log lines with `step > since`.
    pub fn events(&self, id: &str, since: u64) -> ApiResult<Vec<u8>> {
        let session = self.session(id)?;
        let s = lock(&session);
        let events: Vec<_> = s.agent.history().iter().filter(|e| e.step > since).cloned().collect();
        let mut out = Vec::new();
        write_event_log(&mut out, &events)?;
        Ok(out)
    }

    pub fn save(&self, id: &str, req: SaveRequest) -> ApiResult<SaveResponse> {
        let session = self.session(id)?;
        let s = lock(&session);
        let graph = s.agent.graph();
        if let Some(path) = &req.path {
            graph.save(path)?;
        }
        Ok(SaveResponse {
            path: req.path,
            graph: graph.to_document(),
        })
    }

    /// Replaces the session graph; history is cleared.
    pub fn load(&self, id: &str, req: LoadRequest) -> ApiResult<InspectResponse> {
        let session = self.session(id)?;
        let graph = match (req.path, req.graph) {
            (Some(path), None) => KnowledgeGraph::load(path)?,
            (None, Some(doc)) => KnowledgeGraph::from_document(doc)?,
            _ => return Err(ApiError::validation("give exactly one of `path` or `graph`")),
        };
        let mut s = lock(&session);
        if s.agent.has_pending() {
            return Err(ApiError::conflict("an interaction is pending"));
        }
        s.check_binding(&graph)?;
        s.agent.replace_graph(graph)?;
        Ok(s.inspect())
    }
}

/// Service options.
#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Directory served for any path outside the API, e.g. the built teaching UI.
    pub static_dir: Option<PathBuf>,
}

type Shared = State<Arc<AppState>>;

async fn create_session(
    State(state): Shared,
    body: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    Ok((StatusCode::CREATED, Json(state.create(req)?)))
}

async fn present(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<PresentRequest>, JsonRejection>,
) -> ApiResult<Json<PresentResponse>> {
    let Json(req) = body?;
    Ok(Json(state.present(&id, req)?))
}

async fn reward(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<RewardRequest>, JsonRejection>,
) -> ApiResult<Json<RewardResponse>> {
    let Json(req) = body?;
    Ok(Json(state.reward(&id, req)?))
}

async fn inspect(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<InspectResponse>> {
    Ok(Json(state.inspect(&id)?))
}

async fn events(
    State(state): Shared,
    Path(id): Path<String>,
    query: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let Query(q) = query?;
    let body = state.events(&id, q.since)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

async fn save(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<SaveRequest>, JsonRejection>,
) -> ApiResult<Json<SaveResponse>> {
    let Json(req) = body?;
    Ok(Json(state.save(&id, req)?))
}

async fn load(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<LoadRequest>, JsonRejection>,
) -> ApiResult<Json<InspectResponse>> {
    let Json(req) = body?;
    Ok(Json(state.load(&id, req)?))
}

/// Router over a fresh, empty session store.
pub fn router(config: &ServiceConfig) -> Router {
    router_with_state(Arc::new(AppState::new()), config)
}

pub fn router_with_state(state: Arc<AppState>, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(inspect))
        .route("/sessions/{id}/present", post(present))
        .route("/sessions/{id}/reward", post(reward))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/save", post(save))
        .route("/sessions/{id}/load", post(load))
        .with_state(state);
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
