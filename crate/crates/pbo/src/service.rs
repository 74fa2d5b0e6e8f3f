//! HTTP/JSON session service. Each session is an append-only event log
//! (creation request, then answers) from which state is rebuilt by replay.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pbo_core::{
    ConstraintSet, DeltaCycle, IterationRecord, LoocvHoldout, Phase, RadialKind, Session,
    SolverConfig, Variant,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Largest number of decision variables a session may have.
pub const MAX_DIM: usize = 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Budget used when a creation request does not set one.
    pub default_budget: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{message}")]
    Validation {
        message: String,
        index: Option<usize>,
    },
    #[error("session {0} not found")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    fn validation(message: impl Into<String>) -> Self {
        ApiError::Validation {
            message: message.into(),
            index: None,
        }
    }
}

impl From<pbo_core::Error> for ApiError {
    fn from(e: pbo_core::Error) -> Self {
        match e {
            pbo_core::Error::InvalidBounds { index, .. }
            | pbo_core::Error::DegenerateDimension { index } => ApiError::Validation {
                message: e.to_string(),
                index: Some(index),
            },
            pbo_core::Error::InvalidInput(_) | pbo_core::Error::DimensionMismatch { .. } => {
                ApiError::validation(e.to_string())
            }
            pbo_core::Error::Protocol(_) => ApiError::validation(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::Validation { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({ "error": self.to_string() });
        if let ApiError::Validation { index: Some(i), .. } = &self {
            body["index"] = json!(i);
        }
        (status, Json(body)).into_response()
    }
}

/// Optional solver settings accepted at creation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n_init: Option<usize>,
    pub kind: Option<RadialKind>,
    pub epsilon_init: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub delta_cycle: Option<DeltaCycle>,
    pub k_aug: Option<usize>,
    pub recal_iters: Option<Vec<usize>>,
    pub loocv_holdout: Option<LoocvHoldout>,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateRequest {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
    #[serde(default)]
    pub units: Option<Vec<String>>,
    /// Total number of samples, i.e. one more than the number of queries.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub config: ConfigOverrides,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AnswerRequest {
    pub token: String,
    pub preference: i64,
}

#[derive(Debug, Deserialize)]
pub struct AnswerParams {
    /// Wait for the next query instead of returning in the computing phase.
    #[serde(default)]
    pub wait: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Created {
        request: Box<CreateRequest>,
        seed: u64,
        budget: usize,
    },
    Answer {
        token: String,
        preference: i8,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Variable {
    pub name: String,
    pub unit: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QueryView {
    /// Echo this token with the answer.
    pub token: String,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// `incumbent` or `candidate`.
    pub first_label: String,
    pub second_label: String,
    pub iteration: usize,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BestView {
    pub index: usize,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Descriptor {
    pub id: String,
    /// `initial_queries`, `iterating`, `computing` or `done`.
    pub phase: String,
    pub variables: Vec<Variable>,
    pub budget: usize,
    pub n_init: usize,
    pub seed: u64,
    pub pending_query: Option<QueryView>,
    pub queries_answered: usize,
    pub best: BestView,
    /// Answer convention: `-1` prefers `first`, `0` is indifference, `1` prefers `second`.
    pub answer_convention: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<IterationRecord>>,
    /// Best sample index after each sample count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_trace: Option<Vec<usize>>,
    /// All evaluated samples in original units.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
}

struct Entry {
    session: Session,
    variables: Vec<Variable>,
    seed: u64,
    computing: bool,
    log: PathBuf,
}

impl Entry {
    fn descriptor(&self, id: &str, with_history: bool) -> Descriptor {
        let s = &self.session;
        let phase = if self.computing {
            "computing"
        } else {
            match s.phase() {
                Phase::InitialQueries => "initial_queries",
                Phase::Iterating => "iterating",
                Phase::Done => "done",
            }
        };
        let label =
            |i: usize, cand: usize| if i == cand { "candidate" } else { "incumbent" }.to_string();
        let pending = if self.computing {
            None
        } else {
            s.pending().map(|q| QueryView {
                token: token_for(s.queries_answered()),
                first: q.first.clone(),
                second: q.second.clone(),
                first_label: label(q.first_index, q.candidate_index),
                second_label: label(q.second_index, q.candidate_index),
                iteration: q.iteration,
                delta: q.delta,
            })
        };
        Descriptor {
            id: id.to_string(),
            phase: phase.to_string(),
            variables: self.variables.clone(),
            budget: s.config().n_max,
            n_init: s.config().n_init_for(s.problem().dim()),
            seed: self.seed,
            pending_query: pending,
            queries_answered: s.queries_answered(),
            best: BestView {
                index: s.best_index(),
                x: s.best(),
            },
            answer_convention: "-1: first preferred, 0: indifferent, 1: second preferred".into(),
            history: with_history.then(|| s.history().to_vec()),
            best_trace: with_history.then(|| s.best_trace().to_vec()),
            samples: with_history.then(|| s.samples()),
        }
    }
}

fn token_for(answered: usize) -> String {
    format!("q{answered}")
}

/// Shared service state. Each session sits behind its own lock, so sessions
/// never block each other.
#[derive(Clone)]
pub struct AppState {
    cfg: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Entry>>>>>,
}

impl AppState {
    pub fn new(cfg: ServiceConfig) -> std::io::Result<Self> {
        fs::create_dir_all(&cfg.data_dir)?;
        Ok(AppState {
            cfg: Arc::new(cfg),
            sessions: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.cfg.data_dir.join(format!("{id}.jsonl"))
    }

    /// Looks the session up in memory, else rebuilds it from its log.
    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        if let Some(e) = self.sessions.lock().unwrap().get(id) {
            return Ok(e.clone());
        }
        let valid = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-');
        let path = self.log_path(id);
        if !valid || !path.exists() {
            return Err(ApiError::NotFound(id.to_string()));
        }
        let entry = Arc::new(Mutex::new(replay_log(&path)?));
        Ok(self
            .sessions
            .lock()
            .unwrap()
            .entry(id.to_string())
            .or_insert(entry)
            .clone())
    }
}

fn append(path: &Path, event: &Event) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(event).map_err(std::io::Error::other)?;
    line.push(b'\n');
    f.write_all(&line)?;
    f.sync_data()
}

fn replay_log(path: &Path) -> Result<Entry, ApiError> {
    let file = fs::File::open(path)?;
    let mut events = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(
            serde_json::from_str::<Event>(&line).map_err(|e| ApiError::Internal(e.to_string()))?,
        );
    }
    let mut iter = events.into_iter();
    let Some(Event::Created {
        request,
        seed,
        budget,
    }) = iter.next()
    else {
        return Err(ApiError::Internal(format!(
            "{} does not start with a creation event",
            path.display()
        )));
    };
    let (problem, cfg, variables) = build(&request, seed, budget)?;
    let answers: Vec<i8> = iter
        .filter_map(|e| match e {
            Event::Answer { preference, .. } => Some(preference),
            Event::Created { .. } => None,
        })
        .collect();
    let session = Session::replay(problem, cfg, &answers)?;
    Ok(Entry {
        session,
        variables,
        seed,
        computing: false,
        log: path.to_path_buf(),
    })
}

fn build(
    req: &CreateRequest,
    seed: u64,
    budget: usize,
) -> Result<(ConstraintSet, SolverConfig, Vec<Variable>), ApiError> {
    let n = req.lower.len();
    if n == 0 || n > MAX_DIM {
        return Err(ApiError::validation(format!(
            "number of variables must be between 1 and {MAX_DIM}, got {n}"
        )));
    }
    if req.upper.len() != n {
        return Err(ApiError::validation(format!(
            "upper has {} entries, lower has {n}",
            req.upper.len()
        )));
    }
    for (what, list) in [("names", &req.names), ("units", &req.units)] {
        if let Some(l) = list {
            if l.len() != n {
                return Err(ApiError::validation(format!(
                    "{what} has {} entries, expected {n}",
                    l.len()
                )));
            }
        }
    }
    let problem = ConstraintSet::new(req.lower.clone(), req.upper.clone())?;
    let d = SolverConfig::default();
    let o = &req.config;
    let cfg = SolverConfig {
        n_init: o.n_init.or(d.n_init),
        n_max: budget,
        kind: o.kind.unwrap_or(d.kind),
        epsilon_init: o.epsilon_init.unwrap_or(d.epsilon_init),
        sigma: o.sigma.unwrap_or(d.sigma),
        lambda: o.lambda.unwrap_or(d.lambda),
        delta_cycle: o.delta_cycle.clone().unwrap_or(d.delta_cycle),
        k_aug: o.k_aug.unwrap_or(d.k_aug),
        recal_iters: o.recal_iters.clone().unwrap_or(d.recal_iters),
        loocv_holdout: o.loocv_holdout.unwrap_or(d.loocv_holdout),
        variant: o.variant.unwrap_or(d.variant),
        seed,
        ..d
    };
    cfg.validate(n)?;
    let variables = (0..n)
        .map(|i| Variable {
            name: req
                .names
                .as_ref()
                .map_or_else(|| format!("x{}", i + 1), |v| v[i].clone()),
            unit: req
                .units
                .as_ref()
                .map_or_else(String::new, |v| v[i].clone()),
            lower: req.lower[i],
            upper: req.upper[i],
        })
        .collect();
    Ok((problem, cfg, variables))
}

async fn create(
    State(app): State<AppState>,
    Json(req): Json<CreateRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let seed = req
        .config
        .seed
        .unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
    let budget = req.budget.unwrap_or(app.cfg.default_budget);
    let (problem, cfg, variables) = build(&req, seed, budget)?;
    let session = tokio::task::spawn_blocking(move || Session::new(problem, cfg))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let log = app.log_path(&id);
    append(
        &log,
        &Event::Created {
            request: Box::new(req),
            seed,
            budget,
        },
    )?;
    let entry = Entry {
        session,
        variables,
        seed,
        computing: false,
        log,
    };
    let desc = entry.descriptor(&id, false);
    app.sessions
        .lock()
        .unwrap()
        .insert(id, Arc::new(Mutex::new(entry)));
    Ok((StatusCode::CREATED, Json(desc)))
}

async fn get_state(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<Descriptor>, ApiError> {
    let app2 = app.clone();
    let id2 = id.clone();
    let entry = tokio::task::spawn_blocking(move || app2.entry(&id2))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let desc = entry.lock().unwrap().descriptor(&id, true);
    Ok(Json(desc))
}

async fn answer(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<AnswerParams>,
    Json(req): Json<AnswerRequest>,
) -> Result<Json<Descriptor>, ApiError> {
    let app2 = app.clone();
    let id2 = id.clone();
    let entry = tokio::task::spawn_blocking(move || app2.entry(&id2))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let preference = i8::try_from(req.preference)
        .ok()
        .filter(|p| (-1..=1).contains(p))
        .ok_or_else(|| {
            ApiError::validation(format!(
                "preference must be -1, 0 or 1, got {}",
                req.preference
            ))
        })?;
    let mut snapshot = {
        let mut e = entry.lock().unwrap();
        if e.computing {
            return Err(ApiError::Conflict(
                "the next query is still being computed".into(),
            ));
        }
        if e.session.pending().is_none() {
            return Err(ApiError::Conflict("session is done".into()));
        }
        let expected = token_for(e.session.queries_answered());
        if req.token != expected {
            return Err(ApiError::Conflict(format!(
                "stale token {}, current query is {expected}",
                req.token
            )));
        }
        append(
            &e.log,
            &Event::Answer {
                token: req.token.clone(),
                preference,
            },
        )?;
        e.session.tell(preference)?;
        if !e.session.needs_proposal() {
            return Ok(Json(e.descriptor(&id, false)));
        }
        e.computing = true;
        e.session.clone()
    };
    let worker = entry.clone();
    let job = tokio::task::spawn_blocking(move || {
        let result = snapshot.advance();
        let mut e = worker.lock().unwrap();
        match result {
            Ok(()) => e.session = snapshot,
            Err(err) => tracing::error!("proposal failed: {err}"),
        }
        e.computing = false;
    });
    if params.wait {
        job.await.map_err(|e| ApiError::Internal(e.to_string()))?;
    }
    let desc = entry.lock().unwrap().descriptor(&id, false);
    Ok(Json(desc))
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/:id", get(get_state))
        .route("/sessions/:id/answer", post(answer))
        .with_state(app)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(lower: Vec<f64>, upper: Vec<f64>) -> CreateRequest {
        CreateRequest {
            lower,
            upper,
            names: None,
            units: None,
            budget: Some(6),
            config: ConfigOverrides::default(),
        }
    }

    #[test]
    fn build_validates_requests() {
        assert!(build(&req(vec![0.0], vec![1.0]), 1, 6).is_ok());
        match build(&req(vec![0.0, 2.0], vec![1.0, 1.0]), 1, 6) {
            Err(ApiError::Validation { index: Some(1), .. }) => {}
            other => panic!("{:?}", other.err()),
        }
        assert!(build(&req(vec![0.0; 21], vec![1.0; 21]), 1, 60).is_err());
        assert!(build(&req(vec![], vec![]), 1, 6).is_err());
        assert!(build(&req(vec![0.0], vec![1.0]), 1, 4).is_err());
        let mut named = req(vec![0.0], vec![1.0]);
        named.names = Some(vec!["a".into(), "b".into()]);
        assert!(build(&named, 1, 6).is_err());
    }

    #[test]
    fn default_design_size_is_four_per_variable() {
        let (_, cfg, vars) = build(&req(vec![0.0], vec![1.0]), 1, 6).unwrap();
        assert_eq!(cfg.n_init_for(1), 4);
        assert_eq!(vars[0].name, "x1");
    }

    #[test]
    fn events_round_trip() {
        let e = Event::Answer {
            token: "q3".into(),
            preference: -1,
        };
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"event":"answer","token":"q3","preference":-1}"#);
        assert!(matches!(
            serde_json::from_str::<Event>(&s).unwrap(),
            Event::Answer { preference: -1, .. }
        ));
    }
}
