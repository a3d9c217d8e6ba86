//! JSON-over-HTTP surface for what-if lineup exploration.
//!
//! Routes:
//!
//! - `GET /health`
//! - `GET /teams`, `GET /teams/{id}/players`
//! - `POST /simulate/whatif`
//! - `POST /odds`

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};
use wicketsim::matchsim::SimError;
use wicketsim::roster::DataError;
use wicketsim::{Dataset, LineupConstraint, MatchConfig, MatchEstimate, Matchup, PriorBook, Role, SourceTier};

pub const MAX_SIMS: u64 = 100_000;
pub const DEFAULT_SIMS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{message}")]
    Unprocessable { message: String, stratum: Option<String> },
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stratum: Option<&'a str>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, stratum) = match &self {
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, None),
            ApiError::Unprocessable { stratum, .. } => (StatusCode::UNPROCESSABLE_ENTITY, stratum.clone()),
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, None),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        let message = self.to_string();
        (status, axum::Json(ErrorBody { error: &message, stratum: stratum.as_deref() })).into_response()
    }
}

impl From<SimError> for ApiError {
    fn from(e: SimError) -> Self {
        let stratum = match &e {
            SimError::Selection { source, .. } => source.stratum().map(|s| s.to_string()),
            _ => None,
        };
        if e.is_validation() {
            ApiError::Unprocessable { message: e.to_string(), stratum }
        } else {
            ApiError::Internal(e.to_string())
        }
    }
}

fn unprocessable(message: impl Into<String>) -> ApiError {
    ApiError::Unprocessable { message: message.into(), stratum: None }
}

/// `Json` whose rejections become [`ApiError`]s: syntax errors are 400,
/// well-formed bodies of the wrong shape are 422.
pub struct Json<T>(pub T);

impl<S, T> FromRequest<S> for Json<T>
where
    axum::Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match axum::Json::<T>::from_request(req, state).await {
            Ok(axum::Json(v)) => Ok(Json(v)),
            Err(JsonRejection::JsonDataError(e)) => Err(unprocessable(e.body_text())),
            Err(e) => Err(ApiError::BadRequest(e.body_text())),
        }
    }
}

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

/// Dataset, settings and every cross-team prior, built once at startup.
pub struct AppState {
    dataset: Dataset,
    config: MatchConfig,
    book: PriorBook,
}

impl AppState {
    pub fn new(dataset: Dataset, config: MatchConfig) -> Result<Self, SimError> {
        let ids: Vec<&str> = dataset.teams().iter().map(|t| t.id.as_str()).collect();
        let book = PriorBook::build(&dataset, &ids, config.fit)?;
        Ok(Self { dataset, config, book })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/teams", get(teams))
        .route("/teams/{id}/players", get(players))
        .route("/simulate/whatif", post(whatif))
        .route("/odds", post(odds))
        .with_state(state)
        .layer(middleware::from_fn(log_request))
}

/// [`router`] plus a CORS layer; `origin = None` allows any origin.
pub fn app(state: Arc<AppState>, origin: Option<HeaderValue>) -> Router {
    let allow = match origin {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE]);
    router(state).layer(cors)
}

async fn log_request(req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_owned());
    let start = Instant::now();
    let res = next.run(req).await;
    tracing::info!(%method, %path, status = res.status().as_u16(), ms = start.elapsed().as_millis() as u64, "request");
    res
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TeamSummary {
    pub id: String,
    pub name: String,
    pub players: usize,
}

async fn teams(State(state): State<Arc<AppState>>) -> Json<Vec<TeamSummary>> {
    Json(
        state
            .dataset
            .teams()
            .iter()
            .map(|t| TeamSummary { id: t.id.clone(), name: t.name.clone(), players: t.roster.len() })
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PlayerSummary {
    pub id: String,
    pub name: String,
    pub role: Role,
    pub overseas: bool,
    /// Number of stat rows per source tier.
    pub tiers: BTreeMap<SourceTier, usize>,
    /// Best tier on record; absent when only league defaults apply.
    pub best_tier: Option<SourceTier>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RosterResponse {
    pub team: TeamSummary,
    pub players: Vec<PlayerSummary>,
}

async fn players(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<RosterResponse>, ApiError> {
    let team = state.dataset.team(&id).ok_or_else(|| ApiError::NotFound(format!("unknown team `{id}`")))?;
    let players = team
        .roster
        .iter()
        .map(|p| {
            let mut tiers: BTreeMap<SourceTier, usize> = BTreeMap::new();
            for r in state.dataset.records().iter().filter(|r| r.player_id == p.id) {
                *tiers.entry(r.tier).or_default() += 1;
            }
            let best_tier = tiers.keys().next().copied();
            PlayerSummary { id: p.id.clone(), name: p.name.clone(), role: p.role, overseas: p.overseas, tiers, best_tier }
        })
        .collect();
    let summary = TeamSummary { id: team.id.clone(), name: team.name.clone(), players: team.roster.len() };
    Ok(Json(RosterResponse { team: summary, players }))
}

fn default_sims() -> u64 {
    DEFAULT_SIMS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub team_a: String,
    pub team_b: String,
    #[serde(default)]
    pub constraint_a: LineupConstraint,
    #[serde(default)]
    pub constraint_b: LineupConstraint,
    #[serde(default)]
    pub fixed_xi: bool,
    #[serde(default = "default_sims")]
    pub sims: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub common_random_numbers: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlayerLine {
    pub id: String,
    pub name: String,
    pub role: Role,
    /// Prior mean and standard deviation against the opponent.
    pub mean: f64,
    pub sd: f64,
    pub selected_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WhatIfResponse {
    pub team_a: String,
    pub team_b: String,
    pub seed: u64,
    pub estimate: MatchEstimate,
    pub players_a: Vec<PlayerLine>,
    pub players_b: Vec<PlayerLine>,
}

/// Run a what-if request synchronously.
pub fn run_whatif(state: &AppState, req: &WhatIfRequest, seed: u64) -> Result<WhatIfResponse, ApiError> {
    if req.sims == 0 || req.sims > MAX_SIMS {
        return Err(unprocessable(format!("sims must be between 1 and {MAX_SIMS}, got {}", req.sims)));
    }
    if req.team_a == req.team_b {
        return Err(unprocessable("team_a and team_b must differ"));
    }
    for id in [&req.team_a, &req.team_b] {
        if state.dataset.team(id).is_none() {
            return Err(SimError::Data(DataError::UnknownTeam(id.clone())).into());
        }
    }
    let config = MatchConfig {
        fixed_xi: req.fixed_xi,
        common_random_numbers: req.common_random_numbers,
        ..state.config.clone()
    };
    let m = Matchup::prepare(&state.dataset, &state.book, &req.team_a, &req.team_b, &config, &req.constraint_a, &req.constraint_b)?;
    let run = m.run(req.sims, seed)?;
    let lines = |side_a: bool, counts: &[u64]| -> Vec<PlayerLine> {
        let team = state.dataset.team(if side_a { &req.team_a } else { &req.team_b }).expect("checked above");
        team.roster
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (mean, sd) = m.prior(side_a, i).map_or((0.0, 0.0), |e| (e.params().mean(), e.params().sd()));
                PlayerLine {
                    id: p.id.clone(),
                    name: p.name.clone(),
                    role: p.role,
                    mean,
                    sd,
                    selected_rate: counts[i] as f64 / req.sims as f64,
                }
            })
            .collect()
    };
    Ok(WhatIfResponse {
        team_a: req.team_a.clone(),
        team_b: req.team_b.clone(),
        seed,
        players_a: lines(true, &run.selected_a),
        players_b: lines(false, &run.selected_b),
        estimate: run.estimate,
    })
}

async fn whatif(State(state): State<Arc<AppState>>, Json(req): Json<WhatIfRequest>) -> Result<Json<WhatIfResponse>, ApiError> {
    let seed = req.seed.unwrap_or_else(rand::random);
    tokio::task::spawn_blocking(move || run_whatif(&state, &req, seed))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map(Json)
}

fn default_margin() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddsRequest {
    pub p: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OddsQuote {
    pub p: f64,
    pub margin: f64,
    pub decimal_odds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// Decimal odds `margin / p`; no price at `p = 0`.
pub fn quote(p: f64, margin: f64) -> Result<OddsQuote, ApiError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(unprocessable(format!("p must lie in [0, 1], got {p}")));
    }
    if !(margin.is_finite() && margin > 0.0) {
        return Err(unprocessable(format!("margin must be positive, got {margin}")));
    }
    Ok(if p == 0.0 {
        OddsQuote { p, margin, decimal_odds: None, flag: Some("no-price".into()) }
    } else {
        OddsQuote { p, margin, decimal_odds: Some(margin / p), flag: None }
    })
}

async fn odds(Json(req): Json<OddsRequest>) -> Result<Json<OddsQuote>, ApiError> {
    quote(req.p, req.margin).map(Json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use wicketsim::selection::SelectionError;

    #[test]
    fn quotes() {
        assert_eq!(quote(0.5, 1.0).unwrap().decimal_odds, Some(2.0));
        assert!(quote(0.8, 1.05).unwrap().decimal_odds.unwrap() >= 1.0);
        let none = quote(0.0, 1.0).unwrap();
        assert_eq!((none.decimal_odds, none.flag.as_deref()), (None, Some("no-price")));
        assert!(quote(1.2, 1.0).is_err());
        assert!(quote(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn selection_errors_name_the_stratum() {
        let e: ApiError = SimError::Selection {
            team: "X".into(),
            source: SelectionError::Infeasible {
                stratum: wicketsim::selection::Stratum::Role(Role::Spinner),
                quota: 2,
                locked: 3,
                eligible: 4,
            },
        }
        .into();
        match e {
            ApiError::Unprocessable { stratum, .. } => assert_eq!(stratum.as_deref(), Some("spin")),
            other => panic!("{other:?}"),
        }
    }
}
