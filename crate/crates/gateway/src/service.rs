//! Mission HTTP + WebSocket service.
//!
//! Each mission appends its events to a per-mission log. WebSocket clients
//! replay the log from seq 0 and then follow it live; a watch channel
//! carrying the log length wakes them when new events land.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use minispec::assets;
use minispec::controller::{run_mission, MissionOptions, MissionState, Phase};
use minispec::events::{Event, EventKind, EventSink};
use minispec::interp::RunControl;
use minispec::lang::Value;
use minispec::sim::{load_world, WorldFile, WorldState};
use minispec::skills::{default_registry, SkillRegistry};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use crate::planner::{MockKnobs, PlannerConfig};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub planner: PlannerConfig,
    /// Real seconds per simulated second for mock missions.
    pub pace: Option<f64>,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            planner: PlannerConfig::default(),
            pace: Some(1.0),
            snapshot_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct MissionRequestOptions {
    pub stream: Option<bool>,
    pub replan_limit: Option<u32>,
    pub rate_tps: Option<f64>,
    /// Overrides the world's replan policy flag.
    pub policy: Option<bool>,
    /// Fixture variant for the mock planner.
    pub variant: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionRequest {
    pub task: String,
    /// Bundled world id. Ignored when `world_config` is given.
    #[serde(default)]
    pub world: String,
    /// An uploaded world file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world_config: Option<WorldFile>,
    #[serde(default)]
    pub options: MissionRequestOptions,
}

/// What `GET /missions/{id}` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub mission_id: String,
    pub task: String,
    pub world: String,
    pub stream: bool,
    pub phase: Phase,
    pub event_count: usize,
    pub replan_count: u32,
    pub success: Option<bool>,
    pub failure: Option<String>,
    pub answer: Option<Value>,
    pub r_time_s: Option<f64>,
    pub c_time_s: Option<f64>,
    pub output_tokens: Option<usize>,
}

/// What `GET /missions/{id}/report` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mission_id: String,
    pub task: String,
    pub world: String,
    pub mode: String,
    pub success: bool,
    pub r_time_s: Option<f64>,
    pub c_time_s: f64,
    pub tokens: usize,
    pub replans: u32,
    pub failure: Option<String>,
}

struct MissionEntry {
    id: String,
    task: String,
    world: String,
    stream: bool,
    events: Mutex<Vec<Event>>,
    /// Number of events in the log.
    appended: watch::Sender<usize>,
    ctl: Arc<RunControl>,
    state: watch::Sender<Option<Arc<MissionState>>>,
}

impl MissionEntry {
    fn snapshot(&self, from: usize) -> Vec<Event> {
        let ev = self.events.lock().expect("event log poisoned");
        ev.get(from..).map(<[Event]>::to_vec).unwrap_or_default()
    }

    fn terminal(&self) -> bool {
        self.events
            .lock()
            .expect("event log poisoned")
            .last()
            .is_some_and(|e| e.kind.is_terminal())
    }

    fn summary(&self) -> MissionSummary {
        let (phase, count, replans) = {
            let ev = self.events.lock().expect("event log poisoned");
            let replans = ev
                .iter()
                .filter(|e| matches!(e.kind, EventKind::ReplanTriggered { .. }))
                .count() as u32;
            (Phase::from_events(&ev), ev.len(), replans)
        };
        let state = self.state.borrow().clone();
        MissionSummary {
            mission_id: self.id.clone(),
            task: self.task.clone(),
            world: self.world.clone(),
            stream: self.stream,
            phase,
            event_count: count,
            replan_count: replans,
            success: state.as_ref().map(|s| s.success),
            failure: state.as_ref().and_then(|s| s.failure.clone()),
            answer: state.as_ref().map(|s| s.answer.clone()),
            r_time_s: state.as_ref().and_then(|s| s.r_time),
            c_time_s: state.as_ref().map(|s| s.c_time),
            output_tokens: state.as_ref().map(|s| s.output_tokens),
        }
    }
}

struct EntrySink(Arc<MissionEntry>);

impl EventSink for EntrySink {
    fn emit(&mut self, at: Duration, kind: EventKind) {
        let len = {
            let mut ev = self.0.events.lock().expect("event log poisoned");
            let seq = ev.len() as u64;
            ev.push(Event {
                seq,
                at_ms: at.as_secs_f64() * 1000.0,
                kind,
            });
            ev.len()
        };
        self.0.appended.send_replace(len);
    }
}

#[derive(Default)]
struct Missions {
    by_id: HashMap<String, Arc<MissionEntry>>,
    active: Option<Arc<MissionEntry>>,
    next: u64,
}

struct Shared {
    config: ServiceConfig,
    registry: Arc<SkillRegistry>,
    missions: Mutex<Missions>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState(Arc::new(Shared {
            config,
            registry: Arc::new(default_registry()),
            missions: Mutex::new(Missions::default()),
        }))
    }

    fn entry(&self, id: &str) -> Option<Arc<MissionEntry>> {
        self.0.missions.lock().expect("mission table poisoned").by_id.get(id).cloned()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/worlds", get(list_worlds))
        .route("/missions", post(create_mission))
        .route("/missions/{id}", get(get_mission))
        .route("/missions/{id}/abort", post(abort_mission))
        .route("/missions/{id}/report", get(get_report))
        .route("/missions/{id}/events", get(mission_events))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn list_worlds() -> Json<Vec<WorldFile>> {
    Json(
        assets::world_ids()
            .map(|id| serde_json::from_str(assets::world_text(id).expect("listed")).expect("bundled world parses"))
            .collect(),
    )
}

fn resolve_world(req: &MissionRequest) -> Result<WorldState, (StatusCode, String)> {
    if let Some(file) = &req.world_config {
        return WorldState::from_file(file.clone()).map_err(|e| (StatusCode::UNPROCESSABLE_ENTITY, e.to_string()));
    }
    let text = assets::world_text(&req.world)
        .ok_or_else(|| (StatusCode::NOT_FOUND, format!("unknown world `{}`", req.world)))?;
    load_world(text).map_err(|e| (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

async fn create_mission(State(app): State<AppState>, Json(req): Json<MissionRequest>) -> Response {
    let mut world = match resolve_world(&req) {
        Ok(w) => w,
        Err((status, message)) => return error(status, message),
    };
    if req.task.trim().is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "task must not be empty");
    }
    let knobs = MockKnobs {
        rate_tps: req.options.rate_tps,
        variant: req.options.variant.clone(),
        jitter_seed: None,
    };
    let mut llm = match app.0.config.planner.client(&knobs) {
        Ok(c) => c,
        Err(e) => return error(StatusCode::BAD_GATEWAY, e.to_string()),
    };
    let opts = MissionOptions {
        stream: req.options.stream.unwrap_or(true),
        replan_limit: req.options.replan_limit.unwrap_or(3),
        policy: req.options.policy,
        pace: app.0.config.pace,
        snapshot_dir: app.0.config.snapshot_dir.clone(),
        ..MissionOptions::default()
    };
    let entry = {
        let mut missions = app.0.missions.lock().expect("mission table poisoned");
        if missions.active.as_ref().is_some_and(|m| !m.terminal()) {
            return error(StatusCode::CONFLICT, "a mission is already running");
        }
        missions.next += 1;
        let entry = Arc::new(MissionEntry {
            id: format!("m{}", missions.next),
            task: req.task.clone(),
            world: world.id.clone(),
            stream: opts.stream,
            events: Mutex::new(Vec::new()),
            appended: watch::Sender::new(0),
            ctl: Arc::new(RunControl::new()),
            state: watch::Sender::new(None),
        });
        missions.by_id.insert(entry.id.clone(), entry.clone());
        missions.active = Some(entry.clone());
        entry
    };
    let registry = app.0.registry.clone();
    let runner = entry.clone();
    tokio::task::spawn_blocking(move || {
        let mut sink = EntrySink(runner.clone());
        let state = run_mission(&runner.task, &mut world, &registry, llm.as_mut(), &opts, &runner.ctl, &mut sink);
        runner.state.send_replace(Some(Arc::new(state)));
    });
    (StatusCode::CREATED, Json(serde_json::json!({ "mission_id": entry.id }))).into_response()
}

async fn get_mission(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    match app.entry(&id) {
        Some(e) => Json(e.summary()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown mission `{id}`")),
    }
}

async fn abort_mission(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(e) = app.entry(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown mission `{id}`"));
    };
    if e.terminal() {
        return error(StatusCode::CONFLICT, "mission already finished");
    }
    e.ctl.abort();
    (StatusCode::ACCEPTED, Json(serde_json::json!({ "mission_id": id, "status": "aborting" }))).into_response()
}

async fn get_report(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(e) = app.entry(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown mission `{id}`"));
    };
    if !e.terminal() {
        return error(StatusCode::CONFLICT, "mission still running");
    }
    // The terminal event lands just before the runner stores its state.
    let mut rx = e.state.subscribe();
    let state = match tokio::time::timeout(Duration::from_secs(5), rx.wait_for(Option::is_some)).await {
        Ok(Ok(s)) => s.clone().expect("waited for Some"),
        _ => return error(StatusCode::INTERNAL_SERVER_ERROR, "mission ended without a final state"),
    };
    Json(ReportRow {
        mission_id: e.id.clone(),
        task: state.task.clone(),
        world: state.world.clone(),
        mode: if state.stream { "stream" } else { "batch" }.into(),
        success: state.success,
        r_time_s: state.r_time,
        c_time_s: state.c_time,
        tokens: state.output_tokens,
        replans: state.replan_count,
        failure: state.failure.clone(),
    })
    .into_response()
}

async fn mission_events(State(app): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    match app.entry(&id) {
        Some(e) => ws.on_upgrade(move |socket| follow(socket, e)),
        None => error(StatusCode::NOT_FOUND, format!("unknown mission `{id}`")),
    }
}

/// Replays the log from seq 0, then follows it until the terminal event.
async fn follow(mut socket: WebSocket, entry: Arc<MissionEntry>) {
    let mut rx = entry.appended.subscribe();
    let mut next = 0;
    loop {
        for e in entry.snapshot(next) {
            next += 1;
            let terminal = e.kind.is_terminal();
            let text = serde_json::to_string(&e).expect("events serialize");
            if socket.send(Message::Text(text.into())).await.is_err() {
                return;
            }
            if terminal {
                let _ = socket.send(Message::Close(None)).await;
                return;
            }
        }
        if rx.changed().await.is_err() {
            return;
        }
    }
}

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServiceConfig, port: u16) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
