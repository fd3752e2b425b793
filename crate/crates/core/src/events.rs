//! Mission event stream.
//!
//! Every observable step of a mission becomes an [`Event`] stamped with the
//! mission clock. The CLI prints them, the service fans them out over
//! WebSocket, and tests compare their kind sequence against golden files.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::lang::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    MissionStarted {
        task: String,
        world: String,
        stream: bool,
    },
    TokenReceived {
        round: u32,
        text: String,
        count: usize,
        total: usize,
    },
    UnitParsed {
        round: u32,
        unit: String,
        text: String,
        span: [usize; 2],
    },
    StatementStarted {
        text: String,
        depth: usize,
    },
    StatementFinished {
        text: String,
        depth: usize,
        result: String,
    },
    DroneState {
        x: f64,
        y: f64,
        z: f64,
        yaw: f64,
    },
    SceneUpdated {
        scene: String,
    },
    ProbeIssued {
        question: String,
    },
    ProbeAnswered {
        question: String,
        answer: Value,
    },
    ReplanTriggered {
        round: u32,
        reason: String,
        detail: String,
    },
    LogEmitted {
        text: String,
    },
    MissionDone {
        success: bool,
        answer: Value,
        replan_count: u32,
    },
    MissionFailed {
        reason: String,
    },
    Aborted {},
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::MissionStarted { .. } => "mission_started",
            EventKind::TokenReceived { .. } => "token_received",
            EventKind::UnitParsed { .. } => "unit_parsed",
            EventKind::StatementStarted { .. } => "statement_started",
            EventKind::StatementFinished { .. } => "statement_finished",
            EventKind::DroneState { .. } => "drone_state",
            EventKind::SceneUpdated { .. } => "scene_updated",
            EventKind::ProbeIssued { .. } => "probe_issued",
            EventKind::ProbeAnswered { .. } => "probe_answered",
            EventKind::ReplanTriggered { .. } => "replan_triggered",
            EventKind::LogEmitted { .. } => "log_emitted",
            EventKind::MissionDone { .. } => "mission_done",
            EventKind::MissionFailed { .. } => "mission_failed",
            EventKind::Aborted {} => "aborted",
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            EventKind::MissionDone { .. } | EventKind::MissionFailed { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub at_ms: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

pub trait EventSink: Send {
    fn emit(&mut self, at: Duration, kind: EventKind);
}

/// Drops everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&mut self, _at: Duration, _kind: EventKind) {}
}

/// In-memory append-only log with sequence numbers from 0.
#[derive(Debug, Default, Clone)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.events.iter().map(|e| e.kind.name()).collect()
    }

    pub fn push(&mut self, at: Duration, kind: EventKind) -> &Event {
        let seq = self.events.len() as u64;
        self.events.push(Event {
            seq,
            at_ms: at.as_secs_f64() * 1000.0,
            kind,
        });
        self.events.last().expect("just pushed")
    }
}

impl EventSink for EventLog {
    fn emit(&mut self, at: Duration, kind: EventKind) {
        self.push(at, kind);
    }
}

/// A log shared between the mission thread and readers.
pub type SharedLog = Arc<Mutex<EventLog>>;

impl EventSink for SharedLog {
    fn emit(&mut self, at: Duration, kind: EventKind) {
        self.lock().expect("event log poisoned").push(at, kind);
    }
}

impl<S: EventSink + ?Sized> EventSink for Box<S> {
    fn emit(&mut self, at: Duration, kind: EventKind) {
        (**self).emit(at, kind)
    }
}

impl<S: EventSink + ?Sized> EventSink for &mut S {
    fn emit(&mut self, at: Duration, kind: EventKind) {
        (**self).emit(at, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut log = EventLog::new();
        log.emit(Duration::from_millis(1500), EventKind::LogEmitted { text: "hi".into() });
        log.emit(Duration::from_millis(1600), EventKind::Aborted {});
        let json = serde_json::to_value(&log.events()[0]).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"seq":0,"at_ms":1500.0,"kind":"log_emitted","payload":{"text":"hi"}})
        );
        let json = serde_json::to_string(&log.events()[1]).unwrap();
        let back: Event = serde_json::from_str(&json).unwrap();
        assert_eq!(back, log.events()[1]);
        assert_eq!(back.kind.name(), "aborted");
    }
}
