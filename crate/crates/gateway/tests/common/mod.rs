#![allow(dead_code)]

use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures_util::StreamExt;
use minispec::events::Event;
use minispec_gateway::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

/// Serves on an ephemeral port from a background runtime.
pub fn start(config: ServiceConfig) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().expect("runtime");
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.expect("bind");
            tx.send(listener.local_addr().expect("addr")).expect("send addr");
            axum::serve(listener, router(AppState::new(config))).await.expect("serve");
        });
    });
    rx.recv().expect("server address")
}

pub fn instant() -> ServiceConfig {
    ServiceConfig {
        pace: Some(0.0),
        ..ServiceConfig::default()
    }
}

pub fn paced(pace: f64) -> ServiceConfig {
    ServiceConfig {
        pace: Some(pace),
        ..ServiceConfig::default()
    }
}

pub fn task_text(world: &str) -> String {
    let w: Value = serde_json::from_str(minispec::assets::world_text(world).expect("bundled")).expect("json");
    w["task"].as_str().expect("task").to_string()
}

pub struct Api {
    pub base: String,
    pub http: reqwest::blocking::Client,
}

impl Api {
    pub fn new(addr: SocketAddr) -> Self {
        Self {
            base: format!("http://{addr}"),
            http: reqwest::blocking::Client::new(),
        }
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.http.post(format!("{}{path}", self.base)).json(&body).send().expect("request");
        let status = r.status().as_u16();
        (status, r.json().unwrap_or(Value::Null))
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        let r = self.http.get(format!("{}{path}", self.base)).send().expect("request");
        let status = r.status().as_u16();
        let text = r.text().expect("body");
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    pub fn start_mission(&self, world: &str, options: Value) -> String {
        let (status, body) = self.post(
            "/missions",
            json!({ "task": task_text(world), "world": world, "options": options }),
        );
        assert_eq!(status, 201, "{body}");
        body["mission_id"].as_str().expect("id").to_string()
    }

    /// Polls until the mission reports a terminal phase.
    pub fn wait_terminal(&self, id: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(60);
        loop {
            let (_, s) = self.get(&format!("/missions/{id}"));
            if matches!(s["phase"].as_str(), Some("done" | "failed")) {
                return s;
            }
            assert!(Instant::now() < deadline, "mission {id} never finished");
            std::thread::sleep(Duration::from_millis(10));
        }
    }
}

/// Connects to the event socket and collects until the server closes it.
pub fn collect_events(addr: SocketAddr, id: &str) -> Vec<Event> {
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("runtime");
    rt.block_on(async {
        let url = format!("ws://{addr}/missions/{id}/events");
        let (mut ws, _) = tokio_tungstenite::connect_async(url).await.expect("ws connect");
        let mut events = Vec::new();
        let read = async {
            while let Some(msg) = ws.next().await {
                match msg.expect("ws message") {
                    Message::Text(t) => events.push(serde_json::from_str::<Event>(&t).expect("event json")),
                    Message::Close(_) => break,
                    _ => {}
                }
            }
        };
        tokio::time::timeout(Duration::from_secs(60), read).await.expect("stream ended");
        events
    })
}

pub fn seq_continuous(events: &[Event]) -> bool {
    events.iter().enumerate().all(|(i, e)| e.seq == i as u64)
}
