//! Starts the mission service in-process, submits a task over HTTP and
//! follows its event stream over WebSocket.

use futures_util::StreamExt;
use minispec::events::Event;
use minispec_gateway::service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

fn main() -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let config = ServiceConfig {
        pace: Some(0.1),
        ..ServiceConfig::default()
    };
    rt.spawn(async move { axum::serve(listener, router(AppState::new(config))).await });

    let http = reqwest::blocking::Client::new();
    let base = format!("http://{addr}");
    let worlds: Vec<Value> = http.get(format!("{base}/worlds")).send()?.json()?;
    println!("{} worlds available", worlds.len());

    let created: Value = http
        .post(format!("{base}/missions"))
        .json(&json!({
            "task": "Could you find an apple? If so, go to it.",
            "world": "task_02",
            "options": {"stream": true}
        }))
        .send()?
        .json()?;
    let id = created["mission_id"].as_str().unwrap_or_default().to_string();
    println!("mission {id}");

    rt.block_on(async {
        let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/missions/{id}/events")).await?;
        while let Some(msg) = ws.next().await {
            match msg? {
                Message::Text(t) => {
                    let e: Event = serde_json::from_str(&t)?;
                    println!("{:>8.1}ms {:<18} {}", e.at_ms, e.kind.name(), serde_json::to_value(&e.kind)?["payload"]);
                }
                Message::Close(_) => break,
                _ => {}
            }
        }
        anyhow::Ok(())
    })?;

    let report: Value = http.get(format!("{base}/missions/{id}/report")).send()?.json()?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
