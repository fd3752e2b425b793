use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::post;
use axum::{Json, Router};
use minispec::controller::{run_mission, MissionOptions, Phase};
use minispec::events::{EventKind, EventLog};
use minispec::interp::RunControl;
use minispec::sim::load_world;
use minispec::skills::default_registry;
use minispec_gateway::planner::{HttpLlm, HttpLlmConfig};
use serde_json::{json, Value};

#[derive(Clone, Default)]
struct Fake {
    plan_pieces: Vec<&'static str>,
    answer: &'static str,
    fail: bool,
    seen: Arc<Mutex<Vec<Value>>>,
}

async fn completions(State(fake): State<Fake>, Json(body): Json<Value>) -> axum::response::Response {
    fake.seen.lock().unwrap().push(body.clone());
    if fake.fail {
        return (StatusCode::SERVICE_UNAVAILABLE, "overloaded").into_response();
    }
    if body["stream"] == true {
        let mut sse = String::from("data: {\"choices\":[{\"delta\":{\"role\":\"assistant\"}}]}\n\n");
        for p in &fake.plan_pieces {
            let chunk = json!({"choices":[{"delta":{"content":p}}]});
            sse.push_str(&format!("data: {chunk}\n\n"));
        }
        sse.push_str("data: [DONE]\n\n");
        ([(header::CONTENT_TYPE, "text/event-stream")], sse).into_response()
    } else {
        Json(json!({"choices":[{"message":{"role":"assistant","content":fake.answer}}]})).into_response()
    }
}

fn serve(fake: Fake) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        tokio::runtime::Runtime::new().unwrap().block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            let app = Router::new().route("/v1/chat/completions", post(completions)).with_state(fake);
            axum::serve(listener, app).await.unwrap();
        });
    });
    rx.recv().unwrap()
}

fn client(addr: SocketAddr) -> HttpLlm {
    HttpLlm::new(HttpLlmConfig {
        url: format!("http://{addr}/v1/chat/completions"),
        model: "test-model".into(),
        api_key: Some("k".into()),
        timeout: std::time::Duration::from_secs(10),
    })
    .unwrap()
}

#[test]
fn streams_a_plan_and_answers_probes() {
    let fake = Fake {
        plan_pieces: vec!["_1=q('what is", " in front?')", ";l(", "_1)"],
        answer: "a black chair",
        ..Fake::default()
    };
    let seen = fake.seen.clone();
    let mut llm = client(serve(fake));
    let mut world = load_world(minispec::assets::world_text("task_01").unwrap()).unwrap();
    let mut log = EventLog::new();
    let state = run_mission(
        "What is in front of you?",
        &mut world,
        &default_registry(),
        &mut llm,
        &MissionOptions::default(),
        &RunControl::new(),
        &mut log,
    );
    assert_eq!(state.phase, Phase::Done, "{:?}", state.failure);
    assert_eq!(state.output_tokens, 4);
    assert!(log.events().iter().any(|e| matches!(&e.kind, EventKind::LogEmitted { text } if text == "a black chair")));

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    assert_eq!(seen[0]["model"], "test-model");
    assert_eq!(seen[0]["stream"], true);
    assert!(seen[0]["messages"][0]["content"].as_str().unwrap().contains("What is in front of you?"));
    assert_eq!(seen[1]["stream"], false);
    assert!(seen[1]["messages"][0]["content"].as_str().unwrap().contains("what is in front?"));
}

#[test]
fn server_errors_fail_the_mission() {
    let mut llm = client(serve(Fake {
        fail: true,
        ..Fake::default()
    }));
    let mut world = load_world(minispec::assets::world_text("task_01").unwrap()).unwrap();
    let state = run_mission(
        "hover",
        &mut world,
        &default_registry(),
        &mut llm,
        &MissionOptions::default(),
        &RunControl::new(),
        &mut EventLog::new(),
    );
    assert_eq!(state.phase, Phase::Failed);
    let failure = state.failure.unwrap();
    assert!(failure.contains("503") && failure.contains("overloaded"), "{failure}");
}
