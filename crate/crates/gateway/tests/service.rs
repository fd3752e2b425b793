mod common;

use common::{collect_events, instant, paced, seq_continuous, start, task_text, Api};
use minispec::events::{EventKind, EventLog};
use minispec::skills::default_registry;
use minispec_gateway::cli::{execute_mission, RunArgs};
use minispec_gateway::planner::PlannerConfig;
use serde_json::json;

#[test]
fn health_and_worlds() {
    let api = Api::new(start(instant()));
    assert_eq!(api.get("/healthz"), (200, json!("ok")));
    let (status, worlds) = api.get("/worlds");
    assert_eq!(status, 200);
    let worlds = worlds.as_array().unwrap();
    assert_eq!(worlds.len(), 11);
    assert_eq!(worlds[0]["id"], "task_01");
}

#[test]
fn mission_runs_to_done_over_websocket() {
    let addr = start(instant());
    let api = Api::new(addr);
    let id = api.start_mission("task_02", json!({}));
    let events = collect_events(addr, &id);
    assert!(seq_continuous(&events));
    assert!(matches!(events.last().unwrap().kind, EventKind::MissionDone { success: true, .. }));
    let golden = include_str!("golden/task_02.kinds");
    let kinds: Vec<&str> = events.iter().map(|e| e.kind.name()).collect();
    assert_eq!(kinds, golden.lines().collect::<Vec<_>>());

    let summary = api.wait_terminal(&id);
    assert_eq!(summary["phase"], "done");
    assert_eq!(summary["success"], true);
    assert_eq!(summary["event_count"], events.len());
    let (status, report) = api.get(&format!("/missions/{id}/report"));
    assert_eq!(status, 200);
    assert_eq!(report["mode"], "stream");
    assert_eq!(report["success"], true);
    assert!(report["tokens"].as_u64().unwrap() > 0);
    assert!(report["r_time_s"].as_f64().unwrap() < report["c_time_s"].as_f64().unwrap());
}

#[test]
fn batch_option_is_honoured() {
    let addr = start(instant());
    let api = Api::new(addr);
    let id = api.start_mission("task_01", json!({"stream": false, "rate_tps": 40}));
    api.wait_terminal(&id);
    let (_, report) = api.get(&format!("/missions/{id}/report"));
    assert_eq!(report["mode"], "batch");
    assert_eq!(report["success"], true);
}

#[test]
fn unknown_things_are_404() {
    let api = Api::new(start(instant()));
    let (status, _) = api.post("/missions", json!({"task": "hover", "world": "task_99"}));
    assert_eq!(status, 404);
    assert_eq!(api.get("/missions/nope").0, 404);
    assert_eq!(api.post("/missions/nope/abort", json!({})).0, 404);
    assert_eq!(api.get("/missions/nope/report").0, 404);
}

#[test]
fn uploaded_world_config() {
    let api = Api::new(start(instant()));
    let mut world: serde_json::Value = serde_json::from_str(minispec::assets::world_text("task_01").unwrap()).unwrap();
    world["objects"][0]["pos"][0] = json!(150.0);
    let (status, body) = api.post("/missions", json!({"task": task_text("task_01"), "world_config": world}));
    assert_eq!(status, 201, "{body}");
    let s = api.wait_terminal(body["mission_id"].as_str().unwrap());
    assert_eq!(s["world"], "task_01");
    assert_eq!(s["phase"], "done");

    // Fixtures are keyed by world id, so a renamed world has no canned plan.
    world["id"] = json!("custom");
    let (_, body) = api.post("/missions", json!({"task": task_text("task_01"), "world_config": world}));
    let s = api.wait_terminal(body["mission_id"].as_str().unwrap());
    assert_eq!(s["phase"], "failed");
    assert!(s["failure"].as_str().unwrap().starts_with("llm error"), "{s}");

    world["drone"] = json!("nowhere");
    let (status, _) = api.post("/missions", json!({"task": "hover", "world_config": world}));
    assert_eq!(status, 422);
}

#[test]
fn one_mission_at_a_time_and_abort() {
    let addr = start(paced(0.05));
    let api = Api::new(addr);
    // Task 8 takes about 16 simulated seconds, so 0.8 s here.
    let id = api.start_mission("task_08", json!({}));
    let (status, _) = api.post("/missions", json!({"task": task_text("task_01"), "world": "task_01"}));
    assert_eq!(status, 409);
    assert_eq!(api.get(&format!("/missions/{id}/report")).0, 409);

    std::thread::sleep(std::time::Duration::from_millis(200));
    assert_eq!(api.post(&format!("/missions/{id}/abort"), json!({})).0, 202);
    let events = collect_events(addr, &id);
    assert!(seq_continuous(&events));
    assert!(events.iter().any(|e| matches!(e.kind, EventKind::Aborted {})));
    let s = api.wait_terminal(&id);
    assert_eq!(s["phase"], "failed");
    assert_eq!(s["failure"], "aborted");
    assert_eq!(api.post(&format!("/missions/{id}/abort"), json!({})).0, 409);

    // The slot is free again.
    let next = api.start_mission("task_01", json!({}));
    assert_ne!(next, id);
}

#[test]
fn late_subscriber_gets_the_full_prefix() {
    let addr = start(paced(0.02));
    let api = Api::new(addr);
    let id = api.start_mission("task_08", json!({}));
    std::thread::sleep(std::time::Duration::from_millis(120));
    let (_, mid) = api.get(&format!("/missions/{id}"));
    assert!(mid["event_count"].as_u64().unwrap() > 0);
    assert_eq!(mid["phase"], "executing");
    let late = collect_events(addr, &id);
    let again = collect_events(addr, &id);
    assert!(seq_continuous(&late));
    assert!(late.last().unwrap().kind.is_terminal());
    assert_eq!(late, again);
}

#[test]
fn cli_and_service_emit_the_same_events() {
    let addr = start(instant());
    let api = Api::new(addr);
    for (world, stream) in [("task_02", true), ("task_05", false), ("task_09", true)] {
        let id = api.start_mission(world, json!({"stream": stream}));
        let served = collect_events(addr, &id);

        let args = RunArgs {
            task: task_text(world),
            world: world.into(),
            batch: !stream,
            rate: None,
            variant: None,
            replan_limit: 3,
            json: true,
            events_out: None,
            snapshot_dir: None,
            pace: None,
            seed: None,
        };
        let mut log = EventLog::new();
        execute_mission(&args, &PlannerConfig::default(), &default_registry(), &mut log).unwrap();
        assert_eq!(served, log.into_events(), "{world}");
    }
}
