//! Runs one bundled task with the mock planner and prints its event stream.
//!
//! cargo run --example mission_events -- task_04 batch

use minispec::assets;
use minispec::controller::{run_mission, MissionOptions, MockLlm};
use minispec::events::EventLog;
use minispec::interp::RunControl;
use minispec::sim::load_world;
use minispec::skills::default_registry;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "task_02".into());
    let stream = args.next().as_deref() != Some("batch");
    let text = assets::world_text(&id).ok_or_else(|| anyhow::anyhow!("unknown world {id}"))?;
    let mut world = load_world(text)?;
    let task = world.task.clone().unwrap_or_default();
    let mut llm = MockLlm::bundled();
    let opts = MissionOptions {
        stream,
        ..MissionOptions::default()
    };
    let mut log = EventLog::new();
    let state = run_mission(&task, &mut world, &default_registry(), &mut llm, &opts, &RunControl::new(), &mut log);
    for e in log.events() {
        println!("{}", serde_json::to_string(e)?);
    }
    println!(
        "\n{task}\nphase {:?}, success {}, r-time {:?}s, c-time {:.2}s, {} output tokens, {} replans",
        state.phase, state.success, state.r_time, state.c_time, state.output_tokens, state.replan_count
    );
    Ok(())
}
