//! Low-level skills executed against a [`WorldState`].

use std::path::PathBuf;
use std::time::Duration;

use super::camera::{detect, find_detection, format_scene, scene_description};
use super::motion::{MoveKind, TurnKind};
use super::world::WorldState;
use crate::events::EventKind;
use crate::lang::Value;
use crate::skills::{parse_answer, Backend, Invocation, Motion, Query, QueryResponder};

/// Simulated drone, camera, UI and probe.
pub struct SimBackend<'a> {
    pub world: &'a mut WorldState,
    responder: Option<&'a mut dyn QueryResponder>,
    snapshot_dir: Option<PathBuf>,
}

impl<'a> SimBackend<'a> {
    pub fn new(world: &'a mut WorldState) -> Self {
        Self {
            world,
            responder: None,
            snapshot_dir: None,
        }
    }

    pub fn with_responder(mut self, responder: &'a mut dyn QueryResponder) -> Self {
        self.responder = Some(responder);
        self
    }

    /// Writes picture snapshots into `dir` instead of returning virtual paths.
    pub fn with_snapshot_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.snapshot_dir = dir;
        self
    }

    fn secs(s: f64) -> Duration {
        Duration::from_secs_f64(s.max(0.0))
    }

    fn state_events(&self, at: Duration) -> Vec<(Duration, EventKind)> {
        let d = self.world.drone;
        vec![
            (
                at,
                EventKind::DroneState {
                    x: d.x,
                    y: d.y,
                    z: d.z,
                    yaw: d.yaw,
                },
            ),
            (
                at,
                EventKind::SceneUpdated {
                    scene: scene_description(self.world),
                },
            ),
        ]
    }

    fn motion(&mut self, kind: MoveKind, distance: f64) -> Invocation {
        let result = self.world.apply_motion(kind, distance);
        let travelled = match &result {
            Ok(d) => *d,
            Err(e) => e.travelled(),
        };
        let duration = Self::secs(travelled * self.world.timing.move_s_per_cm);
        let forward = if kind == MoveKind::Forward { travelled } else { 0.0 };
        Invocation {
            result: result.map(|_| Value::Bool(true)).map_err(|e| e.to_string()),
            duration,
            events: self.state_events(duration),
            motion: Motion {
                rotation_deg: 0.0,
                forward_cm: forward,
            },
        }
    }

    fn turn(&mut self, kind: TurnKind, degrees: f64) -> Invocation {
        match self.world.apply_turn(kind, degrees) {
            Ok(()) => {
                let duration = Self::secs(degrees * self.world.timing.turn_s_per_deg);
                Invocation {
                    result: Ok(Value::Bool(true)),
                    duration,
                    events: self.state_events(duration),
                    motion: Motion {
                        rotation_deg: degrees,
                        forward_cm: 0.0,
                    },
                }
            }
            Err(e) => Invocation::fault(e.to_string(), Duration::ZERO),
        }
    }

    fn vision(&mut self, field: &str, name: &str) -> Invocation {
        let duration = Self::secs(self.world.timing.vision_s);
        let det = find_detection(self.world, name);
        if field == "is_visible" {
            return Invocation::ok(det.is_some(), duration);
        }
        match det {
            None => Invocation::fault(format!("{name} is not visible"), duration),
            Some(d) => {
                let v = match field {
                    "object_x" => d.cx,
                    "object_y" => d.cy,
                    "object_w" => d.w,
                    _ => d.h,
                };
                Invocation::ok(v, duration)
            }
        }
    }

    fn picture(&mut self) -> Invocation {
        let detections = detect(self.world);
        let n = self.world.pictures.len() + 1;
        let file = format!("picture_{n:03}.snapshot");
        let d = self.world.drone;
        let body = format!(
            "world {}\ndrone x={:.1} y={:.1} z={:.1} yaw={:.1}\n{}\n",
            self.world.id,
            d.x,
            d.y,
            d.z,
            d.yaw,
            format_scene(&detections)
        );
        let path = match &self.snapshot_dir {
            Some(dir) => {
                let p = dir.join(&file);
                if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&p, body)) {
                    return Invocation::fault(format!("cannot write snapshot: {e}"), Duration::ZERO);
                }
                p.display().to_string()
            }
            None => format!("snapshots/{file}"),
        };
        self.world.pictures.push(super::world::Picture {
            path: path.clone(),
            labels: detections.into_iter().map(|d| d.label).collect(),
        });
        let text = format!("picture saved to {path}");
        self.world.log.push(text.clone());
        let duration = Self::secs(self.world.timing.picture_s);
        Invocation::ok(path, duration).with_event(duration, EventKind::LogEmitted { text })
    }

    fn query(&mut self, question: &str) -> Invocation {
        let scene = scene_description(self.world);
        let issued = EventKind::ProbeIssued {
            question: question.to_string(),
        };
        let Some(responder) = self.responder.as_deref_mut() else {
            return Invocation::fault("no query responder attached", Duration::ZERO)
                .with_event(Duration::ZERO, issued);
        };
        let visible = detect(self.world)
            .iter()
            .filter_map(|d| self.world.objects.iter().find(|o| o.label() == d.label).cloned())
            .collect();
        let query = Query {
            scene,
            question: question.to_string(),
            visible,
        };
        match responder.answer(&query) {
            Ok((raw, latency)) => {
                let answer = parse_answer(&raw);
                Invocation::ok(answer.clone(), latency)
                    .with_event(Duration::ZERO, issued)
                    .with_event(
                        latency,
                        EventKind::ProbeAnswered {
                            question: question.to_string(),
                            answer,
                        },
                    )
            }
            Err(e) => Invocation::fault(format!("query failed: {e}"), Duration::ZERO)
                .with_event(Duration::ZERO, issued),
        }
    }
}

fn num(args: &[Value], i: usize) -> f64 {
    args.get(i).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn text(args: &[Value], i: usize) -> &str {
    args.get(i).and_then(Value::as_str).unwrap_or("")
}

impl Backend for SimBackend<'_> {
    fn invoke(&mut self, callable: &str, args: &[Value]) -> Invocation {
        let Some((group, op)) = callable.split_once('.') else {
            return Invocation::fault(format!("malformed callable `{callable}`"), Duration::ZERO);
        };
        match (group, op) {
            ("drone", "move_forward") => self.motion(MoveKind::Forward, num(args, 0)),
            ("drone", "move_backward") => self.motion(MoveKind::Backward, num(args, 0)),
            ("drone", "move_left") => self.motion(MoveKind::Left, num(args, 0)),
            ("drone", "move_right") => self.motion(MoveKind::Right, num(args, 0)),
            ("drone", "move_up") => self.motion(MoveKind::Up, num(args, 0)),
            ("drone", "move_down") => self.motion(MoveKind::Down, num(args, 0)),
            ("drone", "turn_cw") => self.turn(TurnKind::Cw, num(args, 0)),
            ("drone", "turn_ccw") => self.turn(TurnKind::Ccw, num(args, 0)),
            ("vision", field @ ("is_visible" | "object_x" | "object_y" | "object_w" | "object_h")) => {
                self.vision(field, text(args, 0))
            }
            ("misc", "delay") => {
                let ms = num(args, 0);
                if ms.is_nan() || ms < 0.0 {
                    return Invocation::fault(format!("delay must be non-negative, got {ms}"), Duration::ZERO);
                }
                Invocation::ok(true, Duration::from_secs_f64(ms / 1000.0))
            }
            ("ui", "log") => {
                let t = text(args, 0).to_string();
                self.world.log.push(t.clone());
                Invocation::ok(true, Duration::ZERO).with_event(Duration::ZERO, EventKind::LogEmitted { text: t })
            }
            ("ui", "picture") => self.picture(),
            ("llm", "query") => self.query(text(args, 0)),
            _ => Invocation::fault(format!("backend has no callable `{callable}`"), Duration::ZERO),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::world::load_world;

    fn world() -> WorldState {
        load_world(
            r#"{"id":"t","drone":{"x":0,"y":0,"z":100,"yaw":0},"objects":[
                {"name":"apple","id":1,"pos":[0,200,100],"extent":[10,10],"color":"red"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn turn_reports_state_and_duration() {
        let mut w = world();
        let inv = SimBackend::new(&mut w).invoke("drone.turn_cw", &[Value::Int(180)]);
        assert_eq!(inv.result, Ok(Value::Bool(true)));
        assert_eq!(inv.duration, Duration::from_secs_f64(1.8));
        assert_eq!(inv.motion.rotation_deg, 180.0);
        assert_eq!(w.drone.yaw, 180.0);
    }

    #[test]
    fn vision_and_faults() {
        let mut w = world();
        let mut b = SimBackend::new(&mut w);
        assert_eq!(b.invoke("vision.is_visible", &["apple".into()]).result, Ok(Value::Bool(true)));
        let x = b.invoke("vision.object_x", &["apple".into()]).result.unwrap();
        assert!((x.as_f64().unwrap() - 0.5).abs() < 0.01);
        assert!(b.invoke("vision.object_y", &["ghost".into()]).result.is_err());
        assert!(b.invoke("llm.query", &["anything?".into()]).result.is_err());
    }

    #[test]
    fn misc_skills() {
        let mut w = world();
        let mut b = SimBackend::new(&mut w);
        assert_eq!(b.invoke("ui.log", &["hello".into()]).result, Ok(Value::Bool(true)));
        let pic = b.invoke("ui.picture", &[]).result.unwrap();
        assert!(pic.as_str().unwrap().ends_with(".snapshot"));
        let d = b.invoke("misc.delay", &[Value::Int(500)]);
        assert_eq!(d.duration, Duration::from_millis(500));
        assert!(w.log.iter().any(|l| l == "hello"));
        assert_eq!(w.pictures[0].labels, vec!["apple_1"]);
    }

    #[test]
    fn snapshot_written_to_dir() {
        let dir = std::env::temp_dir().join(format!("minispec-snap-{}", std::process::id()));
        let mut w = world();
        let path = SimBackend::new(&mut w)
            .with_snapshot_dir(Some(dir.clone()))
            .invoke("ui.picture", &[])
            .result
            .unwrap();
        let body = std::fs::read_to_string(path.as_str().unwrap()).unwrap();
        assert!(body.contains("name:apple_1"));
        let _ = std::fs::remove_dir_all(dir);
    }
}
