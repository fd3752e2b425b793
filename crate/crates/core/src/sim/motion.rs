//! Drone kinematics with ground-plane collision checks.

use super::world::{normalize_yaw, Collision, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Forward,
    Backward,
    Left,
    Right,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnKind {
    Cw,
    Ccw,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotionFault {
    #[error("distance must be positive, got {0}")]
    BadDistance(f64),
    #[error("degrees must be in (0, 360], got {0}")]
    BadAngle(f64),
    #[error("collided with {label} after {travelled:.1} cm")]
    Collision { label: String, travelled: f64 },
    #[error("cannot descend below the ground")]
    Ground { travelled: f64 },
}

impl MotionFault {
    /// Distance actually covered before the fault.
    pub fn travelled(&self) -> f64 {
        match self {
            MotionFault::Collision { travelled, .. } | MotionFault::Ground { travelled } => *travelled,
            _ => 0.0,
        }
    }
}

/// Earliest parameter t in [0, 1] at which the segment p0 + t*d enters the
/// circle, if it does. Starting inside and moving outward is not a hit.
pub fn segment_circle_entry(p0: [f64; 2], d: [f64; 2], center: [f64; 2], r: f64) -> Option<f64> {
    let f = [p0[0] - center[0], p0[1] - center[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (f[0] * d[0] + f[1] * d[1]);
    let c = f[0] * f[0] + f[1] * f[1] - r * r;
    if c <= 0.0 {
        // On or inside the boundary: only moving inward collides.
        return (b < 0.0).then_some(0.0);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / (2.0 * a);
    (0.0..=1.0).contains(&t).then_some(t)
}

impl WorldState {
    /// Body-frame translation. Horizontal moves stop at the first obstacle.
    pub fn apply_motion(&mut self, kind: MoveKind, distance: f64) -> Result<f64, MotionFault> {
        if !distance.is_finite() || distance <= 0.0 {
            return Err(MotionFault::BadDistance(distance));
        }
        let (hx, hy) = self.drone.heading();
        let dir = match kind {
            MoveKind::Forward => [hx, hy],
            MoveKind::Backward => [-hx, -hy],
            MoveKind::Left => [-hy, hx],
            MoveKind::Right => [hy, -hx],
            MoveKind::Up => {
                self.drone.z += distance;
                return Ok(distance);
            }
            MoveKind::Down => {
                if distance > self.drone.z {
                    let travelled = self.drone.z;
                    self.drone.z = 0.0;
                    return Err(MotionFault::Ground { travelled });
                }
                self.drone.z -= distance;
                return Ok(distance);
            }
        };
        let p0 = [self.drone.x, self.drone.y];
        let delta = [dir[0] * distance, dir[1] * distance];
        let hit = self
            .objects
            .iter()
            .filter(|o| o.obstacle_radius > 0.0)
            .filter_map(|o| {
                let c = [o.position[0], o.position[1]];
                segment_circle_entry(p0, delta, c, o.obstacle_radius).map(|t| (t, o))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match hit {
            None => {
                self.drone.x = p0[0] + delta[0];
                self.drone.y = p0[1] + delta[1];
                Ok(distance)
            }
            Some((t, obj)) => {
                let c = [obj.position[0], obj.position[1]];
                let r = obj.obstacle_radius;
                let mut stop = [p0[0] + t * delta[0], p0[1] + t * delta[1]];
                let off = [stop[0] - c[0], stop[1] - c[1]];
                let dist = off[0].hypot(off[1]);
                if dist < r {
                    // Rounding can leave the contact point a hair inside.
                    let scale = r * (1.0 + 1e-12) / dist.max(f64::MIN_POSITIVE);
                    stop = [c[0] + off[0] * scale, c[1] + off[1] * scale];
                }
                let label = obj.label();
                self.drone.x = stop[0];
                self.drone.y = stop[1];
                self.collisions.push(Collision {
                    label: label.clone(),
                    at: stop,
                });
                Err(MotionFault::Collision {
                    label,
                    travelled: t * distance,
                })
            }
        }
    }

    pub fn apply_turn(&mut self, kind: TurnKind, degrees: f64) -> Result<(), MotionFault> {
        if !(degrees > 0.0 && degrees <= 360.0) {
            return Err(MotionFault::BadAngle(degrees));
        }
        let signed = match kind {
            TurnKind::Cw => degrees,
            TurnKind::Ccw => -degrees,
        };
        self.drone.yaw = normalize_yaw(self.drone.yaw + signed);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::world::load_world;

    fn world(objects: &str) -> WorldState {
        load_world(&format!(
            r#"{{"drone":{{"x":0,"y":0,"z":100,"yaw":0}},"objects":[{objects}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn forward_along_plus_y() {
        let mut w = world("");
        w.apply_motion(MoveKind::Forward, 100.0).unwrap();
        assert!((w.drone.x).abs() < 1e-12 && (w.drone.y - 100.0).abs() < 1e-12);
        w.apply_motion(MoveKind::Down, 50.0).unwrap();
        assert_eq!(w.drone.z, 50.0);
    }

    #[test]
    fn left_and_right_at_yaw_zero() {
        let mut w = world("");
        w.apply_motion(MoveKind::Left, 10.0).unwrap();
        assert!((w.drone.x + 10.0).abs() < 1e-12);
        w.apply_motion(MoveKind::Right, 30.0).unwrap();
        assert!((w.drone.x - 20.0).abs() < 1e-12);
    }

    #[test]
    fn collision_stops_at_contact() {
        let mut w = world(r#"{"name":"chair","id":1,"pos":[0,80,45],"extent":[50,90],"obstacle_radius":40}"#);
        let err = w.apply_motion(MoveKind::Forward, 120.0).unwrap_err();
        assert!((err.travelled() - 40.0).abs() < 1e-9);
        assert!((w.drone.y - 40.0).abs() < 1e-9);
        assert_eq!(w.collisions.len(), 1);
        // A second push toward the obstacle collides immediately.
        let err = w.apply_motion(MoveKind::Forward, 10.0).unwrap_err();
        assert_eq!(err.travelled(), 0.0);
        // Moving away is allowed.
        w.apply_motion(MoveKind::Backward, 10.0).unwrap();
    }

    #[test]
    fn turns() {
        let mut w = world("");
        w.apply_turn(TurnKind::Cw, 180.0).unwrap();
        assert_eq!(w.drone.yaw, 180.0);
        let mut w = world("");
        w.apply_turn(TurnKind::Ccw, 45.0).unwrap();
        assert_eq!(w.drone.yaw, 315.0);
        for _ in 0..8 {
            w.apply_turn(TurnKind::Cw, 45.0).unwrap();
        }
        assert_eq!(w.drone.yaw, 315.0);
        assert!(w.apply_turn(TurnKind::Cw, 0.0).is_err());
    }
}
