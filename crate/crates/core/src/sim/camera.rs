//! Camera projection and scene descriptions.

use serde::{Deserialize, Serialize};

use super::world::{WorldObject, WorldState};

/// Lower and upper clamp for normalized sizes.
pub const SIZE_EPS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedObject {
    pub label: String,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub color: String,
}

/// Signed angle in (-180, 180].
pub fn wrap_angle(deg: f64) -> f64 {
    let a = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if a <= -180.0 {
        a + 360.0
    } else {
        a
    }
}

/// Bearing of a ground-plane vector in the yaw convention (0 = +y, clockwise).
pub fn bearing_deg(dx: f64, dy: f64) -> f64 {
    dx.atan2(dy).to_degrees()
}

/// Projects one object, or `None` when it is outside the frustum or range.
pub fn project(world: &WorldState, obj: &WorldObject) -> Option<DetectedObject> {
    let d = &world.drone;
    let cam = &world.camera;
    let dx = obj.position[0] - d.x;
    let dy = obj.position[1] - d.y;
    let dz = obj.position[2] - d.z;
    let ground = dx.hypot(dy);
    let range = (ground * ground + dz * dz).sqrt();
    if range < cam.min_range || range > cam.max_range {
        return None;
    }
    let offset = wrap_angle(bearing_deg(dx, dy) - d.yaw);
    let elevation = dz.atan2(ground).to_degrees();
    // Strict bounds keep the projected center inside (0, 1).
    if offset.abs() >= cam.hfov / 2.0 || elevation.abs() >= cam.vfov / 2.0 {
        return None;
    }
    let span = |fov: f64| 2.0 * range * (fov.to_radians() / 2.0).tan();
    Some(DetectedObject {
        label: obj.label(),
        cx: 0.5 + offset / cam.hfov,
        cy: 0.5 - elevation / cam.vfov,
        w: (obj.extent[0] / span(cam.hfov)).clamp(SIZE_EPS, 1.0 - SIZE_EPS),
        h: (obj.extent[1] / span(cam.vfov)).clamp(SIZE_EPS, 1.0 - SIZE_EPS),
        color: obj.color.clone(),
    })
}

/// Everything in view, sorted by label.
pub fn detect(world: &WorldState) -> Vec<DetectedObject> {
    let mut out: Vec<DetectedObject> = world
        .objects
        .iter()
        .filter_map(|o| project(world, o))
        .collect();
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out
}

/// First detection whose object matches `name` by base name or label.
pub fn find_detection(world: &WorldState, name: &str) -> Option<DetectedObject> {
    let name = name.trim();
    detect(world).into_iter().find(|det| {
        det.label.eq_ignore_ascii_case(name)
            || world
                .objects
                .iter()
                .any(|o| o.label() == det.label && o.matches(name))
    })
}

pub fn format_scene(detections: &[DetectedObject]) -> String {
    let items: Vec<String> = detections
        .iter()
        .map(|d| {
            format!(
                "name:{},x:{:.2},y:{:.2},width:{:.2},height:{:.2},color:{}",
                d.label, d.cx, d.cy, d.w, d.h, d.color
            )
        })
        .collect();
    format!("[{}]", items.join(", "))
}

pub fn scene_description(world: &WorldState) -> String {
    format_scene(&detect(world))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::world::{load_world, Pose};

    fn world_with(objects: &str) -> WorldState {
        load_world(&format!(
            r#"{{"drone":{{"x":0,"y":0,"z":100,"yaw":0}},"objects":[{objects}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn dead_ahead_is_centered() {
        let w = world_with(r#"{"name":"apple","id":1,"pos":[0,200,100],"extent":[10,10],"color":"red"}"#);
        let d = detect(&w);
        assert_eq!(d.len(), 1);
        assert!((d[0].cx - 0.5).abs() < 1e-12);
        assert!((d[0].cy - 0.5).abs() < 1e-12);
        assert!(scene_description(&w).starts_with("[name:apple_1,x:0.50,y:0.50"));
    }

    #[test]
    fn bearing_twenty_degrees() {
        let r = 200.0_f64;
        let (x, y) = (r * 20f64.to_radians().sin(), r * 20f64.to_radians().cos());
        let w = world_with(&format!(
            r#"{{"name":"cup","id":1,"pos":[{x},{y},100],"extent":[10,10]}}"#
        ));
        assert!((detect(&w)[0].cx - 0.75).abs() < 1e-9);
    }

    #[test]
    fn behind_is_invisible() {
        let w = world_with(r#"{"name":"apple","id":1,"pos":[0,-200,100],"extent":[10,10]}"#);
        assert!(detect(&w).is_empty());
        assert_eq!(scene_description(&w), "[]");
    }

    #[test]
    fn range_limits() {
        let w = world_with(
            r#"{"name":"near","id":1,"pos":[0,20,100],"extent":[10,10]},
               {"name":"far","id":1,"pos":[0,900,100],"extent":[10,10]}"#,
        );
        assert!(detect(&w).is_empty());
    }

    #[test]
    fn sorted_by_label_and_matched_by_name() {
        let mut w = world_with(
            r#"{"name":"chair","id":2,"pos":[10,300,100],"extent":[50,90]},
               {"name":"chair","id":1,"pos":[-10,300,100],"extent":[50,90]},
               {"name":"apple","id":1,"pos":[0,300,100],"extent":[10,10]}"#,
        );
        let labels: Vec<_> = detect(&w).into_iter().map(|d| d.label).collect();
        assert_eq!(labels, ["apple_1", "chair_1", "chair_2"]);
        assert_eq!(find_detection(&w, "Chair").unwrap().label, "chair_1");
        assert_eq!(find_detection(&w, "chair_2").unwrap().label, "chair_2");
        w.drone = Pose::new(0.0, 0.0, 100.0, 180.0);
        assert!(find_detection(&w, "chair").is_none());
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_angle(190.0), -170.0);
        assert_eq!(wrap_angle(-180.0), 180.0);
        assert_eq!(wrap_angle(540.0), 180.0);
    }
}
