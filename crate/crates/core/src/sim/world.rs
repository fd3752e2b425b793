//! World state and the world-file format.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// Drone pose. Centimeters; yaw in degrees, clockwise from +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default)]
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            z,
            yaw: normalize_yaw(yaw),
        }
    }

    /// Unit vector the drone faces, in the ground plane.
    pub fn heading(&self) -> (f64, f64) {
        let r = self.yaw.to_radians();
        (r.sin(), r.cos())
    }
}

pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = yaw.rem_euclid(360.0);
    if y >= 360.0 {
        0.0
    } else {
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldObject {
    #[serde(rename = "name")]
    pub base_name: String,
    #[serde(rename = "id")]
    pub instance_id: u32,
    #[serde(rename = "pos")]
    pub position: [f64; 3],
    /// Width and height in centimeters.
    pub extent: [f64; 2],
    #[serde(default = "default_color")]
    pub color: String,
    /// Tags used only by the mock LLM's query policy.
    #[serde(default)]
    pub attrs: Vec<String>,
    #[serde(default)]
    pub obstacle_radius: f64,
}

fn default_color() -> String {
    "gray".to_string()
}

impl WorldObject {
    pub fn label(&self) -> String {
        format!("{}_{}", self.base_name, self.instance_id)
    }

    /// Case-insensitive match on base name or full label.
    pub fn matches(&self, name: &str) -> bool {
        let name = name.trim();
        self.base_name.eq_ignore_ascii_case(name) || self.label().eq_ignore_ascii_case(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    #[serde(default = "default_hfov")]
    pub hfov: f64,
    #[serde(default = "default_vfov")]
    pub vfov: f64,
    #[serde(default = "default_min_range")]
    pub min_range: f64,
    #[serde(default = "default_max_range")]
    pub max_range: f64,
}

fn default_hfov() -> f64 {
    80.0
}
fn default_vfov() -> f64 {
    60.0
}
fn default_min_range() -> f64 {
    30.0
}
fn default_max_range() -> f64 {
    800.0
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            hfov: default_hfov(),
            vfov: default_vfov(),
            min_range: default_min_range(),
            max_range: default_max_range(),
        }
    }
}

/// Simulated skill durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    #[serde(default = "t_move")]
    pub move_s_per_cm: f64,
    #[serde(default = "t_turn")]
    pub turn_s_per_deg: f64,
    #[serde(default = "t_vision")]
    pub vision_s: f64,
    #[serde(default = "t_picture")]
    pub picture_s: f64,
}

fn t_move() -> f64 {
    0.02
}
fn t_turn() -> f64 {
    0.01
}
fn t_vision() -> f64 {
    0.05
}
fn t_picture() -> f64 {
    0.3
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            move_s_per_cm: t_move(),
            turn_s_per_deg: t_turn(),
            vision_s: t_vision(),
            picture_s: t_picture(),
        }
    }
}

/// Declarative success condition, all of which must hold after a mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    /// Ground-plane distance from the drone to an object.
    Near {
        label: String,
        #[serde(default = "default_near_radius")]
        radius: f64,
    },
    /// Some picture shows an object with this name or label.
    PictureOf(String),
    LogContains(String),
    YawNear {
        deg: f64,
        #[serde(default = "default_yaw_tolerance")]
        tolerance: f64,
    },
    NoCollision,
}

/// Arrival radius used by `goto`-style success checks.
pub const ARRIVAL_RADIUS_CM: f64 = 60.0;

fn default_near_radius() -> f64 {
    ARRIVAL_RADIUS_CM
}
fn default_yaw_tolerance() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MissionConfig {
    /// Turns on the rotation/forward-distance replan policy.
    #[serde(default)]
    pub policy_trigger: bool,
}

/// On-disk world description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldFile {
    #[serde(default)]
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_setup: Option<String>,
    pub drone: Pose,
    #[serde(default)]
    pub camera: Camera,
    #[serde(default)]
    pub objects: Vec<WorldObject>,
    #[serde(default)]
    pub success: Vec<Predicate>,
    #[serde(default)]
    pub mission: MissionConfig,
    #[serde(default)]
    pub timing: Timing,
    /// Reserved; detection is noise-free.
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Picture {
    pub path: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub label: String,
    pub at: [f64; 2],
}

/// Mutable simulation state for one mission.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub id: String,
    pub task: Option<String>,
    pub drone: Pose,
    pub start: Pose,
    pub objects: Vec<WorldObject>,
    pub camera: Camera,
    pub timing: Timing,
    pub success: Vec<Predicate>,
    pub mission: MissionConfig,
    pub rng_seed: u64,
    pub log: Vec<String>,
    pub pictures: Vec<Picture>,
    pub collisions: Vec<Collision>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("world config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Parses and checks a world file.
pub fn load_world(config_text: &str) -> Result<WorldState, ConfigError> {
    let file: WorldFile = serde_json::from_str(config_text).map_err(|e| {
        let msg = e.to_string();
        // serde_json reports the offending field inside its message.
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "<document>".to_string());
        ConfigError::new(field, msg)
    })?;
    WorldState::from_file(file)
}

impl WorldState {
    pub fn from_file(file: WorldFile) -> Result<Self, ConfigError> {
        let cam = file.camera;
        if !(cam.hfov > 0.0 && cam.hfov < 180.0) {
            return Err(ConfigError::new("camera.hfov", "must be in (0, 180)"));
        }
        if !(cam.vfov > 0.0 && cam.vfov < 180.0) {
            return Err(ConfigError::new("camera.vfov", "must be in (0, 180)"));
        }
        if !(cam.min_range >= 0.0 && cam.max_range > cam.min_range) {
            return Err(ConfigError::new("camera.max_range", "must exceed min_range"));
        }
        let d = file.drone;
        if ![d.x, d.y, d.z, d.yaw].iter().all(|v| v.is_finite()) {
            return Err(ConfigError::new("drone", "coordinates must be finite"));
        }
        let mut labels = HashSet::new();
        for (i, o) in file.objects.iter().enumerate() {
            if o.base_name.is_empty() {
                return Err(ConfigError::new(format!("objects[{i}].name"), "must not be empty"));
            }
            if o.instance_id == 0 {
                return Err(ConfigError::new(format!("objects[{i}].id"), "must be positive"));
            }
            if !labels.insert(o.label()) {
                return Err(ConfigError::new(format!("objects[{i}]"), format!("duplicate label {}", o.label())));
            }
            if !(o.extent[0] > 0.0 && o.extent[1] > 0.0) {
                return Err(ConfigError::new(format!("objects[{i}].extent"), "must be positive"));
            }
            if !o.position.iter().all(|v| v.is_finite()) {
                return Err(ConfigError::new(format!("objects[{i}].pos"), "must be finite"));
            }
            if o.obstacle_radius.is_nan() || o.obstacle_radius < 0.0 {
                return Err(ConfigError::new(format!("objects[{i}].obstacle_radius"), "must be non-negative"));
            }
        }
        let drone = Pose::new(d.x, d.y, d.z, d.yaw);
        Ok(Self {
            id: file.id,
            task: file.task,
            drone,
            start: drone,
            objects: file.objects,
            camera: cam,
            timing: file.timing,
            success: file.success,
            mission: file.mission,
            rng_seed: file.rng_seed,
            log: Vec::new(),
            pictures: Vec::new(),
            collisions: Vec::new(),
        })
    }

    pub fn object(&self, label: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.matches(label))
    }

    pub fn ground_distance_to(&self, obj: &WorldObject) -> f64 {
        (obj.position[0] - self.drone.x).hypot(obj.position[1] - self.drone.y)
    }

    pub fn check(&self, p: &Predicate) -> bool {
        match p {
            Predicate::Near { label, radius } => self
                .object(label)
                .is_some_and(|o| self.ground_distance_to(o) <= *radius),
            Predicate::PictureOf(name) => self.pictures.iter().any(|pic| {
                pic.labels.iter().any(|l| {
                    self.object(l).is_some_and(|o| o.matches(name)) || l.eq_ignore_ascii_case(name)
                })
            }),
            Predicate::LogContains(text) => {
                let needle = text.to_lowercase();
                self.log.iter().any(|l| l.to_lowercase().contains(&needle))
            }
            Predicate::YawNear { deg, tolerance } => {
                let diff = (self.drone.yaw - deg).rem_euclid(360.0);
                diff.min(360.0 - diff) <= *tolerance
            }
            Predicate::NoCollision => self.collisions.is_empty(),
        }
    }

    /// True when every success predicate of the world holds.
    pub fn success(&self) -> bool {
        self.success.iter().all(|p| self.check(p))
    }
}
