//! Deterministic drone and scene simulator.
//!
//! Coordinates are centimeters in a right-handed ground frame; yaw 0 faces
//! +y and grows clockwise seen from above. The camera is a linear projection
//! with an 80x60 degree field of view.

pub mod backend;
pub mod camera;
pub mod motion;
pub mod world;

pub use backend::SimBackend;
pub use camera::{detect, scene_description, DetectedObject};
pub use motion::{MotionFault, MoveKind, TurnKind};
pub use world::{
    load_world, Camera, ConfigError, Pose, Predicate, Timing, WorldFile, WorldObject, WorldState,
    ARRIVAL_RADIUS_CM,
};
