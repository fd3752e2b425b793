//! The boundary between skill dispatch and whatever executes low-level skills.

use std::time::Duration;

use crate::events::EventKind;
use crate::lang::Value;
use crate::sim::WorldObject;

/// Motion performed by one invocation, used by replan policies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Motion {
    pub rotation_deg: f64,
    pub forward_cm: f64,
}

/// Result of running one low-level skill.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    /// `Err` is a skill fault; the interpreter turns it into a replan.
    pub result: Result<Value, String>,
    /// Time the skill took on the mission clock.
    pub duration: Duration,
    /// Side events, each offset from the invocation start.
    pub events: Vec<(Duration, EventKind)>,
    pub motion: Motion,
}

impl Invocation {
    pub fn ok(value: impl Into<Value>, duration: Duration) -> Self {
        Self {
            result: Ok(value.into()),
            duration,
            events: Vec::new(),
            motion: Motion::default(),
        }
    }

    pub fn fault(message: impl Into<String>, duration: Duration) -> Self {
        Self {
            result: Err(message.into()),
            duration,
            events: Vec::new(),
            motion: Motion::default(),
        }
    }

    pub fn with_event(mut self, offset: Duration, kind: EventKind) -> Self {
        self.events.push((offset, kind));
        self
    }
}

/// Executes low-level skills by callable id. Arguments are already checked
/// against the declared types.
pub trait Backend {
    fn invoke(&mut self, callable: &str, args: &[Value]) -> Invocation;
}

/// A probe question asked mid-plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    /// Scene description text as the planner sees it.
    pub scene: String,
    pub question: String,
    /// Objects currently in view. Mock responders use their attributes as
    /// world knowledge; real models only get `scene`.
    pub visible: Vec<WorldObject>,
}

/// Answers probe questions against a scene. Implemented by the LLM layer.
pub trait QueryResponder {
    /// Returns the raw answer text and how long answering took.
    fn answer(&mut self, query: &Query) -> Result<(String, Duration), String>;
}

/// Turns a raw probe answer into a value: exact `True`/`False` become
/// booleans, anything else a trimmed string.
pub fn parse_answer(raw: &str) -> Value {
    let t = raw.trim().trim_matches(|c| c == '\'' || c == '"').trim();
    match t {
        "True" => Value::Bool(true),
        "False" => Value::Bool(false),
        other => Value::Str(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answers() {
        assert_eq!(parse_answer("True"), Value::Bool(true));
        assert_eq!(parse_answer(" False\n"), Value::Bool(false));
        assert_eq!(parse_answer("bottle_17"), Value::Str("bottle_17".into()));
        assert_eq!(parse_answer("Two chairs"), Value::Str("Two chairs".into()));
    }
}
