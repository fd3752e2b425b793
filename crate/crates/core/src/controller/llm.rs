//! The boundary to whatever writes plans and answers probes.

use std::time::Duration;

use crate::interp::TimedToken;
use crate::skills::Query;

/// One planning call.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRequest<'a> {
    pub prompt: &'a str,
    /// Task text as the user typed it.
    pub task: &'a str,
    pub world: &'a str,
    pub round: u32,
    /// Mission-clock time the request is sent.
    pub sent_at: Duration,
}

/// Streamed response. Token timestamps are on the mission clock.
pub struct PlanStream {
    pub prompt_tokens: usize,
    pub tokens: Box<dyn Iterator<Item = TimedToken> + Send>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("no fixture plan for task `{task}` round {round}")]
    NoFixture { task: String, round: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("model server returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
}

pub trait LlmClient: Send {
    fn plan(&mut self, request: &PlanRequest<'_>) -> Result<PlanStream, LlmError>;

    /// Answers a probe. `prompt` is the rendered query prompt.
    fn ask(&mut self, prompt: &str, query: &Query) -> Result<(String, Duration), LlmError>;

    /// Simulated clients run on the simulated mission clock; real ones on
    /// the wall clock.
    fn is_simulated(&self) -> bool {
        true
    }
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn plan(&mut self, request: &PlanRequest<'_>) -> Result<PlanStream, LlmError> {
        (**self).plan(request)
    }

    fn ask(&mut self, prompt: &str, query: &Query) -> Result<(String, Duration), LlmError> {
        (**self).ask(prompt, query)
    }

    fn is_simulated(&self) -> bool {
        (**self).is_simulated()
    }
}
