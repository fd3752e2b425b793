//! LLM-facing controller: prompts, planner clients and the mission loop.

pub mod fixtures;
pub mod llm;
pub mod mission;
pub mod mock;
pub mod prompt;

use serde::{Deserialize, Serialize};

pub use fixtures::{FixtureSet, PlanFixture};
pub use llm::{LlmClient, LlmError, PlanRequest, PlanStream};
pub use mission::{run_mission, MissionOptions, MissionState, Phase, RoundRecord};
pub use mock::{answer_query, MockLlm};
pub use prompt::{history_entry, planning_prompt, query_prompt, render, PromptError};

/// Language the planner writes in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanLanguage {
    #[default]
    MiniSpec,
    /// Python-like baseline; batch execution only.
    Verbose,
}
