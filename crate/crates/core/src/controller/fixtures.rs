//! Canned planner responses keyed by task text, world and round.

use serde::{Deserialize, Serialize};

use crate::assets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFixture {
    /// Case-insensitive substring of the task text.
    #[serde(rename = "match")]
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world: Option<String>,
    #[serde(default)]
    pub round: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub plan: String,
    /// The same plan in an indentation-based verbose language.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verbose: Vec<String>,
}

impl PlanFixture {
    pub fn verbose_text(&self) -> Option<String> {
        (!self.verbose.is_empty()).then(|| self.verbose.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSet {
    #[serde(default = "default_rate")]
    pub rate_tps: f64,
    #[serde(default = "default_prefill")]
    pub prefill_s: f64,
    pub plans: Vec<PlanFixture>,
}

fn default_rate() -> f64 {
    20.0
}

fn default_prefill() -> f64 {
    0.3
}

#[derive(Debug, thiserror::Error)]
#[error("invalid fixture file: {0}")]
pub struct FixtureError(#[from] serde_json::Error);

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl FixtureSet {
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn bundled() -> Self {
        Self::from_json(assets::PLAN_FIXTURES).expect("bundled fixtures are valid")
    }

    /// Best entry for a request. An entry tagged with the requested variant
    /// beats an untagged one; entries tagged with another variant never
    /// match.
    pub fn find(&self, task: &str, world: &str, round: u32, variant: Option<&str>) -> Option<&PlanFixture> {
        let task = normalize(task);
        let candidates = self.plans.iter().filter(|f| {
            f.round == round
                && task.contains(&normalize(&f.pattern))
                && f.world.as_deref().is_none_or(|w| w == world)
        });
        let mut fallback = None;
        for f in candidates {
            match (f.variant.as_deref(), variant) {
                (Some(a), Some(b)) if a == b => return Some(f),
                (None, _) if fallback.is_none() => fallback = Some(f),
                _ => {}
            }
        }
        fallback
    }

    /// Distinct variant names, sorted.
    pub fn variants(&self) -> Vec<String> {
        let mut v: Vec<String> = self.plans.iter().filter_map(|f| f.variant.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}
