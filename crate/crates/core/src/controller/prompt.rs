//! Planning and probe prompts.

use std::sync::OnceLock;

use regex::Regex;

use crate::assets;
use crate::skills::{SkillRegistry, SkillSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("template placeholder `{{{0}}}` has no value")]
    Unfilled(String),
}

fn placeholder() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").expect("valid regex"))
}

/// Replaces `{name}` placeholders in `template`. Only the template is
/// scanned, so substituted values may contain braces.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len());
    let mut last = 0;
    for cap in placeholder().captures_iter(template) {
        let whole = cap.get(0).expect("group 0");
        let name = &cap[1];
        let value = vars
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| PromptError::Unfilled(name.to_string()))?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

/// The full planning prompt for one round.
pub fn planning_prompt(
    registry: &SkillRegistry,
    scene: &str,
    task: &str,
    error_history: &str,
) -> Result<String, PromptError> {
    let high = registry.describe_for_prompt(SkillSet::High);
    let low = registry.describe_for_prompt(SkillSet::Low);
    render(
        assets::PLANNING_PROMPT,
        &[
            ("minispec_syntax", assets::MINISPEC_SYNTAX.trim_end()),
            ("system_skill_description_high", high.trim_end()),
            ("system_skill_description_low", low.trim_end()),
            ("rules", assets::PLANNING_RULES.trim_end()),
            ("plan_examples", assets::PLANNING_EXAMPLES.trim_end()),
            ("error_message", error_history),
            ("scene_description", scene),
            ("task_description", task),
        ],
    )
}

pub fn query_prompt(scene: &str, question: &str) -> Result<String, PromptError> {
    render(
        assets::QUERY_PROMPT,
        &[("scene_description", scene), ("question", question)],
    )
}

/// One block of the error history fed back to the planner.
pub fn history_entry(plan: &str, trace_export: &str, reason: &str, detail: &str) -> String {
    let mut s = format!("previous plan:\n{plan}\nexecuted:\n{trace_export}");
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s.push_str(&format!("reason: {reason}\n"));
    if !detail.is_empty() {
        s.push_str(&format!("detail: {detail}\n"));
    }
    s
}
