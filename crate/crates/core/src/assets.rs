//! Files bundled into the binary: skills, prompts, worlds and plan fixtures.

pub const DEFAULT_SKILLS: &str = include_str!("../assets/skills/default.json");

pub const PLANNING_PROMPT: &str = include_str!("../assets/prompts/planning.txt");
pub const QUERY_PROMPT: &str = include_str!("../assets/prompts/query.txt");
pub const PLANNING_RULES: &str = include_str!("../assets/prompts/rules.txt");
pub const MINISPEC_SYNTAX: &str = include_str!("../assets/prompts/minispec_syntax.txt");
pub const PLANNING_EXAMPLES: &str = include_str!("../assets/prompts/examples.txt");

pub const PLAN_FIXTURES: &str = include_str!("../assets/fixtures/plans.json");
pub const PLAN_CORPUS: &str = include_str!("../assets/fixtures/paper_plans.txt");
pub const SCAN_MINISPEC: &str = include_str!("../assets/fixtures/scan_minispec.ms");
pub const SCAN_VERBOSE: &str = include_str!("../assets/fixtures/scan_verbose.py");

const WORLDS: [(&str, &str); 11] = [
    ("task_01", include_str!("../assets/worlds/task_01.json")),
    ("task_02", include_str!("../assets/worlds/task_02.json")),
    ("task_03", include_str!("../assets/worlds/task_03.json")),
    ("task_04", include_str!("../assets/worlds/task_04.json")),
    ("task_05", include_str!("../assets/worlds/task_05.json")),
    ("task_06", include_str!("../assets/worlds/task_06.json")),
    ("task_07", include_str!("../assets/worlds/task_07.json")),
    ("task_08", include_str!("../assets/worlds/task_08.json")),
    ("task_09", include_str!("../assets/worlds/task_09.json")),
    ("task_10", include_str!("../assets/worlds/task_10.json")),
    ("task_11", include_str!("../assets/worlds/task_11.json")),
];

/// Ids of the bundled worlds, in task order.
pub fn world_ids() -> impl Iterator<Item = &'static str> {
    WORLDS.iter().map(|(id, _)| *id)
}

/// Raw JSON of a bundled world.
pub fn world_text(id: &str) -> Option<&'static str> {
    WORLDS.iter().find(|(w, _)| *w == id).map(|(_, t)| *t)
}

/// World id for a 1-based task number.
pub fn task_world_id(task: usize) -> Option<&'static str> {
    WORLDS.get(task.checked_sub(1)?).map(|(id, _)| *id)
}

/// A corpus plan and the mode it parses in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPlan {
    pub text: &'static str,
    pub skill_mode: bool,
}

/// Plans from [`PLAN_CORPUS`]. Blank lines and `#` comments are skipped;
/// `#mode=skill` switches later lines to skill mode.
pub fn corpus_plans() -> Vec<CorpusPlan> {
    let mut skill_mode = false;
    let mut out = Vec::new();
    for line in PLAN_CORPUS.lines() {
        let line = line.trim();
        if line == "#mode=skill" {
            skill_mode = true;
        } else if line == "#mode=plan" {
            skill_mode = false;
        } else if !line.is_empty() && !line.starts_with('#') {
            out.push(CorpusPlan { text: line, skill_mode });
        }
    }
    out
}
