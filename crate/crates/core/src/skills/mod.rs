//! Skill registry, abbreviations, manifests and the backend boundary.

pub mod abbr;
pub mod backend;
pub mod manifest;
pub mod registry;

pub use abbr::{generate_abbr, AbbrExhausted};
pub use backend::{parse_answer, Backend, Invocation, Motion, Query, QueryResponder};
pub use manifest::{default_manifest, default_registry, SkillManifest};
pub use registry::{
    coerce_args, ArgError, ArgType, HighLevelSkill, LowLevelSkill, SkillArg, SkillError, SkillRef,
    SkillRegistry, SkillSet,
};
