//! JSON skill-set manifests.

use serde::{Deserialize, Serialize};

use super::registry::{SkillArg, SkillError, SkillRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbr: Option<String>,
    pub description: String,
    #[serde(default)]
    pub args: Vec<SkillArg>,
    pub callable: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbr: Option<String>,
    pub description: String,
    pub definition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub args: Option<Vec<SkillArg>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SkillManifest {
    #[serde(default)]
    pub low: Vec<LowEntry>,
    #[serde(default)]
    pub high: Vec<HighEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("invalid skill manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Skill(#[from] SkillError),
}

impl SkillManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Low-level skills first, then high-level ones, each in file order.
    pub fn build(&self) -> Result<SkillRegistry, ManifestError> {
        let mut reg = SkillRegistry::new();
        for e in &self.low {
            reg.register_low_with_abbr(&e.name, e.abbr.as_deref(), &e.description, e.args.clone(), &e.callable)?;
        }
        for e in &self.high {
            reg.register_high_with(&e.name, e.abbr.as_deref(), &e.description, &e.definition, e.args.clone())?;
            for alias in &e.aliases {
                reg.add_alias(alias, &e.name)?;
            }
        }
        Ok(reg)
    }
}

/// The bundled drone skill set.
pub fn default_manifest() -> SkillManifest {
    SkillManifest::from_json(crate::assets::DEFAULT_SKILLS).expect("bundled manifest is valid")
}

/// Registry built from [`default_manifest`].
pub fn default_registry() -> SkillRegistry {
    default_manifest().build().expect("bundled manifest builds")
}
