use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::abbr::{generate_abbr, AbbrExhausted, RESERVED};
use crate::lang::{parse_program, validate, Diagnostic, ParseError, ParseMode, Program, SkillLookup, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgType {
    Int,
    Float,
    Str,
    Bool,
}

impl fmt::Display for ArgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgType::Int => "int",
            ArgType::Float => "float",
            ArgType::Str => "str",
            ArgType::Bool => "bool",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillArg {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ArgType,
}

impl SkillArg {
    pub fn new(name: impl Into<String>, ty: ArgType) -> Self {
        Self {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowLevelSkill {
    pub name: String,
    pub abbr: String,
    pub description: String,
    pub args: Vec<SkillArg>,
    /// Backend function identifier, e.g. `drone.turn_cw`.
    pub callable: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighLevelSkill {
    pub name: String,
    pub abbr: String,
    pub description: String,
    pub definition_text: String,
    pub definition: Program,
    pub args: Vec<SkillArg>,
    pub arity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkillRef<'a> {
    Low(&'a LowLevelSkill),
    High(&'a HighLevelSkill),
}

impl SkillRef<'_> {
    pub fn name(&self) -> &str {
        match self {
            SkillRef::Low(s) => &s.name,
            SkillRef::High(s) => &s.name,
        }
    }

    pub fn abbr(&self) -> &str {
        match self {
            SkillRef::Low(s) => &s.abbr,
            SkillRef::High(s) => &s.abbr,
        }
    }

    pub fn args(&self) -> &[SkillArg] {
        match self {
            SkillRef::Low(s) => &s.args,
            SkillRef::High(s) => &s.args,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkillError {
    #[error("skill `{0}` is already registered")]
    DuplicateName(String),
    #[error(transparent)]
    AbbrExhausted(#[from] AbbrExhausted),
    #[error("abbreviation `{abbr}` for `{name}` is invalid or already taken")]
    BadAbbr { name: String, abbr: String },
    #[error("definition of `{name}` does not parse: {error}")]
    Parse { name: String, error: ParseError },
    #[error("definition of `{name}` calls unknown skill `{callee}`")]
    UnknownSkill { name: String, callee: String },
    #[error("definition of `{name}` is invalid: {diagnostic}")]
    Invalid { name: String, diagnostic: Diagnostic },
    #[error("`{name}` declares {declared} args but its definition uses {used}")]
    ArgsMismatch {
        name: String,
        declared: usize,
        used: usize,
    },
    #[error("alias target `{0}` is not registered")]
    UnknownAliasTarget(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArgError {
    #[error("{skill} expects {expected} args, got {got}")]
    Arity {
        skill: String,
        expected: usize,
        got: usize,
    },
    #[error("{skill}: argument `{arg}` expects {expected}, got {got}")]
    Type {
        skill: String,
        arg: String,
        expected: ArgType,
        got: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Low(usize),
    High(usize),
}

/// Low- and high-level skills indexed by name, alias and abbreviation.
#[derive(Debug, Clone, Default)]
pub struct SkillRegistry {
    low: Vec<LowLevelSkill>,
    high: Vec<HighLevelSkill>,
    index: HashMap<String, Slot>,
    abbrs: HashSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkillSet {
    Low,
    High,
}

impl SkillRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn low(&self) -> &[LowLevelSkill] {
        &self.low
    }

    pub fn high(&self) -> &[HighLevelSkill] {
        &self.high
    }

    pub fn len(&self) -> usize {
        self.low.len() + self.high.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn abbreviations(&self) -> impl Iterator<Item = &str> {
        self.low
            .iter()
            .map(|s| s.abbr.as_str())
            .chain(self.high.iter().map(|s| s.abbr.as_str()))
    }

    /// Looks up a name, alias or abbreviation.
    pub fn resolve(&self, callee: &str) -> Option<SkillRef<'_>> {
        self.index.get(callee).map(|slot| match *slot {
            Slot::Low(i) => SkillRef::Low(&self.low[i]),
            Slot::High(i) => SkillRef::High(&self.high[i]),
        })
    }

    fn claim(&mut self, name: &str, abbr: Option<&str>) -> Result<String, SkillError> {
        if self.index.contains_key(name) || RESERVED.contains(&name) {
            return Err(SkillError::DuplicateName(name.to_string()));
        }
        let abbr = match abbr {
            Some(a) => {
                let valid = (1..=2).contains(&a.len()) && a.chars().all(|c| c.is_ascii_lowercase());
                if !valid
                    || self.abbrs.contains(a)
                    || self.index.contains_key(a)
                    || RESERVED.contains(&a)
                {
                    return Err(SkillError::BadAbbr {
                        name: name.to_string(),
                        abbr: a.to_string(),
                    });
                }
                a.to_string()
            }
            None => {
                let mut taken = self.abbrs.clone();
                taken.extend(self.index.keys().cloned());
                generate_abbr(name, &taken)?
            }
        };
        Ok(abbr)
    }

    pub fn register_low(
        &mut self,
        name: &str,
        description: &str,
        args: Vec<SkillArg>,
        callable: &str,
    ) -> Result<&LowLevelSkill, SkillError> {
        self.register_low_with_abbr(name, None, description, args, callable)
    }

    /// Like [`register_low`](Self::register_low) with an optional fixed abbreviation.
    pub fn register_low_with_abbr(
        &mut self,
        name: &str,
        abbr: Option<&str>,
        description: &str,
        args: Vec<SkillArg>,
        callable: &str,
    ) -> Result<&LowLevelSkill, SkillError> {
        let abbr = self.claim(name, abbr)?;
        let i = self.low.len();
        self.index.insert(name.to_string(), Slot::Low(i));
        self.index.insert(abbr.clone(), Slot::Low(i));
        self.abbrs.insert(abbr.clone());
        self.low.push(LowLevelSkill {
            name: name.to_string(),
            abbr,
            description: description.to_string(),
            args,
            callable: callable.to_string(),
        });
        Ok(&self.low[i])
    }

    /// Registers a skill defined in MiniSpec. Arguments are inferred from the
    /// highest `$n` and typed `str`.
    pub fn register_high(
        &mut self,
        name: &str,
        description: &str,
        definition: &str,
    ) -> Result<&HighLevelSkill, SkillError> {
        self.register_high_with(name, None, description, definition, None)
    }

    pub fn register_high_with(
        &mut self,
        name: &str,
        abbr: Option<&str>,
        description: &str,
        definition_text: &str,
        args: Option<Vec<SkillArg>>,
    ) -> Result<&HighLevelSkill, SkillError> {
        if self.index.contains_key(name) {
            return Err(SkillError::DuplicateName(name.to_string()));
        }
        let definition = parse_program(definition_text, ParseMode::SkillDefinition).map_err(|error| {
            SkillError::Parse {
                name: name.to_string(),
                error,
            }
        })?;
        if let Some(d) = validate(&definition, self).into_iter().next() {
            return Err(match d.kind {
                crate::lang::DiagnosticKind::UnknownSkill { name: callee } => SkillError::UnknownSkill {
                    name: name.to_string(),
                    callee,
                },
                _ => SkillError::Invalid {
                    name: name.to_string(),
                    diagnostic: d,
                },
            });
        }
        let arity = definition.max_positional() as usize;
        let args = match args {
            Some(a) if a.len() != arity => {
                return Err(SkillError::ArgsMismatch {
                    name: name.to_string(),
                    declared: a.len(),
                    used: arity,
                })
            }
            Some(a) => a,
            None => (1..=arity)
                .map(|i| SkillArg::new(format!("arg{i}"), ArgType::Str))
                .collect(),
        };
        let abbr = self.claim(name, abbr)?;
        let i = self.high.len();
        self.index.insert(name.to_string(), Slot::High(i));
        self.index.insert(abbr.clone(), Slot::High(i));
        self.abbrs.insert(abbr.clone());
        self.high.push(HighLevelSkill {
            name: name.to_string(),
            abbr,
            description: description.to_string(),
            definition_text: definition_text.to_string(),
            definition,
            args,
            arity,
        });
        Ok(&self.high[i])
    }

    /// Adds another name for an existing skill. The abbreviation is shared.
    pub fn add_alias(&mut self, alias: &str, target: &str) -> Result<(), SkillError> {
        if self.index.contains_key(alias) || RESERVED.contains(&alias) {
            return Err(SkillError::DuplicateName(alias.to_string()));
        }
        let slot = *self
            .index
            .get(target)
            .ok_or_else(|| SkillError::UnknownAliasTarget(target.to_string()))?;
        self.index.insert(alias.to_string(), slot);
        Ok(())
    }

    /// One skill per line in registry order, in the planning-prompt format.
    pub fn describe_for_prompt(&self, which: SkillSet) -> String {
        let args = |a: &[SkillArg]| {
            a.iter()
                .map(|x| format!("{}:{}", x.name, x.ty))
                .collect::<Vec<_>>()
                .join(",")
        };
        let lines: Vec<String> = match which {
            SkillSet::Low => self
                .low
                .iter()
                .map(|s| {
                    format!(
                        "abbr:{},name:{},args:[{}],description:{}",
                        s.abbr,
                        s.name,
                        args(&s.args),
                        s.description
                    )
                })
                .collect(),
            SkillSet::High => self
                .high
                .iter()
                .map(|s| {
                    format!(
                        "abbr:{},name:{},definition:{},args:[{}],description:{}",
                        s.abbr,
                        s.name,
                        s.definition_text,
                        args(&s.args),
                        s.description
                    )
                })
                .collect(),
        };
        lines.join("\n")
    }
}

impl SkillLookup for SkillRegistry {
    fn arity_of(&self, callee: &str) -> Option<usize> {
        self.resolve(callee).map(|s| match s {
            SkillRef::Low(l) => l.args.len(),
            SkillRef::High(h) => h.arity,
        })
    }
}

/// Checks count and types; widens int to float where a float is declared.
pub fn coerce_args(skill: &str, declared: &[SkillArg], values: Vec<Value>) -> Result<Vec<Value>, ArgError> {
    if declared.len() != values.len() {
        return Err(ArgError::Arity {
            skill: skill.to_string(),
            expected: declared.len(),
            got: values.len(),
        });
    }
    declared
        .iter()
        .zip(values)
        .map(|(arg, v)| {
            let ok = match (arg.ty, &v) {
                (ArgType::Int, Value::Int(_))
                | (ArgType::Float, Value::Float(_))
                | (ArgType::Str, Value::Str(_))
                | (ArgType::Bool, Value::Bool(_)) => true,
                (ArgType::Float, Value::Int(i)) => return Ok(Value::Float(*i as f64)),
                _ => false,
            };
            if ok {
                Ok(v)
            } else {
                Err(ArgError::Type {
                    skill: skill.to_string(),
                    arg: arg.name.clone(),
                    expected: arg.ty,
                    got: v.type_name(),
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SkillRegistry {
        let mut r = SkillRegistry::new();
        r.register_low("turn_cw", "Rotate clockwise by certain degrees", vec![SkillArg::new("degrees", ArgType::Int)], "drone.turn_cw")
            .unwrap();
        r.register_low("is_visible", "Check", vec![SkillArg::new("object_name", ArgType::Str)], "vision.is_visible")
            .unwrap();
        r
    }

    #[test]
    fn duplicate_name() {
        let mut r = base();
        let err = r.register_low("turn_cw", "x", vec![], "drone.turn_cw").unwrap_err();
        assert_eq!(err, SkillError::DuplicateName("turn_cw".into()));
    }

    #[test]
    fn single_word_gets_one_letter() {
        let mut r = base();
        assert_eq!(r.register_low("delay", "Wait", vec![SkillArg::new("milliseconds", ArgType::Int)], "misc.delay").unwrap().abbr, "d");
        assert_eq!(r.register_low("log", "Out", vec![SkillArg::new("text", ArgType::Str)], "ui.log").unwrap().abbr, "l");
    }

    #[test]
    fn high_level_arity_and_unknown_callee() {
        let mut r = base();
        let s = r
            .register_high("sweeping", "Rotate", "8{_1=iv,$1;?_1==True{->True}tc,45}->False")
            .unwrap();
        assert_eq!((s.abbr.as_str(), s.arity), ("s", 1));
        let err = r.register_high("bad", "x", "zz,1").unwrap_err();
        assert!(matches!(err, SkillError::UnknownSkill { ref callee, .. } if callee == "zz"));
    }

    #[test]
    fn name_and_abbr_resolve_to_same_skill() {
        let r = base();
        assert_eq!(r.resolve("tc"), r.resolve("turn_cw"));
        assert!(r.resolve("nope").is_none());
    }

    #[test]
    fn describe_lines() {
        let r = base();
        assert_eq!(
            r.describe_for_prompt(SkillSet::Low).lines().next().unwrap(),
            "abbr:tc,name:turn_cw,args:[degrees:int],description:Rotate clockwise by certain degrees"
        );
        assert_eq!(SkillRegistry::new().describe_for_prompt(SkillSet::Low), "");
    }

    #[test]
    fn arg_coercion() {
        let decl = [SkillArg::new("d", ArgType::Float)];
        assert_eq!(coerce_args("x", &decl, vec![Value::Int(3)]).unwrap(), vec![Value::Float(3.0)]);
        let decl = [SkillArg::new("d", ArgType::Int)];
        assert!(coerce_args("x", &decl, vec![Value::Float(3.0)]).is_err());
        assert!(coerce_args("x", &decl, vec![Value::Str("3".into())]).is_err());
        assert!(coerce_args("x", &decl, vec![]).is_err());
    }
}
