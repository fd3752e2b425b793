use std::fmt;
use std::time::Duration;

use serde::Serialize;

use crate::lang::Value;

/// What a traced statement produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceResult {
    Value(Value),
    /// The statement ended the run: replan, abort or runtime error.
    Stopped(String),
}

impl fmt::Display for TraceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceResult::Value(v) => write!(f, "{v}"),
            TraceResult::Stopped(s) => write!(f, "!{s}"),
        }
    }
}

/// One executed elementary statement or evaluated condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub text: String,
    /// Skill nesting depth; 0 is the plan itself.
    pub depth: usize,
    #[serde(serialize_with = "ser_ms")]
    pub started: Duration,
    #[serde(serialize_with = "ser_ms")]
    pub finished: Duration,
    pub result: TraceResult,
}

fn ser_ms<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

/// Ordered record of everything a run executed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExecutionTrace {
    pub records: Vec<TraceRecord>,
}

impl ExecutionTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (text, depth, result) triples; timing dropped so batch and stream
    /// runs compare equal.
    pub fn steps(&self) -> Vec<(String, usize, String)> {
        self.records
            .iter()
            .map(|r| (r.text.clone(), r.depth, r.result.to_string()))
            .collect()
    }

    /// One line per record: `start_ms end_ms text => result`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{:.1} {:.1} {} => {}\n",
                r.started.as_secs_f64() * 1000.0,
                r.finished.as_secs_f64() * 1000.0,
                r.text,
                r.result
            ));
        }
        out
    }
}
