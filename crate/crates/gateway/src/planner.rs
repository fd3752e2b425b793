//! Planner selection and the HTTP client for OpenAI-compatible servers.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::Context;
use minispec::controller::{FixtureSet, LlmClient, LlmError, MockLlm, PlanRequest, PlanStream};
use minispec::interp::TimedToken;
use minispec::metrics::{HeuristicTokenizer, TokenCounter};
use minispec::skills::Query;
use serde_json::{json, Value};

/// Settings for an OpenAI-compatible chat completions endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpLlmConfig {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpLlmConfig {
    /// Reads `MINISPEC_LLM_URL`, `MINISPEC_LLM_MODEL` and `MINISPEC_LLM_API_KEY`.
    pub fn from_env() -> Self {
        Self {
            url: std::env::var("MINISPEC_LLM_URL")
                .unwrap_or_else(|_| "http://127.0.0.1:8000/v1/chat/completions".into()),
            model: std::env::var("MINISPEC_LLM_MODEL").unwrap_or_else(|_| "gpt-4".into()),
            api_key: std::env::var("MINISPEC_LLM_API_KEY").ok(),
            timeout: Duration::from_secs(120),
        }
    }
}

/// Streams plans from a chat completions endpoint on the wall clock.
pub struct HttpLlm {
    config: HttpLlmConfig,
    client: reqwest::blocking::Client,
}

impl HttpLlm {
    pub fn new(config: HttpLlmConfig) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn post(&self, prompt: &str, stream: bool) -> Result<reqwest::blocking::Response, LlmError> {
        let body = json!({
            "model": self.config.model,
            "stream": stream,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(&self.config.url).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(LlmError::Http {
                status: status.as_u16(),
                body: resp.text().unwrap_or_default(),
            });
        }
        Ok(resp)
    }
}

/// Pulls `choices[0].delta.content` out of one server-sent-event line.
pub fn sse_delta(line: &str) -> Option<Result<String, ()>> {
    let data = line.strip_prefix("data:")?.trim();
    if data == "[DONE]" {
        return Some(Err(()));
    }
    let v: Value = serde_json::from_str(data).ok()?;
    let text = v["choices"][0]["delta"]["content"].as_str()?;
    (!text.is_empty()).then(|| Ok(text.to_string()))
}

struct SseTokens<R> {
    lines: std::io::Lines<BufReader<R>>,
    sent_at: Duration,
    started: Instant,
    done: bool,
}

impl<R: std::io::Read> Iterator for SseTokens<R> {
    type Item = TimedToken;

    fn next(&mut self) -> Option<TimedToken> {
        while !self.done {
            let Some(Ok(line)) = self.lines.next() else {
                self.done = true;
                break;
            };
            match sse_delta(&line) {
                Some(Ok(text)) => return Some(TimedToken::new(self.sent_at + self.started.elapsed(), text)),
                Some(Err(())) => self.done = true,
                None => {}
            }
        }
        None
    }
}

impl LlmClient for HttpLlm {
    fn plan(&mut self, req: &PlanRequest<'_>) -> Result<PlanStream, LlmError> {
        let started = Instant::now();
        let resp = self.post(req.prompt, true)?;
        Ok(PlanStream {
            prompt_tokens: HeuristicTokenizer.count(req.prompt),
            tokens: Box::new(SseTokens {
                lines: BufReader::new(resp).lines(),
                sent_at: req.sent_at,
                started,
                done: false,
            }),
        })
    }

    fn ask(&mut self, prompt: &str, _query: &Query) -> Result<(String, Duration), LlmError> {
        let started = Instant::now();
        let v: Value = self
            .post(prompt, false)?
            .json()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let text = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LlmError::Transport("response has no message content".into()))?;
        Ok((text.to_string(), started.elapsed()))
    }

    fn is_simulated(&self) -> bool {
        false
    }
}

/// Which planner missions talk to.
#[derive(Debug, Clone)]
pub enum PlannerConfig {
    Mock(FixtureSet),
    Http(HttpLlmConfig),
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig::Mock(FixtureSet::bundled())
    }
}

/// Per-mission knobs that only the mock planner honours.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockKnobs {
    pub rate_tps: Option<f64>,
    pub variant: Option<String>,
    pub jitter_seed: Option<u64>,
}

impl PlannerConfig {
    /// `MINISPEC_LLM=mock|http` picks the client; `MINISPEC_FIXTURES` points
    /// the mock at another fixture file.
    pub fn from_env() -> anyhow::Result<Self> {
        match std::env::var("MINISPEC_LLM").as_deref() {
            Err(_) | Ok("") | Ok("mock") => match std::env::var("MINISPEC_FIXTURES") {
                Ok(path) if !path.is_empty() => Ok(PlannerConfig::Mock(load_fixtures(Path::new(&path))?)),
                _ => Ok(PlannerConfig::default()),
            },
            Ok("http") => Ok(PlannerConfig::Http(HttpLlmConfig::from_env())),
            Ok(other) => anyhow::bail!("MINISPEC_LLM must be `mock` or `http`, got `{other}`"),
        }
    }

    pub fn client(&self, knobs: &MockKnobs) -> Result<Box<dyn LlmClient>, LlmError> {
        Ok(match self {
            PlannerConfig::Mock(set) => {
                let mut m = MockLlm::new(set.clone()).with_variant(knobs.variant.as_deref());
                if let Some(r) = knobs.rate_tps.filter(|r| *r > 0.0) {
                    m = m.with_rate(r);
                }
                if let Some(seed) = knobs.jitter_seed {
                    m = m.with_jitter(seed);
                }
                Box::new(m)
            }
            PlannerConfig::Http(cfg) => Box::new(HttpLlm::new(cfg.clone())?),
        })
    }
}

pub fn load_fixtures(path: &Path) -> anyhow::Result<FixtureSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FixtureSet::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sse_lines() {
        let l = r#"data: {"choices":[{"delta":{"content":"tc("}}]}"#;
        assert_eq!(sse_delta(l), Some(Ok("tc(".into())));
        assert_eq!(sse_delta("data: [DONE]"), Some(Err(())));
        assert_eq!(sse_delta(": keep-alive"), None);
        assert_eq!(sse_delta(r#"data: {"choices":[{"delta":{"role":"assistant"}}]}"#), None);
    }
}
