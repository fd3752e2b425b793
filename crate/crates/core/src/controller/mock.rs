//! Deterministic stand-in for a hosted LLM.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixtures::FixtureSet;
use super::llm::{LlmClient, LlmError, PlanRequest, PlanStream};
use super::PlanLanguage;
use crate::interp::TimedToken;
use crate::metrics::{HeuristicTokenizer, TokenCounter};
use crate::sim::WorldObject;
use crate::skills::Query;

/// Serves fixture plans token by token on the simulated clock.
///
/// Token `i` (1-based) of a response arrives at
/// `sent + prefill + per_prompt_token * Np + i / rate`.
#[derive(Debug, Clone)]
pub struct MockLlm {
    fixtures: FixtureSet,
    variant: Option<String>,
    language: PlanLanguage,
    rate_tps: f64,
    prefill: Duration,
    per_prompt_token: Duration,
    jitter: Option<ChaCha8Rng>,
}

impl MockLlm {
    pub fn new(fixtures: FixtureSet) -> Self {
        Self {
            rate_tps: fixtures.rate_tps,
            prefill: Duration::from_secs_f64(fixtures.prefill_s),
            fixtures,
            variant: None,
            language: PlanLanguage::MiniSpec,
            per_prompt_token: Duration::ZERO,
            jitter: None,
        }
    }

    pub fn bundled() -> Self {
        Self::new(FixtureSet::bundled())
    }

    pub fn with_variant(mut self, variant: Option<&str>) -> Self {
        self.variant = variant.map(str::to_string);
        self
    }

    pub fn with_language(mut self, language: PlanLanguage) -> Self {
        self.language = language;
        self
    }

    pub fn with_rate(mut self, tokens_per_s: f64) -> Self {
        assert!(tokens_per_s > 0.0, "token rate must be positive");
        self.rate_tps = tokens_per_s;
        self
    }

    pub fn with_prefill(mut self, prefill: Duration) -> Self {
        self.prefill = prefill;
        self
    }

    pub fn with_prompt_cost(mut self, per_prompt_token: Duration) -> Self {
        self.per_prompt_token = per_prompt_token;
        self
    }

    /// Stretches every token interval by a seeded factor in [0.9, 1.1].
    pub fn with_jitter(mut self, seed: u64) -> Self {
        self.jitter = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn fixtures(&self) -> &FixtureSet {
        &self.fixtures
    }

    fn interval(&mut self) -> Duration {
        let base = Duration::from_secs_f64(1.0 / self.rate_tps);
        match &mut self.jitter {
            Some(rng) => base.mul_f64(rng.gen_range(0.9..=1.1)),
            None => base,
        }
    }
}

impl LlmClient for MockLlm {
    fn plan(&mut self, req: &PlanRequest<'_>) -> Result<PlanStream, LlmError> {
        let no_fixture = || LlmError::NoFixture {
            task: req.task.to_string(),
            round: req.round,
        };
        let fixture = self
            .fixtures
            .find(req.task, req.world, req.round, self.variant.as_deref())
            .ok_or_else(no_fixture)?;
        let text = match self.language {
            PlanLanguage::MiniSpec => fixture.plan.clone(),
            PlanLanguage::Verbose => fixture.verbose_text().ok_or_else(no_fixture)?,
        };
        let prompt_tokens = HeuristicTokenizer.count(req.prompt);
        let mut at = req.sent_at + self.prefill + self.per_prompt_token * prompt_tokens as u32;
        let mut tokens = Vec::new();
        for piece in HeuristicTokenizer.segment(&text) {
            at += self.interval();
            tokens.push(TimedToken::new(at, piece));
        }
        Ok(PlanStream {
            prompt_tokens,
            tokens: Box::new(tokens.into_iter()),
        })
    }

    fn ask(&mut self, prompt: &str, query: &Query) -> Result<(String, Duration), LlmError> {
        let answer = answer_query(&query.question, &query.visible);
        let np = HeuristicTokenizer.count(prompt) as u32;
        let mut latency = self.prefill + self.per_prompt_token * np;
        for _ in 0..HeuristicTokenizer.count(&answer) {
            latency += self.interval();
        }
        Ok((answer, latency))
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "am", "was", "were", "do", "does", "did", "can", "could", "will",
    "would", "should", "has", "have", "you", "i", "me", "my", "your", "what", "whats", "which", "who",
    "where", "any", "anything", "something", "some", "object", "objects", "target", "targets",
    "thing", "things", "here", "there", "in", "on", "of", "for", "to", "and", "or", "with", "it",
    "this", "that", "be", "room", "scene", "see", "find", "how", "many", "s", "there's", "please",
    "now", "view", "current", "item", "items",
];

const YES_NO: &[&str] = &[
    "is", "are", "am", "was", "were", "do", "does", "did", "can", "could", "will", "would", "should",
    "has", "have",
];

const IDENTIFY: &[&str] = &["what", "whats", "which", "who", "any", "anything", "something", "find", "where"];

const NUMBERS: &[&str] = &[
    "Zero", "One", "Two", "Three", "Four", "Five", "Six", "Seven", "Eight", "Nine", "Ten",
];

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

fn word_matches(keyword: &str, word: &str) -> bool {
    keyword == word
        || keyword.strip_suffix('s') == Some(word)
        || word.strip_suffix('s') == Some(keyword)
        || (keyword == "people" && word == "person")
}

fn bag(obj: &WorldObject) -> Vec<String> {
    let mut b = words(&obj.base_name);
    b.extend(words(&obj.color));
    for a in &obj.attrs {
        b.extend(words(a));
    }
    b
}

fn fits(obj: &WorldObject, keywords: &[String]) -> bool {
    let b = bag(obj);
    keywords.iter().all(|k| b.iter().any(|w| word_matches(k, w)))
}

/// Rule-based probe answers over the visible objects' names, colors and
/// attributes. Counting questions give `<Number> <noun>`, yes/no questions
/// give `True`/`False`, identification questions give the first matching
/// label in label order or `False`.
pub fn answer_query(question: &str, visible: &[WorldObject]) -> String {
    let all = words(question);
    let keywords: Vec<String> = all
        .iter()
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .cloned()
        .collect();
    let mut sorted: Vec<&WorldObject> = visible.iter().collect();
    sorted.sort_by_key(|o| o.label());
    let first = all.first().map(String::as_str).unwrap_or("");
    if all.len() >= 2 && all[0] == "how" && all[1] == "many" {
        let n = sorted.iter().filter(|o| fits(o, &keywords)).count();
        let number = NUMBERS.get(n).map(|s| s.to_string()).unwrap_or_else(|| n.to_string());
        let noun = keywords.first().cloned().unwrap_or_else(|| "objects".into());
        return format!("{number} {noun}");
    }
    if YES_NO.contains(&first) {
        let yes = !keywords.is_empty() && sorted.iter().any(|o| fits(o, &keywords));
        return if yes { "True" } else { "False" }.to_string();
    }
    if IDENTIFY.contains(&first) || all.iter().any(|w| w == "target") {
        if keywords.is_empty() {
            return "False".into();
        }
        return sorted
            .iter()
            .find(|o| fits(o, &keywords))
            .map(|o| o.label())
            .unwrap_or_else(|| "False".into());
    }
    "I cannot tell from the current view.".into()
}
