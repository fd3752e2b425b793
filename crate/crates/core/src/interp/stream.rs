//! Parser side of streamed execution.

use std::sync::mpsc::{self, Receiver, Sender};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use super::io::{ProducerBody, ProducerMsg};
use crate::lang::{IncrementalParser, ParseError, ParseMode};

/// Token events are batched and flushed every this many tokens, whenever a
/// unit completes, and at end of text.
pub const TOKEN_BATCH: usize = 5;

/// One generated token and when it arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedToken {
    pub at: Duration,
    pub text: String,
}

impl TimedToken {
    pub fn new(at: Duration, text: impl Into<String>) -> Self {
        Self { at, text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProducerSummary {
    /// Every token received, including ones after a parse error.
    pub tokens: usize,
    pub text: String,
    pub last_at: Duration,
    pub error: Option<ParseError>,
}

/// Feeds tokens into an incremental parser and forwards units as they
/// complete. Keeps draining tokens after an error or a hung-up consumer so
/// the summary counts the full response.
pub fn produce<I>(tokens: I, mode: ParseMode, tx: &Sender<ProducerMsg>) -> ProducerSummary
where
    I: IntoIterator<Item = TimedToken>,
{
    let mut parser = IncrementalParser::new(mode);
    let mut summary = ProducerSummary::default();
    let mut batch = String::new();
    let mut batch_n = 0;
    let mut failed = false;
    let send = |at: Duration, body: ProducerBody| {
        let _ = tx.send(ProducerMsg { at, body });
    };
    let flush = |batch: &mut String, batch_n: &mut usize, total: usize, at: Duration| {
        if *batch_n > 0 {
            send(
                at,
                ProducerBody::Tokens {
                    text: std::mem::take(batch),
                    count: *batch_n,
                    total,
                },
            );
            *batch_n = 0;
        }
    };
    for tok in tokens {
        summary.tokens += 1;
        summary.text.push_str(&tok.text);
        summary.last_at = summary.last_at.max(tok.at);
        let at = summary.last_at;
        batch.push_str(&tok.text);
        batch_n += 1;
        if failed {
            if batch_n >= TOKEN_BATCH {
                flush(&mut batch, &mut batch_n, summary.tokens, at);
            }
            continue;
        }
        match parser.feed(&tok.text) {
            Ok(units) => {
                if batch_n >= TOKEN_BATCH || !units.is_empty() {
                    flush(&mut batch, &mut batch_n, summary.tokens, at);
                }
                for u in units {
                    send(at, ProducerBody::Unit(u));
                }
            }
            Err(e) => {
                flush(&mut batch, &mut batch_n, summary.tokens, at);
                send(at, ProducerBody::Failed(e.clone()));
                summary.error = Some(e);
                failed = true;
            }
        }
    }
    let at = summary.last_at;
    flush(&mut batch, &mut batch_n, summary.tokens, at);
    if !failed {
        match parser.finish() {
            Ok(units) => {
                for u in units {
                    send(at, ProducerBody::Unit(u));
                }
                send(at, ProducerBody::End);
            }
            Err(e) => {
                send(at, ProducerBody::Failed(e.clone()));
                summary.error = Some(e);
            }
        }
    }
    summary
}

/// Runs [`produce`] on its own thread.
pub fn spawn_producer<I>(tokens: I, mode: ParseMode) -> (Receiver<ProducerMsg>, JoinHandle<ProducerSummary>)
where
    I: IntoIterator<Item = TimedToken> + Send + 'static,
    I::IntoIter: Send,
{
    let (tx, rx) = mpsc::channel();
    let handle = thread::spawn(move || produce(tokens, mode, &tx));
    (rx, handle)
}

/// Splits text into tokens arriving at a fixed interval after `start`.
pub fn paced_tokens(pieces: &[String], start: Duration, per_token: Duration) -> Vec<TimedToken> {
    pieces
        .iter()
        .enumerate()
        .map(|(i, p)| TimedToken::new(start + per_token * (i as u32 + 1), p.clone()))
        .collect()
}
