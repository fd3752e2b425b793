//! Time and event plumbing between the executor, the parser thread and the
//! event sink.

use std::collections::VecDeque;
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::Duration;

use super::control::{MissionClock, RunControl};
use crate::events::{EventKind, EventSink};
use crate::lang::{condition_text, statement_text, ExecutableUnit, ParseError, UnitKind};

/// What the executor gets when it asks for the next streamed unit.
#[derive(Debug, Clone, PartialEq)]
pub enum Feed {
    Unit(ExecutableUnit),
    End,
    Failed(ParseError),
    Aborted,
}

/// Clock, sink and (when streaming) unit source for one run.
pub trait RunIo {
    fn now(&self) -> Duration;
    /// Moves the clock forward to `t`, emitting anything due on the way.
    fn advance_to(&mut self, t: Duration);
    fn emit(&mut self, kind: EventKind);
    fn next_unit(&mut self, ctl: &RunControl) -> Feed;

    fn advance(&mut self, d: Duration) {
        let t = self.now() + d;
        self.advance_to(t);
    }
}

/// Mission clock plus event sink; outlives individual rounds.
pub struct Timeline<'a> {
    clock: MissionClock,
    sink: &'a mut dyn EventSink,
    last: Duration,
}

impl<'a> Timeline<'a> {
    pub fn new(clock: MissionClock, sink: &'a mut dyn EventSink) -> Self {
        Self {
            clock,
            sink,
            last: Duration::ZERO,
        }
    }

    pub fn clock(&self) -> &MissionClock {
        &self.clock
    }

    /// Emits at `at`, clamped so timestamps never go backwards.
    pub fn emit_at(&mut self, at: Duration, kind: EventKind) {
        self.last = self.last.max(at);
        self.sink.emit(self.last, kind);
    }
}

impl RunIo for Timeline<'_> {
    fn now(&self) -> Duration {
        self.clock.now()
    }

    fn advance_to(&mut self, t: Duration) {
        self.clock.wait_until(t);
    }

    fn emit(&mut self, kind: EventKind) {
        let now = self.clock.now();
        self.emit_at(now, kind);
    }

    fn next_unit(&mut self, _ctl: &RunControl) -> Feed {
        Feed::End
    }
}

/// Message from the parsing thread, stamped with the time its last token
/// arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct ProducerMsg {
    pub at: Duration,
    pub body: ProducerBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProducerBody {
    Tokens { text: String, count: usize, total: usize },
    Unit(ExecutableUnit),
    Failed(ParseError),
    End,
}

pub fn unit_label(kind: &UnitKind) -> (&'static str, String) {
    match kind {
        UnitKind::Statement(s) => ("statement", statement_text(s)),
        UnitKind::LoopHeader { count } => ("loop", format!("{count}{{")),
        UnitKind::IfHeader { cond } => ("if", format!("?{}{{", condition_text(cond))),
        UnitKind::BodyClose => ("close", "}".to_string()),
    }
}

/// Merges producer messages into the timeline by timestamp.
///
/// With a simulated clock, nothing at time t is emitted before every
/// producer message stamped at or before t, so the event order is
/// deterministic. With a wall clock messages are taken as they arrive.
pub struct StreamIo<'t, 'a> {
    timeline: &'t mut Timeline<'a>,
    rx: Receiver<ProducerMsg>,
    stash: Option<ProducerMsg>,
    ready: VecDeque<Feed>,
    round: u32,
    finished: bool,
}

impl<'t, 'a> StreamIo<'t, 'a> {
    pub fn new(timeline: &'t mut Timeline<'a>, rx: Receiver<ProducerMsg>, round: u32) -> Self {
        Self {
            timeline,
            rx,
            stash: None,
            ready: VecDeque::new(),
            round,
            finished: false,
        }
    }

    /// Blocks for the next message in simulated mode; polls in wall mode.
    fn peek(&mut self, wait: Option<Duration>) -> Option<&ProducerMsg> {
        if self.stash.is_none() && !self.finished {
            let msg = if self.timeline.clock.is_sim() {
                self.rx.recv().ok()
            } else {
                match self.rx.recv_timeout(wait.unwrap_or(Duration::ZERO)) {
                    Ok(m) => Some(m),
                    Err(RecvTimeoutError::Timeout) => return None,
                    Err(RecvTimeoutError::Disconnected) => None,
                }
            };
            match msg {
                Some(m) => self.stash = Some(m),
                // Producer gone without a terminator: treat as end of text.
                None => {
                    self.finished = true;
                    self.ready.push_back(Feed::End);
                }
            }
        }
        self.stash.as_ref()
    }

    fn process(&mut self, msg: ProducerMsg) {
        let at = msg.at;
        match msg.body {
            ProducerBody::Tokens { text, count, total } => self.timeline.emit_at(
                at,
                EventKind::TokenReceived {
                    round: self.round,
                    text,
                    count,
                    total,
                },
            ),
            ProducerBody::Unit(u) => {
                let (unit, text) = unit_label(&u.kind);
                self.timeline.emit_at(
                    at,
                    EventKind::UnitParsed {
                        round: self.round,
                        unit: unit.to_string(),
                        text,
                        span: [u.span.start, u.span.end],
                    },
                );
                self.ready.push_back(Feed::Unit(u));
            }
            ProducerBody::Failed(e) => {
                self.finished = true;
                self.ready.push_back(Feed::Failed(e));
            }
            ProducerBody::End => {
                self.finished = true;
                self.ready.push_back(Feed::End);
            }
        }
    }

    /// Consumes the whole response for batch execution: token batches are
    /// emitted as they arrive, parsed units and parse failures are dropped.
    /// Returns once the producer is done.
    pub fn drain(&mut self) {
        let sim = self.timeline.clock.is_sim();
        while !self.finished {
            let Some(m) = self.peek(Some(Duration::from_millis(20))).cloned() else {
                continue;
            };
            self.stash = None;
            if sim {
                self.timeline.clock.wait_until(m.at);
            }
            match m.body {
                // A parse failure is reported by the caller's own parse;
                // keep reading until the producer hangs up.
                ProducerBody::Unit(_) | ProducerBody::Failed(_) => {}
                ProducerBody::End => self.finished = true,
                body => self.process(ProducerMsg { at: m.at, body }),
            }
        }
        self.ready.clear();
    }

    /// Emits every pending message stamped at or before `t`, moving the
    /// clock to each message's time.
    fn pull_until(&mut self, t: Duration) {
        let sim = self.timeline.clock.is_sim();
        while let Some(m) = self.peek(None) {
            if sim && m.at > t {
                break;
            }
            let m = self.stash.take().expect("peeked");
            if sim {
                self.timeline.clock.wait_until(m.at);
            }
            self.process(m);
        }
    }
}

impl RunIo for StreamIo<'_, '_> {
    fn now(&self) -> Duration {
        self.timeline.clock.now()
    }

    fn advance_to(&mut self, t: Duration) {
        self.pull_until(t);
        self.timeline.clock.wait_until(t);
    }

    fn emit(&mut self, kind: EventKind) {
        let now = self.now();
        self.pull_until(now);
        self.timeline.emit(kind);
    }

    fn next_unit(&mut self, ctl: &RunControl) -> Feed {
        loop {
            if ctl.is_aborted() {
                return Feed::Aborted;
            }
            if let Some(f) = self.ready.pop_front() {
                return f;
            }
            if self.finished {
                return Feed::End;
            }
            let sim = self.timeline.clock.is_sim();
            let wait = Some(Duration::from_millis(20));
            if let Some(at) = self.peek(wait).map(|m| m.at) {
                let m = self.stash.take().expect("peeked");
                if sim {
                    // The executor is idle until the next message arrives.
                    self.timeline.clock.wait_until(at);
                }
                self.process(m);
            }
        }
    }
}
