//! Plan interpreter.
//!
//! [`Executor`] runs either a finished [`Program`](crate::lang::Program) or a
//! stream of units from a parser thread. Both produce the same trace for the
//! same plan; streaming only changes when execution can start.

pub mod budget;
pub mod coerce;
pub mod control;
pub mod exec;
pub mod io;
pub mod stream;
pub mod trace;

pub use budget::step_bound;
pub use coerce::{compare, values_equal, TypeMismatch};
pub use control::{MissionClock, Policy, RunControl};
pub use exec::{ExecOutcome, Executor, ReplanReason, RunResult, RuntimeError, DEFAULT_STEP_BUDGET};
pub use io::{unit_label, Feed, ProducerBody, ProducerMsg, RunIo, StreamIo, Timeline};
pub use stream::{paced_tokens, produce, spawn_producer, ProducerSummary, TimedToken, TOKEN_BATCH};
pub use trace::{ExecutionTrace, TraceRecord, TraceResult};
