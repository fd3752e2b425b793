//! Runtime for MiniSpec, a compact plan language for LLM-driven drones.
//!
//! The pieces, bottom up:
//! - [`lang`]: lexer, incremental parser, printer and validator.
//! - [`skills`]: skill registry with abbreviations and the backend boundary.
//! - [`sim`]: deterministic drone and scene simulator.
//! - [`interp`]: batch and streaming executor.
//! - [`events`]: timestamped mission events.

pub mod assets;
pub mod controller;
pub mod events;
pub mod interp;
pub mod lang;
pub mod metrics;
pub mod sim;
pub mod skills;
