//! Command-line front end and mission service for the MiniSpec runtime.

pub mod cli;
pub mod planner;
pub mod service;
