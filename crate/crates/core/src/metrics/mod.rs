//! Token counting, latency fitting and the verbose baseline language.

pub mod bench;
pub mod latency;
pub mod tokenizer;
pub mod verbose;

pub use bench::{
    fixture_token_pairs, render_table, rows_to_csv, run_bench, run_task, scan_token_pair, BenchConfig, BenchError, BenchRow,
    TokenPair,
};
pub use latency::{fit_latency, read_samples_csv, FitError, FitOptions, LatencyFit, LatencyModel, LatencySample};
pub use tokenizer::{count_tokens, HeuristicTokenizer, TokenCounter};
pub use verbose::{translate_verbose, VerboseError};
