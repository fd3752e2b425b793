//! Runs every bundled task in both modes and prints the result table.

use minispec::metrics::{render_table, run_bench, BenchConfig};
use minispec::skills::default_registry;

fn main() -> anyhow::Result<()> {
    let rows = run_bench(&BenchConfig::default(), &default_registry())?;
    print!("{}", render_table(&rows));
    Ok(())
}
