//! Compares plans that consult the probe skill with plans that guess the
//! target up front, and plans with and without replanning.

use minispec::metrics::{render_table, run_bench, BenchConfig};
use minispec::skills::default_registry;

fn main() -> anyhow::Result<()> {
    let reg = default_registry();
    for (variant, tasks) in [(None, vec![4, 5, 6, 7, 8, 9, 10]), (Some("no_probe"), vec![4, 5, 6, 7, 8]), (Some("no_replan"), vec![9, 10])] {
        let cfg = BenchConfig {
            tasks,
            modes: vec![true],
            variant: variant.map(str::to_string),
            ..BenchConfig::default()
        };
        print!("{}", render_table(&run_bench(&cfg, &reg)?));
        println!();
    }
    Ok(())
}
