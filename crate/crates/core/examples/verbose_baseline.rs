//! Runs the verbose baseline plans (batch only) next to their MiniSpec twins.

use minispec::controller::PlanLanguage;
use minispec::metrics::{render_table, run_bench, BenchConfig};
use minispec::skills::default_registry;

fn main() -> anyhow::Result<()> {
    let reg = default_registry();
    for language in [PlanLanguage::MiniSpec, PlanLanguage::Verbose] {
        let cfg = BenchConfig {
            language,
            ..BenchConfig::default()
        };
        print!("{}", render_table(&run_bench(&cfg, &reg)?));
    }
    Ok(())
}
