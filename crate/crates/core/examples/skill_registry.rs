//! Registers extra skills and prints the listings the planner sees.

use minispec::lang::{parse_program, validate, ParseMode};
use minispec::skills::{default_registry, ArgType, SkillArg, SkillSet};

fn main() -> anyhow::Result<()> {
    let mut reg = default_registry();
    let land = reg.register_low("land", "Land at the current position", vec![], "land")?;
    println!("land -> {}", land.abbr);
    let hop = reg.register_low(
        "hop_forward",
        "Climb, move forward and descend",
        vec![SkillArg::new("distance", ArgType::Int)],
        "hop",
    )?;
    println!("hop_forward -> {}", hop.abbr);
    let patrol = reg.register_high("patrol", "Fly a square of a given side", "4{mf($1);tc(90)}")?;
    println!("patrol -> {} ({} args)", patrol.abbr, patrol.args.len());

    println!("\nlow-level:\n{}", reg.describe_for_prompt(SkillSet::Low));
    println!("\nhigh-level:\n{}", reg.describe_for_prompt(SkillSet::High));

    let program = parse_program("patrol(100);zz(1);mf(1,2)", ParseMode::Plan)?;
    println!("\ndiagnostics:");
    for d in validate(&program, &reg) {
        println!("  {d}");
    }
    Ok(())
}
