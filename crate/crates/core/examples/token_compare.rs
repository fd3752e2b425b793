//! Token cost of MiniSpec plans versus their verbose twins.

use minispec::controller::FixtureSet;
use minispec::metrics::{fixture_token_pairs, scan_token_pair, HeuristicTokenizer};

fn main() {
    let scan = scan_token_pair(&HeuristicTokenizer);
    println!("scan skill: minispec {} vs verbose {} tokens", scan.minispec, scan.verbose);
    let pairs = fixture_token_pairs(&FixtureSet::bundled(), &HeuristicTokenizer);
    for p in &pairs {
        println!("{:<8} {:>4} {:>4} {:>5.1}%", p.label, p.minispec, p.verbose, p.reduction() * 100.0);
    }
    let mean = pairs.iter().map(|p| p.reduction()).sum::<f64>() / pairs.len() as f64;
    println!("mean reduction {:.1}%", mean * 100.0);
}
