//! Feeds a plan to the incremental parser a few characters at a time and
//! prints each executable unit the moment it completes.

use minispec::interp::unit_label;
use minispec::lang::{IncrementalParser, ParseMode};

fn main() {
    let plan = "_1=iv('apple');?_1==True{g('apple');->True}8{?iv('apple')==True{g('apple');->True}tc(45)}l('not found')";
    let mut parser = IncrementalParser::new(ParseMode::Plan);
    let chars: Vec<char> = plan.chars().collect();
    for chunk in chars.chunks(5) {
        let chunk: String = chunk.iter().collect();
        let units = parser.feed(&chunk).expect("plan is valid");
        for u in units {
            let (kind, text) = unit_label(&u.kind);
            println!("after {:>3} bytes: {kind:<9} {text}", parser.fed());
        }
    }
    for u in parser.finish().expect("plan is complete") {
        let (kind, text) = unit_label(&u.kind);
        println!("at end:          {kind:<9} {text}");
    }

    let mut broken = IncrementalParser::new(ParseMode::Plan);
    let err = broken
        .feed("tc(90);mf(")
        .and_then(|_| broken.feed("10;"))
        .expect_err("unclosed call");
    println!("error at byte {}: {err}", err.position());
}
