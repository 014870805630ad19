//! Compile a small pattern set and report every occurrence in a sentence.
//!
//! `cargo run --example compile_and_scan -- [input text]`

use bouma2::{Compiler, CostFunction, PatternSet};

fn main() -> bouma2::Result<()> {
    let words = ["herd", "herbal", "upper", "deeper", "error", "ferrarri"];
    let ps = PatternSet::new(words)?;
    let matcher = Compiler::new(CostFunction::unit()).compile(&ps)?;

    let text = std::env::args().nth(1).unwrap_or_else(|| "the upper herd made a deeper error in the ferrarri".into());
    let (found, counters) = matcher.scan_with_counters(text.as_bytes());
    for m in &found {
        println!("{:>4}  {}", m.start, words[m.pattern_id]);
    }
    println!(
        "{} pair probes, {} harvests, {} trie visits",
        counters.fast_path_probes, counters.harvest_count, counters.slow_path_node_visits
    );
    Ok(())
}
