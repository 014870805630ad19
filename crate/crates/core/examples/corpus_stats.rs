//! Collect pair statistics from a file (or a built-in sample) and print the commonest pairs.
//!
//! `cargo run --example corpus_stats -- [file]`

use bouma2::{StatsMode, TraceStats};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = match std::env::args().nth(1) {
        Some(path) => std::fs::read(path)?,
        None => b"It was the best of times, it was the worst of times, it was the age of wisdom".repeat(100),
    };
    for mode in [StatsMode::EvenAligned, StatsMode::Sliding] {
        let stats = TraceStats::collect(&data, mode);
        let mut top: Vec<_> = stats.iter().collect();
        top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        println!("{mode:?}: {} pairs, {} distinct", stats.total_pairs(), top.len());
        for (t, c) in top.iter().take(8) {
            println!("  {t:<6} {c:>6}  p={:.4}", stats.probability(*t)?);
        }
    }
    let json = TraceStats::collect(&data, StatsMode::EvenAligned).to_json();
    println!("\nserialized statistics: {} bytes of JSON", json.len());
    Ok(())
}
