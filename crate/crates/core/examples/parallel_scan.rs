//! Scan one large buffer with several threads and compare with a serial scan.

use std::time::Instant;

use bouma2::{Compiler, CostFunction, PatternSet};

fn main() -> bouma2::Result<()> {
    let words: Vec<String> = (0..500).map(|i| format!("token{i:04}")).collect();
    let ps = PatternSet::new(&words)?;
    let cm = Compiler::new(CostFunction::rare_in_strings()).compile(&ps)?;

    let mut input = Vec::new();
    for i in 0..400_000u32 {
        input.extend_from_slice(if i % 97 == 0 { words[(i as usize) % words.len()].as_bytes() } else { b"filler " });
    }

    let t = Instant::now();
    let (serial, _) = cm.scan_with_counters(&input);
    println!("serial:    {} matches in {:?}", serial.len(), t.elapsed());
    let threads = std::thread::available_parallelism().map_or(2, |n| n.get().max(2));
    let t = Instant::now();
    let (parallel, counters) = cm.scan_parallel(&input, threads);
    println!("{threads} threads: {} matches in {:?}", parallel.len(), t.elapsed());
    assert_eq!(serial, parallel);
    println!("{} probes, {} harvests", counters.fast_path_probes, counters.harvest_count);
    Ok(())
}
