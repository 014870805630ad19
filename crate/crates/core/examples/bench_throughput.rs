//! Throughput of the three cost variants against Aho-Corasick on Markov text.
//!
//! `cargo run --release --example bench_throughput -- [megabytes]`

use bouma2::cli::{run_bench, BenchOptions};
use bouma2::PatternSet;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};

fn main() -> bouma2::Result<()> {
    let mb: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);

    // Each byte has 16 successors with geometrically falling weights.
    let succ: Vec<Vec<u8>> = (0..256).map(|_| (0..16).map(|_| rng.gen()).collect()).collect();
    let weights = WeightedIndex::new((0..16).map(|i| 0.7f64.powi(i))).unwrap();
    let mut input = Vec::with_capacity(mb << 20);
    let mut b = 0u8;
    while input.len() < mb << 20 {
        b = succ[b as usize][weights.sample(&mut rng)];
        input.push(b);
    }

    let words: Vec<Vec<u8>> = (0..1000)
        .map(|_| {
            let at = rng.gen_range(0..input.len() - 16);
            input[at..at + rng.gen_range(4..16)].to_vec()
        })
        .collect();
    let ps = PatternSet::new(&words)?;
    let opts = BenchOptions { time_limit: std::time::Duration::from_secs(5), ..Default::default() };
    let result = run_bench(&ps, &input, &opts)?;
    print!("{}", result.render());
    Ok(())
}
