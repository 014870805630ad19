//! Check the matcher against the naive and Aho-Corasick oracles on random data.
//!
//! `cargo run --release --example differential -- [trials]`

use bouma2::oracle::{ac_match, naive_match};
use bouma2::{Compiler, CostFunction, PatternSet};
use rand::{Rng, SeedableRng};

fn main() -> bouma2::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut scanned = 0usize;
    for trial in 0..trials {
        let alphabet = rng.gen_range(2..=6u8);
        let sym = |rng: &mut rand_chacha::ChaCha8Rng| b'a' + rng.gen_range(0..alphabet);
        let words: Vec<Vec<u8>> =
            (0..rng.gen_range(1..30)).map(|_| (0..rng.gen_range(3..10)).map(|_| sym(&mut rng)).collect()).collect();
        let input: Vec<u8> = (0..rng.gen_range(0..4000)).map(|_| sym(&mut rng)).collect();
        let ps = PatternSet::new(&words)?;
        let cm = Compiler::new(CostFunction::rare_in_strings()).compile(&ps)?;
        let got = cm.scan(&input);
        let want = naive_match(&ps, &input);
        if got != want || ac_match(&ps, &input) != want {
            eprintln!("trial {trial}: mismatch ({} vs {} matches)", got.len(), want.len());
            std::process::exit(1);
        }
        scanned += input.len();
    }
    println!("{trials} trials, {scanned} bytes scanned, all agree");
    Ok(())
}
