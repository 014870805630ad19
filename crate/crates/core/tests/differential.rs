mod common;

use std::time::Duration;

use bouma2::oracle::{ac_match, naive_match};
use bouma2::{Compiler, CostFunction, PatternSet, PreferredOffsets, Solver, StatsMode, TraceStats};
use proptest::prelude::*;

fn words(alphabet: Vec<u8>) -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(prop::sample::select(alphabet), 3..12), 1..25)
}

// Statistics are taken over the input followed by the patterns, so short inputs still carry pairs.
fn compiler(kind: u8, input: &[u8], ws: &[Vec<u8>]) -> Compiler {
    let sample: Vec<u8> = input.iter().chain(ws.iter().flatten()).copied().collect();
    let cost = match kind % 3 {
        0 => CostFunction::unit(),
        1 => CostFunction::rare_in_strings(),
        _ => CostFunction::rare_in_input(TraceStats::collect(&sample, StatsMode::Sliding)).with_smoothing(true),
    };
    Compiler::new(cost).time_limit(Duration::from_millis(50))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn small_alphabet(ws in words(b"ab".to_vec()), input in prop::collection::vec(prop::sample::select(b"ab".to_vec()), 0..600), kind in 0u8..3) {
        let ps = PatternSet::new(&ws).unwrap();
        let cm = compiler(kind, &input, &ws).compile(&ps).unwrap();
        let want = naive_match(&ps, &input);
        prop_assert_eq!(&cm.scan(&input), &want);
        prop_assert_eq!(&ac_match(&ps, &input), &want);
    }

    #[test]
    fn planted_at_every_offset(ws in words(b"xyz".to_vec()), pad in prop::collection::vec(prop::sample::select(b"xyz".to_vec()), 0..40), kind in 0u8..3) {
        let ps = PatternSet::new(&ws).unwrap();
        let cm = compiler(kind, &pad, &ws).compile(&ps).unwrap();
        for w in &ws {
            for cut in 0..=pad.len() {
                let mut input = pad[..cut].to_vec();
                input.extend_from_slice(w);
                input.extend_from_slice(&pad[cut..]);
                let got = cm.scan(&input);
                prop_assert_eq!(&got, &naive_match(&ps, &input));
                prop_assert!(got.iter().any(|m| m.start == cut && &input[m.start..m.end()] == &w[..]));
            }
        }
    }

    #[test]
    fn forced_scoring_orders(ws in words(b"abc".to_vec()), input in prop::collection::vec(prop::sample::select(b"abc".to_vec()), 0..300), prefs in prop::collection::vec(-12i32..12, 0..6)) {
        let ps = PatternSet::new(&ws).unwrap();
        let cm = Compiler::new(CostFunction::unit()).solver(Solver::Greedy).scoring(PreferredOffsets(prefs)).compile(&ps).unwrap();
        prop_assert_eq!(cm.scan(&input), naive_match(&ps, &input));
    }

    #[test]
    fn parallel_scan(ws in words((0..=255).collect()), seed in any::<u64>(), threads in 2usize..6) {
        use rand::prelude::*;
        let ps = PatternSet::new(&ws).unwrap();
        let mut rng = common::rng(seed);
        let mut input = common::random_bytes(&mut rng, 20_000, &(0..=255).collect::<Vec<u8>>());
        common::plant(&mut rng, &mut input, &ws, 500);
        let cm = compiler(rng.gen(), &input, &ws).compile(&ps).unwrap();
        let (par, pc) = cm.scan_parallel(&input, threads);
        let (ser, sc) = cm.scan_with_counters(&input);
        prop_assert_eq!(&par, &ser);
        prop_assert_eq!(pc.fast_path_probes, sc.fast_path_probes);
        prop_assert_eq!(par, naive_match(&ps, &input));
    }
}
