#![allow(dead_code)]

use bouma2::Match;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE: [&str; 6] = ["herd", "herbal", "upper", "deeper", "error", "ferrarri"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform integer in `lo..=hi`.
pub fn log_uniform(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    let x = rng.gen_range((lo as f64).ln()..=(hi as f64).ln()).exp();
    (x.round() as usize).clamp(lo, hi)
}

pub fn random_bytes(rng: &mut impl Rng, n: usize, alphabet: &[u8]) -> Vec<u8> {
    if alphabet.len() == 256 {
        let mut v = vec![0u8; n];
        rng.fill_bytes(&mut v);
        v
    } else {
        (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
    }
}

/// `count` patterns over `alphabet`; some are substrings or copies of others.
pub fn random_patterns(rng: &mut impl Rng, count: usize, lens: std::ops::RangeInclusive<usize>, alphabet: &[u8]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::with_capacity(count);
    for _ in 0..count {
        let roll = rng.gen_range(0..20);
        if roll == 0 && !out.is_empty() {
            let p = out[rng.gen_range(0..out.len())].clone();
            out.push(p);
        } else if roll == 1 && out.iter().any(|p| p.len() > 3) {
            let src = loop {
                let p = &out[rng.gen_range(0..out.len())];
                if p.len() > 3 {
                    break p.clone();
                }
            };
            let len = rng.gen_range(3..src.len());
            let at = rng.gen_range(0..=src.len() - len);
            out.push(src[at..at + len].to_vec());
        } else {
            let len = rng.gen_range(lens.clone());
            out.push(random_bytes(rng, len, alphabet));
        }
    }
    out
}

/// Copies patterns into `input` at random offsets of both parities and at
/// both buffer edges.
pub fn plant(rng: &mut impl Rng, input: &mut [u8], patterns: &[Vec<u8>], count: usize) {
    let n = input.len();
    let put = |input: &mut [u8], p: &[u8], at: usize| {
        if at + p.len() <= n {
            input[at..at + p.len()].copy_from_slice(p);
        }
    };
    for k in 0..count {
        let p = &patterns[rng.gen_range(0..patterns.len())];
        if p.len() > n {
            continue;
        }
        let at = match k % 8 {
            0 => 0,
            1 => 1,
            2 => n - p.len(),
            3 => n.saturating_sub(p.len() + 1),
            _ => rng.gen_range(0..=n - p.len()),
        };
        put(input, p, at);
    }
}

/// Back-to-back pattern copies, each shifted by a random 0 or 1 byte gap.
pub fn concatenated(rng: &mut impl Rng, patterns: &[Vec<u8>], n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(n + 64);
    while out.len() < n {
        out.extend_from_slice(&patterns[rng.gen_range(0..patterns.len())]);
        if rng.gen_bool(0.5) {
            out.push(rng.gen());
        }
    }
    out.truncate(n);
    out
}

/// First-order Markov source over all bytes: each byte has 16 successors with
/// geometric weights.
pub struct Markov {
    next: Vec<(Vec<u8>, WeightedIndex<f64>)>,
}

impl Markov {
    pub fn new(rng: &mut impl Rng) -> Self {
        let weights: Vec<f64> = (0..16).map(|i| 0.7f64.powi(i)).collect();
        let next = (0..256)
            .map(|_| {
                let succ: Vec<u8> = (0..16).map(|_| rng.gen()).collect();
                (succ, WeightedIndex::new(&weights).unwrap())
            })
            .collect();
        Markov { next }
    }

    pub fn generate(&self, rng: &mut impl Rng, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        let mut cur: u8 = rng.gen();
        for _ in 0..n {
            let (succ, dist) = &self.next[cur as usize];
            cur = succ[dist.sample(rng)];
            out.push(cur);
        }
        out
    }
}

/// Sorted copy, for multiset comparison.
pub fn sorted(mut v: Vec<Match>) -> Vec<Match> {
    v.sort_unstable();
    v
}

pub fn first_diff(a: &[Match], b: &[Match]) -> String {
    let i = a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
    format!("lengths {} vs {}, first difference at {i}: {:?} vs {:?}", a.len(), b.len(), a.get(i), b.get(i))
}
