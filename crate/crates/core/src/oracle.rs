//! Reference matchers: a direct substring scan and a textbook Aho-Corasick
//! automaton (goto rows, failure links, merged outputs).

use std::collections::VecDeque;

use crate::matcher::Match;
use crate::pattern::PatternSet;

/// Compares every pattern at every input offset. Patterns are bucketed by
/// first byte so only plausible candidates are compared.
#[derive(Clone, Debug)]
pub struct NaiveMatcher {
    patterns: PatternSet,
    by_first: Vec<Vec<u32>>,
}

impl NaiveMatcher {
    pub fn new(ps: &PatternSet) -> Self {
        let mut by_first = vec![Vec::new(); 256];
        for (i, p) in ps.patterns().iter().enumerate() {
            by_first[p.bytes[0] as usize].push(i as u32);
        }
        NaiveMatcher { patterns: ps.clone(), by_first }
    }

    /// Calls `f(pattern_index, start)` for every occurrence, by ascending start.
    pub fn for_each_match(&self, input: &[u8], mut f: impl FnMut(usize, usize)) {
        for (start, &b) in input.iter().enumerate() {
            for &p in &self.by_first[b as usize] {
                if input[start..].starts_with(&self.patterns.get(p as usize).bytes) {
                    f(p as usize, start);
                }
            }
        }
    }

    /// All occurrences, fanned out to duplicate ids, sorted by `(start, pattern_id)`.
    pub fn find_all(&self, input: &[u8]) -> Vec<Match> {
        let mut out = Vec::new();
        self.for_each_match(input, |p, start| push_fanned(&self.patterns, &mut out, p, start));
        out.sort_unstable();
        out
    }
}

/// One-shot naive scan.
pub fn naive_match(ps: &PatternSet, input: &[u8]) -> Vec<Match> {
    NaiveMatcher::new(ps).find_all(input)
}

const FAIL_ROOT: u32 = 0;
const NO_STATE: u32 = u32::MAX;

/// Aho-Corasick with a dense 256-entry goto row per state and failure links
/// followed at match time.
#[derive(Clone, Debug)]
pub struct AcMatcher {
    patterns: PatternSet,
    goto: Vec<[u32; 256]>,
    fail: Vec<u32>,
    out_start: Vec<u32>,
    out_pool: Vec<u32>,
}

impl AcMatcher {
    pub fn new(ps: &PatternSet) -> Self {
        let mut goto: Vec<[u32; 256]> = vec![[NO_STATE; 256]];
        let mut own: Vec<Vec<u32>> = vec![Vec::new()];
        for (i, p) in ps.patterns().iter().enumerate() {
            let mut s = 0usize;
            for &b in &p.bytes {
                let next = goto[s][b as usize];
                s = if next == NO_STATE {
                    goto.push([NO_STATE; 256]);
                    own.push(Vec::new());
                    let id = goto.len() - 1;
                    goto[s][b as usize] = id as u32;
                    id
                } else {
                    next as usize
                };
            }
            own[s].push(i as u32);
        }

        let n = goto.len();
        let mut fail = vec![FAIL_ROOT; n];
        let mut outputs: Vec<Vec<u32>> = own;
        let mut queue = VecDeque::new();
        for b in 0..256 {
            let c = goto[0][b];
            if c == NO_STATE {
                goto[0][b] = 0;
            } else {
                queue.push_back(c as usize);
            }
        }
        while let Some(s) = queue.pop_front() {
            for b in 0..256 {
                let c = goto[s][b];
                if c == NO_STATE {
                    continue;
                }
                let c = c as usize;
                let mut f = fail[s] as usize;
                while goto[f][b] == NO_STATE {
                    f = fail[f] as usize;
                }
                fail[c] = goto[f][b];
                let inherited = outputs[fail[c] as usize].clone();
                outputs[c].extend(inherited);
                queue.push_back(c);
            }
        }

        let mut out_start = Vec::with_capacity(n + 1);
        let mut out_pool = Vec::new();
        for o in &outputs {
            out_start.push(out_pool.len() as u32);
            out_pool.extend_from_slice(o);
        }
        out_start.push(out_pool.len() as u32);
        AcMatcher { patterns: ps.clone(), goto, fail, out_start, out_pool }
    }

    pub fn state_count(&self) -> usize {
        self.goto.len()
    }

    /// Calls `f(pattern_index, end)` for every occurrence; `end` is exclusive.
    pub fn for_each_match(&self, input: &[u8], mut f: impl FnMut(usize, usize)) {
        let mut s = 0usize;
        for (i, &b) in input.iter().enumerate() {
            loop {
                let next = self.goto[s][b as usize];
                if next != NO_STATE {
                    s = next as usize;
                    break;
                }
                s = self.fail[s] as usize;
            }
            let (lo, hi) = (self.out_start[s] as usize, self.out_start[s + 1] as usize);
            for &p in &self.out_pool[lo..hi] {
                f(p as usize, i + 1);
            }
        }
    }

    /// Number of occurrences without materialising reports.
    pub fn count(&self, input: &[u8]) -> usize {
        let mut n = 0;
        self.for_each_match(input, |_, _| n += 1);
        n
    }

    /// All occurrences, fanned out to duplicate ids, sorted by `(start, pattern_id)`.
    pub fn find_all(&self, input: &[u8]) -> Vec<Match> {
        let mut out = Vec::new();
        self.for_each_match(input, |p, end| {
            let start = end - self.patterns.get(p).len();
            push_fanned(&self.patterns, &mut out, p, start);
        });
        out.sort_unstable();
        out
    }

    /// Bytes held by the automaton tables.
    pub fn memory_bytes(&self) -> usize {
        self.goto.len() * std::mem::size_of::<[u32; 256]>()
            + self.fail.len() * 4
            + self.out_start.len() * 4
            + self.out_pool.len() * 4
    }
}

/// One-shot Aho-Corasick scan.
pub fn ac_match(ps: &PatternSet, input: &[u8]) -> Vec<Match> {
    AcMatcher::new(ps).find_all(input)
}

pub(crate) fn push_fanned(ps: &PatternSet, out: &mut Vec<Match>, pattern: usize, start: usize) {
    let len = ps.get(pattern).len();
    for &id in ps.ids(pattern) {
        out.push(Match { start, len, pattern_id: id });
    }
}
