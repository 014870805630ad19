//! The compiled matcher: a 2-byte dispatch table over even input offsets
//! (fast path) feeding per-motif mangled-trie walks (slow path).

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::Serialize;

use crate::assign::{Assignment, Mapping};
use crate::error::{Error, Result};
use crate::oracle::push_fanned;
use crate::pattern::{occ, Parity, PatternSet, Trace};
use crate::trie::{build_mangled_trie_with, MangledTrie, NodeBody, ScoringStrategy, WalkStats};

const NO_TRIE: u32 = u32::MAX;
const PAIRS: usize = 1 << 16;

/// One reported occurrence. Ordered by `(start, pattern_id)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Match {
    pub start: usize,
    /// Index of the pattern in the original input list.
    pub pattern_id: usize,
    pub len: usize,
}

impl Match {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// A motif found at an even input offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Harvest {
    pub pos: usize,
    pub motif: Trace,
}

/// Work counters for one scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MatchCounters {
    /// Even offsets with a complete pair.
    pub fast_path_probes: u64,
    pub harvest_count: u64,
    /// States and terminals visited.
    pub slow_path_node_visits: u64,
    pub fragment_bytes_compared: u64,
    pub max_node_visits_per_harvest: u64,
    /// Duplicate `(pattern, start)` reports removed; expected to stay 0.
    pub dedup_dropped: u64,
    pub reports: u64,
}

impl MatchCounters {
    fn merge(&mut self, o: &MatchCounters) {
        self.fast_path_probes += o.fast_path_probes;
        self.harvest_count += o.harvest_count;
        self.slow_path_node_visits += o.slow_path_node_visits;
        self.fragment_bytes_compared += o.fragment_bytes_compared;
        self.max_node_visits_per_harvest = self.max_node_visits_per_harvest.max(o.max_node_visits_per_harvest);
        self.dedup_dropped += o.dedup_dropped;
        self.reports += o.reports;
    }

    /// Observed motif probability: harvests per probed even offset.
    pub fn motif_probability(&self) -> f64 {
        if self.fast_path_probes == 0 {
            0.0
        } else {
            self.harvest_count as f64 / self.fast_path_probes as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrieMemory {
    pub motif: String,
    pub entries: usize,
    pub nodes: usize,
    pub node_bytes: usize,
    pub fragment_bytes: usize,
    pub max_depth: usize,
}

/// Bytes held by the match structures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemoryReport {
    /// Dispatch table plus its prefilter bitmap; fixed regardless of occupancy.
    pub dispatch_bytes: usize,
    pub occupied_slots: usize,
    pub tries: Vec<TrieMemory>,
    pub trie_bytes: usize,
    pub total_bytes: usize,
}

#[derive(Clone, Debug)]
pub struct CompiledMatcher {
    patterns: PatternSet,
    mappings: Vec<Mapping>,
    tries: Vec<MangledTrie>,
    dispatch: Box<[u32]>,
    bitmap: Box<[u64]>,
}

impl CompiledMatcher {
    /// Builds one trie per non-empty resolve set and assembles the matcher.
    pub fn from_assignment(ps: &PatternSet, assignment: &Assignment, scoring: &dyn ScoringStrategy) -> Result<Self> {
        let tries = assignment.resolve_sets.values().map(|rs| build_mangled_trie_with(ps, rs, scoring)).collect();
        Self::new(ps.clone(), assignment.mappings.clone(), tries)
    }

    /// Assembles a matcher from its parts after checking them for consistency.
    pub fn new(patterns: PatternSet, mappings: Vec<Mapping>, tries: Vec<MangledTrie>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InconsistentPlan(msg));
        if mappings.len() != 2 * patterns.len() {
            return bad(format!("{} mappings for {} patterns", mappings.len(), patterns.len()));
        }
        let mut dispatch = vec![NO_TRIE; PAIRS].into_boxed_slice();
        let mut bitmap = vec![0u64; PAIRS / 64].into_boxed_slice();
        for (i, t) in tries.iter().enumerate() {
            let key = t.motif().key() as usize;
            if dispatch[key] != NO_TRIE {
                return bad(format!("two tries for motif {}", t.motif()));
            }
            dispatch[key] = i as u32;
            bitmap[key >> 6] |= 1 << (key & 63);
        }
        let mut expected: BTreeMap<Trace, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for (i, m) in mappings.iter().enumerate() {
            if m.pattern != i / 2 || m.parity.index() != i % 2 {
                return bad(format!("mapping {i} is out of order"));
            }
            if m.pattern >= patterns.len() || !occ(&patterns.get(m.pattern).bytes, m.motif, m.anchor) {
                return bad(format!("mapping {i} does not point at its motif"));
            }
            if Parity::of(m.anchor) != m.parity {
                return bad(format!("mapping {i} has the wrong parity"));
            }
            if dispatch[m.motif.key() as usize] == NO_TRIE {
                return bad(format!("mapping {i} references missing trie {}", m.motif));
            }
            expected.entry(m.motif).or_default().insert((m.pattern, m.anchor));
        }
        for t in &tries {
            let have: BTreeSet<(usize, usize)> = t.entries().iter().map(|e| (e.pattern, e.anchor)).collect();
            if have.len() != t.entries().len() || expected.get(&t.motif()) != Some(&have) {
                return bad(format!("trie {} does not match its mappings", t.motif()));
            }
        }
        Ok(CompiledMatcher { patterns, mappings, tries, dispatch, bitmap })
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    pub fn tries(&self) -> &[MangledTrie] {
        &self.tries
    }

    pub fn trie(&self, motif: Trace) -> Option<&MangledTrie> {
        self.trie_index(motif).map(|i| &self.tries[i as usize])
    }

    /// Motifs with an occupied dispatch slot, ascending.
    pub fn motifs(&self) -> Vec<Trace> {
        let mut m: Vec<Trace> = self.tries.iter().map(MangledTrie::motif).collect();
        m.sort();
        m
    }

    /// Longest pattern.
    pub fn max_len(&self) -> usize {
        self.patterns.max_len()
    }

    /// Per-harvest probe bound, `2 * (max_len - 2)`.
    pub fn visit_bound(&self) -> u64 {
        2 * (self.max_len() as u64 - 2)
    }

    #[inline]
    fn trie_index(&self, motif: Trace) -> Option<u32> {
        let t = self.dispatch[motif.key() as usize];
        (t != NO_TRIE).then_some(t)
    }

    /// Visits even offsets `i` in `range` with `i + 1 < input.len()`; returns
    /// the number of offsets probed.
    #[inline]
    fn harvest_range(&self, input: &[u8], range: Range<usize>, mut f: impl FnMut(usize, u32)) -> u64 {
        let from = range.start + (range.start & 1);
        let to = (range.end + (range.end & 1)).min(input.len());
        if from >= to {
            return 0;
        }
        let window = &input[from..to];
        let bitmap = &self.bitmap[..];
        let mut probes = 0u64;
        for (k, pair) in window.chunks_exact(2).enumerate() {
            let key = (pair[0] as usize) << 8 | pair[1] as usize;
            if bitmap[key >> 6] >> (key & 63) & 1 != 0 {
                f(from + 2 * k, self.dispatch[key]);
            }
            probes += 1;
        }
        probes
    }

    /// Every `(even offset, motif)` hit, ascending.
    pub fn fast_path(&self, input: &[u8]) -> Vec<Harvest> {
        self.fast_path_range(input, 0..input.len())
    }

    /// Hits at even offsets inside `range`.
    pub fn fast_path_range(&self, input: &[u8], range: Range<usize>) -> Vec<Harvest> {
        let mut out = Vec::new();
        self.harvest_range(input, range, |pos, _| out.push(Harvest { pos, motif: Trace::at(input, pos) }));
        out
    }

    #[inline]
    fn resolve(&self, input: &[u8], pos: usize, trie: u32, c: &mut MatchCounters, f: &mut impl FnMut(usize, usize)) {
        let mut ws = WalkStats::default();
        self.tries[trie as usize].resolve(input, pos, &mut ws, |e, start| f(e.pattern, start));
        c.harvest_count += 1;
        c.slow_path_node_visits += ws.probes;
        c.fragment_bytes_compared += ws.fragment_bytes;
        c.max_node_visits_per_harvest = c.max_node_visits_per_harvest.max(ws.probes);
    }

    /// Resolves harvest entries in the order given. Entries that do not match
    /// the input or carry no motif are skipped.
    pub fn slow_path(&self, input: &[u8], harvest: &[Harvest]) -> (Vec<Match>, MatchCounters) {
        let mut c = MatchCounters::default();
        let mut raw = Vec::new();
        for h in harvest {
            if h.pos + 1 >= input.len() || Trace::at(input, h.pos) != h.motif {
                continue;
            }
            if let Some(t) = self.trie_index(h.motif) {
                self.resolve(input, h.pos, t, &mut c, &mut |p, s| raw.push((s, p)));
            }
        }
        let out = self.finish(raw, &mut c);
        (out, c)
    }

    /// Calls `f(pattern_index, start)` for every occurrence in harvest order
    /// (unique-pattern indices, no fan-out or sorting).
    pub fn for_each_match(&self, input: &[u8], mut f: impl FnMut(usize, usize)) -> MatchCounters {
        let mut c = MatchCounters::default();
        c.fast_path_probes = self.harvest_range(input, 0..input.len(), |pos, t| self.resolve(input, pos, t, &mut c, &mut f));
        c
    }

    /// All occurrences, fanned out to duplicate ids, sorted by `(start, pattern_id)`.
    pub fn scan(&self, input: &[u8]) -> Vec<Match> {
        self.scan_with_counters(input).0
    }

    pub fn scan_with_counters(&self, input: &[u8]) -> (Vec<Match>, MatchCounters) {
        let mut raw = Vec::new();
        let mut c = self.for_each_match(input, |p, s| raw.push((s, p)));
        let out = self.finish(raw, &mut c);
        (out, c)
    }

    /// Scans with `threads` workers over even-aligned slices of `input`.
    /// Walks may read past a slice end; reports equal [`Self::scan_with_counters`].
    pub fn scan_parallel(&self, input: &[u8], threads: usize) -> (Vec<Match>, MatchCounters) {
        let threads = threads.max(1);
        if threads == 1 || input.len() < 4096 {
            return self.scan_with_counters(input);
        }
        let chunk = (input.len().div_ceil(threads) + 1) & !1;
        let parts: Vec<(Vec<(usize, usize)>, MatchCounters)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|k| {
                    let range = (k * chunk).min(input.len())..((k + 1) * chunk).min(input.len());
                    scope.spawn(move || {
                        let mut raw = Vec::new();
                        let mut c = MatchCounters::default();
                        c.fast_path_probes = self.harvest_range(input, range, |pos, t| {
                            self.resolve(input, pos, t, &mut c, &mut |p, s| raw.push((s, p)))
                        });
                        (raw, c)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
        });
        let mut c = MatchCounters::default();
        let mut raw = Vec::new();
        for (r, pc) in parts {
            raw.extend(r);
            c.merge(&pc);
        }
        let out = self.finish(raw, &mut c);
        (out, c)
    }

    fn finish(&self, mut raw: Vec<(usize, usize)>, c: &mut MatchCounters) -> Vec<Match> {
        raw.sort_unstable();
        let before = raw.len();
        raw.dedup();
        c.dedup_dropped += (before - raw.len()) as u64;
        let mut out = Vec::with_capacity(raw.len());
        for (start, p) in raw {
            push_fanned(&self.patterns, &mut out, p, start);
        }
        out.sort_unstable();
        c.reports = out.len() as u64;
        out
    }

    pub fn memory_report(&self) -> MemoryReport {
        use std::mem::size_of;
        let dispatch_bytes = self.dispatch.len() * size_of::<u32>() + self.bitmap.len() * size_of::<u64>();
        let tries: Vec<TrieMemory> = self
            .tries
            .iter()
            .map(|t| {
                let mut node_bytes = t.entries().len() * size_of::<crate::assign::ResolveEntry>();
                let mut fragment_bytes = 0;
                for n in t.nodes() {
                    node_bytes += size_of::<crate::trie::Node>() + n.emits.len() * 4;
                    match &n.body {
                        NodeBody::State { edges, .. } => node_bytes += edges.len() * size_of::<(u8, u32)>(),
                        NodeBody::Terminal { fragments, .. } => {
                            fragment_bytes += fragments
                                .iter()
                                .map(|f| size_of::<crate::trie::Fragment>() + f.bytes.len())
                                .sum::<usize>()
                        }
                        NodeBody::Leaf => {}
                    }
                }
                TrieMemory {
                    motif: t.motif().to_hex(),
                    entries: t.entries().len(),
                    nodes: t.node_count(),
                    node_bytes,
                    fragment_bytes,
                    max_depth: t.max_depth(),
                }
            })
            .collect();
        let trie_bytes = tries.iter().map(|t| t.node_bytes + t.fragment_bytes).sum();
        MemoryReport {
            dispatch_bytes,
            occupied_slots: self.tries.len(),
            tries,
            trie_bytes,
            total_bytes: dispatch_bytes + trie_bytes,
        }
    }
}
