//! 2-gram occurrence statistics over sample input, and the motif cost
//! functions built on them.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::AcMatcher;
use crate::pattern::{anchors, PatternSet, Trace};

const STATS_VERSION: u32 = 1;
const PAIRS: usize = 1 << 16;

/// Which pairs of the input are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsMode {
    /// Pairs starting at even offsets only, as the fast path sees them.
    EvenAligned,
    /// Every overlapping pair.
    Sliding,
}

/// Per-trace occurrence counts over a sample.
#[derive(Clone, PartialEq, Eq)]
pub struct TraceStats {
    mode: StatsMode,
    total_pairs: u64,
    counts: Box<[u64]>,
}

impl std::fmt::Debug for TraceStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceStats")
            .field("mode", &self.mode)
            .field("total_pairs", &self.total_pairs)
            .field("distinct", &self.counts.iter().filter(|&&c| c > 0).count())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    version: u32,
    mode: StatsMode,
    total_pairs: u64,
    counts: BTreeMap<String, u64>,
}

impl TraceStats {
    pub fn empty(mode: StatsMode) -> Self {
        TraceStats { mode, total_pairs: 0, counts: vec![0; PAIRS].into_boxed_slice() }
    }

    /// Counts the pairs of `input` selected by `mode`.
    pub fn collect(input: &[u8], mode: StatsMode) -> Self {
        let mut stats = Self::empty(mode);
        match mode {
            StatsMode::EvenAligned => {
                for pair in input.chunks_exact(2) {
                    stats.counts[u16::from_be_bytes([pair[0], pair[1]]) as usize] += 1;
                }
                stats.total_pairs = (input.len() / 2) as u64;
            }
            StatsMode::Sliding => {
                for pair in input.windows(2) {
                    stats.counts[u16::from_be_bytes([pair[0], pair[1]]) as usize] += 1;
                }
                stats.total_pairs = input.len().saturating_sub(1) as u64;
            }
        }
        stats
    }

    /// Streams `reader` to the end. Pair alignment is relative to the start of the stream.
    pub fn collect_reader<R: Read>(mut reader: R, mode: StatsMode) -> std::io::Result<Self> {
        let mut stats = Self::empty(mode);
        let mut buf = vec![0u8; 1 << 16];
        // `carry` holds the byte that begins the next pair when a chunk boundary splits one.
        let mut carry: Option<u8> = None;
        let mut consumed: u64 = 0;
        loop {
            let n = reader.read(&mut buf)?;
            if n == 0 {
                break;
            }
            for &b in &buf[..n] {
                let pos = consumed;
                consumed += 1;
                if let Some(prev) = carry {
                    stats.counts[u16::from_be_bytes([prev, b]) as usize] += 1;
                    stats.total_pairs += 1;
                }
                carry = match mode {
                    StatsMode::Sliding => Some(b),
                    StatsMode::EvenAligned => (pos % 2 == 0).then_some(b),
                };
            }
        }
        Ok(stats)
    }

    pub fn mode(&self) -> StatsMode {
        self.mode
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    pub fn count(&self, t: Trace) -> u64 {
        self.counts[t.key() as usize]
    }

    /// `count(t) / total_pairs`. Errors on an empty sample.
    pub fn probability(&self, t: Trace) -> Result<f64> {
        if self.total_pairs == 0 {
            return Err(Error::ZeroPairStats);
        }
        Ok(self.count(t) as f64 / self.total_pairs as f64)
    }

    /// Add-one smoothed probability over all 65536 pairs.
    pub fn probability_smoothed(&self, t: Trace) -> f64 {
        (self.count(t) + 1) as f64 / (self.total_pairs + PAIRS as u64) as f64
    }

    /// Sum of the probabilities of `traces`.
    pub fn aggregate_probability<'a>(&self, traces: impl IntoIterator<Item = &'a Trace>) -> Result<f64> {
        traces.into_iter().map(|&t| self.probability(t)).sum()
    }

    /// Adds the counts of `other`, which must use the same mode.
    pub fn merge(&mut self, other: &TraceStats) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::StatsFormat("cannot merge statistics of different modes".into()));
        }
        self.total_pairs += other.total_pairs;
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        Ok(())
    }

    /// Non-zero counts in ascending trace order.
    pub fn iter(&self) -> impl Iterator<Item = (Trace, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (Trace::from_key(k as u16), c))
    }

    pub fn to_json(&self) -> String {
        let file = StatsFile {
            version: STATS_VERSION,
            mode: self.mode,
            total_pairs: self.total_pairs,
            counts: self.iter().map(|(t, c)| (t.to_hex(), c)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("stats serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StatsFile = serde_json::from_str(text).map_err(|e| Error::StatsFormat(e.to_string()))?;
        if file.version != STATS_VERSION {
            return Err(Error::StatsFormat(format!("unsupported version {}", file.version)));
        }
        let mut stats = Self::empty(file.mode);
        stats.total_pairs = file.total_pairs;
        let mut sum: u64 = 0;
        for (key, count) in file.counts {
            let t = Trace::from_hex(&key)
                .filter(|t| t.to_hex() == key)
                .ok_or_else(|| Error::StatsFormat(format!("bad trace key {key:?}")))?;
            stats.counts[t.key() as usize] = count;
            sum = sum.saturating_add(count);
        }
        if sum > stats.total_pairs {
            return Err(Error::StatsFormat("counts exceed total_pairs".into()));
        }
        Ok(stats)
    }
}

/// Which motif cost the optimizer minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostKind {
    /// Every motif costs 1: fewest motifs.
    Unit,
    /// Number of occurrences of the trace across all patterns.
    RareInStrings,
    /// Probability of the trace in the sampled input.
    RareInInput,
    /// Negated sum of P(word | trace) over the words containing the trace.
    ConditionalFp,
}

/// A motif cost function, together with whatever sample data it needs.
#[derive(Clone, Debug)]
pub struct CostFunction {
    kind: CostKind,
    stats: Option<TraceStats>,
    word_counts: HashMap<Vec<u8>, u64>,
    smoothing: bool,
}

impl CostFunction {
    pub fn unit() -> Self {
        CostFunction { kind: CostKind::Unit, stats: None, word_counts: HashMap::new(), smoothing: false }
    }

    pub fn rare_in_strings() -> Self {
        CostFunction { kind: CostKind::RareInStrings, ..Self::unit() }
    }

    pub fn rare_in_input(stats: TraceStats) -> Self {
        CostFunction { kind: CostKind::RareInInput, stats: Some(stats), ..Self::unit() }
    }

    /// Builds any kind from optional stats. Stats-dependent kinds require them;
    /// `ConditionalFp` built this way has no word counts, see [`Self::conditional_fp`].
    pub fn new(kind: CostKind, stats: Option<TraceStats>) -> Result<Self> {
        match (kind, stats) {
            (CostKind::Unit, _) => Ok(Self::unit()),
            (CostKind::RareInStrings, _) => Ok(Self::rare_in_strings()),
            (CostKind::RareInInput | CostKind::ConditionalFp, None) => Err(Error::MissingStats),
            (kind, Some(stats)) => Ok(CostFunction { kind, stats: Some(stats), ..Self::unit() }),
        }
    }

    /// Conditional false-positive cost estimated from `sample`: sliding counts of
    /// each whole pattern divided by the sliding count of the trace.
    pub fn conditional_fp(sample: &[u8], ps: &PatternSet) -> Self {
        let stats = TraceStats::collect(sample, StatsMode::Sliding);
        let ac = AcMatcher::new(ps);
        let mut per_pattern = vec![0u64; ps.len()];
        ac.for_each_match(sample, |pattern, _| per_pattern[pattern] += 1);
        let word_counts = ps.patterns().iter().zip(per_pattern).map(|(p, c)| (p.bytes.clone(), c)).collect();
        CostFunction { kind: CostKind::ConditionalFp, stats: Some(stats), word_counts, smoothing: false }
    }

    /// Enables add-one smoothing for `RareInInput`.
    pub fn with_smoothing(mut self, on: bool) -> Self {
        self.smoothing = on;
        self
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn stats(&self) -> Option<&TraceStats> {
        self.stats.as_ref()
    }

    fn require_stats(&self) -> Result<&TraceStats> {
        let stats = self.stats.as_ref().ok_or(Error::MissingStats)?;
        if stats.total_pairs == 0 {
            return Err(Error::ZeroPairStats);
        }
        Ok(stats)
    }

    /// Cost of a single trace relative to `ps`.
    pub fn cost(&self, t: Trace, ps: &PatternSet) -> Result<f64> {
        match self.kind {
            CostKind::Unit => Ok(1.0),
            CostKind::RareInStrings => {
                Ok(ps.patterns().iter().map(|p| anchors(&p.bytes, t).count()).sum::<usize>() as f64)
            }
            CostKind::RareInInput => {
                let stats = self.require_stats()?;
                if self.smoothing {
                    Ok(stats.probability_smoothed(t))
                } else {
                    stats.probability(t)
                }
            }
            CostKind::ConditionalFp => {
                let stats = self.require_stats()?;
                let denom = stats.count(t);
                if denom == 0 {
                    return Ok(0.0);
                }
                let mut total = 0.0;
                for p in ps.patterns() {
                    if anchors(&p.bytes, t).next().is_some() {
                        let words = self.word_counts.get(&p.bytes).copied().unwrap_or(0);
                        total += (words as f64 / denom as f64).clamp(0.0, 1.0);
                    }
                }
                Ok(-total)
            }
        }
    }

    /// Costs for many traces at once, in the order given.
    pub fn costs(&self, traces: &[Trace], ps: &PatternSet) -> Result<Vec<f64>> {
        match self.kind {
            CostKind::RareInStrings => {
                let mut counts: HashMap<Trace, usize> = HashMap::new();
                for o in ps.occurrences() {
                    *counts.entry(o.trace).or_default() += 1;
                }
                Ok(traces.iter().map(|t| counts.get(t).copied().unwrap_or(0) as f64).collect())
            }
            CostKind::ConditionalFp => {
                let stats = self.require_stats()?;
                let mut sums: HashMap<Trace, f64> = HashMap::new();
                for p in ps.patterns() {
                    let words = self.word_counts.get(&p.bytes).copied().unwrap_or(0);
                    let mut seen: Vec<Trace> = p.bytes.windows(2).map(|w| Trace([w[0], w[1]])).collect();
                    seen.sort();
                    seen.dedup();
                    for t in seen {
                        let denom = stats.count(t);
                        if denom > 0 {
                            *sums.entry(t).or_default() += (words as f64 / denom as f64).clamp(0.0, 1.0);
                        }
                    }
                }
                Ok(traces.iter().map(|t| -sums.get(t).copied().unwrap_or(0.0)).collect())
            }
            _ => traces.iter().map(|&t| self.cost(t, ps)).collect(),
        }
    }
}
