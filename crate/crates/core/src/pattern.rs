//! Patterns, traces and the occurrence/association functions over them.
//!
//! A *trace* is any 2-byte substring of a pattern. Every pattern is later
//! hashed onto two traces (motifs): one occurring at an even offset within the
//! pattern and one at an odd offset. The helpers here answer the basic
//! questions the optimizer and assignment stages ask about that relation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Shortest pattern the engine accepts; a word must contain a 2-byte motif at
/// both parities.
pub const MIN_PATTERN_LEN: usize = 3;

/// Longest pattern the engine accepts. Relative offsets are stored as `i16`.
pub const MAX_PATTERN_LEN: usize = i16::MAX as usize;

/// A 2-byte sequence. Ordered by its bytes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(pub [u8; 2]);

impl Trace {
    pub const fn new(a: u8, b: u8) -> Self {
        Trace([a, b])
    }

    /// Reads the trace starting at `offset`. Panics when fewer than two bytes remain.
    pub fn at(bytes: &[u8], offset: usize) -> Self {
        Trace([bytes[offset], bytes[offset + 1]])
    }

    /// Dispatch-table key: first byte in the high half.
    #[inline]
    pub const fn key(self) -> u16 {
        u16::from_be_bytes(self.0)
    }

    #[inline]
    pub const fn from_key(key: u16) -> Self {
        Trace(key.to_be_bytes())
    }

    pub fn bytes(&self) -> &[u8; 2] {
        &self.0
    }

    /// Four lowercase hex digits.
    pub fn to_hex(self) -> String {
        format!("{:02x}{:02x}", self.0[0], self.0[1])
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() != 4 || !s.is_ascii() {
            return None;
        }
        let a = u8::from_str_radix(&s[..2], 16).ok()?;
        let b = u8::from_str_radix(&s[2..], 16).ok()?;
        Some(Trace([a, b]))
    }
}

impl From<&[u8; 2]> for Trace {
    fn from(b: &[u8; 2]) -> Self {
        Trace(*b)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", std::ascii::escape_default(b))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Trace(\"{self}\")")
    }
}

/// Offset parity of a motif within a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even = 0,
    Odd = 1,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn of(offset: usize) -> Self {
        if offset % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Parity::Even),
            1 => Some(Parity::Odd),
            _ => None,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// One unique pattern. `id` is the input index of its first occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub id: usize,
    pub bytes: Vec<u8>,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// A trace found inside a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    /// Index into [`PatternSet::patterns`].
    pub pattern: usize,
    pub trace: Trace,
    pub offset: usize,
}

/// A validated, deduplicated collection of patterns.
///
/// Patterns are addressed internally by their position in [`patterns`](Self::patterns).
/// Input indices (the ids reported to callers) are kept per unique pattern so
/// that a match fans out to every duplicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
    /// Input ids per unique pattern, ascending. `ids[i][0] == patterns[i].id`.
    ids: Vec<Vec<usize>>,
    input_count: usize,
}

impl PatternSet {
    /// Validates raw byte strings. Duplicates collapse onto their first occurrence.
    pub fn new<I, B>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[u8]>,
    {
        let mut patterns: Vec<Pattern> = Vec::new();
        let mut ids: Vec<Vec<usize>> = Vec::new();
        let mut seen: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut input_count = 0;
        for (index, item) in raw.into_iter().enumerate() {
            let bytes = item.as_ref();
            input_count += 1;
            if bytes.len() < MIN_PATTERN_LEN {
                return Err(Error::PatternTooShort(index));
            }
            if bytes.len() > MAX_PATTERN_LEN {
                return Err(Error::PatternTooLong { index, len: bytes.len(), max: MAX_PATTERN_LEN });
            }
            match seen.get(bytes) {
                Some(&slot) => ids[slot].push(index),
                None => {
                    seen.insert(bytes.to_vec(), patterns.len());
                    patterns.push(Pattern { id: index, bytes: bytes.to_vec() });
                    ids.push(vec![index]);
                }
            }
        }
        if patterns.is_empty() {
            return Err(Error::EmptyPatternSet);
        }
        Ok(PatternSet { patterns, ids, input_count })
    }

    /// Rebuilds a set from unique patterns and their full id lists. Used by the
    /// artifact loader; ids must be disjoint and cover `0..input_count`.
    pub(crate) fn from_parts(patterns: Vec<Vec<u8>>, ids: Vec<Vec<usize>>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::EmptyPatternSet);
        }
        if patterns.len() != ids.len() {
            return Err(Error::InconsistentPlan("pattern/id list length mismatch".into()));
        }
        let input_count = ids.iter().map(Vec::len).sum();
        let mut used = vec![false; input_count];
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(patterns.len());
        for (i, (bytes, idl)) in patterns.into_iter().zip(&ids).enumerate() {
            if bytes.len() < MIN_PATTERN_LEN {
                return Err(Error::PatternTooShort(i));
            }
            if bytes.len() > MAX_PATTERN_LEN {
                return Err(Error::PatternTooLong { index: i, len: bytes.len(), max: MAX_PATTERN_LEN });
            }
            if !seen.insert(bytes.clone()) {
                return Err(Error::InconsistentPlan(format!("pattern #{i} is duplicated")));
            }
            if idl.is_empty() || idl.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InconsistentPlan(format!("id list of pattern #{i} is not ascending")));
            }
            for &id in idl {
                if id >= input_count || std::mem::replace(&mut used[id], true) {
                    return Err(Error::InconsistentPlan(format!("pattern id {id} is invalid")));
                }
            }
            out.push(Pattern { id: idl[0], bytes });
        }
        Ok(PatternSet { patterns: out, ids, input_count })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn get(&self, index: usize) -> &Pattern {
        &self.patterns[index]
    }

    /// Number of unique patterns.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Number of patterns originally supplied, duplicates included.
    pub fn input_count(&self) -> usize {
        self.input_count
    }

    /// All input ids that share the unique pattern at `index`.
    pub fn ids(&self, index: usize) -> &[usize] {
        &self.ids[index]
    }

    /// Byte sequences that were supplied more than once, with all their ids.
    pub fn duplicates(&self) -> BTreeMap<&[u8], &[usize]> {
        self.patterns
            .iter()
            .zip(&self.ids)
            .filter(|(_, ids)| ids.len() > 1)
            .map(|(p, ids)| (p.bytes.as_slice(), ids.as_slice()))
            .collect()
    }

    /// Total length of the unique patterns.
    pub fn total_size(&self) -> usize {
        self.patterns.iter().map(Pattern::len).sum()
    }

    /// Total length of every supplied pattern, duplicates included.
    pub fn input_size(&self) -> usize {
        self.patterns.iter().zip(&self.ids).map(|(p, ids)| p.len() * ids.len()).sum()
    }

    pub fn max_len(&self) -> usize {
        self.patterns.iter().map(Pattern::len).max().unwrap_or(0)
    }

    /// Every 2-byte substring of every pattern.
    pub fn trace_set(&self) -> BTreeSet<Trace> {
        self.patterns
            .iter()
            .flat_map(|p| p.bytes.windows(2).map(|w| Trace([w[0], w[1]])))
            .collect()
    }

    /// Every (pattern, trace, offset) triple, in pattern then offset order.
    pub fn occurrences(&self) -> impl Iterator<Item = Occurrence> + '_ {
        self.patterns.iter().enumerate().flat_map(|(pattern, p)| {
            p.bytes
                .windows(2)
                .enumerate()
                .map(move |(offset, w)| Occurrence { pattern, trace: Trace([w[0], w[1]]), offset })
        })
    }
}

/// `true` iff `word[l..l+2] == t`.
pub fn occ(word: &[u8], t: Trace, l: usize) -> bool {
    word.get(l..l + 2).is_some_and(|w| w == t.0)
}

/// `true` iff `t` occurs in `word` at some offset of the given parity.
pub fn assoc(word: &[u8], t: Trace, parity: Parity) -> bool {
    anchors(word, t).any(|l| Parity::of(l) == parity)
}

/// Offsets at which `t` occurs in `word`, ascending.
pub fn anchors(word: &[u8], t: Trace) -> impl Iterator<Item = usize> + '_ {
    word.windows(2).enumerate().filter(move |(_, w)| *w == t.0).map(|(l, _)| l)
}

/// Pattern-list text format: one pattern per line, `#` comments and blank
/// lines ignored, escapes `\xNN`, `\\`, `\n`, `\r`, `\t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternFile {
    pub patterns: Vec<Vec<u8>>,
    /// 1-based source line of each pattern.
    pub lines: Vec<usize>,
}

impl PatternFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = PatternFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let bytes = unescape(raw).map_err(|msg| Error::PatternFile { line, msg })?;
            if bytes.len() < MIN_PATTERN_LEN {
                return Err(Error::PatternTooShort(out.patterns.len()));
            }
            out.patterns.push(bytes);
            out.lines.push(line);
        }
        Ok(out)
    }

    pub fn into_pattern_set(self) -> Result<PatternSet> {
        let lines = self.lines;
        PatternSet::new(&self.patterns).map_err(|e| match e {
            Error::PatternTooLong { index: i, .. } => Error::PatternFile {
                line: lines[i],
                msg: e.to_string(),
            },
            other => other,
        })
    }
}

fn unescape(s: &str) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity(s.len());
    let mut bytes = s.bytes();
    while let Some(b) = bytes.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match bytes.next() {
            Some(b'\\') => out.push(b'\\'),
            Some(b'n') => out.push(b'\n'),
            Some(b'r') => out.push(b'\r'),
            Some(b't') => out.push(b'\t'),
            Some(b'x') => {
                let hi = bytes.next().and_then(hex_digit);
                let lo = bytes.next().and_then(hex_digit);
                match (hi, lo) {
                    (Some(h), Some(l)) => out.push(h << 4 | l),
                    _ => return Err("\\x must be followed by two hex digits".into()),
                }
            }
            Some(c) => return Err(format!("unknown escape \\{}", c as char)),
            None => return Err("trailing backslash".into()),
        }
    }
    Ok(out)
}

fn hex_digit(b: u8) -> Option<u8> {
    (b as char).to_digit(16).map(|d| d as u8)
}

/// Inverse of the pattern-file escaping; printable ASCII passes through.
pub fn escape(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => s.push_str("\\\\"),
            b'\n' => s.push_str("\\n"),
            b'\r' => s.push_str("\\r"),
            b'\t' => s.push_str("\\t"),
            0x20..=0x7e => s.push(b as char),
            _ => s.push_str(&format!("\\x{b:02x}")),
        }
    }
    s
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn word() -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(prop::sample::select(b"abcd".to_vec()), 3..12)
    }

    proptest! {
        #[test]
        fn assoc_either_parity_iff_substring(w in word(), a in 0u8..4, b in 0u8..4) {
            let tr = Trace::new(b"abcd"[a as usize], b"abcd"[b as usize]);
            let any = assoc(&w, tr, Parity::Even) || assoc(&w, tr, Parity::Odd);
            let substring = w.windows(2).any(|x| x == tr.0);
            prop_assert_eq!(any, substring);
        }

        #[test]
        fn trace_set_matches_sliding_window(words in prop::collection::vec(word(), 1..50)) {
            let ps = PatternSet::new(&words).unwrap();
            let mut oracle = BTreeSet::new();
            for w in &words {
                for i in 0..w.len() - 1 {
                    oracle.insert(Trace([w[i], w[i + 1]]));
                }
            }
            let ts = ps.trace_set();
            prop_assert!(ts.len() <= 65536.min(ps.total_size() - ps.len()));
            prop_assert_eq!(ts, oracle);
        }

        #[test]
        fn occ_agrees_with_slicing(w in word(), l in 0usize..14, a in 0u8..4, b in 0u8..4) {
            let tr = Trace::new(b"abcd"[a as usize], b"abcd"[b as usize]);
            let expected = l + 2 <= w.len() && w[l] == tr.0[0] && w[l + 1] == tr.0[1];
            prop_assert_eq!(occ(&w, tr, l), expected);
        }
    }
}
