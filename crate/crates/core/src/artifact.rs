//! Binary container for a [`CompiledMatcher`].
//!
//! Little-endian throughout:
//!
//! ```text
//! magic "B2C1" | version u16 | section count u16
//! section table: (id u16, length u64) per section
//! section payloads, in table order
//! ```
//!
//! Sections, each required exactly once:
//! - `1` patterns: `u32` count, then per pattern `u32` length, bytes, `u32` id
//!   count, `u32` ids (input indices, ascending).
//! - `2` motifs: `u32` count, then `u16` pairs ascending.
//! - `3` mappings: `u32` count, then `(pattern u32, parity u8, pair u16, anchor u16)`.
//! - `4` tries: `u32` count, then per trie: `pair u16`, `u32` entry count,
//!   `(pattern u32, anchor u16)` entries, `root u32`, `u32` fragment-pool
//!   length and pool bytes, `u32` node count and nodes.
//!
//! A node is `kind u8` (0 state, 1 terminal, 2 leaf), `offset i16`, `u16` emit
//! count and `u32` emits, `pivot u32` (`u32::MAX` for none), then for a state
//! `u16` edge count, `(byte u8, child u32)` edges and `fallback u32`; for a
//! terminal `entry u32`, `u16` fragment count and `(offset i16, pool start u32,
//! length u16)` fragments.

use std::path::Path;

use crate::assign::{Mapping, ResolveEntry};
use crate::error::{Error, Result};
use crate::matcher::CompiledMatcher;
use crate::pattern::{Parity, PatternSet, Trace};
use crate::trie::{Fragment, MangledTrie, Node, NodeBody, NodeId};

pub const MAGIC: &[u8; 4] = b"B2C1";
pub const VERSION: u16 = 1;

const SEC_PATTERNS: u16 = 1;
const SEC_MOTIFS: u16 = 2;
const SEC_MAPPINGS: u16 = 3;
const SEC_TRIES: u16 = 4;
const NONE: u32 = u32::MAX;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i16(&mut self, v: i16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn len32(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("artifact count exceeds u32"));
    }
    fn len16(&mut self, n: usize) {
        self.u16(u16::try_from(n).expect("artifact count exceeds u16"));
    }
}

fn opt(id: Option<NodeId>) -> u32 {
    id.unwrap_or(NONE)
}

/// Serializes `cm`. Output is a pure function of the matcher.
pub fn to_bytes(cm: &CompiledMatcher) -> Vec<u8> {
    let ps = cm.patterns();
    let mut patterns = Writer::default();
    patterns.len32(ps.len());
    for (i, p) in ps.patterns().iter().enumerate() {
        patterns.len32(p.len());
        patterns.buf.extend_from_slice(&p.bytes);
        patterns.len32(ps.ids(i).len());
        for &id in ps.ids(i) {
            patterns.len32(id);
        }
    }

    let mut motifs = Writer::default();
    let m = cm.motifs();
    motifs.len32(m.len());
    for t in m {
        motifs.u16(t.key());
    }

    let mut mappings = Writer::default();
    mappings.len32(cm.mappings().len());
    for mp in cm.mappings() {
        mappings.len32(mp.pattern);
        mappings.u8(mp.parity.index() as u8);
        mappings.u16(mp.motif.key());
        mappings.len16(mp.anchor);
    }

    let mut tries = Writer::default();
    tries.len32(cm.tries().len());
    for t in cm.tries() {
        write_trie(&mut tries, t);
    }

    let sections = [
        (SEC_PATTERNS, patterns.buf),
        (SEC_MOTIFS, motifs.buf),
        (SEC_MAPPINGS, mappings.buf),
        (SEC_TRIES, tries.buf),
    ];
    let mut out = Writer::default();
    out.buf.extend_from_slice(MAGIC);
    out.u16(VERSION);
    out.len16(sections.len());
    for (id, payload) in &sections {
        out.u16(*id);
        out.u64(payload.len() as u64);
    }
    for (_, payload) in &sections {
        out.buf.extend_from_slice(payload);
    }
    out.buf
}

fn write_trie(w: &mut Writer, t: &MangledTrie) {
    w.u16(t.motif().key());
    w.len32(t.entries().len());
    for e in t.entries() {
        w.len32(e.pattern);
        w.len16(e.anchor);
    }
    w.u32(t.root());
    let mut pool = Vec::new();
    let mut frag_starts = Vec::new();
    for n in t.nodes() {
        if let NodeBody::Terminal { fragments, .. } = &n.body {
            for f in fragments {
                frag_starts.push(pool.len());
                pool.extend_from_slice(&f.bytes);
            }
        }
    }
    w.len32(pool.len());
    w.buf.extend_from_slice(&pool);
    w.len32(t.node_count());
    let mut next_frag = frag_starts.into_iter();
    for n in t.nodes() {
        let (kind, offset) = match &n.body {
            NodeBody::State { offset, .. } => (0u8, *offset),
            NodeBody::Terminal { .. } => (1, 0),
            NodeBody::Leaf => (2, 0),
        };
        w.u8(kind);
        w.i16(offset as i16);
        w.len16(n.emits.len());
        for &e in &n.emits {
            w.u32(e);
        }
        w.u32(opt(n.pivot));
        match &n.body {
            NodeBody::State { edges, fallback, .. } => {
                w.len16(edges.len());
                for &(b, c) in edges {
                    w.u8(b);
                    w.u32(c);
                }
                w.u32(opt(*fallback));
            }
            NodeBody::Terminal { entry, fragments } => {
                w.u32(*entry);
                w.len16(fragments.len());
                for f in fragments {
                    w.i16(f.offset as i16);
                    w.len32(next_frag.next().expect("fragment start recorded"));
                    w.len16(f.bytes.len());
                }
            }
            NodeBody::Leaf => {}
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    /// Absolute offset of `data[0]` in the artifact.
    base: usize,
}

impl<'a> Reader<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Artifact { offset: self.base + self.pos, msg: msg.into() })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return self.err(format!("truncated: need {n} bytes, {} left", self.data.len() - self.pos));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn i16(&mut self) -> Result<i16> {
        Ok(i16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A count whose items occupy at least `min_item` bytes each; rejects counts
    /// the remaining payload cannot hold.
    fn count32(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        self.check_count(n, min_item)
    }
    fn count16(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u16()? as usize;
        self.check_count(n, min_item)
    }
    fn check_count(&self, n: usize, min_item: usize) -> Result<usize> {
        if n.saturating_mul(min_item) > self.data.len() - self.pos {
            return self.err(format!("count {n} exceeds remaining payload"));
        }
        Ok(n)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return self.err(format!("{} trailing bytes in section", self.data.len() - self.pos));
        }
        Ok(())
    }
}

fn node_ref(v: u32) -> Option<NodeId> {
    (v != NONE).then_some(v)
}

/// Parses and validates an artifact. Corrupt input yields
/// [`Error::Artifact`] naming the byte offset.
pub fn from_bytes(data: &[u8]) -> Result<CompiledMatcher> {
    let mut h = Reader { data, pos: 0, base: 0 };
    if h.take(4)? != MAGIC {
        return Err(Error::Artifact { offset: 0, msg: "bad magic".into() });
    }
    let version = h.u16()?;
    if version != VERSION {
        return Err(Error::Artifact { offset: 4, msg: format!("unsupported version {version}") });
    }
    let count = h.u16()? as usize;
    let mut table = Vec::with_capacity(count.min(16));
    for _ in 0..count {
        let at = h.pos;
        let id = h.u16()?;
        let len = h.u64()?;
        if !(SEC_PATTERNS..=SEC_TRIES).contains(&id) {
            return Err(Error::Artifact { offset: at, msg: format!("unknown section id {id}") });
        }
        if table.iter().any(|&(i, _, _)| i == id) {
            return Err(Error::Artifact { offset: at, msg: format!("duplicate section id {id}") });
        }
        table.push((id, len, at));
    }
    let mut sections: [Option<Reader>; 5] = Default::default();
    let mut pos = h.pos;
    for &(id, len, at) in &table {
        let len = usize::try_from(len).ok().filter(|&l| l <= data.len() - pos);
        let Some(len) = len else {
            return Err(Error::Artifact { offset: at, msg: format!("section {id} runs past end of file") });
        };
        sections[id as usize] = Some(Reader { data: &data[pos..pos + len], pos: 0, base: pos });
        pos += len;
    }
    if pos != data.len() {
        return Err(Error::Artifact { offset: pos, msg: "trailing bytes after last section".into() });
    }
    let mut take = |id: u16, name: &str| {
        sections[id as usize]
            .take()
            .ok_or_else(|| Error::Artifact { offset: h.pos, msg: format!("missing {name} section") })
    };
    let mut sp = take(SEC_PATTERNS, "patterns")?;
    let mut sm = take(SEC_MOTIFS, "motifs")?;
    let mut sa = take(SEC_MAPPINGS, "mappings")?;
    let mut st = take(SEC_TRIES, "tries")?;

    let ps = read_patterns(&mut sp)?;

    let n = sm.count32(2)?;
    let mut motifs = Vec::with_capacity(n);
    for _ in 0..n {
        motifs.push(Trace::from_key(sm.u16()?));
    }
    sm.finish()?;

    let n = sa.count32(9)?;
    let mut mappings = Vec::with_capacity(n);
    for _ in 0..n {
        let at = sa.pos;
        let pattern = sa.u32()? as usize;
        let parity = Parity::from_index(sa.u8()?);
        let motif = Trace::from_key(sa.u16()?);
        let anchor = sa.u16()? as usize;
        let Some(parity) = parity else {
            return Err(Error::Artifact { offset: sa.base + at, msg: "bad parity".into() });
        };
        mappings.push(Mapping { pattern, parity, motif, anchor });
    }
    sa.finish()?;

    let n = st.count32(14)?;
    let mut tries = Vec::with_capacity(n);
    for _ in 0..n {
        tries.push(read_trie(&mut st, &ps)?);
    }
    st.finish()?;

    let at_tries = st.base;
    let cm = CompiledMatcher::new(ps, mappings, tries).map_err(|e| Error::Artifact { offset: at_tries, msg: e.to_string() })?;
    if cm.motifs() != motifs {
        return Err(Error::Artifact { offset: sm.base, msg: "motif list disagrees with tries".into() });
    }
    Ok(cm)
}

fn read_patterns(r: &mut Reader) -> Result<PatternSet> {
    let n = r.count32(8)?;
    let mut patterns = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.count32(1)?;
        patterns.push(r.take(len)?.to_vec());
        let k = r.count32(4)?;
        let mut list = Vec::with_capacity(k);
        for _ in 0..k {
            list.push(r.u32()? as usize);
        }
        ids.push(list);
    }
    r.finish()?;
    let base = r.base;
    PatternSet::from_parts(patterns, ids).map_err(|e| Error::Artifact { offset: base, msg: e.to_string() })
}

fn read_trie(r: &mut Reader, ps: &PatternSet) -> Result<MangledTrie> {
    let start = r.pos;
    let motif = Trace::from_key(r.u16()?);
    let n = r.count32(6)?;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let pattern = r.u32()? as usize;
        let anchor = r.u16()? as usize;
        if pattern >= ps.len() {
            return r.err(format!("entry references missing pattern {pattern}"));
        }
        entries.push(ResolveEntry { pattern, anchor });
    }
    let root = r.u32()?;
    let pool_len = r.count32(1)?;
    let pool = r.take(pool_len)?;
    let n = r.count32(9)?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let kind = r.u8()?;
        let offset = r.i16()? as i32;
        let k = r.count16(4)?;
        let mut emits = Vec::with_capacity(k);
        for _ in 0..k {
            emits.push(r.u32()?);
        }
        let pivot = node_ref(r.u32()?);
        let body = match kind {
            0 => {
                let k = r.count16(5)?;
                let mut edges = Vec::with_capacity(k);
                for _ in 0..k {
                    let b = r.u8()?;
                    edges.push((b, r.u32()?));
                }
                let fallback = node_ref(r.u32()?);
                NodeBody::State { offset, edges, fallback }
            }
            1 => {
                let entry = r.u32()?;
                let k = r.count16(8)?;
                let mut fragments = Vec::with_capacity(k);
                for _ in 0..k {
                    let off = r.i16()? as i32;
                    let s = r.u32()? as usize;
                    let len = r.u16()? as usize;
                    let Some(bytes) = pool.get(s..s.saturating_add(len)) else {
                        return r.err("fragment outside pool");
                    };
                    fragments.push(Fragment { offset: off, bytes: bytes.to_vec() });
                }
                NodeBody::Terminal { entry, fragments }
            }
            2 => NodeBody::Leaf,
            k => return r.err(format!("unknown node kind {k}")),
        };
        nodes.push(Node { emits, body, pivot });
    }
    let max_word_len = entries.iter().map(|e| ps.get(e.pattern).len()).max().unwrap_or(3);
    MangledTrie::from_parts(motif, entries, nodes, root, max_word_len)
        .map_err(|msg| Error::Artifact { offset: r.base + start, msg })
}

impl CompiledMatcher {
    pub fn to_bytes(&self) -> Vec<u8> {
        to_bytes(self)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        from_bytes(data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        from_bytes(&std::fs::read(path)?)
    }
}
