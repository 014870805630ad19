//! Mangled tries: per-motif decision structures that pick which input offset,
//! relative to a motif hit, to examine next.
//!
//! Construction works on a [`SymbolSet`]: for every resolve-set entry still
//! alive, the bytes it requires at each relative offset (the motif itself sits
//! at offsets 0 and 1 and is never part of the set). A state probes one offset
//! and has one edge per distinct required byte plus a fallback edge for any
//! other byte. Entries without a requirement at the probed offset follow every
//! edge.
//!
//! Node roles:
//! - *state*: probes one offset.
//! - *transitional*: carries entries confirmed by the byte just consumed; the
//!   node may still probe further for the entries that remain.
//! - *terminal*: a single entry is left; its remaining bytes are compared as
//!   contiguous fragments.
//! - *pivot*: a subtrie attached to a node and walked after the main path ends.
//!   It appears once the remaining entries split into a group needing only
//!   bytes left of the motif and a disjoint group needing only bytes right of it.
//!
//! Walk cost is counted in *probes*: each state and each terminal on the path
//! (main path plus pivot path) counts once. Every probe consumes a distinct
//! relative offset, so a walk never exceeds `2 * (max_word_len - 2)` probes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::assign::{ResolveEntry, ResolveSet};
use crate::pattern::{escape, PatternSet, Trace};

pub type NodeId = u32;

/// One required byte: entry `entry` needs `byte` at `offset` from its anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub entry: usize,
    pub offset: i32,
    pub byte: u8,
}

/// Live entries and the bytes each one still requires.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolSet {
    words: BTreeMap<usize, BTreeMap<i32, u8>>,
}

impl SymbolSet {
    /// The complete symbol set of a resolve set. Entry `i` is `rs.entries[i]`.
    pub fn from_resolve_set(ps: &PatternSet, rs: &ResolveSet) -> Self {
        let mut words = BTreeMap::new();
        for (i, e) in rs.entries.iter().enumerate() {
            let word = &ps.get(e.pattern).bytes;
            let anchor = e.anchor as i32;
            let syms: BTreeMap<i32, u8> = word
                .iter()
                .enumerate()
                .map(|(k, &b)| (k as i32 - anchor, b))
                .filter(|&(off, _)| off != 0 && off != 1)
                .collect();
            words.insert(i, syms);
        }
        SymbolSet { words }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        let mut words: BTreeMap<usize, BTreeMap<i32, u8>> = BTreeMap::new();
        for s in symbols {
            words.entry(s.entry).or_default().insert(s.offset, s.byte);
        }
        SymbolSet { words }
    }

    /// Number of live entries.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.keys().copied()
    }

    pub fn contains_entry(&self, entry: usize) -> bool {
        self.words.contains_key(&entry)
    }

    pub fn get(&self, entry: usize, offset: i32) -> Option<u8> {
        self.words.get(&entry).and_then(|m| m.get(&offset)).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.words
            .iter()
            .flat_map(|(&entry, m)| m.iter().map(move |(&offset, &byte)| Symbol { entry, offset, byte }))
    }

    pub fn offsets(&self) -> BTreeSet<i32> {
        self.words.values().flat_map(|m| m.keys().copied()).collect()
    }

    /// Distinct bytes required at `offset`, ascending.
    pub fn bytes_at(&self, offset: i32) -> BTreeSet<u8> {
        self.words.values().filter_map(|m| m.get(&offset).copied()).collect()
    }
}

/// Outcome of consuming one byte (or the fallback) at the scoring offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Purge {
    /// Entries still alive with their remaining requirements.
    pub survivors: SymbolSet,
    /// Entries whose last requirement was just satisfied.
    pub transitional: Vec<usize>,
}

/// Consumes `consumed` at `offset` (`None` is the fallback: any byte no live
/// entry asks for there, or no byte at all).
pub fn purge_offset(s: &SymbolSet, offset: i32, consumed: Option<u8>) -> Purge {
    let mut survivors = SymbolSet::default();
    let mut transitional = Vec::new();
    for (&entry, syms) in &s.words {
        match syms.get(&offset) {
            Some(&b) if Some(b) == consumed => {
                let mut rest = syms.clone();
                rest.remove(&offset);
                if rest.is_empty() {
                    transitional.push(entry);
                } else {
                    survivors.words.insert(entry, rest);
                }
            }
            Some(_) => {}
            None => {
                survivors.words.insert(entry, syms.clone());
            }
        }
    }
    Purge { survivors, transitional }
}

/// Splits `s` when the entries needing bytes right of the motif and those
/// needing bytes left of it are disjoint and both non-empty. Returns
/// `(pivot, rest)` where the pivot side is the one opposite `offset`.
pub fn find_pivot(s: &SymbolSet, offset: i32) -> Option<(SymbolSet, SymbolSet)> {
    let mut right = SymbolSet::default();
    let mut left = SymbolSet::default();
    for (&entry, syms) in &s.words {
        let has_right = syms.keys().any(|&o| o >= 2);
        let has_left = syms.keys().any(|&o| o <= -1);
        match (has_left, has_right) {
            (true, true) => return None,
            (true, false) => {
                left.words.insert(entry, syms.clone());
            }
            (false, true) => {
                right.words.insert(entry, syms.clone());
            }
            (false, false) => unreachable!("entries without requirements are never live"),
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    Some(if offset >= 2 { (left, right) } else { (right, left) })
}

/// Chooses the offset a state probes. Must return an offset present in `s`.
pub trait ScoringStrategy {
    fn scoring_offset(&self, s: &SymbolSet) -> i32;
}

/// Default heuristic: minimise the total number of surviving entries summed
/// over all outgoing edges (fallback included), then prefer more distinct
/// classes, then the smaller `|offset|`, then the negative side.
#[derive(Clone, Copy, Debug, Default)]
pub struct SurvivorScoring;

impl ScoringStrategy for SurvivorScoring {
    fn scoring_offset(&self, s: &SymbolSet) -> i32 {
        let mut best: Option<((usize, std::cmp::Reverse<usize>, u32, bool), i32)> = None;
        for off in s.offsets() {
            let mut per_byte: BTreeMap<u8, usize> = BTreeMap::new();
            let mut unconstrained = 0usize;
            for syms in s.words.values() {
                match syms.get(&off) {
                    Some(&b) => *per_byte.entry(b).or_default() += 1,
                    None => unconstrained += 1,
                }
            }
            // Each byte edge keeps its own entries plus the unconstrained ones;
            // the fallback keeps only the unconstrained ones.
            let survivors: usize = per_byte.values().map(|n| n + unconstrained).sum::<usize>() + unconstrained;
            let classes = per_byte.len() + usize::from(unconstrained > 0);
            let key = (survivors, std::cmp::Reverse(classes), off.unsigned_abs(), off > 0);
            if best.as_ref().map_or(true, |(k, _)| key < *k) {
                best = Some((key, off));
            }
        }
        best.expect("scoring offset requested for an empty symbol set").1
    }
}

/// Probes the listed offsets first, in order, whenever one is still present;
/// otherwise defers to [`SurvivorScoring`].
#[derive(Clone, Debug, Default)]
pub struct PreferredOffsets(pub Vec<i32>);

impl ScoringStrategy for PreferredOffsets {
    fn scoring_offset(&self, s: &SymbolSet) -> i32 {
        let present = s.offsets();
        self.0
            .iter()
            .copied()
            .find(|o| present.contains(o))
            .unwrap_or_else(|| SurvivorScoring.scoring_offset(s))
    }
}

/// The default scoring offset for `s`.
pub fn calc_scoring_offset(s: &SymbolSet) -> i32 {
    SurvivorScoring.scoring_offset(s)
}

/// A run of bytes a terminal verifies, starting at a relative offset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub offset: i32,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeBody {
    State { offset: i32, edges: Vec<(u8, NodeId)>, fallback: Option<NodeId> },
    Terminal { entry: u32, fragments: Vec<Fragment> },
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    /// Entries confirmed on arrival at this node.
    pub emits: Vec<u32>,
    pub body: NodeBody,
    pub pivot: Option<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    State,
    Transitional,
    Terminal,
}

impl Node {
    pub fn kind(&self) -> NodeKind {
        match (&self.body, self.emits.is_empty()) {
            (_, false) => NodeKind::Transitional,
            (NodeBody::Terminal { .. }, true) => NodeKind::Terminal,
            _ => NodeKind::State,
        }
    }

    /// States and terminals examine input; a bare transitional does not.
    pub fn probes(&self) -> bool {
        !matches!(self.body, NodeBody::Leaf)
    }

    fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        let (edges, fallback): (&[(u8, NodeId)], Option<NodeId>) = match &self.body {
            NodeBody::State { edges, fallback, .. } => (edges, *fallback),
            _ => (&[], None),
        };
        edges.iter().map(|&(_, c)| c).chain(fallback)
    }
}

/// Counters accumulated while walking tries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WalkStats {
    /// States and terminals visited.
    pub probes: u64,
    pub fragment_bytes: u64,
}

/// Decision structure resolving one motif's resolve set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MangledTrie {
    motif: Trace,
    entries: Vec<ResolveEntry>,
    nodes: Vec<Node>,
    root: NodeId,
    max_depth: usize,
    max_word_len: usize,
}

/// Builds and consolidates the trie for `rs` with the default heuristic.
pub fn build_mangled_trie(ps: &PatternSet, rs: &ResolveSet) -> MangledTrie {
    build_mangled_trie_with(ps, rs, &SurvivorScoring)
}

pub fn build_mangled_trie_with(ps: &PatternSet, rs: &ResolveSet, scoring: &dyn ScoringStrategy) -> MangledTrie {
    build_unconsolidated(ps, rs, scoring).consolidate()
}

/// Builds without merging identical subtries.
pub fn build_unconsolidated(ps: &PatternSet, rs: &ResolveSet, scoring: &dyn ScoringStrategy) -> MangledTrie {
    assert!(!rs.is_empty(), "resolve set for {} is empty", rs.motif);
    let symbols = SymbolSet::from_resolve_set(ps, rs);
    let mut builder = Builder { nodes: Vec::new(), scoring };
    let root = builder.subtrie(symbols).expect("non-empty resolve set yields a root");
    let max_word_len = rs.entries.iter().map(|e| ps.get(e.pattern).len()).max().unwrap_or(0);
    let mut trie = MangledTrie {
        motif: rs.motif,
        entries: rs.entries.clone(),
        nodes: builder.nodes,
        root,
        max_depth: 0,
        max_word_len,
    };
    trie.max_depth = trie.compute_depth().expect("built tries are acyclic");
    trie.check_pivots();
    trie
}

struct Builder<'a> {
    nodes: Vec<Node>,
    scoring: &'a dyn ScoringStrategy,
}

impl Builder<'_> {
    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        (self.nodes.len() - 1) as NodeId
    }

    fn subtrie(&mut self, s: SymbolSet) -> Option<NodeId> {
        match s.len() {
            0 => None,
            1 => {
                let (&entry, syms) = s.words.iter().next().unwrap();
                Some(self.push(Node {
                    emits: Vec::new(),
                    body: NodeBody::Terminal { entry: entry as u32, fragments: fragments(syms) },
                    pivot: None,
                }))
            }
            _ => {
                let offset = self.scoring.scoring_offset(&s);
                let bytes = s.bytes_at(offset);
                assert!(!bytes.is_empty(), "scoring offset {offset} is not in the symbol set");
                let mut edges = Vec::with_capacity(bytes.len());
                for b in bytes {
                    if let Some(child) = self.child(&s, offset, Some(b)) {
                        edges.push((b, child));
                    }
                }
                let fallback = self.child(&s, offset, None);
                Some(self.push(Node { emits: Vec::new(), body: NodeBody::State { offset, edges, fallback }, pivot: None }))
            }
        }
    }

    fn child(&mut self, s: &SymbolSet, offset: i32, consumed: Option<u8>) -> Option<NodeId> {
        let Purge { survivors, transitional } = purge_offset(s, offset, consumed);
        let (main, pivot) = match find_pivot(&survivors, offset) {
            Some((pivot, rest)) => (self.subtrie(rest), self.subtrie(pivot)),
            None => (self.subtrie(survivors), None),
        };
        if transitional.is_empty() && pivot.is_none() {
            return main;
        }
        let emits = transitional.into_iter().map(|e| e as u32).collect();
        match main {
            Some(id) => {
                let node = &mut self.nodes[id as usize];
                node.emits = emits;
                node.pivot = pivot;
                Some(id)
            }
            None => Some(self.push(Node { emits, body: NodeBody::Leaf, pivot })),
        }
    }
}

/// Groups contiguous offsets into maximal runs.
fn fragments(syms: &BTreeMap<i32, u8>) -> Vec<Fragment> {
    let mut out: Vec<Fragment> = Vec::new();
    for (&off, &b) in syms {
        match out.last_mut() {
            Some(f) if f.offset + f.bytes.len() as i32 == off => f.bytes.push(b),
            _ => out.push(Fragment { offset: off, bytes: vec![b] }),
        }
    }
    out
}

impl MangledTrie {
    pub fn motif(&self) -> Trace {
        self.motif
    }

    pub fn entries(&self) -> &[ResolveEntry] {
        &self.entries
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Longest walk in probes, main path plus pivot path.
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn max_word_len(&self) -> usize {
        self.max_word_len
    }

    /// `2 * (max_word_len - 2)`.
    pub fn depth_bound(&self) -> usize {
        2 * (self.max_word_len - 2)
    }

    /// Assembles a trie from stored parts, validating every reference.
    pub(crate) fn from_parts(
        motif: Trace,
        entries: Vec<ResolveEntry>,
        nodes: Vec<Node>,
        root: NodeId,
        max_word_len: usize,
    ) -> Result<Self, String> {
        let n = nodes.len() as u32;
        if root >= n {
            return Err(format!("root {root} out of range"));
        }
        for (i, node) in nodes.iter().enumerate() {
            for c in node.children().chain(node.pivot) {
                if c >= n {
                    return Err(format!("node {i} references missing node {c}"));
                }
            }
            if node.emits.iter().any(|&e| e as usize >= entries.len()) {
                return Err(format!("node {i} emits a missing entry"));
            }
            if let NodeBody::Terminal { entry, .. } = node.body {
                if entry as usize >= entries.len() {
                    return Err(format!("terminal {i} references a missing entry"));
                }
            }
        }
        for (i, node) in nodes.iter().enumerate() {
            if let NodeBody::State { edges, .. } = &node.body {
                if edges.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(format!("edges of node {i} are not strictly ascending"));
                }
            }
        }
        let mut trie = MangledTrie { motif, entries, nodes, root, max_depth: 0, max_word_len };
        trie.max_depth = trie.compute_depth().map_err(|id| format!("cycle through node {id}"))?;
        Ok(trie)
    }

    /// Nodes reachable from the root, children before parents; `Err` names a
    /// node on a cycle.
    fn post_order(&self) -> Result<Vec<NodeId>, NodeId> {
        let mut mark = vec![0u8; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((id, done)) = stack.pop() {
            let i = id as usize;
            if done {
                if mark[i] != 2 {
                    mark[i] = 2;
                    order.push(id);
                }
                continue;
            }
            match mark[i] {
                2 => continue,
                1 => return Err(id),
                _ => {}
            }
            mark[i] = 1;
            stack.push((id, true));
            let node = &self.nodes[i];
            for c in node.children().chain(node.pivot) {
                match mark[c as usize] {
                    1 => return Err(c),
                    0 => stack.push((c, false)),
                    _ => {}
                }
            }
        }
        Ok(order)
    }

    fn compute_depth(&self) -> Result<usize, NodeId> {
        let mut depth = vec![0usize; self.nodes.len()];
        for id in self.post_order()? {
            let node = &self.nodes[id as usize];
            let below = node.children().map(|c| depth[c as usize]).max().unwrap_or(0);
            let pivot = node.pivot.map_or(0, |p| depth[p as usize]);
            depth[id as usize] = usize::from(node.probes()) + below + pivot;
        }
        Ok(depth[self.root as usize])
    }

    fn check_pivots(&self) {
        fn walk(t: &MangledTrie, id: NodeId, seen_pivot: bool) {
            let node = t.node(id);
            assert!(!(seen_pivot && node.pivot.is_some()), "two pivots on one path in trie {}", t.motif);
            let seen = seen_pivot || node.pivot.is_some();
            for c in node.children() {
                walk(t, c, seen);
            }
            if let Some(p) = node.pivot {
                walk(t, p, true);
            }
        }
        walk(self, self.root, false);
    }

    /// Merges structurally identical subtries so each is stored once.
    pub fn consolidate(&self) -> MangledTrie {
        let mut out: Vec<Node> = Vec::new();
        let mut interned: HashMap<Node, NodeId> = HashMap::new();
        let mut remap: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let root = self.intern(self.root, &mut out, &mut interned, &mut remap);
        let mut trie = MangledTrie {
            motif: self.motif,
            entries: self.entries.clone(),
            nodes: out,
            root,
            max_depth: 0,
            max_word_len: self.max_word_len,
        };
        trie.max_depth = trie.compute_depth().expect("consolidated tries are acyclic");
        trie
    }

    fn intern(
        &self,
        id: NodeId,
        out: &mut Vec<Node>,
        interned: &mut HashMap<Node, NodeId>,
        remap: &mut Vec<Option<NodeId>>,
    ) -> NodeId {
        if let Some(new) = remap[id as usize] {
            return new;
        }
        let node = &self.nodes[id as usize];
        let body = match &node.body {
            NodeBody::State { offset, edges, fallback } => NodeBody::State {
                offset: *offset,
                edges: edges.iter().map(|&(b, c)| (b, self.intern(c, out, interned, remap))).collect(),
                fallback: fallback.map(|c| self.intern(c, out, interned, remap)),
            },
            other => other.clone(),
        };
        let pivot = node.pivot.map(|p| self.intern(p, out, interned, remap));
        let key = Node { emits: node.emits.clone(), body, pivot };
        let new = *interned.entry(key.clone()).or_insert_with(|| {
            out.push(key);
            (out.len() - 1) as NodeId
        });
        remap[id as usize] = Some(new);
        new
    }

    /// Walks the trie for a motif hit at `pos` and reports every confirmed
    /// entry with its start offset in `input`.
    pub fn resolve(&self, input: &[u8], pos: usize, stats: &mut WalkStats, mut on_match: impl FnMut(&ResolveEntry, usize)) {
        let mut pivot = self.walk(self.root, input, pos, stats, &mut on_match);
        if let Some(p) = pivot.take() {
            self.walk(p, input, pos, stats, &mut on_match);
        }
    }

    /// Follows one path; returns the pivot met on the way, if any.
    #[inline]
    fn walk(
        &self,
        start: NodeId,
        input: &[u8],
        pos: usize,
        stats: &mut WalkStats,
        on_match: &mut impl FnMut(&ResolveEntry, usize),
    ) -> Option<NodeId> {
        let mut pivot = None;
        let mut next = Some(start);
        while let Some(id) = next {
            let node = &self.nodes[id as usize];
            for &e in &node.emits {
                let entry = &self.entries[e as usize];
                if pos >= entry.anchor {
                    on_match(entry, pos - entry.anchor);
                }
            }
            if node.pivot.is_some() {
                pivot = node.pivot;
            }
            next = match &node.body {
                NodeBody::State { offset, edges, fallback } => {
                    stats.probes += 1;
                    match byte_at(input, pos, *offset) {
                        Some(b) => match edges.binary_search_by_key(&b, |&(eb, _)| eb) {
                            Ok(i) => Some(edges[i].1),
                            Err(_) => *fallback,
                        },
                        None => *fallback,
                    }
                }
                NodeBody::Terminal { entry, fragments } => {
                    stats.probes += 1;
                    let entry = &self.entries[*entry as usize];
                    if pos >= entry.anchor && verify(fragments, input, pos, stats) {
                        on_match(entry, pos - entry.anchor);
                    }
                    None
                }
                NodeBody::Leaf => None,
            };
        }
        pivot
    }

    /// Indented text rendering; shared nodes are printed once and referenced by id.
    pub fn render(&self, ps: &PatternSet) -> String {
        let mut out = String::new();
        let mut printed = vec![false; self.nodes.len()];
        let _ = writeln!(
            out,
            "trie {} ({}): {} entries, {} nodes, depth {} (bound {})",
            self.motif,
            self.motif.to_hex(),
            self.entries.len(),
            self.node_count(),
            self.max_depth,
            self.depth_bound()
        );
        self.render_node(ps, self.root, 1, "root", &mut printed, &mut out);
        out
    }

    fn entry_label(&self, ps: &PatternSet, e: u32) -> String {
        let entry = &self.entries[e as usize];
        format!("\"{}\"@{}", escape(&ps.get(entry.pattern).bytes), entry.anchor)
    }

    fn render_node(&self, ps: &PatternSet, id: NodeId, indent: usize, label: &str, printed: &mut [bool], out: &mut String) {
        let pad = "  ".repeat(indent);
        if printed[id as usize] {
            let _ = writeln!(out, "{pad}{label} -> #{id} (shared)");
            return;
        }
        printed[id as usize] = true;
        let node = &self.nodes[id as usize];
        let mut line = format!("{pad}{label} -> #{id}");
        if !node.emits.is_empty() {
            let names: Vec<String> = node.emits.iter().map(|&e| self.entry_label(ps, e)).collect();
            let _ = write!(line, " transitional [{}]", names.join(", "));
        }
        match &node.body {
            NodeBody::State { offset, .. } => {
                let _ = write!(line, " state @{offset}");
            }
            NodeBody::Terminal { entry, fragments } => {
                let frags: Vec<String> =
                    fragments.iter().map(|f| format!("\"{}\"@{}", escape(&f.bytes), f.offset)).collect();
                let _ = write!(line, " terminal {} verify {}", self.entry_label(ps, *entry), frags.join(" "));
            }
            NodeBody::Leaf => {}
        }
        if let Some(p) = node.pivot {
            let _ = write!(line, " pivot #{p}");
        }
        out.push_str(&line);
        out.push('\n');
        if let NodeBody::State { edges, fallback, .. } = &node.body {
            for &(b, c) in edges {
                self.render_node(ps, c, indent + 1, &format!("'{}'", std::ascii::escape_default(b)), printed, out);
            }
            if let Some(c) = fallback {
                self.render_node(ps, *c, indent + 1, "*", printed, out);
            }
        }
        if let Some(p) = node.pivot {
            self.render_node(ps, p, indent + 1, "pivot", printed, out);
        }
    }

    /// Graph description: one `node` or `edge` record per line.
    pub fn render_graph(&self, ps: &PatternSet) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {}", self.motif.to_hex());
        for (id, node) in self.nodes.iter().enumerate() {
            let kind = match node.kind() {
                NodeKind::State => "state",
                NodeKind::Transitional => "transitional",
                NodeKind::Terminal => "terminal",
            };
            let mut detail = String::new();
            match &node.body {
                NodeBody::State { offset, .. } => {
                    let _ = write!(detail, " offset={offset}");
                }
                NodeBody::Terminal { entry, fragments } => {
                    let _ = write!(detail, " entry={}", self.entry_label(ps, *entry));
                    for f in fragments {
                        let _ = write!(detail, " fragment={}:{}", f.offset, crate::pattern::to_hex(&f.bytes));
                    }
                }
                NodeBody::Leaf => {}
            }
            for &e in &node.emits {
                let _ = write!(detail, " emits={}", self.entry_label(ps, e));
            }
            let root = if id as NodeId == self.root { " root" } else { "" };
            let _ = writeln!(out, "node {id} {kind}{root}{detail}");
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if let NodeBody::State { edges, fallback, .. } = &node.body {
                for &(b, c) in edges {
                    let _ = writeln!(out, "edge {id} {c} {b:02x}");
                }
                if let Some(c) = fallback {
                    let _ = writeln!(out, "edge {id} {c} *");
                }
            }
            if let Some(p) = node.pivot {
                let _ = writeln!(out, "edge {id} {p} pivot");
            }
        }
        out
    }
}

#[inline]
fn byte_at(input: &[u8], pos: usize, offset: i32) -> Option<u8> {
    let idx = pos as isize + offset as isize;
    if idx < 0 {
        None
    } else {
        input.get(idx as usize).copied()
    }
}

#[inline]
fn verify(fragments: &[Fragment], input: &[u8], pos: usize, stats: &mut WalkStats) -> bool {
    for f in fragments {
        let start = pos as isize + f.offset as isize;
        if start < 0 {
            return false;
        }
        let start = start as usize;
        let Some(window) = input.get(start..start + f.bytes.len()) else {
            return false;
        };
        stats.fragment_bytes += f.bytes.len() as u64;
        if window != f.bytes.as_slice() {
            return false;
        }
    }
    true
}
