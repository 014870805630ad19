//! Reduces a motif set to exactly one even and one odd mapping per pattern and
//! groups the mappings into per-motif resolve sets.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::optimizer::MotifSet;
use crate::pattern::{anchors, Parity, PatternSet, Trace};
use crate::stats::CostFunction;

/// Pattern `pattern` is hashed to `motif`, which it contains at `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mapping {
    pub pattern: usize,
    pub parity: Parity,
    pub motif: Trace,
    pub anchor: usize,
}

/// One `(pattern, anchor)` pair mapped onto a motif.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResolveEntry {
    pub pattern: usize,
    pub anchor: usize,
}

/// All entries hashed onto one motif.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolveSet {
    pub motif: Trace,
    pub entries: Vec<ResolveEntry>,
}

impl ResolveSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Tie-breaking criteria for choosing among a word's candidate mappings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankCriterion {
    /// Cheaper motif under the active cost function.
    Cost,
    /// Motif with the smaller resolve set so far.
    Load,
    /// Anchor closer to the middle of the word.
    Centered,
    /// Smaller motif bytes.
    MotifBytes,
}

/// Ordered ranking criteria. Candidates left tied after all of them are
/// ordered by motif bytes, then anchor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentPolicy {
    pub criteria: Vec<RankCriterion>,
}

impl Default for AssignmentPolicy {
    fn default() -> Self {
        AssignmentPolicy {
            criteria: vec![RankCriterion::Cost, RankCriterion::Load, RankCriterion::Centered, RankCriterion::MotifBytes],
        }
    }
}

impl AssignmentPolicy {
    pub fn new(criteria: impl Into<Vec<RankCriterion>>) -> Self {
        AssignmentPolicy { criteria: criteria.into() }
    }
}

/// Result of [`assign_mappings`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    /// Two per unique pattern: `mappings[2 * p]` is even, `mappings[2 * p + 1]` odd.
    pub mappings: Vec<Mapping>,
    /// Non-empty resolve sets, keyed by motif.
    pub resolve_sets: BTreeMap<Trace, ResolveSet>,
}

impl Assignment {
    pub fn mapping(&self, pattern: usize, parity: Parity) -> &Mapping {
        &self.mappings[2 * pattern + parity.index()]
    }

    pub fn resolve_set(&self, motif: Trace) -> Option<&ResolveSet> {
        self.resolve_sets.get(&motif)
    }

    /// Sum of resolve-set sizes; always twice the number of unique patterns.
    pub fn entry_count(&self) -> usize {
        self.resolve_sets.values().map(ResolveSet::len).sum()
    }
}

/// Picks one even and one odd `(motif, anchor)` per pattern, visiting patterns
/// in order, even parity first.
pub fn assign_mappings(
    ps: &PatternSet,
    ms: &MotifSet,
    cf: &CostFunction,
    policy: &AssignmentPolicy,
) -> Result<Assignment> {
    let motifs: Vec<Trace> = ms.motifs.iter().copied().collect();
    let cost: HashMap<Trace, f64> = motifs.iter().copied().zip(cf.costs(&motifs, ps)?).collect();
    let mut load: HashMap<Trace, usize> = HashMap::new();
    let mut mappings = Vec::with_capacity(2 * ps.len());
    let mut resolve_sets: BTreeMap<Trace, ResolveSet> = BTreeMap::new();

    for (pattern, p) in ps.patterns().iter().enumerate() {
        let centre = p.len() / 2;
        for parity in Parity::BOTH {
            let mut candidates: Vec<(Trace, usize)> = Vec::new();
            for &m in &motifs {
                candidates.extend(anchors(&p.bytes, m).filter(|&l| Parity::of(l) == parity).map(|l| (m, l)));
            }
            let best = candidates
                .into_iter()
                .min_by(|&(ma, la), &(mb, lb)| {
                    let mut ord = std::cmp::Ordering::Equal;
                    for criterion in &policy.criteria {
                        ord = ord.then_with(|| match criterion {
                            RankCriterion::Cost => cost[&ma].total_cmp(&cost[&mb]),
                            RankCriterion::Load => {
                                load.get(&ma).copied().unwrap_or(0).cmp(&load.get(&mb).copied().unwrap_or(0))
                            }
                            RankCriterion::Centered => la.abs_diff(centre).cmp(&lb.abs_diff(centre)),
                            RankCriterion::MotifBytes => ma.cmp(&mb),
                        });
                    }
                    ord.then(ma.cmp(&mb)).then(la.cmp(&lb))
                })
                .ok_or(Error::InfeasibleMotifSet { pattern, parity })?;
            let (motif, anchor) = best;
            *load.entry(motif).or_default() += 1;
            mappings.push(Mapping { pattern, parity, motif, anchor });
            resolve_sets
                .entry(motif)
                .or_insert_with(|| ResolveSet { motif, entries: Vec::new() })
                .entries
                .push(ResolveEntry { pattern, anchor });
        }
    }
    Ok(Assignment { mappings, resolve_sets })
}

/// Renders a resolve set with words aligned on the motif and a caret line,
/// one word per line.
pub fn render_resolve_set(ps: &PatternSet, rs: &ResolveSet) -> String {
    let lead = rs.entries.iter().map(|e| e.anchor).max().unwrap_or(0);
    let mut out = String::new();
    for e in &rs.entries {
        out.push_str(&" ".repeat(lead - e.anchor));
        out.push_str(&printable(&ps.get(e.pattern).bytes));
        out.push('\n');
    }
    out.push_str(&" ".repeat(lead));
    out.push_str("^^\n");
    out
}

fn printable(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| if (0x20..0x7f).contains(&b) { b as char } else { '.' }).collect()
}
