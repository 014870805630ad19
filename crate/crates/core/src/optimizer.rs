//! Motif selection as a weighted 0/1 covering program.
//!
//! Every unique pattern contributes two rows, one per parity; a trace covers
//! row `(w, p)` when it occurs in `w` at an offset of parity `p`. A motif set
//! is any set of traces covering all rows, and the optimizer looks for the
//! cheapest one under a [`CostFunction`](crate::stats::CostFunction).
//!
//! The exact solver is a best-first branch-and-bound. Before branching it
//! includes every column of non-positive cost (such a column never worsens the
//! objective), splits the remaining rows into independent components, and
//! drops dominated rows and columns inside each component. The lower bound is
//! the cost so far plus a packing of uncovered rows with pairwise disjoint
//! candidate sets, each contributing its cheapest candidate.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

use crate::pattern::{Parity, PatternSet, Trace};

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(30);
const DEFAULT_NODE_LIMIT: usize = 2_000_000;
const EPS: f64 = 1e-9;

/// Row/column incidence of the covering program.
#[derive(Clone, Debug)]
pub struct CoverageMatrix {
    traces: Vec<Trace>,
    patterns: usize,
    row_cols: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
}

impl CoverageMatrix {
    /// Builds the matrix for `ps`. Row `2 * pattern + parity`.
    pub fn build(ps: &PatternSet) -> Self {
        let traces: Vec<Trace> = ps.trace_set().into_iter().collect();
        let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); traces.len()];
        let mut row_cols: Vec<Vec<u32>> = vec![Vec::new(); 2 * ps.len()];
        for o in ps.occurrences() {
            let col = traces.binary_search(&o.trace).expect("trace set covers every occurrence");
            let row = 2 * o.pattern + Parity::of(o.offset).index();
            row_cols[row].push(col as u32);
        }
        for (row, cols) in row_cols.iter_mut().enumerate() {
            cols.sort_unstable();
            cols.dedup();
            for &c in cols.iter() {
                col_rows[c as usize].push(row as u32);
            }
        }
        CoverageMatrix { traces, patterns: ps.len(), row_cols, col_rows }
    }

    /// Columns, ascending by trace bytes.
    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn row_count(&self) -> usize {
        self.row_cols.len()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns
    }

    pub fn row(pattern: usize, parity: Parity) -> usize {
        2 * pattern + parity.index()
    }

    /// Traces covering a row.
    pub fn candidates(&self, pattern: usize, parity: Parity) -> impl Iterator<Item = Trace> + '_ {
        self.row_cols[Self::row(pattern, parity)].iter().map(|&c| self.traces[c as usize])
    }

    pub fn column(&self, t: Trace) -> Option<usize> {
        self.traces.binary_search(&t).ok()
    }

    /// Rows covered by the column of `t`, as `(pattern, parity)`.
    pub fn covered_by(&self, t: Trace) -> Vec<(usize, Parity)> {
        self.column(t)
            .map(|c| {
                self.col_rows[c]
                    .iter()
                    .map(|&r| (r as usize / 2, if r % 2 == 0 { Parity::Even } else { Parity::Odd }))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Whether `motifs` covers every row.
    pub fn is_cover<'a>(&self, motifs: impl IntoIterator<Item = &'a Trace>) -> bool {
        let mut covered = vec![false; self.row_count()];
        for t in motifs {
            if let Some(c) = self.column(*t) {
                for &r in &self.col_rows[c] {
                    covered[r as usize] = true;
                }
            }
        }
        covered.into_iter().all(|c| c)
    }

    /// Total cost of `motifs`; `costs` is indexed like [`traces`](Self::traces).
    pub fn objective<'a>(&self, costs: &[f64], motifs: impl IntoIterator<Item = &'a Trace>) -> f64 {
        motifs.into_iter().filter_map(|t| self.column(*t)).map(|c| costs[c]).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    /// The search proved optimality.
    Optimal,
    /// The time or node budget ran out; the best incumbent is returned.
    FeasibleTimeout,
    /// Produced by the greedy heuristic.
    Greedy,
    /// Produced by the first-two-offsets construction.
    Fallback,
}

impl std::fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::FeasibleTimeout => "feasible_timeout",
            SolverStatus::Greedy => "greedy",
            SolverStatus::Fallback => "fallback",
        })
    }
}

/// A selected motif set.
#[derive(Clone, Debug, PartialEq)]
pub struct MotifSet {
    pub motifs: BTreeSet<Trace>,
    /// Cost of `motifs`.
    pub objective: f64,
    /// Objective of the covering program before redundant motifs were pruned.
    /// Differs from `objective` only when some costs are non-positive.
    pub solver_objective: f64,
    pub status: SolverStatus,
    /// Branch-and-bound nodes expanded; zero for the heuristics.
    pub nodes: u64,
}

impl MotifSet {
    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }

    pub fn contains(&self, t: &Trace) -> bool {
        self.motifs.contains(t)
    }
}

/// Search budget for [`solve_exact`].
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub time_limit: Duration,
    /// Cap on branch-and-bound nodes kept alive, per component.
    pub node_limit: usize,
    /// Skip pruning of redundant motifs after solving.
    pub keep_redundant: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { time_limit: DEFAULT_TIME_LIMIT, node_limit: DEFAULT_NODE_LIMIT, keep_redundant: false }
    }
}

impl SolverOptions {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        SolverOptions { time_limit, ..Default::default() }
    }
}

/// The first-pair ∪ second-pair construction: always a motif set.
pub fn fallback_motifs(ps: &PatternSet) -> MotifSet {
    let motifs: BTreeSet<Trace> =
        ps.patterns().iter().flat_map(|p| [Trace::at(&p.bytes, 0), Trace::at(&p.bytes, 1)]).collect();
    let n = motifs.len() as f64;
    MotifSet { motifs, objective: n, solver_objective: n, status: SolverStatus::Fallback, nodes: 0 }
}

/// Weighted greedy set cover: repeatedly take the column with the lowest cost
/// per newly covered row.
pub fn solve_greedy(cm: &CoverageMatrix, costs: &[f64]) -> MotifSet {
    assert_eq!(costs.len(), cm.traces.len());
    let rows: Vec<u32> = (0..cm.row_count() as u32).collect();
    let cols: Vec<u32> = (0..cm.traces.len() as u32).collect();
    let chosen = greedy_cover(cm, costs, &rows, &cols);
    finish(cm, costs, chosen, SolverStatus::Greedy, 0, false)
}

/// Exact branch-and-bound under a time budget. On timeout the best incumbent
/// (seeded by greedy) is returned with [`SolverStatus::FeasibleTimeout`].
pub fn solve_exact(cm: &CoverageMatrix, costs: &[f64], opts: &SolverOptions) -> MotifSet {
    assert_eq!(costs.len(), cm.traces.len());
    let start = Instant::now();
    let deadline = start + opts.time_limit;

    let mut chosen: Vec<u32> = (0..costs.len() as u32).filter(|&c| costs[c as usize] <= 0.0).collect();
    let mut covered = vec![false; cm.row_count()];
    for &c in &chosen {
        for &r in &cm.col_rows[c as usize] {
            covered[r as usize] = true;
        }
    }

    let mut components = components(cm, &covered);
    components.sort_by_key(|rows| (rows.len(), rows[0]));

    let mut status = SolverStatus::Optimal;
    let mut nodes = 0u64;
    for rows in &components {
        let sub = Component::new(cm, costs, rows);
        let result = sub.solve(deadline, opts.node_limit, start);
        nodes += result.nodes;
        if !result.optimal {
            status = SolverStatus::FeasibleTimeout;
        }
        chosen.extend(result.columns);
    }
    log::debug!(
        "exact solve: {} components, {nodes} nodes, {} ms, status {status}",
        components.len(),
        start.elapsed().as_millis()
    );
    finish(cm, costs, chosen, status, nodes, opts.keep_redundant)
}

fn finish(
    cm: &CoverageMatrix,
    costs: &[f64],
    mut chosen: Vec<u32>,
    status: SolverStatus,
    nodes: u64,
    keep_redundant: bool,
) -> MotifSet {
    chosen.sort_unstable();
    chosen.dedup();
    let solver_objective = chosen.iter().map(|&c| costs[c as usize]).sum();
    if !keep_redundant {
        chosen = prune(cm, costs, chosen);
    }
    let objective = chosen.iter().map(|&c| costs[c as usize]).sum();
    MotifSet {
        motifs: chosen.iter().map(|&c| cm.traces[c as usize]).collect(),
        objective,
        solver_objective,
        status,
        nodes,
    }
}

/// Drops motifs whose removal keeps every row covered, most expensive first.
fn prune(cm: &CoverageMatrix, costs: &[f64], chosen: Vec<u32>) -> Vec<u32> {
    let mut count = vec![0u32; cm.row_count()];
    for &c in &chosen {
        for &r in &cm.col_rows[c as usize] {
            count[r as usize] += 1;
        }
    }
    let mut order = chosen.clone();
    order.sort_by(|&a, &b| costs[b as usize].total_cmp(&costs[a as usize]).then(a.cmp(&b)));
    let mut keep: BTreeSet<u32> = chosen.into_iter().collect();
    for c in order {
        let rows = &cm.col_rows[c as usize];
        if rows.iter().all(|&r| count[r as usize] >= 2) {
            for &r in rows {
                count[r as usize] -= 1;
            }
            keep.remove(&c);
        }
    }
    keep.into_iter().collect()
}

fn greedy_cover(cm: &CoverageMatrix, costs: &[f64], rows: &[u32], cols: &[u32]) -> Vec<u32> {
    let mut uncovered: BTreeSet<u32> = rows.iter().copied().collect();
    let mut chosen = Vec::new();
    let mut used = vec![false; cm.traces.len()];
    while !uncovered.is_empty() {
        let mut best: Option<(f64, u32)> = None;
        for &c in cols {
            if used[c as usize] {
                continue;
            }
            let fresh = cm.col_rows[c as usize].iter().filter(|r| uncovered.contains(r)).count();
            if fresh == 0 {
                continue;
            }
            let ratio = costs[c as usize] / fresh as f64;
            if best.map_or(true, |(b, _)| ratio < b - EPS) {
                best = Some((ratio, c));
            }
        }
        let (_, c) = best.expect("every row has a candidate column");
        used[c as usize] = true;
        for r in &cm.col_rows[c as usize] {
            uncovered.remove(r);
        }
        chosen.push(c);
    }
    chosen
}

/// Groups uncovered rows that are linked through shared columns.
fn components(cm: &CoverageMatrix, covered: &[bool]) -> Vec<Vec<u32>> {
    let n = cm.row_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for rows in &cm.col_rows {
        let live: Vec<u32> = rows.iter().copied().filter(|&r| !covered[r as usize]).collect();
        for w in live.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b) as usize] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for r in 0..n as u32 {
        if !covered[r as usize] {
            let root = find(&mut parent, r);
            groups.entry(root).or_default().push(r);
        }
    }
    groups.into_values().collect()
}

struct SubResult {
    columns: Vec<u32>,
    optimal: bool,
    nodes: u64,
}

/// One independent piece of the covering program, re-indexed locally.
struct Component {
    /// Local column -> global column.
    cols: Vec<u32>,
    cost: Vec<f64>,
    row_cols: Vec<Vec<u32>>,
    col_rows: Vec<Vec<u32>>,
    incumbent: Vec<u32>,
}

impl Component {
    fn new(cm: &CoverageMatrix, costs: &[f64], rows: &[u32]) -> Self {
        // Columns touching these rows; all have positive cost here.
        let mut cols: Vec<u32> = rows.iter().flat_map(|&r| cm.row_cols[r as usize].iter().copied()).collect();
        cols.sort_unstable();
        cols.dedup();
        let incumbent_global = greedy_cover(cm, costs, rows, &cols);

        let row_local = |r: u32| rows.binary_search(&r).ok();
        let mut col_rows: Vec<Vec<u32>> = cols
            .iter()
            .map(|&c| cm.col_rows[c as usize].iter().filter_map(|&r| row_local(r).map(|x| x as u32)).collect())
            .collect();
        let cost: Vec<f64> = cols.iter().map(|&c| costs[c as usize]).collect();

        // Column dominance: a column whose rows are a subset of a no-more-expensive
        // column's rows can be dropped without losing an optimum.
        let mut row_cols: Vec<Vec<u32>> = vec![Vec::new(); rows.len()];
        for (c, rs) in col_rows.iter().enumerate() {
            for &r in rs {
                row_cols[r as usize].push(c as u32);
            }
        }
        let mut alive = vec![true; cols.len()];
        for a in 0..cols.len() {
            let first = col_rows[a][0];
            for &b in &row_cols[first as usize] {
                let b = b as usize;
                if a == b || !alive[b] {
                    continue;
                }
                let ca = cost[a];
                let cb = cost[b];
                if cb > ca + EPS || !is_subset(&col_rows[a], &col_rows[b]) {
                    continue;
                }
                let same = col_rows[a].len() == col_rows[b].len() && (cb - ca).abs() <= EPS;
                if !same || b < a {
                    alive[a] = false;
                    break;
                }
            }
        }
        for rs in row_cols.iter_mut() {
            rs.retain(|&c| alive[c as usize]);
        }

        // Row dominance: a row whose candidates include all of another row's
        // candidates is implied by it.
        let mut row_alive = vec![true; rows.len()];
        for r2 in 0..rows.len() {
            'outer: for &c in &row_cols[r2] {
                for &r1 in &col_rows[c as usize] {
                    let r1 = r1 as usize;
                    if r1 == r2 || !row_alive[r1] || row_cols[r1].len() > row_cols[r2].len() {
                        continue;
                    }
                    if is_subset(&row_cols[r1], &row_cols[r2])
                        && (row_cols[r1].len() < row_cols[r2].len() || r1 < r2)
                    {
                        row_alive[r2] = false;
                        break 'outer;
                    }
                }
            }
        }
        for (c, rs) in col_rows.iter_mut().enumerate() {
            if alive[c] {
                rs.retain(|&r| row_alive[r as usize]);
            } else {
                rs.clear();
            }
        }
        let row_cols: Vec<Vec<u32>> =
            row_cols.into_iter().enumerate().map(|(r, cs)| if row_alive[r] { cs } else { Vec::new() }).collect();

        let incumbent = incumbent_global.iter().map(|g| cols.binary_search(g).unwrap() as u32).collect();
        Component { cols, cost, row_cols, col_rows, incumbent }
    }

    fn solve(&self, deadline: Instant, node_limit: usize, start: Instant) -> SubResult {
        let live_rows: Vec<u32> =
            (0..self.row_cols.len() as u32).filter(|&r| !self.row_cols[r as usize].is_empty()).collect();
        let mut best_cols = self.incumbent.clone();
        let mut best = best_cols.iter().map(|&c| self.cost[c as usize]).sum::<f64>();

        let mut arena: Vec<Decision> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Open { bound: 0.0, seq, decision: NO_DECISION });
        let mut nodes = 0u64;
        let mut optimal = true;
        let ncols = self.cost.len();
        let nrows = self.row_cols.len();

        let mut state = NodeState {
            decided: vec![Decided::Free; ncols],
            cover: vec![0u32; nrows],
        };

        while let Some(open) = heap.pop() {
            if open.bound >= best - EPS {
                // Best-first: everything left is at least as bad.
                break;
            }
            nodes += 1;
            if nodes % 256 == 0 && Instant::now() >= deadline || arena.len() >= node_limit {
                optimal = false;
                break;
            }

            state.reset();
            let mut d = open.decision;
            while d != NO_DECISION {
                let dec = arena[d as usize];
                state.decided[dec.col as usize] = if dec.include { Decided::In } else { Decided::Out };
                d = dec.parent;
            }
            let mut cost = 0.0;
            for c in 0..ncols {
                if state.decided[c] == Decided::In {
                    cost += self.cost[c];
                    for &r in &self.col_rows[c] {
                        state.cover[r as usize] += 1;
                    }
                }
            }

            // Unit propagation: a row with a single remaining candidate forces it.
            let mut feasible = true;
            loop {
                let mut forced = None;
                for &r in &live_rows {
                    if state.cover[r as usize] > 0 {
                        continue;
                    }
                    let mut free = self.row_cols[r as usize].iter().filter(|&&c| state.decided[c as usize] == Decided::Free);
                    match (free.next(), free.next()) {
                        (None, _) => {
                            feasible = false;
                            break;
                        }
                        (Some(&c), None) => {
                            forced = Some(c);
                            break;
                        }
                        _ => {}
                    }
                }
                match (feasible, forced) {
                    (true, Some(c)) => {
                        state.decided[c as usize] = Decided::In;
                        cost += self.cost[c as usize];
                        for &r in &self.col_rows[c as usize] {
                            state.cover[r as usize] += 1;
                        }
                    }
                    _ => break,
                }
            }
            if !feasible || cost >= best - EPS {
                continue;
            }

            let uncovered: Vec<u32> = live_rows.iter().copied().filter(|&r| state.cover[r as usize] == 0).collect();
            if uncovered.is_empty() {
                best = cost;
                best_cols = (0..ncols as u32).filter(|&c| state.decided[c as usize] == Decided::In).collect();
                log::debug!(
                    "incumbent objective={best} nodes={nodes} elapsed_ms={}",
                    start.elapsed().as_millis()
                );
                continue;
            }

            let bound = cost + self.packing_bound(&uncovered, &state.decided);
            if bound >= best - EPS {
                continue;
            }

            // Branch on the free column with the best coverage per unit cost.
            let mut branch: Option<(f64, u32)> = None;
            for c in 0..ncols as u32 {
                if state.decided[c as usize] != Decided::Free {
                    continue;
                }
                let fresh = self.col_rows[c as usize].iter().filter(|&&r| state.cover[r as usize] == 0).count();
                if fresh == 0 {
                    continue;
                }
                let score = fresh as f64 / self.cost[c as usize];
                if branch.map_or(true, |(s, _)| score > s + EPS) {
                    branch = Some((score, c));
                }
            }
            let Some((_, col)) = branch else { continue };

            for include in [false, true] {
                arena.push(Decision { parent: open.decision, col, include });
                seq += 1;
                heap.push(Open { bound, seq, decision: arena.len() as u32 - 1 });
            }
        }

        SubResult { columns: best_cols.iter().map(|&c| self.cols[c as usize]).collect(), optimal, nodes }
    }

    fn packing_bound(&self, uncovered: &[u32], decided: &[Decided]) -> f64 {
        let mut rows: Vec<(f64, u32)> = uncovered
            .iter()
            .map(|&r| {
                let m = self.row_cols[r as usize]
                    .iter()
                    .filter(|&&c| decided[c as usize] == Decided::Free)
                    .map(|&c| self.cost[c as usize])
                    .fold(f64::INFINITY, f64::min);
                (m, r)
            })
            .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut used = vec![false; self.cost.len()];
        let mut total = 0.0;
        for (m, r) in rows {
            let cands = &self.row_cols[r as usize];
            if cands.iter().any(|&c| used[c as usize]) {
                continue;
            }
            for &c in cands {
                used[c as usize] = true;
            }
            total += m;
        }
        total
    }
}

fn is_subset(a: &[u32], b: &[u32]) -> bool {
    // Both sorted ascending.
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Decided {
    Free,
    In,
    Out,
}

struct NodeState {
    decided: Vec<Decided>,
    cover: Vec<u32>,
}

impl NodeState {
    fn reset(&mut self) {
        self.decided.fill(Decided::Free);
        self.cover.fill(0);
    }
}

const NO_DECISION: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Decision {
    parent: u32,
    col: u32,
    include: bool,
}

/// Open node: smallest bound first, then most recently created.
struct Open {
    bound: f64,
    seq: u64,
    decision: u32,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(self.seq.cmp(&other.seq))
    }
}
