//! Multiple exact string matching with a quasi-stateless fast path.
//!
//! Compilation selects a set of 2-byte *motifs* covering every pattern at an
//! even and at an odd offset, maps each pattern onto one motif per parity and
//! builds a mangled trie per motif. Scanning looks only at 2-byte pairs at even
//! input offsets; a hit walks that motif's trie to confirm whole patterns.
//!
//! ```
//! use bouma2::{Compiler, CostFunction, PatternSet};
//!
//! let ps = PatternSet::new(["herd", "herbal", "upper", "deeper", "error", "ferrarri"])?;
//! let matcher = Compiler::new(CostFunction::unit()).compile(&ps)?;
//! let found: Vec<_> = matcher.scan(b"an upper error").iter().map(|m| (m.start, m.pattern_id)).collect();
//! assert_eq!(found, [(3, 2), (9, 4)]);
//! # Ok::<(), bouma2::Error>(())
//! ```

pub mod artifact;
pub mod assign;
pub mod cli;
pub mod error;
pub mod matcher;
pub mod optimizer;
pub mod oracle;
pub mod pattern;
pub mod stats;
pub mod trie;

use std::time::Duration;

pub use assign::{assign_mappings, Assignment, AssignmentPolicy, Mapping, RankCriterion, ResolveEntry, ResolveSet};
pub use error::{Error, Result};
pub use matcher::{CompiledMatcher, Harvest, Match, MatchCounters, MemoryReport};
pub use optimizer::{CoverageMatrix, MotifSet, SolverOptions, SolverStatus};
pub use oracle::{AcMatcher, NaiveMatcher};
pub use pattern::{Parity, PatternFile, PatternSet, Trace};
pub use stats::{CostFunction, CostKind, StatsMode, TraceStats};
pub use trie::{MangledTrie, PreferredOffsets, ScoringStrategy, SurvivorScoring};

/// How the motif set is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Solver {
    /// Branch and bound; falls back to the best incumbent on timeout.
    #[default]
    Exact,
    Greedy,
    /// The first two traces of every pattern, no optimisation.
    Fallback,
}

/// Motif selection and assignment, before tries are built.
#[derive(Clone, Debug)]
pub struct Plan {
    pub motif_set: MotifSet,
    pub assignment: Assignment,
}

/// Compilation pipeline: motif selection, assignment, trie construction.
pub struct Compiler {
    cost: CostFunction,
    solver: Solver,
    options: SolverOptions,
    policy: AssignmentPolicy,
    scoring: Box<dyn ScoringStrategy + Send + Sync>,
}

impl Compiler {
    pub fn new(cost: CostFunction) -> Self {
        Compiler {
            cost,
            solver: Solver::Exact,
            options: SolverOptions::default(),
            policy: AssignmentPolicy::default(),
            scoring: Box::new(SurvivorScoring),
        }
    }

    pub fn solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn time_limit(mut self, limit: Duration) -> Self {
        self.options.time_limit = limit;
        self
    }

    pub fn options(mut self, options: SolverOptions) -> Self {
        self.options = options;
        self
    }

    pub fn policy(mut self, policy: AssignmentPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn scoring(mut self, scoring: impl ScoringStrategy + Send + Sync + 'static) -> Self {
        self.scoring = Box::new(scoring);
        self
    }

    pub fn cost_function(&self) -> &CostFunction {
        &self.cost
    }

    pub fn plan(&self, ps: &PatternSet) -> Result<Plan> {
        let motif_set = match self.solver {
            Solver::Fallback => optimizer::fallback_motifs(ps),
            solver => {
                let cm = CoverageMatrix::build(ps);
                let costs = self.cost.costs(cm.traces(), ps)?;
                if solver == Solver::Exact {
                    optimizer::solve_exact(&cm, &costs, &self.options)
                } else {
                    optimizer::solve_greedy(&cm, &costs)
                }
            }
        };
        log::info!(
            "motif set: {} motifs, objective {}, {} ({} nodes)",
            motif_set.len(),
            motif_set.objective,
            motif_set.status,
            motif_set.nodes
        );
        let assignment = assign_mappings(ps, &motif_set, &self.cost, &self.policy)?;
        Ok(Plan { motif_set, assignment })
    }

    pub fn compile(&self, ps: &PatternSet) -> Result<CompiledMatcher> {
        Ok(self.compile_with_plan(ps)?.1)
    }

    pub fn compile_with_plan(&self, ps: &PatternSet) -> Result<(Plan, CompiledMatcher)> {
        let plan = self.plan(ps)?;
        let cm = CompiledMatcher::from_assignment(ps, &plan.assignment, self.scoring.as_ref())?;
        log::info!("compiled {} tries", cm.tries().len());
        Ok((plan, cm))
    }
}

/// Compiles with unit costs and the exact solver.
pub fn compile(ps: &PatternSet) -> Result<CompiledMatcher> {
    Compiler::new(CostFunction::unit()).compile(ps)
}
