//! Build the trie for one motif and print its resolve set, nodes and a walk.

use bouma2::assign::render_resolve_set;
use bouma2::optimizer::solve_exact;
use bouma2::trie::{build_mangled_trie, WalkStats};
use bouma2::{assign_mappings, AssignmentPolicy, CostFunction, CoverageMatrix, PatternSet, SolverOptions, Trace};

fn main() -> bouma2::Result<()> {
    let words = ["herd", "herbal", "upper", "deeper", "error", "ferrarri"];
    let ps = PatternSet::new(words)?;
    let cost = CostFunction::unit();
    let cm = CoverageMatrix::build(&ps);
    let ms = solve_exact(&cm, &cost.costs(cm.traces(), &ps)?, &SolverOptions::default());
    let assignment = assign_mappings(&ps, &ms, &cost, &AssignmentPolicy::default())?;

    let motif = Trace(*b"er");
    let rs = assignment.resolve_set(motif).expect("er is selected for this pattern set");
    print!("{}", render_resolve_set(&ps, rs));
    let trie = build_mangled_trie(&ps, rs);
    println!("\n{} nodes, depth {} (bound {})\n", trie.node_count(), trie.max_depth(), trie.depth_bound());
    print!("{}", trie.render(&ps));

    let input = b"an upper error";
    println!();
    for pos in [6, 9] {
        let mut stats = WalkStats::default();
        trie.resolve(input, pos, &mut stats, |e, start| {
            println!("walk at {pos} reports {} at {start}", words[e.pattern]);
        });
        println!("  {} probes, {} fragment bytes", stats.probes, stats.fragment_bytes);
    }
    Ok(())
}
