//! Compare the motif sets chosen under each cost function and solver.

use bouma2::optimizer::{fallback_motifs, solve_exact, solve_greedy};
use bouma2::{CostFunction, CoverageMatrix, PatternSet, SolverOptions, StatsMode, TraceStats};

fn show(label: &str, ms: &bouma2::MotifSet) {
    let names: Vec<String> = ms.motifs.iter().map(|t| t.to_string()).collect();
    println!("{label:<24} {:<9} cost {:>8.4}  {{{}}}", ms.status.to_string(), ms.objective, names.join(", "));
}

fn main() -> bouma2::Result<()> {
    let ps = PatternSet::new(["herd", "herbal", "upper", "deeper", "error", "ferrarri"])?;
    let cm = CoverageMatrix::build(&ps);
    println!("{} patterns, {} distinct traces, {} covering rows\n", ps.len(), cm.traces().len(), cm.row_count());

    let sample = b"the rain in spain falls mainly on the plain; a herd of upper decks ".repeat(40);
    let costs = [
        ("min", CostFunction::unit()),
        ("rare-strings", CostFunction::rare_in_strings()),
        ("rare-input", CostFunction::rare_in_input(TraceStats::collect(&sample, StatsMode::EvenAligned))),
    ];
    for (name, cost) in &costs {
        let c = cost.costs(cm.traces(), &ps)?;
        show(&format!("{name} / exact"), &solve_exact(&cm, &c, &SolverOptions::default()));
        show(&format!("{name} / greedy"), &solve_greedy(&cm, &c));
    }
    show("fallback", &fallback_motifs(&ps));
    Ok(())
}
