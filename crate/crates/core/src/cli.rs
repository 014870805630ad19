//! The `b2` command line: compile, scan, stats, bench and explain.
//!
//! Data goes to standard output; diagnostics go to standard error, with
//! verbosity from the `B2_LOG` environment variable.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::assign::{render_resolve_set, ResolveSet};
use crate::error::{Error, Result};
use crate::matcher::{CompiledMatcher, MatchCounters};
use crate::oracle::{AcMatcher, NaiveMatcher};
use crate::pattern::{to_hex, PatternFile, PatternSet, Trace};
use crate::stats::{CostFunction, CostKind, StatsMode, TraceStats};
use crate::{Compiler, Solver};

#[derive(Debug, Parser)]
#[command(name = "b2", version, about = "Multiple exact string matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select motifs, build tries and write a compiled artifact.
    Compile(CompileArgs),
    /// Report every pattern occurrence in an input file.
    Scan(ScanArgs),
    /// Collect 2-byte pair statistics from an input file.
    Stats(StatsArgs),
    /// Compare throughput of the three cost variants against a baseline.
    Bench(BenchArgs),
    /// Print resolve sets and tries stored in an artifact.
    Explain(ExplainArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    Min,
    RareStrings,
    RareInput,
}

impl From<CostArg> for CostKind {
    fn from(c: CostArg) -> Self {
        match c {
            CostArg::Min => CostKind::Unit,
            CostArg::RareStrings => CostKind::RareInStrings,
            CostArg::RareInput => CostKind::RareInInput,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exact,
    Greedy,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Exact => Solver::Exact,
            SolverArg::Greedy => Solver::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Even,
    Sliding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Naive,
    Ac,
}

#[derive(Debug, clap::Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    #[arg(long, value_enum, default_value = "min")]
    pub cost: CostArg,
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: SolverArg,
    /// Solver time limit in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub time_limit: f64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    #[arg(long)]
    pub counters: bool,
}

#[derive(Debug, clap::Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "even")]
    pub mode: ModeArg,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "ac")]
    pub baseline: Baseline,
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Solver time limit in seconds, per variant.
    #[arg(long, default_value_t = 30.0)]
    pub time_limit: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub solver: SolverArg,
}

#[derive(Debug, clap::Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Restrict output to one motif, given as 4 hex digits.
    #[arg(long)]
    pub trie: Option<String>,
    /// Also write a node/edge graph description to this file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PatternTooShort(_) => 2,
        Error::InfeasibleMotifSet { .. } | Error::InconsistentPlan(_) => 3,
        _ => 1,
    }
}

/// Entry point for the binary: parses `std::env::args`, runs, returns the exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("B2_LOG", "warn")).try_init();
    run_args(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Compile(a) => cmd_compile(&a, out),
        Command::Scan(a) => cmd_scan(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Explain(a) => cmd_explain(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "b2: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a pattern file into a pattern set.
pub fn load_patterns(path: &Path) -> Result<PatternSet> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::PatternFile {
        line: 0,
        msg: format!("not valid UTF-8 ({e}); use \\xNN escapes for raw bytes"),
    })?;
    PatternFile::parse(&text)?.into_pattern_set()
}

fn seconds(s: f64) -> Duration {
    Duration::try_from_secs_f64(s.max(0.0)).unwrap_or(Duration::MAX)
}

pub fn cmd_compile(a: &CompileArgs, out: &mut dyn Write) -> Result<()> {
    let ps = load_patterns(&a.patterns)?;
    let stats = match &a.stats {
        Some(p) => Some(TraceStats::from_json(
            &String::from_utf8(read(p)?).map_err(|e| Error::StatsFormat(e.to_string()))?,
        )?),
        None => None,
    };
    let cost = CostFunction::new(a.cost.into(), stats)?;
    let compiler = Compiler::new(cost).solver(a.solver.into()).time_limit(seconds(a.time_limit));
    let (plan, cm) = compiler.compile_with_plan(&ps)?;
    cm.save(&a.out)?;

    let mem = cm.memory_report();
    let mut s = String::new();
    let _ = writeln!(s, "patterns: {} ({} unique)", ps.input_count(), ps.len());
    let _ = writeln!(s, "motifs: {} ({} in use)", plan.motif_set.len(), cm.tries().len());
    let _ = writeln!(s, "objective: {}", plan.motif_set.objective);
    let _ = writeln!(s, "solver: {}", plan.motif_set.status);
    for t in cm.tries() {
        let _ = writeln!(
            s,
            "  trie {} {}: {} entries, {} nodes, depth {}",
            t.motif().to_hex(),
            t.motif(),
            t.entries().len(),
            t.node_count(),
            t.max_depth()
        );
    }
    let _ = writeln!(
        s,
        "memory: dispatch {} B, tries {} B, total {} B",
        mem.dispatch_bytes, mem.trie_bytes, mem.total_bytes
    );
    let _ = writeln!(s, "wrote {}", a.out.display());
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct JsonMatch<'a> {
    start: usize,
    len: usize,
    pattern_id: usize,
    pattern_hex: &'a str,
}

pub fn cmd_scan(a: &ScanArgs, out: &mut dyn Write) -> Result<()> {
    let cm = CompiledMatcher::from_bytes(&read(&a.artifact)?)?;
    let input = read(&a.input)?;
    let (matches, counters) = cm.scan_with_counters(&input);
    let hex: Vec<String> = (0..cm.patterns().input_count()).map(|_| String::new()).collect();
    let mut hex = hex;
    for (i, p) in cm.patterns().patterns().iter().enumerate() {
        let h = to_hex(&p.bytes);
        for &id in cm.patterns().ids(i) {
            hex[id] = h.clone();
        }
    }
    let mut w = std::io::BufWriter::new(out);
    for m in &matches {
        match a.format {
            FormatArg::Text => writeln!(w, "{}\t{}\t{}\t{}", m.start, m.len, m.pattern_id, hex[m.pattern_id])?,
            FormatArg::Json => {
                let j = JsonMatch { start: m.start, len: m.len, pattern_id: m.pattern_id, pattern_hex: &hex[m.pattern_id] };
                writeln!(w, "{}", serde_json::to_string(&j).expect("match serializes"))?
            }
        }
    }
    if a.counters {
        writeln!(w, "{}", serde_json::to_string(&counters).expect("counters serialize"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Even => StatsMode::EvenAligned,
        ModeArg::Sliding => StatsMode::Sliding,
    };
    let file = std::fs::File::open(&a.input)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", a.input.display()))))?;
    let stats = TraceStats::collect_reader(std::io::BufReader::new(file), mode)?;
    std::fs::write(&a.out, stats.to_json())?;
    writeln!(out, "{} pairs counted, wrote {}", stats.total_pairs(), a.out.display())?;
    Ok(())
}

/// Settings for [`run_bench`].
#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub baseline: Baseline,
    pub repeat: usize,
    pub threads: usize,
    pub solver: Solver,
    pub time_limit: Duration,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { baseline: Baseline::Ac, repeat: 3, threads: 1, solver: Solver::Exact, time_limit: Duration::from_secs(30) }
    }
}

/// Measurements for one compiled variant.
#[derive(Clone, Debug, Serialize)]
pub struct VariantResult {
    pub name: String,
    pub motifs: usize,
    pub solver_status: String,
    pub median_seconds: f64,
    pub throughput_mbps: f64,
    pub matches: u64,
    pub counters: MatchCounters,
    /// Sum of the motifs' pair probabilities in the statistics sample.
    pub estimated_probability: f64,
    /// `harvest_count / fast_path_probes` over the whole input.
    pub actual_probability: f64,
    pub memory_bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchResult {
    pub bytes_consumed: usize,
    pub patterns: usize,
    pub variants: Vec<VariantResult>,
    pub baseline: Baseline,
    pub baseline_seconds: f64,
    pub baseline_throughput_mbps: f64,
    pub baseline_matches: u64,
    /// Only reported for the Aho-Corasick baseline.
    pub baseline_memory_bytes: Option<usize>,
}

impl BenchResult {
    pub fn variant(&self, name: &str) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input: {} bytes, {} patterns", self.bytes_consumed, self.patterns);
        let _ = writeln!(
            s,
            "{:<13} {:>6} {:>16} {:>11} {:>10} {:>10} {:>10} {:>12}",
            "variant", "motifs", "status", "Mbit/s", "harvests", "p(est)", "p(actual)", "memory B"
        );
        for v in &self.variants {
            let _ = writeln!(
                s,
                "{:<13} {:>6} {:>16} {:>11.1} {:>10} {:>10.4} {:>10.4} {:>12}",
                v.name,
                v.motifs,
                v.solver_status,
                v.throughput_mbps,
                v.counters.harvest_count,
                v.estimated_probability,
                v.actual_probability,
                v.memory_bytes
            );
        }
        let name = match self.baseline {
            Baseline::Naive => "naive",
            Baseline::Ac => "aho-corasick",
        };
        let mem = self.baseline_memory_bytes.map_or_else(|| "-".to_string(), |m| m.to_string());
        let _ = writeln!(
            s,
            "{:<13} {:>6} {:>16} {:>11.1} {:>10} {:>10} {:>10} {:>12}",
            name, "-", "-", self.baseline_throughput_mbps, "-", "-", "-", mem
        );
        for v in &self.variants {
            let _ = write!(
                s,
                "{}: throughput x{:.2} vs {name}",
                v.name,
                v.throughput_mbps / self.baseline_throughput_mbps.max(f64::MIN_POSITIVE)
            );
            if let Some(m) = self.baseline_memory_bytes {
                let _ = write!(s, ", memory x{:.3}", v.memory_bytes as f64 / m as f64);
            }
            if v.matches != self.baseline_matches {
                let _ = write!(s, " (MATCH COUNT MISMATCH: {} vs {})", v.matches, self.baseline_matches);
            }
            s.push('\n');
        }
        s
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn mbps(bytes: usize, secs: f64) -> f64 {
    bytes as f64 * 8.0 / secs.max(1e-9) / 1e6
}

/// Compiles the three cost variants, times each against the baseline and
/// reports estimated against observed motif probability. Statistics come from
/// the first third of `input`.
pub fn run_bench(ps: &PatternSet, input: &[u8], opts: &BenchOptions) -> Result<BenchResult> {
    let repeat = opts.repeat.max(1);
    let sample = &input[..input.len() / 3];
    let stats = TraceStats::collect(sample, StatsMode::EvenAligned);
    let variants = [
        ("min", CostFunction::unit()),
        ("rare-strings", CostFunction::rare_in_strings()),
        ("rare-input", CostFunction::rare_in_input(stats.clone())),
    ];
    let mut results = Vec::new();
    for (name, cost) in variants {
        let compiler = Compiler::new(cost).solver(opts.solver).time_limit(opts.time_limit);
        let (plan, cm) = compiler.compile_with_plan(ps)?;
        let motifs = cm.motifs();
        let estimated_probability = if stats.total_pairs() == 0 { 0.0 } else { stats.aggregate_probability(&motifs)? };
        let mut times = Vec::with_capacity(repeat);
        let mut counters = MatchCounters::default();
        let mut matches = 0u64;
        for _ in 0..repeat {
            let t0 = Instant::now();
            let (n, c) = if opts.threads > 1 {
                let (m, c) = cm.scan_parallel(input, opts.threads);
                (m.len() as u64, c)
            } else {
                let mut n = 0u64;
                let c = cm.for_each_match(input, |p, _| n += ps.ids(p).len() as u64);
                (n, c)
            };
            times.push(t0.elapsed().as_secs_f64());
            counters = c;
            matches = n;
        }
        let secs = median(times);
        log::info!("{name}: {:.3}s median over {repeat} runs", secs);
        results.push(VariantResult {
            name: name.to_string(),
            motifs: motifs.len(),
            solver_status: plan.motif_set.status.to_string(),
            median_seconds: secs,
            throughput_mbps: mbps(input.len(), secs),
            matches,
            counters,
            estimated_probability,
            actual_probability: counters.motif_probability(),
            memory_bytes: cm.memory_report().total_bytes,
        });
    }

    let mut times = Vec::with_capacity(repeat);
    let mut baseline_matches = 0u64;
    let baseline_memory_bytes = match opts.baseline {
        Baseline::Ac => {
            let ac = AcMatcher::new(ps);
            for _ in 0..repeat {
                let t0 = Instant::now();
                let mut n = 0u64;
                ac.for_each_match(input, |p, _| n += ps.ids(p).len() as u64);
                times.push(t0.elapsed().as_secs_f64());
                baseline_matches = n;
            }
            Some(ac.memory_bytes())
        }
        Baseline::Naive => {
            let nm = NaiveMatcher::new(ps);
            for _ in 0..repeat {
                let t0 = Instant::now();
                let mut n = 0u64;
                nm.for_each_match(input, |p, _| n += ps.ids(p).len() as u64);
                times.push(t0.elapsed().as_secs_f64());
                baseline_matches = n;
            }
            None
        }
    };
    let baseline_seconds = median(times);
    Ok(BenchResult {
        bytes_consumed: input.len(),
        patterns: ps.input_count(),
        variants: results,
        baseline: opts.baseline,
        baseline_seconds,
        baseline_throughput_mbps: mbps(input.len(), baseline_seconds),
        baseline_matches,
        baseline_memory_bytes,
    })
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let ps = load_patterns(&a.patterns)?;
    let input = read(&a.input)?;
    let opts = BenchOptions {
        baseline: a.baseline,
        repeat: a.repeat,
        threads: a.threads,
        solver: a.solver.into(),
        time_limit: seconds(a.time_limit),
    };
    let r = run_bench(&ps, &input, &opts)?;
    out.write_all(r.render().as_bytes())?;
    Ok(())
}

pub fn cmd_explain(a: &ExplainArgs, out: &mut dyn Write) -> Result<()> {
    let cm = CompiledMatcher::from_bytes(&read(&a.artifact)?)?;
    let ps = cm.patterns();
    let selected: Vec<_> = match &a.trie {
        Some(hex) => {
            let bad = |msg: String| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, msg));
            let motif = Trace::from_hex(hex).ok_or_else(|| bad(format!("--trie expects 4 hex digits, got {hex:?}")))?;
            match cm.trie(motif) {
                Some(t) => vec![t],
                None => return Err(bad(format!("artifact has no trie for motif {hex}"))),
            }
        }
        None => cm.tries().iter().collect(),
    };
    let mut s = String::new();
    let mem = cm.memory_report();
    let _ = writeln!(
        s,
        "{} patterns, {} motifs, {} mappings, {} B total",
        ps.len(),
        cm.tries().len(),
        cm.mappings().len(),
        mem.total_bytes
    );
    let mut graph = String::new();
    for t in &selected {
        let rs = ResolveSet { motif: t.motif(), entries: t.entries().to_vec() };
        let _ = writeln!(s, "\nresolve set {} ({}):", t.motif(), t.motif().to_hex());
        s.push_str(&render_resolve_set(ps, &rs));
        s.push_str(&t.render(ps));
        graph.push_str(&t.render_graph(ps));
    }
    if let Some(path) = &a.graph {
        std::fs::write(path, graph)?;
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}
