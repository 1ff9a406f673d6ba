mod cache;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cleangraph::graph::DEFAULT_VERTEX_BUDGET;
use cleangraph::matching::{
    construct_block_matching, matching_number_closed_form, maximum_matching_oracle,
    MATCHING_ORACLE_BUDGET,
};
use cleangraph::verify::{
    modulus_range, verify_ring, Check, NoCache, OracleCache, VerifyOptions, CSV_HEADER,
};
use cleangraph::wiener::wiener_closed_form;
use cleangraph::{
    exec, CleanGraph, Error, ExportFormat, FactoredRing, RingSpec, WienerCase, WienerIndex,
    WienerReport, WienerVariant,
};
use serde_json::json;

use crate::cache::FileCache;

#[derive(Parser)]
#[command(
    name = "cleangraph",
    version,
    about = "Clean graphs of finite commutative rings"
)]
struct Cli {
    /// Worker threads for range sweeps and all-sources BFS.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphOpts {
    /// Largest graph the exhaustive oracles will build.
    #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Structural summary of one ring.
    Analyze {
        #[arg(long)]
        ring: RingSpec,
        #[arg(long, default_value = "proof")]
        variant: WienerVariant,
        #[command(flatten)]
        graph: GraphOpts,
        /// Emit a JSON document instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Closed forms against oracles, one CSV row per ring and check.
    Verify {
        /// Ring specs; may be repeated or comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            required_unless_present = "range",
            conflicts_with = "range"
        )]
        ring: Vec<RingSpec>,
        /// Inclusive modulus range `a..b`.
        #[arg(long)]
        range: Option<String>,
        /// Keep only moduli with at least this many distinct primes.
        #[arg(long, default_value_t = 1)]
        min_primes: usize,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "wiener,distance,diameter,connectivity,self-inverse-count,idempotent-count,matching"
        )]
        checks: Vec<Check>,
        #[arg(long, default_value = "proof")]
        variant: WienerVariant,
        #[command(flatten)]
        graph: GraphOpts,
        /// JSON-lines file of oracle results reused across runs.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Write zero in the timing columns.
        #[arg(long)]
        no_timings: bool,
    },
    /// Distance between two vertices, `(e,u)` residues or `e#i,u#j` indices.
    Distance {
        #[arg(long)]
        ring: RingSpec,
        from: String,
        to: String,
        #[command(flatten)]
        graph: GraphOpts,
    },
    /// Explicit maximum matching as JSON.
    Matching {
        #[arg(long)]
        ring: RingSpec,
        #[command(flatten)]
        graph: GraphOpts,
        /// Also run the exact blossom matcher and compare sizes.
        #[arg(long)]
        oracle: bool,
    },
    /// Writes the graph as DOT, JSON or an edge list.
    Export {
        #[arg(long)]
        ring: RingSpec,
        #[arg(long, default_value = "dot")]
        format: ExportFormat,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphOpts,
    },
    /// Wall times of closed-form and exhaustive Wiener evaluation.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        ring: Vec<RingSpec>,
        #[arg(long, default_value = "proof")]
        variant: WienerVariant,
        #[command(flatten)]
        graph: GraphOpts,
    },
}

enum Failure {
    Core(Error),
    Io(io::Error),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Mismatch(m) => f.write_str(m),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Core(Error::InvalidInput(_)) => 2,
            Failure::Core(Error::BudgetExceeded { .. }) => 3,
            Failure::Core(_) => 4,
            Failure::Io(_) => 5,
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        set_jobs(jobs);
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(feature = "parallel")]
fn set_jobs(jobs: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
    {
        eprintln!("warning: could not configure {jobs} workers: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn set_jobs(_jobs: usize) {
    eprintln!("warning: built without the parallel feature; --jobs ignored");
}

fn run(command: Command, out: &mut impl Write) -> CliResult {
    match command {
        Command::Analyze {
            ring,
            variant,
            graph,
            json,
        } => analyze(
            &FactoredRing::from_spec(&ring)?,
            variant,
            graph.budget,
            json,
            out,
        ),
        Command::Verify {
            ring,
            range,
            min_primes,
            checks,
            variant,
            graph,
            cache,
            no_timings,
        } => {
            let rings = match range {
                Some(r) => {
                    let (lo, hi) = parse_range(&r)?;
                    modulus_range(lo, hi, min_primes)?
                }
                None => ring
                    .iter()
                    .map(FactoredRing::from_spec)
                    .collect::<Result<_, _>>()?,
            };
            let opts = VerifyOptions {
                budget: graph.budget,
                variant,
                ..Default::default()
            };
            verify(&rings, &checks, &opts, cache, !no_timings, out)
        }
        Command::Distance {
            ring,
            from,
            to,
            graph,
        } => {
            let g = CleanGraph::build_with_budget(&FactoredRing::from_spec(&ring)?, graph.budget)?;
            distance(&g, &from, &to, out)
        }
        Command::Matching {
            ring,
            graph,
            oracle,
        } => {
            let g = CleanGraph::build_with_budget(&FactoredRing::from_spec(&ring)?, graph.budget)?;
            matching(&g, oracle, out)
        }
        Command::Export {
            ring,
            format,
            output,
            graph,
        } => {
            let g = CleanGraph::build_with_budget(&FactoredRing::from_spec(&ring)?, graph.budget)?;
            match output {
                Some(path) => {
                    let mut f = BufWriter::new(File::create(path)?);
                    g.export(format, &mut f)?;
                    f.flush()?;
                }
                None => g.export(format, out)?,
            }
            Ok(())
        }
        Command::Bench {
            ring,
            variant,
            graph,
        } => bench(&ring, variant, graph.budget, out),
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), Error> {
    let bad = || Error::InvalidInput(format!("bad range {s:?}; expected a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (lo, hi): (u64, u64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if lo < 2 || lo > hi {
        return Err(Error::InvalidInput(format!(
            "range {s:?} must satisfy 2 <= a <= b"
        )));
    }
    Ok((lo, hi))
}

fn analyze(
    ring: &FactoredRing,
    variant: WienerVariant,
    budget: u64,
    as_json: bool,
    out: &mut impl Write,
) -> CliResult {
    let vertices = ring.vertex_count()?;
    let connected = ring.n() >= 2;
    let report = WienerReport::build(ring, variant, budget)?;
    let graph = CleanGraph::build_with_budget(ring, budget).ok();
    let diameter = match &graph {
        Some(g) => g.diameter(),
        None => cleangraph::verify::expected_diameter(ring),
    };
    let matching = match matching_number_closed_form(ring) {
        Ok(mu) => Some(mu),
        Err(Error::Unsupported(_)) => graph
            .as_ref()
            .filter(|g| g.num_vertices() <= MATCHING_ORACLE_BUDGET)
            .map(|g| maximum_matching_oracle(g).map(|m| m.size() as u64))
            .transpose()?,
        Err(e) => return Err(e.into()),
    };
    let over_budget = report.oracle.is_none();

    if as_json {
        let doc = json!({
            "ring": ring.to_string(),
            "n": ring.n(),
            "k": ring.distinct_primes(),
            "phi": ring.phi(),
            "r": ring.self_inverse_count(),
            "paired_units": ring.paired_unit_count(),
            "vertices": vertices,
            "case": WienerCase::of(ring).number(),
            "connected": connected,
            "diameter": diameter.to_string(),
            "wiener": report.to_json(),
            "matching_number": matching,
            "perfect_matching": matching.map(|m| 2 * m == vertices),
        });
        writeln!(out, "{doc}")?;
    } else {
        writeln!(out, "ring: {ring}")?;
        writeln!(
            out,
            "local factors n = {}, distinct primes k = {}",
            ring.n(),
            ring.distinct_primes()
        )?;
        writeln!(
            out,
            "phi = {}, r = {}, |U''| = {}",
            ring.phi(),
            ring.self_inverse_count(),
            ring.paired_unit_count()
        )?;
        writeln!(out, "vertices N = {vertices}")?;
        if connected {
            writeln!(out, "connected; diameter = {diameter}")?;
            writeln!(
                out,
                "Wiener ({} closed form, case {}) = {}",
                variant.as_str(),
                report.case.number(),
                report.closed_form
            )?;
            match &report.oracle {
                Some(o) => writeln!(out, "Wiener (BFS oracle) = {o}")?,
                None => writeln!(
                    out,
                    "Wiener (BFS oracle) skipped: {vertices} vertices exceed budget {budget}"
                )?,
            }
        } else {
            writeln!(out, "disconnected; Wiener = inf")?;
        }
        match matching {
            Some(m) => writeln!(
                out,
                "matching number = {m}{}",
                if 2 * m == vertices { " (perfect)" } else { "" }
            )?,
            None => writeln!(out, "matching number unavailable")?,
        }
    }
    if over_budget && connected {
        return Err(Error::BudgetExceeded { vertices, budget }.into());
    }
    if report.matches() == Some(false) && variant != WienerVariant::Statement {
        return Err(Failure::Mismatch(format!(
            "closed form {} differs from oracle {}",
            report.closed_form,
            report.oracle.unwrap_or(WienerIndex::Infinite)
        )));
    }
    Ok(())
}

fn verify(
    rings: &[FactoredRing],
    checks: &[Check],
    opts: &VerifyOptions,
    cache_path: Option<PathBuf>,
    timings: bool,
    out: &mut impl Write,
) -> CliResult {
    let mut file_cache = cache_path.as_deref().map(FileCache::open).transpose()?;
    let cache: &(dyn OracleCache + Sync) = match &file_cache {
        Some(c) => c,
        None => &NoCache,
    };
    let results = exec::map_ordered(rings, |ring| verify_ring(ring, checks, opts, cache));
    writeln!(out, "{CSV_HEADER}")?;
    let mut failures = 0usize;
    for result in results {
        let v = result?;
        for note in &v.skipped {
            eprintln!("skipped: {note}");
        }
        for r in &v.records {
            writeln!(out, "{}", r.csv_row(timings))?;
            failures += r.is_failure() as usize;
        }
        if let Some(c) = file_cache.as_mut() {
            c.append(&v.records)?;
        }
    }
    if failures > 0 {
        return Err(Failure::Mismatch(format!(
            "{failures} check(s) disagree outside known errata"
        )));
    }
    Ok(())
}

fn distance(g: &CleanGraph, from: &str, to: &str, out: &mut impl Write) -> CliResult {
    let (a, b) = (g.parse_vertex(from)?, g.parse_vertex(to)?);
    let bfs = g.bfs_distance(a, b)?;
    if g.ring().n() >= 2 && a != b {
        let closed = g.closed_form_distance(a, b)?;
        if closed != bfs {
            return Err(Failure::Mismatch(format!(
                "closed form {closed} differs from BFS {bfs}"
            )));
        }
    }
    writeln!(out, "{bfs}")?;
    Ok(())
}

fn matching(g: &CleanGraph, oracle: bool, out: &mut impl Write) -> CliResult {
    let m = match construct_block_matching(g) {
        Ok(m) => m,
        Err(Error::Unsupported(_)) => maximum_matching_oracle(g)?,
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "{}", m.to_json())?;
    if oracle {
        let exact = maximum_matching_oracle(g)?;
        if exact.size() != m.size() {
            return Err(Failure::Mismatch(format!(
                "matching of size {} but maximum is {}",
                m.size(),
                exact.size()
            )));
        }
    }
    Ok(())
}

fn bench(
    specs: &[RingSpec],
    variant: WienerVariant,
    budget: u64,
    out: &mut impl Write,
) -> CliResult {
    writeln!(
        out,
        "ring,vertices,closed_form,closed_form_ms,oracle,oracle_ms,note"
    )?;
    for spec in specs {
        let ring = FactoredRing::from_spec(spec)?;
        let vertices = ring.vertex_count()?;
        let start = Instant::now();
        let closed = match wiener_closed_form(&ring, variant) {
            Ok(v) => WienerIndex::Finite(v),
            Err(Error::Unsupported(_)) => WienerIndex::Infinite,
            Err(e) => return Err(e.into()),
        };
        let closed_ms = ms(start);
        let (oracle, oracle_ms, note) = match CleanGraph::build_with_budget(&ring, budget) {
            Ok(g) => {
                let start = Instant::now();
                let w = cleangraph::wiener::wiener_oracle(&g)?;
                (w.to_string(), format!("{:.3}", ms(start)), String::new())
            }
            Err(Error::BudgetExceeded { vertices, budget }) => (
                String::new(),
                String::new(),
                format!("oracle skipped: {vertices} vertices exceed budget {budget}"),
            ),
            Err(e) => return Err(e.into()),
        };
        writeln!(
            out,
            "{ring},{vertices},{closed},{closed_ms:.3},{oracle},{oracle_ms},{note}"
        )?;
    }
    Ok(())
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
