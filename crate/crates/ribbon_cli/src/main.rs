mod report;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use report::{Format, Table};
use ribbon_complex::ainfinity::CyclicAInfinity;
use ribbon_complex::graph_complex::GraphBasis;
use ribbon_complex::partition::{
    characteristic_class, verify_cycle, verify_direct_sum, verify_equivalence, verify_exp, verify_homotopy, verify_odd_vertices,
    PartitionFunction, Report,
};
use ribbon_complex::super_core::fmt_q;
use ribbon_complex::tcft::{Correlator, LeggedGraph};
use serde_json::json;
use std::process::ExitCode;

/// Largest edge count accepted for enumeration-backed commands.
const MAX_EDGES_CAP: usize = 7;
/// Largest edge count for the homotopy suite, whose certificate needs one more edge.
const HOMOTOPY_CAP: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "ribbon", version, about = "Ribbon graph complexes and partition functions of cyclic A-infinity algebras")]
struct Cli {
    /// Algebra: a file in the algebra text format, or `builtin:ground`, `builtin:dual`, `builtin:ground+ground`.
    #[arg(long, global = true, default_value = "builtin:ground")]
    algebra: String,
    /// Largest number of edges.
    #[arg(long, global = true, default_value_t = 4)]
    max_edges: usize,
    /// Smallest Euler characteristic reported by `homology`.
    #[arg(long, global = true, default_value_t = -3, allow_hyphen_values = true)]
    chi_min: i64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis cells with their dimensions and automorphism data.
    Enumerate {
        /// List every class instead of one row per cell.
        #[arg(long)]
        classes: bool,
    },
    /// Homology dimensions per cell.
    Homology {
        /// Also emit the boundary matrices as sparse triples.
        #[arg(long)]
        matrices: bool,
    },
    /// Partition function coefficients on basis graphs.
    Partition {
        /// Connected graphs only.
        #[arg(long)]
        connected: bool,
    },
    /// Correlation tensor of a legged graph.
    Correlate {
        /// Legged graph literal, e.g. `valences=[3]; in=[1]; out=[2,3]`.
        #[arg(long)]
        graph: String,
    },
    /// Characteristic class truncated to the edge bound.
    Characteristic,
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Suite {
    Cycle,
    Odd,
    Exp,
    Equiv,
    Dsum,
    Homotopy,
}

impl Suite {
    const ALL: [Suite; 6] = [Suite::Cycle, Suite::Odd, Suite::Exp, Suite::Equiv, Suite::Dsum, Suite::Homotopy];

    fn name(self) -> &'static str {
        match self {
            Suite::Cycle => "cycle",
            Suite::Odd => "odd",
            Suite::Exp => "exp",
            Suite::Equiv => "equiv",
            Suite::Dsum => "dsum",
            Suite::Homotopy => "homotopy",
        }
    }

    fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        s.split(',')
            .map(|n| Suite::ALL.iter().copied().find(|x| x.name() == n.trim()).with_context(|| format!("unknown suite {n:?}")))
            .collect()
    }
}

fn load_algebra(src: &str) -> Result<CyclicAInfinity> {
    if let Some(name) = src.strip_prefix("builtin:") {
        return Ok(CyclicAInfinity::builtin(name)?);
    }
    let text = std::fs::read_to_string(src).with_context(|| format!("reading algebra file {src}"))?;
    Ok(CyclicAInfinity::parse(&text).with_context(|| format!("parsing algebra file {src}"))?)
}

fn check_cap(max_edges: usize, cap: usize) -> Result<()> {
    if max_edges > cap {
        bail!("--max-edges {max_edges} exceeds the cap of {cap}");
    }
    Ok(())
}

fn enumerate(cli: &Cli, classes: bool) -> Result<Table> {
    check_cap(cli.max_edges, MAX_EDGES_CAP)?;
    let basis = GraphBasis::enumerate(cli.max_edges);
    if classes {
        let mut t = Table::new(&["graph_key", "vertices", "edges", "aut"]);
        for cell in basis.cells.values() {
            for (k, aut) in cell.keys.iter().zip(&cell.aut) {
                t.push(vec![json!(k.to_string()), json!(k.vertices()), json!(k.edges()), json!(aut)]);
            }
        }
        return Ok(t);
    }
    let mut t = Table::new(&["i", "j", "chi", "dim", "min_aut", "max_aut"]);
    for j in 0..=cli.max_edges {
        for i in if j == 0 { 0..=0 } else { 1..=j } {
            let auts = basis.cell(i, j).map(|c| c.aut.as_slice()).unwrap_or_default();
            let (lo, hi) = (auts.iter().min(), auts.iter().max());
            t.push(vec![json!(i), json!(j), json!(i as i64 - j as i64), json!(basis.dim(i, j)), json!(lo), json!(hi)]);
        }
    }
    Ok(t)
}

fn homology(cli: &Cli, matrices: bool) -> Result<Table> {
    check_cap(cli.max_edges, MAX_EDGES_CAP)?;
    let basis = GraphBasis::enumerate(cli.max_edges);
    if matrices {
        let mut t = Table::new(&["source", "target", "row", "col", "value"]);
        for &(i, j) in basis.cells.keys() {
            if i == 0 || j == 0 || basis.cell(i - 1, j - 1).is_none() || (i as i64 - j as i64) < cli.chi_min {
                continue;
            }
            let m = basis.boundary_matrix(i, j)?;
            let (src, dst) = (format!("({i},{j})"), format!("({},{})", i - 1, j - 1));
            for (c, col) in m.cols.iter().enumerate() {
                for (r, v) in col {
                    t.push(vec![json!(src), json!(dst), json!(r), json!(c), json!(fmt_q(v))]);
                }
            }
        }
        return Ok(t);
    }
    let mut t = Table::new(&["chi", "i", "j", "dim_ker", "rank_d", "dim_H"]);
    for r in basis.homology(cli.chi_min) {
        let h = r.dim_h.map_or(json!("NA"), |h| json!(h));
        t.push(vec![json!(r.chi), json!(r.i), json!(r.j), json!(r.dim_ker), json!(r.rank_d), h]);
    }
    Ok(t)
}

fn partition(cli: &Cli, connected: bool) -> Result<Table> {
    check_cap(cli.max_edges, MAX_EDGES_CAP)?;
    let alg = load_algebra(&cli.algebra)?;
    let basis = GraphBasis::enumerate(cli.max_edges);
    let pf = PartitionFunction::new(&alg)?;
    let z = if connected { pf.connected_chain(&basis, cli.max_edges) } else { pf.chain(&basis, cli.max_edges) };
    let mut t = Table::new(&["graph_key", "vertices", "edges", "value"]);
    for (k, v) in &z.terms {
        t.push(vec![json!(k.to_string()), json!(k.vertices()), json!(k.edges()), json!(fmt_q(v))]);
    }
    Ok(t)
}

fn correlate(cli: &Cli, graph: &str) -> Result<Table> {
    let alg = load_algebra(&cli.algebra)?;
    let g = LeggedGraph::parse(graph)?;
    let c = Correlator::new(&alg)?;
    let value = c.correlation(&g);
    let mut t = Table::new(&["slots", "value"]);
    for (w, v) in &value.coeffs {
        let word: Vec<&str> = w.iter().map(|&l| alg.space.labels[l as usize].as_str()).collect();
        t.push(vec![json!(word.join(" ")), json!(fmt_q(v))]);
    }
    Ok(t)
}

fn characteristic(cli: &Cli) -> Result<Table> {
    check_cap(cli.max_edges, MAX_EDGES_CAP)?;
    let alg = load_algebra(&cli.algebra)?;
    let c = characteristic_class(&alg, (2 * cli.max_edges / 3).max(1), 2 * cli.max_edges)?;
    let mut t = Table::new(&["factors", "letters", "coefficient", "monomial"]);
    for (k, v) in &c.chain.terms {
        let words: Vec<String> = k.iter().map(|w| c.space.format_word(w)).collect();
        let letters: usize = k.iter().map(Vec::len).sum();
        t.push(vec![json!(k.len()), json!(letters), json!(fmt_q(v)), json!(format!("[{}]", words.join(" ^ ")))]);
    }
    Ok(t)
}

fn verify(cli: &Cli, suite: &str) -> Result<(Table, bool)> {
    let suites = Suite::parse_list(suite)?;
    let alg = load_algebra(&cli.algebra)?;
    let me = cli.max_edges;
    check_cap(me, MAX_EDGES_CAP)?;
    if suites.contains(&Suite::Homotopy) {
        check_cap(me, HOMOTOPY_CAP)?;
    }
    let extra = usize::from(suites.contains(&Suite::Homotopy) || suites.contains(&Suite::Cycle));
    let basis = GraphBasis::enumerate(me + extra);
    let mut t = Table::new(&["suite", "status", "checked", "nontrivial", "failed", "witness"]);
    let mut all_ok = true;
    for s in suites {
        let r: Report = match s {
            Suite::Cycle => verify_cycle(&alg, &basis, me)?,
            Suite::Odd => verify_odd_vertices(&alg, &basis, me)?,
            Suite::Exp => verify_exp(&alg, &basis, me)?,
            Suite::Equiv => verify_equivalence(&alg, &basis, me)?,
            Suite::Dsum => verify_direct_sum(&alg, &alg, &basis, me)?,
            Suite::Homotopy => verify_homotopy(&alg, &basis, me, cli.seed, 5)?,
        };
        all_ok &= r.passed();
        let status = if r.passed() { "pass" } else { "fail" };
        t.push(vec![json!(s.name()), json!(status), json!(r.checked), json!(r.nontrivial), json!(r.failed), json!(r.witnesses.join(" | "))]);
    }
    Ok((t, all_ok))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Enumerate { .. } => "enumerate",
        Command::Homology { .. } => "homology",
        Command::Partition { .. } => "partition",
        Command::Correlate { .. } => "correlate",
        Command::Characteristic => "characteristic",
        Command::Verify { .. } => "verify",
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("configuring the thread pool")?;
    }
    let (table, ok) = match &cli.command {
        Command::Enumerate { classes } => (enumerate(cli, *classes)?, true),
        Command::Homology { matrices } => (homology(cli, *matrices)?, true),
        Command::Partition { connected } => (partition(cli, *connected)?, true),
        Command::Correlate { graph } => (correlate(cli, graph)?, true),
        Command::Characteristic => (characteristic(cli)?, true),
        Command::Verify { suite } => verify(cli, suite)?,
    };
    let meta = report::Meta { command: command_name(&cli.command), seed: cli.seed, algebra: &cli.algebra, max_edges: cli.max_edges };
    print!("{}", table.render(cli.format, &meta));
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
