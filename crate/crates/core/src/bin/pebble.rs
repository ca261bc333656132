use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pebbling::bench::{bench, comparators, write_csv, DEFAULT_MOVE_CAP};
use pebbling::decomposition::{decompose, merge_small_parts, Budget};
use pebbling::generate::{generate, InstanceSpec};
use pebbling::graph::boundary_profile;
use pebbling::io::{
    decomposition_json, metrics_json, parse_dag, parse_schedule, write_dot, write_edge_list, write_schedule, NamedDag,
};
use pebbling::oracle::{brute_force_separator, heuristic_separator, optimal_pebbles, OracleOutcome, SearchBudget};
use pebbling::schedule::{simulate, Verdict};
use pebbling::schedulers::Strategy;

/// Black pebble game schedules for DAGs.
#[derive(Parser)]
#[command(name = "pebble", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edges,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeparatorArg {
    Brute,
    Heuristic,
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance, e.g. `grid:width=4,height=3,seed=1`.
    Gen {
        spec: String,
        #[arg(long, value_enum, default_value = "edges")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split a topological order under a budget and print the parts.
    Decompose {
        /// Edge list or DOT file; `-` reads stdin.
        graph: PathBuf,
        #[arg(long)]
        budget: String,
        /// Merge adjacent parts while the space cost does not grow.
        #[arg(long)]
        merge: bool,
        #[arg(long)]
        json: bool,
    },
    /// Build a schedule and print it, or its metrics with `--metrics`.
    Schedule {
        graph: PathBuf,
        /// One of: topo, budget=<B>, space=<S>, bounded, bounded-halflog,
        /// general, depth-classic, depth, separator[=brute|heuristic].
        #[arg(long)]
        strategy: String,
        /// Value for `--strategy budget`.
        #[arg(long)]
        budget: Option<String>,
        /// Value for `--strategy space`.
        #[arg(long)]
        space: Option<usize>,
        /// Value for `--strategy separator`.
        #[arg(long, value_enum)]
        separator: Option<SeparatorArg>,
        /// Print bounds and simulated metrics as JSON instead of the moves.
        #[arg(long)]
        metrics: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a schedule is legal and pebbles every vertex.
    Verify {
        graph: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Size, degree, depth and boundary statistics.
    Stats {
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exact pebbling number by state search (small graphs only).
    Oracle {
        graph: PathBuf,
        #[arg(long, default_value_t = 30)]
        timeout: u64,
        #[arg(long, default_value_t = 4_000_000)]
        max_states: usize,
        /// Also print a balanced separator.
        #[arg(long, value_enum)]
        separator: Option<SeparatorArg>,
    },
    /// Run strategies over generated instances and print a CSV table.
    Bench {
        /// Comma-separated strategy tags.
        #[arg(long, default_value = "topo,general,depth")]
        strategies: String,
        /// Instance specs separated by `;`.
        #[arg(long, default_value = "")]
        instances: String,
        /// File with one instance spec per line.
        #[arg(long)]
        instances_file: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MOVE_CAP)]
        cap: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad input or arguments: exit 2.
    Usage(String),
    /// The requested check did not pass: exit 1.
    Verdict(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn read_graph(path: &Path) -> Result<NamedDag, Failure> {
    parse_dag(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Verdict(format!("write failed: {e}"))
}

fn print_json(value: &serde_json::Value) -> Outcome {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
    Ok(())
}

fn strategy_from_args(
    tag: &str,
    budget: Option<String>,
    space: Option<usize>,
    sep: Option<SeparatorArg>,
) -> Result<Strategy, Failure> {
    let full = match (tag, budget, space, sep) {
        ("budget", Some(b), _, _) => format!("budget={b}"),
        ("space", _, Some(s), _) => format!("space={s}"),
        ("separator", _, _, Some(k)) => match k {
            SeparatorArg::Brute => "separator=brute".into(),
            SeparatorArg::Heuristic => "separator=heuristic".into(),
            SeparatorArg::Auto => "separator".into(),
        },
        _ => tag.to_string(),
    };
    full.parse().map_err(|e| usage(format!("{e}; strategies: {}", Strategy::TAGS.join(", "))))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen { spec, format, output } => {
            let spec: InstanceSpec = spec.parse().map_err(usage)?;
            let dag = generate(&spec).map_err(usage)?;
            let g = NamedDag::with_ids(dag);
            let text = match format {
                Format::Edges => write_edge_list(&g),
                Format::Dot => write_dot(&g),
            };
            let mut out = open_output(&output)?;
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(io_failure)
        }
        Command::Decompose { graph, budget, merge, json } => {
            let g = read_graph(&graph)?;
            let budget: Budget = budget.parse().map_err(usage)?;
            let order = g.dag.topological_order();
            let mut decomp = decompose(&g.dag, &order, &budget);
            let d = g.dag.max_in_degree();
            if merge {
                decomp = merge_small_parts(&g.dag, &decomp, d);
            }
            if json {
                let mut v = decomposition_json(&decomp, &g);
                v["space_cost"] = json!(decomp.space_cost(d));
                return print_json(&v);
            }
            println!("B = {}", decomp.budget);
            println!("parts = {}", decomp.part_count());
            println!("boundary_sum = {}", decomp.boundary_sum());
            println!("levels = {}", decomp.levels);
            println!("space_cost = {}", decomp.space_cost(d));
            for (i, p) in decomp.parts.iter().enumerate() {
                let names: Vec<&str> = p.vertices.iter().map(|&v| g.name(v)).collect();
                println!("part {i}: boundary {} : {}", p.boundary, names.join(" "));
            }
            Ok(())
        }
        Command::Schedule { graph, strategy, budget, space, separator, metrics, output } => {
            let g = read_graph(&graph)?;
            let strategy = strategy_from_args(&strategy, budget, space, separator)?;
            let report = strategy.run(&g.dag).map_err(|e| Failure::Verdict(e.to_string()))?;
            if metrics {
                let m = report.evaluate(&g.dag, u64::MAX).map_err(|e| Failure::Verdict(e.to_string()))?;
                let mut v = serde_json::to_value(report.summary(&m)).expect("summary serializes");
                v["full"] = json!(m.is_full(&g.dag));
                v["emptying"] = json!(m.is_emptying());
                print_json(&v)?;
                if m.peak > report.space_bound || !m.is_full(&g.dag) {
                    return Err(Failure::Verdict("schedule misses its space bound or coverage".into()));
                }
                return Ok(());
            }
            let mut out = open_output(&output)?;
            write_schedule(&mut out, &report.schedule, &g).and_then(|_| out.flush()).map_err(io_failure)
        }
        Command::Verify { graph, schedule, json } => {
            let g = read_graph(&graph)?;
            let s = parse_schedule(&read_text(&schedule)?, &g)
                .map_err(|e| usage(format!("{}: {e}", schedule.display())))?;
            let (verdict, metrics) = match simulate(&g.dag, &s) {
                Err(e) => (Verdict::Illegal(e), None),
                Ok(m) if m.is_full(&g.dag) => (Verdict::LegalAndFull, Some(m)),
                Ok(m) => (Verdict::LegalNotFull { uncovered: g.dag.vertex_count() - m.covered.len() }, Some(m)),
            };
            if json {
                let mut v = json!({ "verdict": verdict.to_string() });
                if let Some(m) = &metrics {
                    v["metrics"] = metrics_json(m, &g);
                }
                if let Verdict::Illegal(e) = &verdict {
                    v["index"] = json!(e.index);
                    v["reason"] = json!(e.reason);
                }
                print_json(&v)?;
            } else {
                println!("{verdict}");
                if let Some(m) = &metrics {
                    println!("peak {} moves {}", m.peak, m.moves);
                }
            }
            if verdict.is_legal_and_full() {
                Ok(())
            } else {
                Err(Failure::Verdict(verdict.to_string()))
            }
        }
        Command::Stats { graph, json } => {
            let g = read_graph(&graph)?;
            let dag = &g.dag;
            let (n, m, d) = (dag.vertex_count(), dag.edge_count(), dag.max_in_degree());
            let order = dag.topological_order();
            let b = boundary_profile(dag, &order).map_err(usage)?.max_value;
            let (ours, loui) = comparators(n, m, d);
            let v = json!({
                "n": n,
                "m": m,
                "d": d,
                "d_avg": m as f64 / n as f64,
                "depth": dag.topological_depth(),
                "sources": dag.sources().count(),
                "sinks": dag.sinks().count(),
                "topo_max_boundary": b,
                "m_over_log2m_plus_d": ours,
                "three_dn_over_log2n_plus_4": loui,
            });
            if json {
                return print_json(&v);
            }
            for (k, val) in v.as_object().expect("object") {
                println!("{k} = {val}");
            }
            Ok(())
        }
        Command::Oracle { graph, timeout, max_states, separator } => {
            let g = read_graph(&graph)?;
            let budget = SearchBudget { max_states, timeout: Duration::from_secs(timeout), ..SearchBudget::default() };
            let outcome = optimal_pebbles(&g.dag, budget);
            if let Some(kind) = separator {
                let sep = match kind {
                    SeparatorArg::Brute => brute_force_separator(&g.dag),
                    SeparatorArg::Heuristic => heuristic_separator(&g.dag),
                    SeparatorArg::Auto if g.dag.vertex_count() <= 10 => brute_force_separator(&g.dag),
                    SeparatorArg::Auto => heuristic_separator(&g.dag),
                };
                let names = |vs: &[usize]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>().join(" ");
                println!("left: {}", names(&sep.left));
                println!("separator: {}", names(&sep.separator));
                println!("right: {}", names(&sep.right));
            }
            match outcome {
                OracleOutcome::Exact(s) => {
                    println!("S = {s}");
                    Ok(())
                }
                OracleOutcome::Unknown(reason) => Err(Failure::Verdict(format!("unknown: {reason}"))),
            }
        }
        Command::Bench { strategies, instances, instances_file, cap, output } => {
            let strategies: Vec<Strategy> = strategies
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(usage))
                .collect::<Result<_, _>>()?;
            let mut lines: Vec<String> = instances.split(';').map(str::to_string).collect();
            if let Some(p) = &instances_file {
                lines.extend(read_text(p)?.lines().map(|l| l.split('#').next().unwrap_or("").to_string()));
            }
            let specs: Vec<InstanceSpec> = lines
                .iter()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty())
                .map(|l| l.parse().map_err(|e| usage(format!("`{l}`: {e}"))))
                .collect::<Result<_, _>>()?;
            let rows = bench(&strategies, &specs, cap);
            let mut seen = std::collections::BTreeSet::new();
            for r in &rows {
                if seen.insert((r.family.clone(), r.n, r.m, r.d)) {
                    let (ours, loui) = comparators(r.n, r.m, r.d);
                    eprintln!(
                        "{} n={} m={} d={}: m/log2m+d = {ours:.1}, 3dn/log2n+4 = {loui:.1}",
                        r.family, r.n, r.m, r.d
                    );
                }
            }
            let out = open_output(&output)?;
            write_csv(&rows, out).map_err(|e| Failure::Verdict(e.to_string()))?;
            let bad = rows.iter().filter(|r| r.is_violation()).count();
            if bad > 0 {
                return Err(Failure::Verdict(format!("{bad} rows failed or exceeded their bounds")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Exit quietly when the reader of a pipe goes away, as `head` does.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            eprintln!("pebble: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("pebble: {msg}");
            ExitCode::from(2)
        }
    }
}
