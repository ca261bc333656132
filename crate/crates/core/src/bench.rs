//! Benchmark harness: runs strategies over generated instances and tabulates
//! bounds against simulated peaks and move counts.

use std::io;
use std::time::Instant;

use rayon::prelude::*;

use crate::generate::{generate, InstanceSpec};
use crate::graph::Dag;
use crate::schedulers::{ScheduleError, Strategy};

pub const CSV_HEADER: [&str; 10] = ["strategy", "family", "n", "m", "d", "S_bound", "peak", "T_bound", "moves", "ms"];

/// Default cap on simulated moves per row.
pub const DEFAULT_MOVE_CAP: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Ran {
        space_bound: usize,
        peak: usize,
        move_bound: Option<u128>,
        moves: u64,
        ms: f64,
    },
    /// The strategy does not apply to the instance.
    Skipped(String),
    /// The instance could not be built, or the schedule failed simulation.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub strategy: String,
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub outcome: RowOutcome,
}

impl BenchRow {
    /// A row that ran with `peak > S_bound` or failed outright.
    pub fn is_violation(&self) -> bool {
        match &self.outcome {
            RowOutcome::Ran { space_bound, peak, move_bound, moves, .. } => {
                peak > space_bound || move_bound.is_some_and(|t| *moves as u128 > t)
            }
            RowOutcome::Skipped(_) => false,
            RowOutcome::Failed(_) => true,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![
            self.strategy.clone(),
            self.family.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.d.to_string(),
        ];
        match &self.outcome {
            RowOutcome::Ran { space_bound, peak, move_bound, moves, ms } => f.extend([
                space_bound.to_string(),
                peak.to_string(),
                move_bound.map(|t| t.to_string()).unwrap_or_default(),
                moves.to_string(),
                format!("{ms:.3}"),
            ]),
            RowOutcome::Skipped(reason) => {
                f.push(format!("skipped:{reason}"));
                f.extend(std::iter::repeat_n(String::new(), 4));
            }
            RowOutcome::Failed(reason) => {
                f.push(format!("failed:{reason}"));
                f.extend(std::iter::repeat_n(String::new(), 4));
            }
        }
        f
    }
}

/// `m / log2 m + d` and `3 d n / log2 n + 4`, the closed forms printed next
/// to the table for context.
pub fn comparators(n: usize, m: usize, d: usize) -> (f64, f64) {
    let lg = |x: usize| (x.max(2) as f64).log2();
    (m as f64 / lg(m) + d as f64, 3.0 * d as f64 * n as f64 / lg(n) + 4.0)
}

fn run_row(strategy: &Strategy, family: &str, dag: &Dag, cap: u64) -> BenchRow {
    let (n, m, d) = (dag.vertex_count(), dag.edge_count(), dag.max_in_degree());
    let start = Instant::now();
    let result = strategy.run(dag);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = match result {
        Err(ScheduleError::Precondition(reason)) => RowOutcome::Skipped(reason),
        Err(e) => RowOutcome::Failed(e.to_string()),
        Ok(report) => match report.evaluate(dag, cap) {
            Ok(metrics) if metrics.is_full(dag) => RowOutcome::Ran {
                space_bound: report.space_bound,
                peak: metrics.peak,
                move_bound: report.move_bound,
                moves: metrics.moves,
                ms,
            },
            Ok(metrics) => RowOutcome::Failed(format!("{} vertices never pebbled", n - metrics.covered.len())),
            Err(e) => RowOutcome::Failed(e.to_string()),
        },
    };
    BenchRow { strategy: strategy.tag(), family: family.to_string(), n, m, d, outcome }
}

/// One row per (instance, strategy), instance-major, in input order. Rows are
/// computed in parallel. `ms` is the time to construct the schedule; the lazy
/// streams do most of their work during the simulation that follows.
pub fn bench(strategies: &[Strategy], instances: &[InstanceSpec], cap: u64) -> Vec<BenchRow> {
    let built: Vec<(String, Result<Dag, String>)> = instances
        .par_iter()
        .map(|spec| (spec.family.name().to_string(), generate(spec).map_err(|e| e.to_string())))
        .collect();
    let jobs: Vec<(usize, &Strategy)> = (0..built.len()).flat_map(|i| strategies.iter().map(move |s| (i, s))).collect();
    jobs.par_iter()
        .map(|&(i, strategy)| match &built[i] {
            (family, Ok(dag)) => run_row(strategy, family, dag, cap),
            (family, Err(reason)) => BenchRow {
                strategy: strategy.tag(),
                family: family.clone(),
                n: 0,
                m: 0,
                d: 0,
                outcome: RowOutcome::Failed(reason.clone()),
            },
        })
        .collect()
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}
