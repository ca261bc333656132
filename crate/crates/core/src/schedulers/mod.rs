//! Schedule constructions. Every scheduler returns a [`SchedulerReport`]: a
//! lazy move stream plus the space bound (and optionally move bound) the
//! construction guarantees.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::decomposition::{Budget, BudgetParseError};
use crate::graph::{Dag, GraphError};
use crate::schedule::{simulate_capped, IllegalMove, MoveStream, PebbleMetrics, SimulationError};

mod budget;
mod challenging;
mod depth;
mod layered;
mod separator;
mod topo;

pub use budget::{lemma5_space, pebble_bounded_degree, pipeline_decompose_and_schedule, select_budget, DegreeMode};
pub use challenging::challenging_schedule;
pub use depth::{depth_recursive_schedule, pebble_by_depth};
pub use layered::schedule_from_decomposition;
pub use separator::{pebble_with_separator, planar_space_bound, validate_separation, Separation};
pub use topo::topo_schedule;

pub struct SchedulerReport {
    pub strategy: String,
    pub schedule: Arc<dyn MoveStream>,
    /// Guaranteed upper bound on the peak number of pebbles.
    pub space_bound: usize,
    /// Guaranteed upper bound on the number of moves, when one is claimed.
    pub move_bound: Option<u128>,
    pub params: BTreeMap<String, Value>,
}

impl fmt::Debug for SchedulerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SchedulerReport")
            .field("strategy", &self.strategy)
            .field("space_bound", &self.space_bound)
            .field("move_bound", &self.move_bound)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

/// JSON shape of a report after simulation.
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub strategy: String,
    pub params: BTreeMap<String, Value>,
    #[serde(rename = "S_bound")]
    pub space_bound: usize,
    #[serde(rename = "T_bound")]
    pub move_bound: Option<u128>,
    pub peak: usize,
    pub moves: u64,
}

impl SchedulerReport {
    pub fn new(
        strategy: impl Into<String>,
        schedule: Arc<dyn MoveStream>,
        space_bound: usize,
        move_bound: Option<u128>,
    ) -> SchedulerReport {
        SchedulerReport { strategy: strategy.into(), schedule, space_bound, move_bound, params: BTreeMap::new() }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> SchedulerReport {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_strategy(mut self, strategy: impl Into<String>) -> SchedulerReport {
        self.strategy = strategy.into();
        self
    }

    /// Simulates the schedule (giving up after `cap` moves).
    pub fn evaluate(&self, dag: &Dag, cap: u64) -> Result<PebbleMetrics, SimulationError> {
        simulate_capped(dag, &self.schedule, cap)
    }

    pub fn summary(&self, metrics: &PebbleMetrics) -> ReportSummary {
        ReportSummary {
            strategy: self.strategy.clone(),
            params: self.params.clone(),
            space_bound: self.space_bound,
            move_bound: self.move_bound,
            peak: metrics.peak,
            moves: metrics.moves,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inner schedule is illegal on the reduced graph: {0}")]
    InnerIllegal(IllegalMove),
    #[error("inner schedule leaves {0} vertices of the reduced graph unpebbled")]
    InnerNotFull(usize),
    #[error("separator contract violated at recursion level {level}: {reason}")]
    SeparatorContract { level: usize, reason: String },
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorKind {
    Brute,
    Heuristic,
    /// Exhaustive search on small graphs, the heuristic otherwise.
    Auto,
}

/// A scheduler selectable by tag from the command line, the bench harness and
/// the C interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Topo,
    Budget(Budget),
    /// Largest budget whose space cost fits the given pebble count.
    Space(usize),
    Bounded,
    BoundedHalfLog,
    General,
    DepthClassic,
    Depth,
    Separator(SeparatorKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyParseError {
    #[error("unknown strategy `{0}`")]
    Unknown(String),
    #[error("strategy `{0}` needs a value, e.g. `{0}=4`")]
    MissingValue(String),
    #[error("bad value for `{tag}`: {reason}")]
    BadValue { tag: String, reason: String },
}

impl From<BudgetParseError> for StrategyParseError {
    fn from(e: BudgetParseError) -> Self {
        StrategyParseError::BadValue { tag: "budget".into(), reason: e.to_string() }
    }
}

impl Strategy {
    pub const TAGS: &'static [&'static str] = &[
        "topo",
        "budget=<B>",
        "space=<S>",
        "bounded",
        "bounded-halflog",
        "general",
        "depth-classic",
        "depth",
        "separator[=brute|heuristic]",
    ];

    pub fn tag(&self) -> String {
        match self {
            Strategy::Topo => "topo".into(),
            Strategy::Budget(b) => format!("budget={b}"),
            Strategy::Space(s) => format!("space={s}"),
            Strategy::Bounded => "bounded".into(),
            Strategy::BoundedHalfLog => "bounded-halflog".into(),
            Strategy::General => "general".into(),
            Strategy::DepthClassic => "depth-classic".into(),
            Strategy::Depth => "depth".into(),
            Strategy::Separator(SeparatorKind::Auto) => "separator".into(),
            Strategy::Separator(SeparatorKind::Brute) => "separator=brute".into(),
            Strategy::Separator(SeparatorKind::Heuristic) => "separator=heuristic".into(),
        }
    }

    pub fn run(&self, dag: &Dag) -> Result<SchedulerReport, ScheduleError> {
        use crate::oracle::{brute_force_separator, heuristic_separator};
        let report = match self {
            Strategy::Topo => Ok(topo_schedule(dag, &dag.topological_order())),
            Strategy::Budget(b) => Ok(pipeline_decompose_and_schedule(dag, b)),
            Strategy::Space(s) => {
                let m = dag.edge_count();
                let d = dag.max_in_degree();
                let b = select_budget(m.max(1), d.max(1), *s)
                    .ok_or_else(|| ScheduleError::Precondition(format!("no budget fits {s} pebbles (m={m}, d={d})")))?;
                Ok(pipeline_decompose_and_schedule(dag, &b).with_param("requested_space", *s))
            }
            Strategy::Bounded => pebble_bounded_degree(dag, DegreeMode::LogLog),
            Strategy::BoundedHalfLog => pebble_bounded_degree(dag, DegreeMode::HalfLog),
            Strategy::General => Ok(pebble_general(dag)),
            Strategy::DepthClassic => Ok(depth_recursive_schedule(dag)),
            Strategy::Depth => Ok(pebble_by_depth(dag)),
            Strategy::Separator(kind) => {
                let kind = *kind;
                pebble_with_separator(dag, &move |g: &Dag| match kind {
                    SeparatorKind::Brute => brute_force_separator(g),
                    SeparatorKind::Heuristic => heuristic_separator(g),
                    SeparatorKind::Auto if g.vertex_count() <= 10 => brute_force_separator(g),
                    SeparatorKind::Auto => heuristic_separator(g),
                })
            }
        }?;
        Ok(report.with_strategy(self.tag()))
    }
}

impl FromStr for Strategy {
    type Err = StrategyParseError;

    fn from_str(s: &str) -> Result<Strategy, StrategyParseError> {
        let (tag, value) = match s.split_once('=') {
            Some((t, v)) => (t.trim(), Some(v.trim())),
            None => (s.trim(), None),
        };
        let need = || value.ok_or_else(|| StrategyParseError::MissingValue(tag.to_string()));
        let no_value = |st: Strategy| match value {
            None => Ok(st),
            Some(_) => Err(StrategyParseError::BadValue { tag: tag.to_string(), reason: "takes no value".into() }),
        };
        match tag {
            "topo" => no_value(Strategy::Topo),
            "budget" => Ok(Strategy::Budget(need()?.parse()?)),
            "space" => need()?.parse().map(Strategy::Space).map_err(|e: std::num::ParseIntError| {
                StrategyParseError::BadValue { tag: tag.into(), reason: e.to_string() }
            }),
            "bounded" => no_value(Strategy::Bounded),
            "bounded-halflog" => no_value(Strategy::BoundedHalfLog),
            "general" => no_value(Strategy::General),
            "depth-classic" => no_value(Strategy::DepthClassic),
            "depth" => no_value(Strategy::Depth),
            "separator" => match value {
                None | Some("auto") => Ok(Strategy::Separator(SeparatorKind::Auto)),
                Some("brute") => Ok(Strategy::Separator(SeparatorKind::Brute)),
                Some("heuristic") => Ok(Strategy::Separator(SeparatorKind::Heuristic)),
                Some(other) => Err(StrategyParseError::BadValue {
                    tag: tag.into(),
                    reason: format!("`{other}` is not brute, heuristic or auto"),
                }),
            },
            _ => Err(StrategyParseError::Unknown(s.to_string())),
        }
    }
}

/// Schedules any DAG: vertices with in-degree above `log2 m` are treated as
/// challenging and the rest is scheduled with the bounded-degree pipeline.
pub fn pebble_general(dag: &Dag) -> SchedulerReport {
    let m = dag.edge_count();
    let d = dag.max_in_degree();
    if d <= 1 {
        return depth_recursive_schedule(dag).with_strategy("general");
    }
    // 2^indeg > m, i.e. indeg > log2 m.
    let w: Vec<_> = (0..dag.vertex_count())
        .filter(|&v| {
            let k = dag.in_degree(v);
            k >= 64 || (1u64 << k) > m as u64
        })
        .collect();
    let report = challenging_schedule(dag, &w, |sub| Ok(budget::bounded_degree_relaxed(&sub.dag)))
        .expect("inner schedulers produce legal full schedules");
    let inner_bound = report.params.get("inner_space_bound").and_then(Value::as_u64).unwrap_or(0) as usize;
    let space_bound = inner_bound + w.len() + d;
    SchedulerReport { space_bound, ..report }
        .with_strategy("general")
        .with_param("challenging_limit", budget::edges_over_log2(m))
}
