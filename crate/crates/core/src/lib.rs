//! Black pebble game schedules for directed acyclic graphs.

pub mod bench;
pub mod decomposition;
pub mod generate;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod schedule;
pub mod schedulers;

pub use decomposition::{decompose, merge_small_parts, Budget, BudgetDecomposition, Part};
pub use generate::{generate, Family, InstanceSpec};
pub use graph::{
    boundary_profile, induced_subdag, topological_sort, BoundaryProfile, Dag, GraphError, InducedSubdag, TopoOrder,
    VertexId,
};
pub use io::{parse_dag, NamedDag};
pub use schedule::{simulate, verify_full, Move, MoveStream, PebbleMetrics, Schedule, Verdict};
pub use schedulers::{ScheduleError, SchedulerReport, Strategy};
