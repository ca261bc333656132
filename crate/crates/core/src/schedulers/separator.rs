use std::sync::Arc;

use serde::Serialize;

use crate::graph::{induced_subdag, Dag, VertexId};
use crate::schedule::{Concat, Emptying, MoveStream, Relabel, Schedule};

use super::challenging::challenging_schedule;
use super::topo::topo_schedule;
use super::{ScheduleError, SchedulerReport};

/// A partition `(L, S, R)` of the vertices with no edge between `L` and `R`
/// and neither side larger than two thirds of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub left: Vec<VertexId>,
    pub separator: Vec<VertexId>,
    pub right: Vec<VertexId>,
}

/// Checks the partition, no-crossing and balance conditions.
pub fn validate_separation(dag: &Dag, sep: &Separation) -> Result<(), String> {
    let n = dag.vertex_count();
    let mut side = vec![u8::MAX; n];
    for (tag, set) in [(0u8, &sep.left), (1, &sep.separator), (2, &sep.right)] {
        for &v in set {
            if v >= n {
                return Err(format!("vertex {v} is out of range"));
            }
            if side[v] != u8::MAX {
                return Err(format!("vertex {v} appears twice"));
            }
            side[v] = tag;
        }
    }
    if let Some(v) = side.iter().position(|&s| s == u8::MAX) {
        return Err(format!("vertex {v} is not assigned"));
    }
    if let Some((u, v)) = dag.edges().find(|&(u, v)| side[u] != 1 && side[v] != 1 && side[u] != side[v]) {
        return Err(format!("edge {u} -> {v} crosses between the two sides"));
    }
    let big = sep.left.len().max(sep.right.len());
    if 3 * big > 2 * n {
        return Err(format!("side of {big} vertices exceeds two thirds of {n}"));
    }
    Ok(())
}

/// `6 (sqrt 2 + sqrt 3)(1 + sqrt(2/3)) sqrt n + d`.
pub fn planar_space_bound(n: usize, d: usize) -> f64 {
    6.0 * (2f64.sqrt() + 3f64.sqrt()) * (1.0 + (2.0f64 / 3.0).sqrt()) * (n as f64).sqrt() + d as f64
}

/// Below this size the recursion pebbles in topological order.
const DIRECT_SIZE: usize = 4;

struct Piece {
    stream: Arc<dyn MoveStream>,
    bound: usize,
    /// Every separator on the way down had `|S|^2 <= 8n`.
    certified: bool,
    levels: usize,
    largest_separator: usize,
}

fn recurse(dag: &Dag, level: usize, separator: &dyn Fn(&Dag) -> Separation) -> Result<Piece, ScheduleError> {
    let n = dag.vertex_count();
    if n == 0 {
        return Ok(Piece {
            stream: Arc::new(Schedule::default()),
            bound: 0,
            certified: true,
            levels: 0,
            largest_separator: 0,
        });
    }
    if n <= DIRECT_SIZE {
        let r = topo_schedule(dag, &dag.topological_order());
        return Ok(Piece {
            stream: r.schedule,
            bound: r.space_bound,
            certified: true,
            levels: 1,
            largest_separator: 0,
        });
    }
    let sep = separator(dag);
    validate_separation(dag, &sep).map_err(|reason| ScheduleError::SeparatorContract { level, reason })?;

    let mut in_w = vec![false; n];
    for &v in &sep.separator {
        in_w[v] = true;
    }
    // In-degree at least sqrt(3n).
    for (v, flag) in in_w.iter_mut().enumerate() {
        let k = dag.in_degree(v);
        if k * k >= 3 * n {
            *flag = true;
        }
    }
    let w: Vec<VertexId> = (0..n).filter(|&v| in_w[v]).collect();
    let mut on_left = vec![false; n];
    for &v in &sep.left {
        on_left[v] = true;
    }

    let mut children: Option<(Piece, Piece)> = None;
    let report = challenging_schedule(dag, &w, |sub| {
        let (left, right): (Vec<VertexId>, Vec<VertexId>) =
            (0..sub.dag.vertex_count()).partition(|&local| on_left[sub.to_parent(local)]);
        let lsub = induced_subdag(&sub.dag, &left)?;
        let rsub = induced_subdag(&sub.dag, &right)?;
        let lp = recurse(&lsub.dag, level + 1, separator)?;
        let rp = recurse(&rsub.dag, level + 1, separator)?;
        let stream = Concat(vec![
            Arc::new(Relabel::new(lp.stream.clone(), lsub.vertices.clone().into())),
            Arc::new(Relabel::new(rp.stream.clone(), rsub.vertices.clone().into())),
        ]);
        let bound = lp.bound.max(rp.bound);
        children = Some((lp, rp));
        Ok(SchedulerReport::new("separator", Arc::new(stream), bound, None))
    })?;
    let (lp, rp) = children.expect("inner scheduler ran");
    let s = sep.separator.len();
    Ok(Piece {
        stream: Arc::new(Emptying::new(report.schedule, n)),
        bound: lp.bound.max(rp.bound) + w.len() + dag.max_in_degree(),
        certified: s * s <= 8 * n && lp.certified && rp.certified,
        levels: 1 + lp.levels.max(rp.levels),
        largest_separator: s.max(lp.largest_separator).max(rp.largest_separator),
    })
}

/// Recursively splits the graph with `separator`, pebbles the two sides of
/// the reduced graph one after the other, and handles separator and
/// high-in-degree vertices as challenging vertices.
pub fn pebble_with_separator(
    dag: &Dag,
    separator: &dyn Fn(&Dag) -> Separation,
) -> Result<SchedulerReport, ScheduleError> {
    let piece = recurse(dag, 0, separator)?;
    let n = dag.vertex_count();
    let mut report = SchedulerReport::new("separator", piece.stream, piece.bound, None)
        .with_param("levels", piece.levels)
        .with_param("largest_separator", piece.largest_separator)
        .with_param("certified", piece.certified);
    if piece.certified {
        report = report.with_param("planar_bound", planar_space_bound(n, dag.max_in_degree()));
    }
    Ok(report)
}
