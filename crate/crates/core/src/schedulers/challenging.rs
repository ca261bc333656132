use std::ops::ControlFlow;
use std::sync::Arc;

use crate::graph::{induced_subdag, Dag, InducedSubdag, VertexId};
use crate::schedule::{simulate, Move, MoveStream};

use super::{ScheduleError, SchedulerReport};

struct ChallengingStream {
    dag: Dag,
    sub: Arc<InducedSubdag>,
    inner: Arc<dyn MoveStream>,
    /// Challenging vertices in topological order of the whole graph.
    w: Vec<VertexId>,
}

impl ChallengingStream {
    /// Local ids of the reduced graph that are ancestors (inclusive) of the
    /// reduced-graph predecessors of `wi`.
    fn relevant(&self, wi: VertexId) -> (Vec<bool>, Vec<bool>) {
        let g = &self.sub.dag;
        let mut keep = vec![false; g.vertex_count()];
        let mut parent = vec![false; g.vertex_count()];
        let mut stack: Vec<VertexId> = Vec::new();
        for &p in self.dag.preds(wi) {
            if let Some(lp) = self.sub.to_local(p) {
                parent[lp] = true;
                if !keep[lp] {
                    keep[lp] = true;
                    stack.push(lp);
                }
            }
        }
        while let Some(v) = stack.pop() {
            for &p in g.preds(v) {
                if !keep[p] {
                    keep[p] = true;
                    stack.push(p);
                }
            }
        }
        (keep, parent)
    }
}

impl MoveStream for ChallengingStream {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        let to_parent = |v: VertexId| self.sub.to_parent(v);
        let n_local = self.sub.dag.vertex_count();
        let mut on = vec![false; n_local];
        for &wi in &self.w {
            let (keep, parent) = self.relevant(wi);
            // Replay the inner schedule restricted to `keep`, never removing
            // a parent of wi once it is pebbled.
            self.inner.stream(&mut |m| {
                let out = match m {
                    Move::Place(v) => {
                        if keep[v] && !on[v] {
                            on[v] = true;
                            Some(Move::Place(v))
                        } else {
                            None
                        }
                    }
                    Move::Remove(v) => {
                        if on[v] && !parent[v] {
                            on[v] = false;
                            Some(Move::Remove(v))
                        } else {
                            None
                        }
                    }
                    Move::Slide(a, b) => {
                        if keep[b] && !on[b] {
                            if parent[a] {
                                on[b] = true;
                                Some(Move::Place(b))
                            } else {
                                on[a] = false;
                                on[b] = true;
                                Some(Move::Slide(a, b))
                            }
                        } else if on[a] && !parent[a] {
                            on[a] = false;
                            Some(Move::Remove(a))
                        } else {
                            None
                        }
                    }
                };
                match out {
                    Some(mv) => sink(mv.map(to_parent)),
                    None => ControlFlow::Continue(()),
                }
            })?;
            let source = self.dag.preds(wi).iter().filter_map(|&p| self.sub.to_local(p)).min();
            match source {
                Some(s) => {
                    sink(Move::Slide(to_parent(s), wi))?;
                    on[s] = false;
                }
                None => sink(Move::Place(wi))?,
            }
            for (v, flag) in on.iter_mut().enumerate() {
                if *flag {
                    *flag = false;
                    sink(Move::Remove(to_parent(v)))?;
                }
            }
        }
        self.inner.stream(&mut |m| sink(m.map(to_parent)))
    }
}

/// Pebbles the vertices of `w` one at a time in topological order, each
/// after a filtered replay of the reduced graph's schedule that pebbles just
/// its predecessors; the challenging vertices then stay pebbled while the
/// reduced schedule is replayed once more in full.
///
/// `inner` schedules the graph induced by `V \ W` (local ids). The reported
/// space bound is `S' + |W| + d` and the move bound `(|W| + 1)(T' + n)`, with
/// `S'` and `T'` measured on the inner schedule.
pub fn challenging_schedule<F>(dag: &Dag, w: &[VertexId], inner: F) -> Result<SchedulerReport, ScheduleError>
where
    F: FnOnce(&InducedSubdag) -> Result<SchedulerReport, ScheduleError>,
{
    let n = dag.vertex_count();
    let mut in_w = vec![false; n];
    for &v in w {
        if v >= n {
            return Err(crate::graph::GraphError::UnknownVertex { vertex: v, n }.into());
        }
        in_w[v] = true;
    }
    let rest: Vec<VertexId> = (0..n).filter(|&v| !in_w[v]).collect();
    let sub = induced_subdag(dag, &rest)?;
    let inner_report = inner(&sub)?;
    let metrics = simulate(&sub.dag, &inner_report.schedule).map_err(ScheduleError::InnerIllegal)?;
    if !metrics.is_full(&sub.dag) {
        return Err(ScheduleError::InnerNotFull(sub.dag.vertex_count() - metrics.covered.len()));
    }
    let order = dag.topological_order();
    let mut w_sorted: Vec<VertexId> = (0..n).filter(|&v| in_w[v]).collect();
    w_sorted.sort_by_key(|&v| order.rank(v));

    let k = w_sorted.len();
    let d = dag.max_in_degree();
    let space_bound = metrics.peak + k + d;
    let move_bound = (k as u128 + 1).checked_mul(metrics.moves as u128 + n as u128);
    let stream =
        ChallengingStream { dag: dag.clone(), sub: Arc::new(sub), inner: inner_report.schedule.clone(), w: w_sorted };
    Ok(SchedulerReport::new("challenging", Arc::new(stream), space_bound, move_bound)
        .with_param("challenging", k)
        .with_param("inner_strategy", inner_report.strategy.clone())
        .with_param("inner_space_bound", inner_report.space_bound)
        .with_param("inner_peak", metrics.peak)
        .with_param("inner_moves", metrics.moves))
}
