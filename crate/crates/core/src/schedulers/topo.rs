use std::ops::ControlFlow;
use std::sync::Arc;

use crate::graph::{boundary_profile, Dag, TopoOrder, VertexId};
use crate::schedule::{Move, MoveStream};

use super::SchedulerReport;

/// Vertices of `order[lo..hi]` grouped by the index at which they can be
/// released: the position of their last successor inside the window, or
/// their own position when they have none there.
pub(crate) struct Releases {
    offsets: Vec<usize>,
    vertices: Vec<VertexId>,
    lo: usize,
}

impl Releases {
    pub(crate) fn new(dag: &Dag, order: &[VertexId], rank: &[usize], lo: usize, hi: usize) -> Releases {
        let at: Vec<usize> = (lo..hi)
            .map(|i| dag.succs(order[i]).iter().map(|&s| rank[s]).filter(|&r| r < hi).fold(i, usize::max) - lo)
            .collect();
        let mut offsets = vec![0usize; hi - lo + 1];
        for &a in &at {
            offsets[a + 1] += 1;
        }
        for k in 1..offsets.len() {
            offsets[k] += offsets[k - 1];
        }
        let mut fill = offsets.clone();
        let mut vertices = vec![0; hi - lo];
        for (k, &a) in at.iter().enumerate() {
            vertices[fill[a]] = order[lo + k];
            fill[a] += 1;
        }
        Releases { offsets, vertices, lo }
    }

    /// Vertices released right after the vertex at global index `i` is pebbled.
    pub(crate) fn at(&self, i: usize) -> &[VertexId] {
        let k = i - self.lo;
        &self.vertices[self.offsets[k]..self.offsets[k + 1]]
    }
}

/// Pebbles `order[lo..hi]` in order, removing each pebble as soon as its last
/// successor inside the window has been pebbled.
pub(crate) fn emit_segment_topo(
    dag: &Dag,
    order: &[VertexId],
    rank: &[usize],
    lo: usize,
    hi: usize,
    sink: &mut dyn FnMut(Move) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let releases = Releases::new(dag, order, rank, lo, hi);
    for (i, &v) in order.iter().enumerate().take(hi).skip(lo) {
        sink(Move::Place(v))?;
        for &r in releases.at(i) {
            sink(Move::Remove(r))?;
        }
    }
    ControlFlow::Continue(())
}

struct TopoStream {
    dag: Dag,
    order: TopoOrder,
}

impl MoveStream for TopoStream {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        emit_segment_topo(&self.dag, self.order.as_slice(), self.order.ranks(), 0, self.order.len(), sink)
    }
}

/// Pebbles vertices in `order`, each removed right after its last successor
/// is pebbled. Exactly `2n` moves, peak at most `b(G, order) + 1`.
pub fn topo_schedule(dag: &Dag, order: &TopoOrder) -> SchedulerReport {
    let profile = boundary_profile(dag, order).expect("order must be a topological order of dag");
    let n = dag.vertex_count();
    SchedulerReport::new(
        "topo",
        Arc::new(TopoStream { dag: dag.clone(), order: order.clone() }),
        profile.max_value + 1,
        Some(2 * n as u128),
    )
    .with_param("max_boundary", profile.max_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{simulate, Move::*};

    #[test]
    fn examples() {
        let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        let r = topo_schedule(&chain, &chain.topological_order());
        let m = simulate(&chain, &r.schedule).unwrap();
        assert_eq!((m.moves, m.peak, r.space_bound), (6, 2, 2));

        let one = Dag::new(1, []).unwrap();
        let r = topo_schedule(&one, &one.topological_order());
        assert_eq!(r.schedule.to_schedule().moves(), &[Place(0), Remove(0)]);

        let diamond = Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let r = topo_schedule(&diamond, &diamond.topological_order());
        let m = simulate(&diamond, &r.schedule).unwrap();
        assert_eq!(m.moves, 8);
        assert!(m.peak <= 3 && r.space_bound == 3);
        assert!(m.is_emptying() && m.is_full(&diamond));
    }
}
