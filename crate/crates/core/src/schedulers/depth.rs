use std::ops::ControlFlow;
use std::sync::Arc;

use crate::graph::{Dag, VertexId};
use crate::schedule::{Move, MoveStream};

use super::challenging::challenging_schedule;
use super::topo::topo_schedule;
use super::SchedulerReport;

struct DepthStream {
    dag: Dag,
    /// Predecessor lists ordered by decreasing depth, then id.
    preds: Vec<Vec<VertexId>>,
}

struct Frame {
    v: VertexId,
    next: usize,
    /// Predecessors this frame pebbled and still holds, in pebbling order.
    owned: Vec<VertexId>,
}

impl MoveStream for DepthStream {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        let mut on = vec![false; self.dag.vertex_count()];
        let mut stack: Vec<Frame> = Vec::new();
        for s in self.dag.sinks() {
            stack.push(Frame { v: s, next: 0, owned: Vec::new() });
            while let Some(top) = stack.last_mut() {
                let preds = &self.preds[top.v];
                if top.next < preds.len() {
                    let p = preds[top.next];
                    top.next += 1;
                    // Already pebbled by an enclosing frame: borrow it.
                    if !on[p] {
                        stack.push(Frame { v: p, next: 0, owned: Vec::new() });
                    }
                    continue;
                }
                let Frame { v, mut owned, .. } = stack.pop().expect("nonempty");
                match owned.pop() {
                    Some(src) => {
                        sink(Move::Slide(src, v))?;
                        on[src] = false;
                    }
                    None => sink(Move::Place(v))?,
                }
                on[v] = true;
                for w in owned {
                    sink(Move::Remove(w))?;
                    on[w] = false;
                }
                match stack.last_mut() {
                    Some(parent) => parent.owned.push(v),
                    None => {
                        sink(Move::Remove(v))?;
                        on[v] = false;
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// `l (d - 1) + 1`.
pub(crate) fn classic_depth_bound(l: usize, d: usize) -> usize {
    l * d.saturating_sub(1) + 1
}

/// Pebbles each sink recursively: predecessors one after another (keeping
/// their pebbles), then a slide from the last onto the vertex. Peak at most
/// `l (d - 1) + 1`.
pub fn depth_recursive_schedule(dag: &Dag) -> SchedulerReport {
    let depths = dag.vertex_depths();
    let preds = (0..dag.vertex_count())
        .map(|v| {
            let mut p = dag.preds(v).to_vec();
            p.sort_by_key(|&u| (std::cmp::Reverse(depths[u]), u));
            p
        })
        .collect();
    let l = dag.topological_depth();
    let d = dag.max_in_degree();
    let move_bound = if d <= 1 { Some(dag.sinks().map(|s| depths[s] as u128 + 2).sum()) } else { None };
    SchedulerReport::new(
        "depth-classic",
        Arc::new(DepthStream { dag: dag.clone(), preds }),
        classic_depth_bound(l, d),
        move_bound,
    )
    .with_param("depth", l)
}

/// `ceil(2 sqrt(m l)) - l + 1 + d`, saturating at zero before adding `1 + d`.
pub fn depth_space_bound(m: usize, l: usize, d: usize) -> usize {
    let r = ceil_sqrt(4 * m as u128 * l as u128) as usize;
    r.saturating_sub(l) + 1 + d
}

fn ceil_sqrt(x: u128) -> u128 {
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Treats vertices with in-degree at least `sqrt(m/l)` as challenging and
/// pebbles the rest with the classic depth schedule. Falls back to the
/// classic schedule when its bound is smaller.
pub fn pebble_by_depth(dag: &Dag) -> SchedulerReport {
    let m = dag.edge_count();
    let l = dag.topological_depth();
    let d = dag.max_in_degree();
    if m == 0 {
        return topo_schedule(dag, &dag.topological_order()).with_strategy("depth");
    }
    let bound = depth_space_bound(m, l, d);
    let classic = classic_depth_bound(l, d);
    if bound > classic {
        return depth_recursive_schedule(dag)
            .with_strategy("depth")
            .with_param("fallback", "classic bound is smaller")
            .with_param("depth_bound", bound);
    }
    // indeg >= sqrt(m/l)  <=>  indeg^2 * l >= m.
    let mut w: Vec<VertexId> = (0..dag.vertex_count())
        .filter(|&v| {
            let k = dag.in_degree(v) as u128;
            k * k * l as u128 >= m as u128
        })
        .collect();
    let cap = ceil_sqrt(m as u128 * l as u128) as usize;
    if w.len() > cap {
        w.sort_by_key(|&v| (std::cmp::Reverse(dag.in_degree(v)), v));
        w.truncate(cap);
        w.sort_unstable();
    }
    let report = challenging_schedule(dag, &w, |sub| Ok(depth_recursive_schedule(&sub.dag)))
        .expect("classic depth schedule is legal and full");
    let inner = report.params.get("inner_space_bound").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    let instantiated = inner + w.len() + d;
    SchedulerReport { space_bound: bound, ..report }
        .with_strategy("depth")
        .with_param("depth", l)
        .with_param("depth_bound", bound)
        .with_param("instantiated_space_bound", instantiated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{simulate, verify_full};

    #[test]
    fn classic_examples() {
        let chain = Dag::new(5, (1..5).map(|i| (i - 1, i))).unwrap();
        let r = depth_recursive_schedule(&chain);
        let m = simulate(&chain, &r.schedule).unwrap();
        assert_eq!((r.space_bound, m.peak), (1, 1));
        assert!(m.is_full(&chain) && m.is_emptying());

        // Heap-labelled in-tree on 7 vertices: children 2i+1, 2i+2 point to i.
        let tree = Dag::new(7, (1..7).map(|c| (c, (c - 1) / 2))).unwrap();
        let r = depth_recursive_schedule(&tree);
        assert_eq!(r.space_bound, 3);
        assert!(simulate(&tree, &r.schedule).unwrap().peak <= 3);
        assert!(verify_full(&tree, &r.schedule).is_legal_and_full());

        let one = Dag::new(1, []).unwrap();
        let r = depth_recursive_schedule(&one);
        assert_eq!((r.space_bound, simulate(&one, &r.schedule).unwrap().peak), (1, 1));
    }

    #[test]
    fn shared_predecessors_are_borrowed() {
        // 0 feeds both 1 and 2, which feed 3.
        let g = Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)]).unwrap();
        let r = depth_recursive_schedule(&g);
        let m = simulate(&g, &r.schedule).unwrap();
        assert!(m.is_full(&g) && m.is_emptying());
        assert!(m.peak <= r.space_bound);
    }

    #[test]
    fn depth_bound_examples() {
        assert_eq!(depth_space_bound(16, 4, 8), 21);
        assert_eq!(ceil_sqrt(0), 0);
        assert_eq!(ceil_sqrt(15), 4);
        assert_eq!(ceil_sqrt(16), 4);
        assert_eq!(ceil_sqrt(17), 5);
    }

    #[test]
    fn by_depth_falls_back_on_chains() {
        let chain = Dag::new(6, (1..6).map(|i| (i - 1, i))).unwrap();
        let r = pebble_by_depth(&chain);
        assert_eq!(r.space_bound, 1);
        assert_eq!(simulate(&chain, &r.schedule).unwrap().peak, 1);
    }

    #[test]
    fn by_depth_with_hubs() {
        // Two sources feeding a wide fan-in sink: m=9, l=2, d=8.
        let mut edges: Vec<(usize, usize)> = (1..9).map(|i| (i, 9)).collect();
        edges.push((0, 1));
        let g = Dag::new(10, edges).unwrap();
        let r = pebble_by_depth(&g);
        let m = simulate(&g, &r.schedule).unwrap();
        assert!(verify_full(&g, &r.schedule).is_legal_and_full());
        assert!(m.peak <= r.space_bound, "{} > {}", m.peak, r.space_bound);
    }
}
