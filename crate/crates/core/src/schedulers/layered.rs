//! Emptying schedule built part by part from a budget decomposition.
//!
//! For the last part, each vertex `u` whose predecessors `P(u)` lie partly in
//! earlier parts is pebbled during a replay of the schedule for the earlier
//! parts. The replay is modified so that the members of `P(u)` are all
//! pebbled at one moment, `u` takes a pebble from one of them, and the replay
//! then continues from its original configuration.

use std::ops::ControlFlow;
use std::sync::Arc;

use crate::decomposition::{validate, BudgetDecomposition};
use crate::graph::{Dag, VertexId};
use crate::schedule::{Move, MoveStream};

use super::depth::depth_recursive_schedule;
use super::topo::{emit_segment_topo, Releases};
use super::{ScheduleError, SchedulerReport};

const NOT_MEMBER: u32 = u32::MAX;

/// How one replay of the earlier parts is bent to pebble `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Plan {
    /// Some members of `P(u)` are unpebbled once all have been covered: keep
    /// them by dropping their last removals before move `at`, then slide
    /// `source` onto `u` and remove the other kept vertices.
    Eliminate { at: u64, dropped: Vec<u64>, source: VertexId, extra: Vec<VertexId> },
    /// All of `P(u)` is pebbled at some point and the first later removal of a
    /// member is `Remove(source)` at `index`; replace it by a slide onto `u`.
    SlideAt { index: u64, source: VertexId },
    /// The first later removal of a member is a slide; place `u` right after
    /// move `index`, where the replay holds the fewest pebbles.
    PlaceAfter { index: u64 },
}

struct LayeredStream {
    dag: Dag,
    order: Vec<VertexId>,
    rank: Vec<usize>,
    /// Part `k` is `order[starts[k]..starts[k + 1]]`.
    starts: Vec<usize>,
}

impl LayeredStream {
    /// Emits the schedule for parts `0..=k`.
    fn emit_prefix(&self, k: usize, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        let (lo, hi) = (self.starts[k], self.starts[k + 1]);
        let earlier = |u: VertexId| self.dag.preds(u).iter().copied().filter(move |&p| self.rank[p] < lo);
        if k == 0 || (lo..hi).all(|j| earlier(self.order[j]).next().is_none()) {
            if k > 0 {
                self.emit_prefix(k - 1, sink)?;
            }
            return emit_segment_topo(&self.dag, &self.order, &self.rank, lo, hi, sink);
        }

        let releases = Releases::new(&self.dag, &self.order, &self.rank, lo, hi);
        let mut slot = vec![NOT_MEMBER; lo];
        for j in lo..hi {
            let u = self.order[j];
            let pu: Vec<VertexId> = earlier(u).collect();
            if pu.is_empty() {
                sink(Move::Place(u))?;
                for &r in releases.at(j) {
                    sink(Move::Remove(r))?;
                }
                continue;
            }
            for (i, &p) in pu.iter().enumerate() {
                slot[self.rank[p]] = i as u32;
            }
            let plan = self.plan(k - 1, &pu, &slot);
            self.emit_group(k - 1, &plan, u, releases.at(j), sink)?;
            for &p in &pu {
                slot[self.rank[p]] = NOT_MEMBER;
            }
        }
        ControlFlow::Continue(())
    }

    /// Dry run of the schedule for parts `0..=k` to decide how to pebble a
    /// vertex whose earlier-part predecessors are `pu` (indexed by `slot`).
    fn plan(&self, k: usize, pu: &[VertexId], slot: &[u32]) -> Plan {
        let member = |v: VertexId| match slot[self.rank[v]] {
            NOT_MEMBER => None,
            i => Some(i as usize),
        };
        let mut on = vec![false; pu.len()];
        let mut covered = vec![false; pu.len()];
        let mut last_removal: Vec<Option<u64>> = vec![None; pu.len()];
        let mut uncovered = pu.len();
        let mut count: usize = 0;
        let mut t: u64 = 0;
        // Lowest pebble count seen since all of pu became pebbled, and where.
        let mut best: Option<(usize, u64)> = None;
        let mut plan = None;

        let _ = self.emit_prefix(k, &mut |m| {
            if let Some((best_count, best_at)) = best {
                let removed = match m {
                    Move::Remove(w) => member(w).map(|_| Some(w)),
                    Move::Slide(w, _) => member(w).map(|_| None),
                    Move::Place(_) => None,
                };
                match removed {
                    Some(Some(w)) => {
                        plan = Some(Plan::SlideAt { index: t, source: w });
                        return ControlFlow::Break(());
                    }
                    Some(None) => {
                        plan = Some(Plan::PlaceAfter { index: best_at });
                        return ControlFlow::Break(());
                    }
                    None => {}
                }
                match m {
                    Move::Place(_) => count += 1,
                    Move::Remove(_) => count -= 1,
                    Move::Slide(..) => {}
                }
                if count < best_count {
                    best = Some((count, t));
                }
                t += 1;
                return ControlFlow::Continue(());
            }

            match m {
                Move::Place(_) => count += 1,
                Move::Remove(_) => count -= 1,
                Move::Slide(..) => {}
            }
            if let Move::Remove(w) | Move::Slide(w, _) = m {
                if let Some(i) = member(w) {
                    on[i] = false;
                    last_removal[i] = Some(t);
                }
            }
            if let Move::Place(w) | Move::Slide(_, w) = m {
                if let Some(i) = member(w) {
                    on[i] = true;
                    if !covered[i] {
                        covered[i] = true;
                        uncovered -= 1;
                    }
                }
            }
            t += 1;
            if uncovered > 0 {
                return ControlFlow::Continue(());
            }
            let missing: Vec<usize> = (0..pu.len()).filter(|&i| !on[i]).collect();
            if missing.is_empty() {
                best = Some((count, t - 1));
                return ControlFlow::Continue(());
            }
            let mut dropped: Vec<u64> =
                missing.iter().map(|&i| last_removal[i].expect("covered then unpebbled")).collect();
            dropped.sort_unstable();
            let mut kept: Vec<VertexId> = missing.iter().map(|&i| pu[i]).collect();
            kept.sort_unstable();
            let source = kept.remove(0);
            plan = Some(Plan::Eliminate { at: t, dropped, source, extra: kept });
            ControlFlow::Break(())
        });

        match (plan, best) {
            (Some(p), _) => p,
            // The earlier schedule is emptying, so a member removal always
            // follows; this arm only guards against a malformed input.
            (None, Some((_, at))) => Plan::PlaceAfter { index: at },
            (None, None) => unreachable!("schedule for earlier parts does not cover P(u)"),
        }
    }

    fn emit_group(
        &self,
        k: usize,
        plan: &Plan,
        u: VertexId,
        released: &[VertexId],
        sink: &mut dyn FnMut(Move) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut t: u64 = 0;
        let mut next_drop = 0usize;
        self.emit_prefix(k, &mut |m| {
            let here = t;
            t += 1;
            match plan {
                Plan::Eliminate { at, dropped, source, extra } => {
                    if dropped.get(next_drop) == Some(&here) {
                        next_drop += 1;
                        if let Move::Slide(_, x) = m {
                            sink(Move::Place(x))?;
                        }
                    } else {
                        sink(m)?;
                    }
                    if here + 1 == *at {
                        sink(Move::Slide(*source, u))?;
                        for &r in released {
                            sink(Move::Remove(r))?;
                        }
                        for &w in extra {
                            sink(Move::Remove(w))?;
                        }
                    }
                }
                Plan::SlideAt { index, source } => {
                    if here == *index {
                        sink(Move::Slide(*source, u))?;
                        for &r in released {
                            sink(Move::Remove(r))?;
                        }
                    } else {
                        sink(m)?;
                    }
                }
                Plan::PlaceAfter { index } => {
                    sink(m)?;
                    if here == *index {
                        sink(Move::Place(u))?;
                        for &r in released {
                            sink(Move::Remove(r))?;
                        }
                    }
                }
            }
            ControlFlow::Continue(())
        })
    }
}

impl MoveStream for LayeredStream {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        if self.starts.len() < 2 {
            return ControlFlow::Continue(());
        }
        self.emit_prefix(self.starts.len() - 2, sink)
    }
}

/// Move bound of the layered schedule: `T_1 = 2|V_1|` and
/// `T_k = |V_k| (T_{k-1} + max(d, 2))`. `None` on overflow.
pub(crate) fn layered_move_bound(part_sizes: &[usize], d: usize) -> Option<u128> {
    let step = d.max(2) as u128;
    let mut t: u128 = 0;
    for (k, &size) in part_sizes.iter().enumerate() {
        t = if k == 0 { 2 * size as u128 } else { (size as u128).checked_mul(t.checked_add(step)?)? };
    }
    Some(t)
}

/// Builds the emptying, full schedule for `decomp`. Its peak is at most
/// `sum b_i + 1 + (d - 1)(l - 1)`.
///
/// With `d <= 1` a predecessor may feed vertices in two later parts, and the
/// replay would need a second pebble for it; such graphs get the one-pebble
/// schedule instead.
pub fn schedule_from_decomposition(dag: &Dag, decomp: &BudgetDecomposition) -> Result<SchedulerReport, ScheduleError> {
    let order = validate(dag, decomp).map_err(|e| ScheduleError::InvalidDecomposition(e.to_string()))?;
    let mut starts = Vec::with_capacity(decomp.part_count() + 1);
    let mut acc = 0;
    starts.push(0);
    for p in &decomp.parts {
        acc += p.vertices.len();
        starts.push(acc);
    }
    let d = dag.max_in_degree();
    let sizes: Vec<usize> = decomp.parts.iter().map(|p| p.vertices.len()).collect();
    if d <= 1 {
        let r = depth_recursive_schedule(dag);
        return Ok(SchedulerReport { space_bound: decomp.space_cost(d), ..r }
            .with_strategy("layered")
            .with_param("parts", decomp.part_count())
            .with_param("boundary_sum", decomp.boundary_sum())
            .with_param("budget", decomp.budget.to_string())
            .with_param("part_sizes", sizes)
            .with_param("degree_one", true));
    }
    let stream = LayeredStream { dag: dag.clone(), rank: order.ranks().to_vec(), order: order.into_vec(), starts };
    Ok(SchedulerReport::new("layered", Arc::new(stream), decomp.space_cost(d), layered_move_bound(&sizes, d))
        .with_param("parts", decomp.part_count())
        .with_param("boundary_sum", decomp.boundary_sum())
        .with_param("budget", decomp.budget.to_string())
        .with_param("part_sizes", sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, Budget, Part};
    use crate::graph::TopoOrder;
    use crate::schedule::{simulate, verify_full, Move::*};
    use crate::schedulers::topo_schedule;

    fn diamond() -> Dag {
        Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn parts(dag: &Dag, segments: &[&[VertexId]]) -> BudgetDecomposition {
        let mut dec = BudgetDecomposition {
            budget: Budget::zero(),
            parts: segments.iter().map(|s| Part { vertices: s.to_vec(), boundary: 0 }).collect(),
            levels: 1,
        };
        // Fill in exact boundaries.
        let order = TopoOrder::new(dag, dec.order()).unwrap();
        let mut lo = 0;
        for p in dec.parts.iter_mut() {
            let hi = lo + p.vertices.len();
            p.boundary = crate::graph::scan_segment(dag, order.as_slice(), order.ranks(), lo, hi).profile.max_value;
            lo = hi;
        }
        dec.budget = Budget::from_integer(dec.boundary_sum() as u64);
        dec
    }

    #[test]
    fn single_part_equals_topo() {
        let g = diamond();
        let dec = decompose(&g, &g.topological_order(), &Budget::from_integer(2));
        let r = schedule_from_decomposition(&g, &dec).unwrap();
        let t = topo_schedule(&g, &g.topological_order());
        assert_eq!(r.schedule.to_schedule(), t.schedule.to_schedule());
        assert_eq!(r.move_bound, Some(8));
    }

    #[test]
    fn diamond_two_parts() {
        let g = diamond();
        let dec = parts(&g, &[&[0, 1], &[2, 3]]);
        let r = schedule_from_decomposition(&g, &dec).unwrap();
        let m = simulate(&g, &r.schedule).unwrap();
        assert!(verify_full(&g, &r.schedule).is_legal_and_full());
        assert!(m.is_emptying());
        assert_eq!(r.space_bound, dec.boundary_sum() + 1 + 1);
        assert!(m.peak <= r.space_bound);
        assert!(m.moves as u128 <= r.move_bound.unwrap());
    }

    #[test]
    fn independent_last_part_is_plain_concatenation() {
        let g = Dag::new(6, [(0, 2), (1, 2), (3, 5), (4, 5)]).unwrap();
        let dec = parts(&g, &[&[0, 1, 2], &[3, 4, 5]]);
        let r = schedule_from_decomposition(&g, &dec).unwrap();
        assert_eq!(
            r.schedule.to_schedule().moves(),
            &[
                Place(0),
                Place(1),
                Place(2),
                Remove(0),
                Remove(1),
                Remove(2),
                Place(3),
                Place(4),
                Place(5),
                Remove(3),
                Remove(4),
                Remove(5),
            ]
        );
        assert_eq!(simulate(&g, &r.schedule).unwrap().peak, 3);
    }

    #[test]
    fn singleton_parts_of_a_path_slide() {
        let g = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        let dec = parts(&g, &[&[0], &[1], &[2]]);
        let r = schedule_from_decomposition(&g, &dec).unwrap();
        let m = simulate(&g, &r.schedule).unwrap();
        assert!(m.is_full(&g) && m.is_emptying());
        assert!(m.peak <= r.space_bound);
    }

    #[test]
    fn rejects_foreign_decomposition() {
        let g = diamond();
        let bad = BudgetDecomposition {
            budget: Budget::zero(),
            parts: vec![Part { vertices: vec![1, 0, 2, 3], boundary: 2 }],
            levels: 1,
        };
        assert!(matches!(schedule_from_decomposition(&g, &bad), Err(ScheduleError::InvalidDecomposition(_))));
    }

    #[test]
    fn move_bound_recurrence() {
        assert_eq!(layered_move_bound(&[3], 2), Some(6));
        assert_eq!(layered_move_bound(&[2, 2], 2), Some(2 * (4 + 2)));
        assert_eq!(layered_move_bound(&[2, 2, 3], 3), Some(3 * (2 * (4 + 3) + 3)));
        assert_eq!(layered_move_bound(&[usize::MAX, usize::MAX, usize::MAX], 2), None);
    }
}
