//! Pebbling moves, schedules (materialized or lazy), and a streaming simulator
//! that enforces the black pebble game rules with sliding.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Dag, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Place(VertexId),
    /// Moves the pebble on the first vertex onto the second.
    Slide(VertexId, VertexId),
    Remove(VertexId),
}

impl Move {
    /// Vertex whose pebble state the move sets (the slide target for slides).
    pub fn target(self) -> VertexId {
        match self {
            Move::Place(v) | Move::Remove(v) | Move::Slide(_, v) => v,
        }
    }

    pub fn map(self, f: impl Fn(VertexId) -> VertexId) -> Move {
        match self {
            Move::Place(v) => Move::Place(f(v)),
            Move::Slide(u, v) => Move::Slide(f(u), f(v)),
            Move::Remove(v) => Move::Remove(f(v)),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Place(v) => write!(f, "P {v}"),
            Move::Slide(u, v) => write!(f, "S {u} {v}"),
            Move::Remove(v) => write!(f, "R {v}"),
        }
    }
}

/// A possibly lazy, replayable sequence of moves. Every call to `stream`
/// produces the same sequence; the sink may stop it early with `Break`.
pub trait MoveStream: Send + Sync {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()>;

    fn to_schedule(&self) -> Schedule {
        let mut moves = Vec::new();
        let _ = self.stream(&mut |m| {
            moves.push(m);
            ControlFlow::Continue(())
        });
        Schedule { moves }
    }
}

impl<T: MoveStream + ?Sized> MoveStream for Arc<T> {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        (**self).stream(sink)
    }
}

impl<T: MoveStream + ?Sized> MoveStream for &T {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        (**self).stream(sink)
    }
}

/// A materialized schedule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    moves: Vec<Move>,
}

impl Schedule {
    pub fn new(moves: Vec<Move>) -> Schedule {
        Schedule { moves }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn into_moves(self) -> Vec<Move> {
        self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, m: Move) {
        self.moves.push(m);
    }

    pub fn concat(mut self, other: &Schedule) -> Schedule {
        self.moves.extend_from_slice(&other.moves);
        self
    }

    /// Moves `range` as a standalone schedule.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Schedule {
        Schedule { moves: self.moves[range].to_vec() }
    }
}

impl From<Vec<Move>> for Schedule {
    fn from(moves: Vec<Move>) -> Schedule {
        Schedule { moves }
    }
}

impl MoveStream for Schedule {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        for &m in &self.moves {
            sink(m)?;
        }
        ControlFlow::Continue(())
    }
}

/// Streams played back to back.
pub struct Concat(pub Vec<Arc<dyn MoveStream>>);

impl MoveStream for Concat {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        for s in &self.0 {
            s.stream(sink)?;
        }
        ControlFlow::Continue(())
    }
}

/// A stream over a sub-DAG's local ids, relabelled to parent ids.
pub struct Relabel {
    inner: Arc<dyn MoveStream>,
    to_parent: Arc<[VertexId]>,
}

impl Relabel {
    pub fn new(inner: Arc<dyn MoveStream>, to_parent: Arc<[VertexId]>) -> Relabel {
        Relabel { inner, to_parent }
    }
}

impl MoveStream for Relabel {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        let map = &self.to_parent;
        self.inner.stream(&mut |m| sink(m.map(|v| map[v])))
    }
}

/// Plays `inner`, then removes whatever is still pebbled in ascending id
/// order, so the result always ends in the empty configuration.
pub struct Emptying {
    inner: Arc<dyn MoveStream>,
    vertex_count: usize,
}

impl Emptying {
    pub fn new(inner: Arc<dyn MoveStream>, vertex_count: usize) -> Emptying {
        Emptying { inner, vertex_count }
    }
}

impl MoveStream for Emptying {
    fn stream(&self, sink: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
        let mut on = vec![false; self.vertex_count];
        self.inner.stream(&mut |m| {
            match m {
                Move::Place(v) => on[v] = true,
                Move::Slide(u, v) => {
                    on[u] = false;
                    on[v] = true;
                }
                Move::Remove(v) => on[v] = false,
            }
            sink(m)
        })?;
        for (v, &p) in on.iter().enumerate() {
            if p {
                sink(Move::Remove(v))?;
            }
        }
        ControlFlow::Continue(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IllegalReason {
    MissingPredecessor,
    NotAPredecessor,
    NotPebbled,
    AlreadyPebbled,
    UnknownVertex,
    /// A slide from a vertex onto itself.
    SelfSlide,
}

impl fmt::Display for IllegalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IllegalReason::MissingPredecessor => "missing-predecessor",
            IllegalReason::NotAPredecessor => "not-a-predecessor",
            IllegalReason::NotPebbled => "not-pebbled",
            IllegalReason::AlreadyPebbled => "already-pebbled",
            IllegalReason::UnknownVertex => "unknown-vertex",
            IllegalReason::SelfSlide => "self-slide",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("illegal move {mv} at index {index}: {reason}")]
pub struct IllegalMove {
    pub index: u64,
    pub mv: Move,
    pub reason: IllegalReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Illegal(#[from] IllegalMove),
    #[error("schedule exceeded the cap of {0} moves")]
    MoveCapExceeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PebbleMetrics {
    pub peak: usize,
    pub moves: u64,
    /// Vertices pebbled at least once, ascending.
    pub covered: Vec<VertexId>,
    /// Pebbled vertices after the last move, ascending.
    #[serde(rename = "final")]
    pub final_config: Vec<VertexId>,
}

impl PebbleMetrics {
    pub fn is_full(&self, dag: &Dag) -> bool {
        self.covered.len() == dag.vertex_count()
    }

    pub fn is_emptying(&self) -> bool {
        self.final_config.is_empty()
    }
}

/// Replays moves one at a time from the empty configuration.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    dag: &'a Dag,
    on: Vec<bool>,
    covered: Vec<bool>,
    covered_count: usize,
    pebbles: usize,
    peak: usize,
    moves: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(dag: &'a Dag) -> Simulator<'a> {
        let n = dag.vertex_count();
        Simulator { dag, on: vec![false; n], covered: vec![false; n], covered_count: 0, pebbles: 0, peak: 0, moves: 0 }
    }

    pub fn is_pebbled(&self, v: VertexId) -> bool {
        self.on.get(v).copied().unwrap_or(false)
    }

    pub fn pebble_count(&self) -> usize {
        self.pebbles
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn move_count(&self) -> u64 {
        self.moves
    }

    pub fn covered_count(&self) -> usize {
        self.covered_count
    }

    fn all_preds_on(&self, v: VertexId) -> bool {
        self.dag.preds(v).iter().all(|&p| self.on[p])
    }

    fn check(&self, m: Move) -> Result<(), IllegalReason> {
        let n = self.on.len();
        match m {
            Move::Place(v) => {
                if v >= n {
                    Err(IllegalReason::UnknownVertex)
                } else if self.on[v] {
                    Err(IllegalReason::AlreadyPebbled)
                } else if !self.all_preds_on(v) {
                    Err(IllegalReason::MissingPredecessor)
                } else {
                    Ok(())
                }
            }
            Move::Slide(u, v) => {
                if u >= n || v >= n {
                    Err(IllegalReason::UnknownVertex)
                } else if u == v {
                    Err(IllegalReason::SelfSlide)
                } else if !self.dag.has_edge(u, v) {
                    Err(IllegalReason::NotAPredecessor)
                } else if !self.on[u] {
                    Err(IllegalReason::NotPebbled)
                } else if self.on[v] {
                    Err(IllegalReason::AlreadyPebbled)
                } else if !self.all_preds_on(v) {
                    Err(IllegalReason::MissingPredecessor)
                } else {
                    Ok(())
                }
            }
            Move::Remove(v) => {
                if v >= n {
                    Err(IllegalReason::UnknownVertex)
                } else if !self.on[v] {
                    Err(IllegalReason::NotPebbled)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn cover(&mut self, v: VertexId) {
        if !self.covered[v] {
            self.covered[v] = true;
            self.covered_count += 1;
        }
    }

    pub fn apply(&mut self, m: Move) -> Result<(), IllegalMove> {
        if let Err(reason) = self.check(m) {
            return Err(IllegalMove { index: self.moves, mv: m, reason });
        }
        match m {
            Move::Place(v) => {
                self.on[v] = true;
                self.pebbles += 1;
                self.cover(v);
            }
            Move::Slide(u, v) => {
                self.on[u] = false;
                self.on[v] = true;
                self.cover(v);
            }
            Move::Remove(v) => {
                self.on[v] = false;
                self.pebbles -= 1;
            }
        }
        self.peak = self.peak.max(self.pebbles);
        self.moves += 1;
        Ok(())
    }

    pub fn metrics(&self) -> PebbleMetrics {
        let pick = |flags: &[bool]| flags.iter().enumerate().filter(|(_, &f)| f).map(|(v, _)| v).collect();
        PebbleMetrics { peak: self.peak, moves: self.moves, covered: pick(&self.covered), final_config: pick(&self.on) }
    }
}

/// Replays a schedule against `dag` and returns exact metrics.
pub fn simulate(dag: &Dag, schedule: &dyn MoveStream) -> Result<PebbleMetrics, IllegalMove> {
    simulate_capped(dag, schedule, u64::MAX).map_err(|e| match e {
        SimulationError::Illegal(m) => m,
        SimulationError::MoveCapExceeded(_) => unreachable!("no cap"),
    })
}

/// As `simulate`, giving up once more than `cap` moves have been produced.
pub fn simulate_capped(dag: &Dag, schedule: &dyn MoveStream, cap: u64) -> Result<PebbleMetrics, SimulationError> {
    let mut sim = Simulator::new(dag);
    let mut failure = None;
    let _ = schedule.stream(&mut |m| {
        if sim.move_count() >= cap {
            failure = Some(SimulationError::MoveCapExceeded(cap));
            return ControlFlow::Break(());
        }
        match sim.apply(m) {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e.into());
                ControlFlow::Break(())
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(sim.metrics()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    LegalAndFull,
    LegalNotFull { uncovered: usize },
    Illegal(IllegalMove),
}

impl Verdict {
    pub fn is_legal_and_full(&self) -> bool {
        matches!(self, Verdict::LegalAndFull)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::LegalAndFull => f.write_str("legal-and-full"),
            Verdict::LegalNotFull { uncovered } => write!(f, "legal-not-full ({uncovered} vertices never pebbled)"),
            Verdict::Illegal(m) => write!(f, "illegal({}, {})", m.index, m.reason),
        }
    }
}

pub fn verify_full(dag: &Dag, schedule: &dyn MoveStream) -> Verdict {
    match simulate(dag, schedule) {
        Err(e) => Verdict::Illegal(e),
        Ok(m) if m.is_full(dag) => Verdict::LegalAndFull,
        Ok(m) => Verdict::LegalNotFull { uncovered: dag.vertex_count() - m.covered.len() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Move::*;

    fn chain(n: usize) -> Dag {
        Dag::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn simulate_examples() {
        let one = Dag::new(1, []).unwrap();
        let m = simulate(&one, &Schedule::new(vec![Place(0)])).unwrap();
        assert_eq!((m.peak, m.moves, m.covered.clone()), (1, 1, vec![0]));

        let two = chain(2);
        let m = simulate(&two, &Schedule::new(vec![Place(0), Slide(0, 1), Remove(1)])).unwrap();
        assert_eq!((m.peak, m.moves), (1, 3));
        assert_eq!(m.covered, vec![0, 1]);
        assert!(m.final_config.is_empty());

        let e = simulate(&two, &Schedule::new(vec![Place(1)])).unwrap_err();
        assert_eq!((e.index, e.reason), (0, IllegalReason::MissingPredecessor));
    }

    #[test]
    fn every_rejection_reason() {
        let g = Dag::new(3, [(0, 2), (1, 2)]).unwrap();
        let reason = |moves: Vec<Move>| simulate(&g, &Schedule::new(moves)).unwrap_err().reason;
        assert_eq!(reason(vec![Place(0), Place(0)]), IllegalReason::AlreadyPebbled);
        assert_eq!(reason(vec![Place(0), Place(1), Slide(0, 1)]), IllegalReason::NotAPredecessor);
        assert_eq!(reason(vec![Remove(0)]), IllegalReason::NotPebbled);
        assert_eq!(reason(vec![Place(1), Slide(0, 2)]), IllegalReason::NotPebbled);
        assert_eq!(reason(vec![Place(0), Slide(0, 2)]), IllegalReason::MissingPredecessor);
        assert_eq!(reason(vec![Place(7)]), IllegalReason::UnknownVertex);
        assert_eq!(reason(vec![Place(0), Slide(0, 0)]), IllegalReason::SelfSlide);
        assert_eq!(reason(vec![Place(0), Place(1), Place(2), Slide(0, 2)]), IllegalReason::AlreadyPebbled);
    }

    #[test]
    fn verify_examples() {
        let one = Dag::new(1, []).unwrap();
        assert_eq!(verify_full(&one, &Schedule::new(vec![Place(0)])), Verdict::LegalAndFull);
        let two = Dag::new(2, []).unwrap();
        assert_eq!(verify_full(&two, &Schedule::new(vec![Place(0)])), Verdict::LegalNotFull { uncovered: 1 });
        match verify_full(&chain(2), &Schedule::new(vec![Place(1)])) {
            Verdict::Illegal(e) => assert_eq!((e.index, e.reason), (0, IllegalReason::MissingPredecessor)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn cap_stops_long_streams() {
        let s = Schedule::new(vec![Place(0), Remove(0), Place(0), Remove(0)]);
        let one = Dag::new(1, []).unwrap();
        assert_eq!(simulate_capped(&one, &s, 3), Err(SimulationError::MoveCapExceeded(3)));
        assert_eq!(simulate_capped(&one, &s, 4).unwrap().moves, 4);
    }

    #[test]
    fn combinators() {
        let g = chain(3);
        let a: Arc<dyn MoveStream> = Arc::new(Schedule::new(vec![Place(0), Slide(0, 1)]));
        let b: Arc<dyn MoveStream> = Arc::new(Schedule::new(vec![Slide(1, 2)]));
        let e = Emptying::new(Arc::new(Concat(vec![a, b])), 3);
        assert_eq!(e.to_schedule().moves(), &[Place(0), Slide(0, 1), Slide(1, 2), Remove(2)]);
        assert!(simulate(&g, &e).unwrap().is_emptying());

        let local: Arc<dyn MoveStream> = Arc::new(Schedule::new(vec![Place(0), Remove(0)]));
        let r = Relabel::new(local, vec![2].into());
        assert_eq!(r.to_schedule().moves(), &[Place(2), Remove(2)]);

        let s = Schedule::new(vec![Place(0), Slide(0, 1)]).concat(&Schedule::new(vec![Remove(1)]));
        assert_eq!(s.slice(1..3).moves(), &[Slide(0, 1), Remove(1)]);
    }
}
