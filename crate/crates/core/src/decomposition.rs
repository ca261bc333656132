//! Budget decompositions: splitting a topological order into contiguous
//! segments whose induced sub-DAGs have maximum boundaries summing to at most
//! a budget `B`.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{scan_segment, segment_edges, Dag, TopoOrder, VertexId};

/// A nonnegative exact rational budget.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Budget(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetParseError {
    #[error("`{0}` is not a number, fraction or decimal")]
    Malformed(String),
    #[error("budget must be nonnegative, got {0}")]
    Negative(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Budget {
    pub fn zero() -> Budget {
        Budget(BigRational::zero())
    }

    pub fn from_integer(value: u64) -> Budget {
        Budget(BigRational::from_integer(value.into()))
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn ratio(numer: u64, denom: u64) -> Budget {
        assert!(denom != 0, "zero denominator");
        Budget(BigRational::new(numer.into(), denom.into()))
    }

    /// Nearest rational with denominator `2^20` at or above `value`.
    pub fn from_f64_ceil(value: f64) -> Budget {
        assert!(value.is_finite() && value >= 0.0, "budget must be finite and nonnegative");
        let scale = (1u64 << 20) as f64;
        let numer = (value * scale).ceil() as u64;
        Budget(BigRational::new(numer.into(), (1u64 << 20).into()))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn floor(&self) -> u128 {
        self.0.floor().to_integer().to_u128().unwrap_or(u128::MAX)
    }

    /// `floor(m / B)`, or `None` for a zero budget.
    pub fn edges_per_budget(&self, m: usize) -> Option<u128> {
        if self.is_zero() {
            return None;
        }
        let q = BigRational::from_integer(m.into()) / &self.0;
        Some(q.floor().to_integer().to_u128().unwrap_or(u128::MAX))
    }

    /// `true` when `count <= B`.
    pub fn admits(&self, count: usize) -> bool {
        BigRational::from_integer(count.into()) <= self.0
    }

    /// `B * numer / denom`.
    pub fn scaled(&self, numer: usize, denom: usize) -> Budget {
        Budget(&self.0 * BigRational::new(numer.into(), denom.into()))
    }

    pub fn max(self, other: Budget) -> Budget {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Budget {
    type Err = BudgetParseError;

    /// Accepts `7`, `7/2` and `3.25`.
    fn from_str(s: &str) -> Result<Budget, BudgetParseError> {
        let t = s.trim();
        let malformed = || BudgetParseError::Malformed(s.to_string());
        let value = if let Some((a, b)) = t.split_once('/') {
            let a: BigInt = a.trim().parse().map_err(|_| malformed())?;
            let b: BigInt = b.trim().parse().map_err(|_| malformed())?;
            if b.is_zero() {
                return Err(BudgetParseError::ZeroDenominator(s.to_string()));
            }
            BigRational::new(a, b)
        } else if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(malformed());
            }
            let negative = int.starts_with('-');
            let int: BigInt =
                if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().map_err(|_| malformed())? };
            let frac_val: BigInt = frac.parse().map_err(|_| malformed())?;
            let denom = num::pow(BigInt::from(10), frac.len());
            let mut r = BigRational::from_integer(int.abs()) + BigRational::new(frac_val, denom);
            if negative {
                r = -r;
            }
            r
        } else {
            BigRational::from_integer(t.parse().map_err(|_| malformed())?)
        };
        if value.is_negative() {
            return Err(BudgetParseError::Negative(s.to_string()));
        }
        Ok(Budget(value))
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Part {
    pub vertices: Vec<VertexId>,
    /// Maximum boundary of the sub-DAG induced by `vertices`, in this order.
    pub boundary: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetDecomposition {
    pub budget: Budget,
    pub parts: Vec<Part>,
    /// Levels of the recursion tree that produced the parts (1 for a single part).
    pub levels: usize,
}

impl BudgetDecomposition {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn boundary_sum(&self) -> usize {
        self.parts.iter().map(|p| p.boundary).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().map(|p| p.vertices.len()).sum()
    }

    /// Concatenation of all segments.
    pub fn order(&self) -> Vec<VertexId> {
        self.parts.iter().flat_map(|p| p.vertices.iter().copied()).collect()
    }

    /// `sum b_i + 1 + (d - 1)(l - 1)`: pebbles needed by the schedule built on
    /// this decomposition for a graph of maximum in-degree `d`.
    pub fn space_cost(&self, d: usize) -> usize {
        self.boundary_sum() + 1 + d.saturating_sub(1) * self.part_count().saturating_sub(1)
    }
}

/// One split performed while decomposing, recorded for auditing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRecord {
    pub level: usize,
    pub budget: Budget,
    pub edges: usize,
    pub prefix_edges: usize,
    pub suffix_edges: usize,
    pub max_boundary: usize,
}

#[derive(Debug, Clone, Default)]
pub struct DecomposeTrace {
    pub splits: Vec<SplitRecord>,
}

/// Recursively splits `order` at its first maximum-boundary prefix until
/// every piece's maximum boundary fits its share of the budget. Child
/// budgets are proportional to the edge counts of the two halves.
pub fn decompose(dag: &Dag, order: &TopoOrder, budget: &Budget) -> BudgetDecomposition {
    decompose_traced(dag, order, budget).0
}

pub fn decompose_traced(dag: &Dag, order: &TopoOrder, budget: &Budget) -> (BudgetDecomposition, DecomposeTrace) {
    assert_eq!(order.len(), dag.vertex_count(), "order does not match graph");
    let seq = order.as_slice();
    let rank = order.ranks();
    let mut trace = DecomposeTrace::default();
    let mut parts = Vec::new();
    let mut levels = 0;

    // Depth-first with an explicit stack; the prefix is always popped first so
    // parts come out in order.
    let mut stack = vec![(0usize, seq.len(), budget.clone(), 0usize)];
    while let Some((lo, hi, local, level)) = stack.pop() {
        levels = levels.max(level + 1);
        if lo == hi {
            continue;
        }
        let scan = scan_segment(dag, seq, rank, lo, hi);
        let max_boundary = scan.profile.max_value;
        if local.admits(max_boundary) {
            parts.push(Part { vertices: seq[lo..hi].to_vec(), boundary: max_boundary });
            continue;
        }
        let mid = lo + scan.profile.argmax;
        let prefix_edges = segment_edges(dag, seq, rank, lo, mid);
        let suffix_edges = segment_edges(dag, seq, rank, mid, hi);
        trace.splits.push(SplitRecord {
            level,
            budget: local.clone(),
            edges: scan.edges,
            prefix_edges,
            suffix_edges,
            max_boundary,
        });
        let kept = prefix_edges + suffix_edges;
        if kept == 0 {
            // Both halves are edgeless and fit any budget.
            levels = levels.max(level + 2);
            parts.push(Part { vertices: seq[lo..mid].to_vec(), boundary: 0 });
            parts.push(Part { vertices: seq[mid..hi].to_vec(), boundary: 0 });
            continue;
        }
        stack.push((mid, hi, local.scaled(suffix_edges, kept), level + 1));
        stack.push((lo, mid, local.scaled(prefix_edges, kept), level + 1));
    }

    (BudgetDecomposition { budget: budget.clone(), parts, levels }, trace)
}

/// Merges the leftmost part with fewer than `d` vertices into its right
/// neighbour, repeatedly, until every part but the last has at least `d`
/// vertices. Boundaries of merged parts are recomputed exactly; the budget is
/// raised to the new boundary sum if that exceeds it.
pub fn merge_small_parts(dag: &Dag, decomp: &BudgetDecomposition, d: usize) -> BudgetDecomposition {
    let seq = decomp.order();
    let mut rank = vec![usize::MAX; dag.vertex_count()];
    for (i, &v) in seq.iter().enumerate() {
        rank[v] = i;
    }
    // Segment boundaries as offsets into `seq`.
    let mut starts: Vec<usize> = Vec::with_capacity(decomp.part_count() + 1);
    let mut boundaries: Vec<usize> = decomp.parts.iter().map(|p| p.boundary).collect();
    let mut acc = 0;
    for p in &decomp.parts {
        starts.push(acc);
        acc += p.vertices.len();
    }
    starts.push(acc);

    let mut i = 0;
    while i + 1 < boundaries.len() {
        if starts[i + 1] - starts[i] >= d {
            i += 1;
            continue;
        }
        starts.remove(i + 1);
        boundaries.remove(i + 1);
        boundaries[i] = scan_segment(dag, &seq, &rank, starts[i], starts[i + 1]).profile.max_value;
    }

    let parts: Vec<Part> = boundaries
        .iter()
        .enumerate()
        .map(|(k, &boundary)| Part { vertices: seq[starts[k]..starts[k + 1]].to_vec(), boundary })
        .collect();
    let sum: usize = boundaries.iter().sum();
    BudgetDecomposition {
        budget: decomp.budget.clone().max(Budget::from_integer(sum as u64)),
        parts,
        levels: decomp.levels,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("part {0} is empty")]
    EmptyPart(usize),
    #[error("segments do not form a topological order of the graph: {0}")]
    NotAnOrder(String),
    #[error("part {part} records boundary {recorded}, actual is {actual}")]
    WrongBoundary { part: usize, recorded: usize, actual: usize },
}

/// Checks that the segments concatenate to a topological order of `dag` and
/// that every recorded boundary is exact.
pub fn validate(dag: &Dag, decomp: &BudgetDecomposition) -> Result<TopoOrder, DecompositionError> {
    if let Some(k) = decomp.parts.iter().position(|p| p.vertices.is_empty()) {
        return Err(DecompositionError::EmptyPart(k));
    }
    let order = TopoOrder::new(dag, decomp.order()).map_err(|e| DecompositionError::NotAnOrder(e.to_string()))?;
    let mut lo = 0;
    for (k, p) in decomp.parts.iter().enumerate() {
        let hi = lo + p.vertices.len();
        let actual = scan_segment(dag, order.as_slice(), order.ranks(), lo, hi).profile.max_value;
        if actual != p.boundary {
            return Err(DecompositionError::WrongBoundary { part: k, recorded: p.boundary, actual });
        }
        lo = hi;
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{boundary_profile, induced_subdag};

    fn diamond() -> Dag {
        Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    /// Boundary of a part recomputed through an induced sub-DAG, independent
    /// of the range scan used by `decompose`.
    fn oracle_boundary(dag: &Dag, part: &[VertexId]) -> usize {
        let sub = induced_subdag(dag, part).unwrap();
        let local: Vec<_> = part.iter().map(|&v| sub.to_local(v).unwrap()).collect();
        let order = TopoOrder::new(&sub.dag, local).unwrap();
        boundary_profile(&sub.dag, &order).unwrap().max_value
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("7/2".parse::<Budget>().unwrap(), Budget::ratio(7, 2));
        assert_eq!("3.25".parse::<Budget>().unwrap(), Budget::ratio(13, 4));
        assert_eq!("4".parse::<Budget>().unwrap(), Budget::from_integer(4));
        assert_eq!(".5".parse::<Budget>().unwrap(), Budget::ratio(1, 2));
        assert!(matches!("-1".parse::<Budget>(), Err(BudgetParseError::Negative(_))));
        assert!(matches!("1/0".parse::<Budget>(), Err(BudgetParseError::ZeroDenominator(_))));
        assert!("x".parse::<Budget>().is_err());
        assert_eq!(Budget::ratio(6, 4).to_string(), "3/2");
        assert_eq!(Budget::from_integer(3).edges_per_budget(10), Some(3));
        assert_eq!(Budget::zero().edges_per_budget(10), None);
    }

    #[test]
    fn diamond_with_full_budget_is_one_part() {
        let d = diamond();
        let dec = decompose(&d, &d.topological_order(), &Budget::from_integer(2));
        assert_eq!(dec.part_count(), 1);
        assert_eq!(dec.boundary_sum(), 2);
        assert_eq!(dec.levels, 1);
    }

    #[test]
    fn diamond_with_unit_budget_splits_to_singletons() {
        // Split at i*=2 gives {0,1} and {2,3}, one edge each, budget 1/2 each;
        // boundary 1 > 1/2 forces a second split of each half.
        let d = diamond();
        let dec = decompose(&d, &d.topological_order(), &Budget::from_integer(1));
        assert_eq!(dec.part_count(), 4);
        assert_eq!(dec.boundary_sum(), 0);
        assert_eq!(dec.order(), vec![0, 1, 2, 3]);
        assert!(dec.part_count() <= 16);
    }

    #[test]
    fn isolated_vertices_are_one_part_for_any_budget() {
        let g = Dag::new(5, []).unwrap();
        for b in [Budget::zero(), Budget::from_integer(3)] {
            let dec = decompose(&g, &g.topological_order(), &b);
            assert_eq!(dec.part_count(), 1);
            assert_eq!(dec.parts[0].boundary, 0);
        }
    }

    #[test]
    fn zero_budget_terminates_with_boundary_zero_parts() {
        let chain = Dag::new(6, (1..6).map(|i| (i - 1, i))).unwrap();
        let dec = decompose(&chain, &chain.topological_order(), &Budget::zero());
        assert_eq!(dec.boundary_sum(), 0);
        assert_eq!(dec.part_count(), 6);
        validate(&chain, &dec).unwrap();
    }

    #[test]
    fn merge_examples() {
        let d = diamond();
        let dec = decompose(&d, &d.topological_order(), &Budget::from_integer(1));
        let merged = merge_small_parts(&d, &dec, 2);
        assert!(merged.parts[..merged.part_count() - 1].iter().all(|p| p.vertices.len() >= 2));
        assert!(merged.space_cost(2) <= 4);
        for p in &merged.parts {
            assert_eq!(p.boundary, oracle_boundary(&d, &p.vertices));
        }
        assert_eq!(merged.order(), dec.order());

        let single = decompose(&d, &d.topological_order(), &Budget::from_integer(5));
        assert_eq!(merge_small_parts(&d, &single, 3), single);

        let big = BudgetDecomposition {
            budget: Budget::from_integer(2),
            parts: vec![Part { vertices: vec![0, 1], boundary: 1 }, Part { vertices: vec![2, 3], boundary: 0 }],
            levels: 2,
        };
        assert_eq!(merge_small_parts(&d, &big, 2), big);
    }

    #[test]
    fn validate_rejects_bad_decompositions() {
        let d = diamond();
        let bad = BudgetDecomposition {
            budget: Budget::from_integer(2),
            parts: vec![Part { vertices: vec![0, 1], boundary: 0 }, Part { vertices: vec![2, 3], boundary: 0 }],
            levels: 2,
        };
        assert!(matches!(validate(&d, &bad), Err(DecompositionError::WrongBoundary { part: 0, .. })));
        let unordered = BudgetDecomposition {
            budget: Budget::from_integer(2),
            parts: vec![Part { vertices: vec![3, 0, 1, 2], boundary: 0 }],
            levels: 1,
        };
        assert!(matches!(validate(&d, &unordered), Err(DecompositionError::NotAnOrder(_))));
    }
}
