use num::bigint::BigUint;
use num::rational::BigRational;
use num::{One, ToPrimitive};

use crate::decomposition::{decompose, merge_small_parts, Budget};
use crate::graph::Dag;

use super::depth::depth_recursive_schedule;
use super::layered::schedule_from_decomposition;
use super::topo::topo_schedule;
use super::{ScheduleError, SchedulerReport};

/// Edge counts below this use the plain topological schedule in
/// [`DegreeMode::LogLog`].
pub const LOGLOG_MIN_EDGES: usize = 1 << 12;

/// Largest `log2` of the move bound the pipeline reports; beyond it no move
/// bound is claimed.
const MOVE_BOUND_LOG2_CAP: f64 = 126.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    /// `B = m / (log2 m - 3 log2 log2 m)`.
    LogLog,
    /// `B = 2m / log2 m`, with peak at most `2.8125 m / log2 m`.
    HalfLog,
}

/// `floor(B + 1 + (d - 1)(2^floor(m/B) - 1))`, or `None` when `B = 0` or the
/// value does not fit.
pub fn lemma5_space(m: usize, d: usize, budget: &Budget) -> Option<usize> {
    let k = budget.edges_per_budget(m)?;
    let d1 = d.saturating_sub(1) as u128;
    let tail = if d1 == 0 {
        0
    } else {
        let pow = 1u128.checked_shl(u32::try_from(k).ok()?).filter(|_| k < 127)?;
        d1.checked_mul(pow - 1)?
    };
    let total = budget.floor().checked_add(1)?.checked_add(tail)?;
    usize::try_from(total).ok()
}

/// Move bound `2 d/(d-1) max(e, n/2^k)^(2^k)` with `k = floor(m/B)`, rounded
/// up. `None` when `d < 2`, `B = 0`, or the value exceeds `2^126`.
pub(crate) fn lemma5_moves(n: usize, m: usize, d: usize, budget: &Budget) -> Option<u128> {
    if d < 2 {
        return None;
    }
    let k = budget.edges_per_budget(m)?;
    if k >= 127 {
        return None;
    }
    let parts = 2f64.powi(k as i32);
    let base = (n as f64 / parts).max(std::f64::consts::E);
    let log2 = (2.0 * d as f64 / (d - 1) as f64).log2() + parts * base.log2();
    if log2 > MOVE_BOUND_LOG2_CAP {
        return None;
    }
    Some((2f64.powf(log2) * (1.0 + 1e-9)).ceil() as u128)
}

/// Decomposes with budget `B`, merges parts smaller than `d`, and schedules
/// from the result. Graphs with `d <= 1` are pebbled with one pebble.
pub fn pipeline_decompose_and_schedule(dag: &Dag, budget: &Budget) -> SchedulerReport {
    let n = dag.vertex_count();
    let m = dag.edge_count();
    let d = dag.max_in_degree();
    if d <= 1 {
        return depth_recursive_schedule(dag)
            .with_strategy("budget")
            .with_param("budget", budget.to_string())
            .with_param("degree_one", true);
    }
    let order = dag.topological_order();
    let raw = decompose(dag, &order, budget);
    let merged = merge_small_parts(dag, &raw, d);
    let report = schedule_from_decomposition(dag, &merged).expect("decomposition built for this graph");
    let instantiated = report.space_bound;
    let recurrence = report.move_bound;
    let space_bound = lemma5_space(m, d, budget).unwrap_or(instantiated);
    let move_bound = lemma5_moves(n, m, d, budget).or(recurrence);
    let mut out = SchedulerReport { space_bound, move_bound, ..report }
        .with_strategy("budget")
        .with_param("budget", budget.to_string())
        .with_param("parts_before_merge", raw.part_count())
        .with_param("levels", raw.levels)
        .with_param("instantiated_space_bound", instantiated);
    if let Some(k) = budget.edges_per_budget(m) {
        out = out.with_param("edges_per_budget", k.to_string());
    }
    if let Some(r) = recurrence {
        out = out.with_param("construction_move_bound", r.to_string());
    }
    out
}

/// Largest `B` in `(0, m]` with `B + 1 + (d - 1)(2^floor(m/B) - 1) <= space`.
///
/// On `(m/(k+1), m/k]` the exponent is constant, so the best `B` there is
/// `min(m/k, space - 1 - (d - 1)(2^k - 1))` when that still exceeds
/// `m/(k+1)`; intervals are scanned from `k = 1` and the first hit is the
/// maximum.
pub fn select_budget(m: usize, d: usize, space: usize) -> Option<Budget> {
    if m == 0 {
        return None;
    }
    let d1 = d.saturating_sub(1) as u128;
    for k in 1..=m {
        let tail = if d1 == 0 {
            0
        } else {
            let pow = 1u128.checked_shl(u32::try_from(k).ok()?).filter(|_| k < 127)?;
            d1.checked_mul(pow - 1)?
        };
        let cap = (space as u128).checked_sub(1 + tail)?;
        let lo = BigRational::new(m.into(), (k + 1).into());
        let cap = BigRational::from_integer(cap.into());
        if cap <= lo {
            continue;
        }
        let hi = BigRational::new(m.into(), k.into());
        let best = if cap < hi { cap } else { hi };
        return Some(Budget::ratio(
            best.numer().to_u64().expect("budget fits u64"),
            best.denom().to_u64().expect("budget fits u64"),
        ));
    }
    None
}

fn log2_f64(m: usize) -> f64 {
    (m as f64).log2()
}

/// `floor(m / log2 m)` for `m >= 2`; 0 otherwise.
pub(crate) fn edges_over_log2(m: usize) -> usize {
    if m < 2 {
        return 0;
    }
    (m as f64 / log2_f64(m)).floor() as usize
}

/// Exact test of `a * log2(m) <= b`, i.e. `m^a <= 2^b`.
pub(crate) fn scaled_log2_le(a: u64, m: u64, b: u64) -> bool {
    if m <= 1 || a == 0 {
        return true;
    }
    let lhs = a as f64 * (m as f64).log2();
    let gap = (lhs - b as f64).abs();
    if gap > 1e-9 * (b as f64).max(1.0) + 1e-6 {
        return lhs <= b as f64;
    }
    BigUint::from(m).pow(a as u32) <= BigUint::one() << b as usize
}

/// `floor(45 m / (16 log2 m))`, i.e. the largest `c` with `16 c log2 m <= 45 m`.
pub fn halflog_space_claim(m: usize) -> usize {
    assert!(m >= 2);
    let m64 = m as u64;
    let mut c = (45.0 * m as f64 / (16.0 * log2_f64(m))).floor() as u64;
    while c > 0 && !scaled_log2_le(16 * c, m64, 45 * m64) {
        c -= 1;
    }
    while scaled_log2_le(16 * (c + 1), m64, 45 * m64) {
        c += 1;
    }
    c as usize
}

fn loglog_budget(m: usize) -> Budget {
    let l = log2_f64(m);
    Budget::from_f64_ceil(m as f64 / (l - 3.0 * l.log2()))
}

fn halflog_budget(m: usize) -> Budget {
    Budget::from_f64_ceil(2.0 * m as f64 / log2_f64(m))
}

/// Schedules bounded-degree graphs with the mode's budget.
pub fn pebble_bounded_degree(dag: &Dag, mode: DegreeMode) -> Result<SchedulerReport, ScheduleError> {
    let m = dag.edge_count();
    let d = dag.max_in_degree();
    let tag = match mode {
        DegreeMode::LogLog => "bounded",
        DegreeMode::HalfLog => "bounded-halflog",
    };
    if d <= 1 {
        return Ok(depth_recursive_schedule(dag).with_strategy(tag).with_param("degree_one", true));
    }
    match mode {
        DegreeMode::LogLog => {
            if m < LOGLOG_MIN_EDGES {
                return Ok(topo_schedule(dag, &dag.topological_order())
                    .with_strategy(tag)
                    .with_param("fallback", "small-edge-count"));
            }
            if d >= 64 || (1u64 << d) > m as u64 {
                return Err(ScheduleError::Precondition(format!(
                    "max in-degree {d} exceeds log2 of {m} edges; use the general scheduler"
                )));
            }
            Ok(pipeline_decompose_and_schedule(dag, &loglog_budget(m)).with_strategy(tag))
        }
        DegreeMode::HalfLog => {
            if m <= 1 || 3 * d >= 64 || (1u64 << (3 * d)) > m as u64 {
                return Err(ScheduleError::Precondition(format!(
                    "needs m > 1 and max in-degree at most log2(m)/3; got d={d}, m={m}"
                )));
            }
            let report = pipeline_decompose_and_schedule(dag, &halflog_budget(m));
            let lemma5 = report.space_bound;
            Ok(SchedulerReport { space_bound: halflog_space_claim(m), ..report }
                .with_strategy(tag)
                .with_param("lemma5_space_bound", lemma5))
        }
    }
}

/// Bounded-degree scheduling without the degree precondition, used for the
/// reduced graph of the general scheduler.
pub(crate) fn bounded_degree_relaxed(dag: &Dag) -> SchedulerReport {
    let m = dag.edge_count();
    if dag.max_in_degree() <= 1 {
        return depth_recursive_schedule(dag);
    }
    if m < LOGLOG_MIN_EDGES {
        return topo_schedule(dag, &dag.topological_order());
    }
    pipeline_decompose_and_schedule(dag, &loglog_budget(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::simulate;

    /// Exhaustive oracle: the best `B = p/q` on a grid fine enough to contain
    /// every interval endpoint `m/k` and every integer cap.
    fn grid_select(m: usize, d: usize, space: usize) -> Option<BigRational> {
        let q: u64 = (1..=m as u64).fold(1, num::integer::lcm);
        let mut best = None;
        for p in 1..=(m as u64 * q) {
            let b = BigRational::new(p.into(), q.into());
            let k = (BigRational::from_integer(m.into()) / &b).floor().to_integer().to_u32().unwrap();
            if k > 100 {
                continue;
            }
            let cost = &b + BigRational::from_integer((1 + (d as u128 - 1) * ((1u128 << k) - 1)).into());
            if cost <= BigRational::from_integer(space.into()) {
                best = Some(b);
            }
        }
        best
    }

    #[test]
    fn select_budget_matches_grid_oracle() {
        for m in 1..=6 {
            for d in 1..=3 {
                for space in 1..=(m + d + 3) {
                    let got = select_budget(m, d, space).map(|b| b.as_ratio().clone());
                    assert_eq!(got, grid_select(m, d, space), "m={m} d={d} S={space}");
                }
            }
        }
    }

    #[test]
    fn select_budget_examples() {
        assert_eq!(select_budget(10, 3, 13), Some(Budget::from_integer(10)));
        assert_eq!(select_budget(5, 2, 1), None);
        let at4 = lemma5_space(16, 2, &Budget::from_integer(4)).unwrap();
        assert_eq!(at4, 20);
        assert!(select_budget(16, 2, at4).unwrap() >= Budget::from_integer(4));
    }

    #[test]
    fn lemma5_space_examples() {
        // Diamond: m=4, d=2, B=4: k=1 -> 4 + 1 + 1.
        assert_eq!(lemma5_space(4, 2, &Budget::from_integer(4)), Some(6));
        assert_eq!(lemma5_space(4, 2, &Budget::zero()), None);
        assert_eq!(lemma5_space(7, 1, &Budget::from_integer(1)), Some(2));
        assert_eq!(lemma5_space(1000, 2, &Budget::from_integer(1)), None);
    }

    #[test]
    fn halflog_claim_is_exact_at_powers_of_two() {
        // 45 * 1024 / (16 * 10) = 288 exactly.
        assert_eq!(halflog_space_claim(1024), 288);
        assert_eq!(halflog_space_claim(2048), 45 * 2048 / (16 * 11));
        assert!(scaled_log2_le(16 * 288, 1024, 45 * 1024));
        assert!(!scaled_log2_le(16 * 289, 1024, 45 * 1024));
    }

    #[test]
    fn pipeline_on_diamond() {
        let g = Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let r = pipeline_decompose_and_schedule(&g, &Budget::from_integer(4));
        let m = simulate(&g, &r.schedule).unwrap();
        assert_eq!(r.space_bound, 6);
        assert!(m.peak <= 3);
        assert!(m.is_full(&g));
    }

    #[test]
    fn pipeline_on_chain_uses_one_pebble() {
        let g = Dag::new(8, (1..8).map(|i| (i - 1, i))).unwrap();
        let r = pipeline_decompose_and_schedule(&g, &Budget::from_integer(1));
        assert_eq!(simulate(&g, &r.schedule).unwrap().peak, 1);
        assert_eq!(r.space_bound, 1);
    }

    #[test]
    fn bounded_degree_modes() {
        let chain = Dag::new(5, (1..5).map(|i| (i - 1, i))).unwrap();
        let r = pebble_bounded_degree(&chain, DegreeMode::LogLog).unwrap();
        assert_eq!((r.space_bound, simulate(&chain, &r.schedule).unwrap().peak), (1, 1));

        let diamond = Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let r = pebble_bounded_degree(&diamond, DegreeMode::LogLog).unwrap();
        assert_eq!(r.params["fallback"], "small-edge-count");
        assert_eq!(simulate(&diamond, &r.schedule).unwrap().moves, 8);
        assert!(matches!(pebble_bounded_degree(&diamond, DegreeMode::HalfLog), Err(ScheduleError::Precondition(_))));
    }
}
