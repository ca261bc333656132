//! Ground-truth engines for small graphs: exact pebbling numbers by state
//! search, exhaustive and heuristic balanced separators, and enumeration of
//! all small labelled DAGs.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::graph::{Dag, VertexId};
use crate::schedulers::Separation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest pebble count tried.
    pub max_pebbles: usize,
    /// Distinct states stored across all pebble counts.
    pub max_states: usize,
    pub timeout: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_pebbles: 64, max_states: 4_000_000, timeout: Duration::from_secs(30) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Exact(usize),
    Unknown(String),
}

impl OracleOutcome {
    pub fn exact(&self) -> Option<usize> {
        match self {
            OracleOutcome::Exact(s) => Some(*s),
            OracleOutcome::Unknown(_) => None,
        }
    }
}

/// Minimum peak over all full schedules, found by trying `S = max(1, d), ...`
/// and searching (configuration, covered set) states under each cap. A state
/// is skipped when one with the same configuration and a superset of its
/// covered set was already seen.
pub fn optimal_pebbles(dag: &Dag, budget: SearchBudget) -> OracleOutcome {
    let n = dag.vertex_count();
    if n == 0 {
        return OracleOutcome::Exact(0);
    }
    if n > 63 {
        return OracleOutcome::Unknown(format!("{n} vertices exceed the 63-vertex search limit"));
    }
    let preds: Vec<u64> = (0..n).map(|v| dag.preds(v).iter().fold(0u64, |acc, &p| acc | 1 << p)).collect();
    let start = Instant::now();
    let mut states = 0usize;
    let lower = dag.max_in_degree().max(1);
    for s in lower..=n.min(budget.max_pebbles) {
        match feasible(&preds, s, &budget, start, &mut states) {
            Ok(true) => return OracleOutcome::Exact(s),
            Ok(false) => {}
            Err(reason) => return OracleOutcome::Unknown(reason),
        }
    }
    if budget.max_pebbles < n {
        OracleOutcome::Unknown(format!("no schedule with at most {} pebbles", budget.max_pebbles))
    } else {
        unreachable!("n pebbles always suffice")
    }
}

fn feasible(
    preds: &[u64],
    cap: usize,
    budget: &SearchBudget,
    start: Instant,
    states: &mut usize,
) -> Result<bool, String> {
    let n = preds.len();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    // Per configuration, the maximal covered sets seen so far.
    let mut seen: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut stack: Vec<(u64, u64)> = vec![(0, 0)];
    seen.insert(0, vec![0]);

    let admit = |seen: &mut HashMap<u64, Vec<u64>>, config: u64, covered: u64| -> bool {
        let list = seen.entry(config).or_default();
        if list.iter().any(|&c| c & covered == covered) {
            return false;
        }
        list.retain(|&c| c & covered != c);
        list.push(covered);
        true
    };

    while let Some((config, covered)) = stack.pop() {
        if covered == full {
            return Ok(true);
        }
        *states += 1;
        if *states > budget.max_states {
            return Err(format!("state budget of {} exhausted at {cap} pebbles", budget.max_states));
        }
        if states.is_multiple_of(4096) && start.elapsed() > budget.timeout {
            return Err(format!("timeout after {:?} at {cap} pebbles", budget.timeout));
        }
        let count = config.count_ones() as usize;
        for (v, &pv) in preds.iter().enumerate() {
            let bit = 1u64 << v;
            if config & bit != 0 {
                let next = config & !bit;
                if admit(&mut seen, next, covered) {
                    stack.push((next, covered));
                }
                continue;
            }
            if pv & config != pv {
                continue;
            }
            if count < cap {
                let next = config | bit;
                if admit(&mut seen, next, covered | bit) {
                    stack.push((next, covered | bit));
                }
            }
            let mut from = pv;
            while from != 0 {
                let u = from.trailing_zeros();
                from &= from - 1;
                let next = (config & !(1u64 << u)) | bit;
                if admit(&mut seen, next, covered | bit) {
                    stack.push((next, covered | bit));
                }
            }
        }
    }
    Ok(false)
}

/// Undirected adjacency, deduplicated.
fn neighbours(dag: &Dag) -> Vec<Vec<VertexId>> {
    (0..dag.vertex_count())
        .map(|v| {
            let mut adj: Vec<VertexId> = dag.preds(v).iter().chain(dag.succs(v)).copied().collect();
            adj.sort_unstable();
            adj.dedup();
            adj
        })
        .collect()
}

/// Connected components of the undirected graph restricted to `alive`,
/// each sorted, ordered by smallest vertex.
fn components(adj: &[Vec<VertexId>], alive: &[bool]) -> Vec<Vec<VertexId>> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    for s in 0..n {
        if !alive[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            i += 1;
            for &u in &adj[v] {
                if alive[u] && comp[u] == usize::MAX {
                    comp[u] = id;
                    members.push(u);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn balanced(n: usize, left: usize, right: usize) -> bool {
    3 * left <= 2 * n && 3 * right <= 2 * n
}

/// A separation with the fewest separator vertices. Separator sets are tried
/// by size, then lexicographically; the remaining components are assigned by
/// the first bitmask (left = set bits) that balances the sides.
pub fn brute_force_separator(dag: &Dag) -> Separation {
    let n = dag.vertex_count();
    let adj = neighbours(dag);
    for size in 0..=n {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let mut alive = vec![true; n];
            for &v in &combo {
                alive[v] = false;
            }
            let comps = components(&adj, &alive);
            if comps.len() < 31 {
                for mask in 0u32..(1 << comps.len()) {
                    let left: usize = (0..comps.len()).filter(|&c| mask >> c & 1 == 1).map(|c| comps[c].len()).sum();
                    if balanced(n, left, n - size - left) {
                        let mut l = Vec::new();
                        let mut r = Vec::new();
                        for (c, members) in comps.iter().enumerate() {
                            if mask >> c & 1 == 1 {
                                l.extend(members)
                            } else {
                                r.extend(members)
                            }
                        }
                        l.sort_unstable();
                        r.sort_unstable();
                        return Separation { left: l, separator: combo, right: r };
                    }
                }
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    unreachable!("the whole vertex set always separates")
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn bfs_order(adj: &[Vec<VertexId>], start: VertexId, seen: &mut [bool], out: &mut Vec<VertexId>) -> VertexId {
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        out.push(v);
        last = v;
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    last
}

/// Balanced separation without a size guarantee. Disconnected graphs are
/// first split by packing whole components; otherwise the cut is the
/// neighbourhood of the best prefix of a breadth-first order started from a
/// far-away vertex.
pub fn heuristic_separator(dag: &Dag) -> Separation {
    let n = dag.vertex_count();
    let adj = neighbours(dag);
    let comps = components(&adj, &vec![true; n]);
    if comps.len() > 1 {
        let mut by_size: Vec<&Vec<VertexId>> = comps.iter().collect();
        by_size.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let (mut l, mut r): (Vec<VertexId>, Vec<VertexId>) = (Vec::new(), Vec::new());
        for c in by_size {
            if l.len() <= r.len() {
                l.extend(c)
            } else {
                r.extend(c)
            }
        }
        if balanced(n, l.len(), r.len()) {
            l.sort_unstable();
            r.sort_unstable();
            return Separation { left: l, separator: Vec::new(), right: r };
        }
    }

    // Double sweep for a peripheral start, then a full breadth-first order.
    let mut order = Vec::with_capacity(n);
    if n > 0 {
        let mut seen = vec![false; n];
        let mut scratch = Vec::new();
        let far = bfs_order(&adj, 0, &mut seen, &mut scratch);
        seen.iter_mut().for_each(|s| *s = false);
        bfs_order(&adj, far, &mut seen, &mut order);
        for v in 0..n {
            if !seen[v] {
                bfs_order(&adj, v, &mut seen, &mut order);
            }
        }
    }

    let mut in_left = vec![false; n];
    let mut touching = vec![0usize; n];
    let mut sep_size = 0usize;
    let mut best: Option<(usize, usize)> = None;
    for k in 0..=n {
        if k > 0 {
            let v = order[k - 1];
            if touching[v] > 0 {
                sep_size -= 1;
            }
            in_left[v] = true;
            for &u in &adj[v] {
                if !in_left[u] {
                    if touching[u] == 0 {
                        sep_size += 1;
                    }
                    touching[u] += 1;
                }
            }
        }
        if balanced(n, k, n - k - sep_size) && best.is_none_or(|(s, _)| sep_size < s) {
            best = Some((sep_size, k));
        }
    }

    match best {
        Some((_, k)) => {
            let mut left: Vec<VertexId> = order[..k].to_vec();
            let mut is_left = vec![false; n];
            for &v in &left {
                is_left[v] = true;
            }
            let mut separator = Vec::new();
            let mut right = Vec::new();
            for v in 0..n {
                if is_left[v] {
                    continue;
                }
                if adj[v].iter().any(|&u| is_left[u]) {
                    separator.push(v)
                } else {
                    right.push(v)
                }
            }
            left.sort_unstable();
            Separation { left, separator, right }
        }
        None => Separation { left: Vec::new(), separator: (0..n).collect(), right: Vec::new() },
    }
}

/// Every DAG on `n` vertices whose edges go from lower to higher id:
/// `2^(n(n-1)/2)` graphs, in order of their edge bitmask.
pub fn enumerate_small_dags(n: usize) -> impl Iterator<Item = Dag> {
    assert!(n <= 8, "enumeration is limited to 8 vertices");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 1u64 << pairs.len();
    (0..total).map(move |mask| {
        let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
        Dag::new(n, edges).expect("forward edges are acyclic")
    })
}
