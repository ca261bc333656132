#![allow(dead_code)]

use pebbling::generate::Draws;
use pebbling::graph::{Dag, VertexId};

/// Random DAG on `n` vertices: vertex `i` of a hidden order draws up to
/// `max_d` distinct predecessors among the earlier ones (each with
/// probability `density`), then ids are shuffled.
pub fn random_dag(rng: &mut Draws, n: usize, max_d: usize, density: f64) -> Dag {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let mut edges = Vec::new();
    for i in 1..n {
        let k = (0..max_d.min(i)).filter(|_| rng.chance(density)).count();
        for p in rng.distinct(i, k) {
            edges.push((perm[p], perm[i]));
        }
    }
    Dag::new(n, edges).unwrap()
}

/// Maximum boundary of the sub-DAG induced by `segment`, in segment order,
/// computed directly from the definition: for each prefix, count its
/// vertices with a successor later in the segment.
pub fn segment_boundary(dag: &Dag, segment: &[VertexId]) -> usize {
    let mut pos = vec![usize::MAX; dag.vertex_count()];
    for (i, &v) in segment.iter().enumerate() {
        pos[v] = i;
    }
    (0..=segment.len())
        .map(|i| {
            segment[..i].iter().filter(|&&v| dag.succs(v).iter().any(|&s| pos[s] != usize::MAX && pos[s] >= i)).count()
        })
        .max()
        .unwrap_or(0)
}

pub fn chain(n: usize) -> Dag {
    Dag::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
}
