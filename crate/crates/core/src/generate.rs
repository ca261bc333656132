//! Seeded instance families.
//!
//! Randomness comes from SplitMix64 (`rand_xoshiro::SplitMix64`). Bounded
//! draws use rejection: `below(k)` draws `x` until `x < k * floor(2^64 / k)`
//! and returns `x % k`; a probability `p` is tested as
//! `(x >> 11) * 2^-53 < p`. These two rules plus the draw order in each
//! family fully determine an instance from its seed on any platform.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::graph::{Dag, VertexId};

pub struct Draws(SplitMix64);

impl Draws {
    pub fn new(seed: u64) -> Draws {
        Draws(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `0..k`; `k` must be positive.
    pub fn below(&mut self, k: u64) -> u64 {
        assert!(k > 0);
        let zone = (u64::MAX / k) * k;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % k;
            }
        }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        ((self.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
    }

    /// `k` distinct values from `0..n`, in draw order (partial Fisher-Yates).
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Chain {
        n: usize,
    },
    /// Rows of `height + 1, height, ..., 1` vertices; each vertex has the two
    /// vertices below it as predecessors.
    Pyramid {
        height: usize,
    },
    /// Edges point right and down.
    Grid {
        width: usize,
        height: usize,
    },
    /// Complete binary in-tree with `levels` levels, heap labelled, edges
    /// from child to parent.
    BinaryInTree {
        levels: usize,
    },
    /// `stages + 1` rows of `2^stages` vertices; row `s` feeds row `s + 1`
    /// straight and across bit `s`.
    Butterfly {
        stages: usize,
    },
    /// Each vertex after the first layer draws `1..=d` distinct predecessors
    /// from the previous layer.
    LayeredRandom {
        layers: usize,
        width: usize,
        d: usize,
    },
    /// Sparse random DAG (each vertex draws `1..=base` earlier predecessors)
    /// where a `hubs` fraction of the later vertices get in-degree above
    /// `log2 m`.
    HeavyTailRandom {
        n: usize,
        hubs: f64,
        base: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub family: Family,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameter `{key}`: {reason}")]
    BadParam { key: String, reason: String },
    #[error("missing parameter `{0}`")]
    Missing(String),
    #[error("{0}")]
    OutOfRange(String),
}

/// Largest vertex count any family will build.
pub const MAX_VERTICES: usize = 1 << 24;

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Chain { .. } => "chain",
            Family::Pyramid { .. } => "pyramid",
            Family::Grid { .. } => "grid",
            Family::BinaryInTree { .. } => "binary-in-tree",
            Family::Butterfly { .. } => "butterfly",
            Family::LayeredRandom { .. } => "layered-random",
            Family::HeavyTailRandom { .. } => "heavy-tail-random",
        }
    }

    fn vertex_count(&self) -> Option<usize> {
        match *self {
            Family::Chain { n } | Family::HeavyTailRandom { n, .. } => Some(n),
            Family::Pyramid { height } => (height + 1).checked_mul(height + 2).map(|x| x / 2),
            Family::Grid { width, height } => width.checked_mul(height),
            Family::BinaryInTree { levels } => 1usize.checked_shl(levels as u32).filter(|_| levels < 40).map(|x| x - 1),
            Family::Butterfly { stages } => {
                1usize.checked_shl(stages as u32).filter(|_| stages < 40).and_then(|x| x.checked_mul(stages + 1))
            }
            Family::LayeredRandom { layers, width, .. } => layers.checked_mul(width),
        }
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.family.name())?;
        match &self.family {
            Family::Chain { n } => write!(f, "n={n}")?,
            Family::Pyramid { height } => write!(f, "height={height}")?,
            Family::Grid { width, height } => write!(f, "width={width},height={height}")?,
            Family::BinaryInTree { levels } => write!(f, "levels={levels}")?,
            Family::Butterfly { stages } => write!(f, "stages={stages}")?,
            Family::LayeredRandom { layers, width, d } => write!(f, "layers={layers},width={width},d={d}")?,
            Family::HeavyTailRandom { n, hubs, base } => write!(f, "n={n},hubs={hubs},base={base}")?,
        }
        write!(f, ",seed={}", self.seed)
    }
}

impl FromStr for InstanceSpec {
    type Err = SpecError;

    /// `family:key=value,...`, e.g. `grid:width=4,height=3` or
    /// `layered-random:layers=4,width=5,d=2,seed=7`.
    fn from_str(s: &str) -> Result<InstanceSpec, SpecError> {
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut params: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| SpecError::BadParam { key: item.to_string(), reason: "expected key=value".into() })?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let int = |key: &str| -> Result<usize, SpecError> {
            let v = get(key).ok_or_else(|| SpecError::Missing(key.to_string()))?;
            v.parse()
                .map_err(|e: std::num::ParseIntError| SpecError::BadParam { key: key.into(), reason: e.to_string() })
        };
        let int_or = |key: &str, default: usize| if get(key).is_some() { int(key) } else { Ok(default) };
        let seed = match get("seed") {
            Some(v) => v.parse().map_err(|e: std::num::ParseIntError| SpecError::BadParam {
                key: "seed".into(),
                reason: e.to_string(),
            })?,
            None => 0,
        };
        let family = match name {
            "chain" => Family::Chain { n: int("n")? },
            "pyramid" => Family::Pyramid { height: int("height")? },
            "grid" => Family::Grid { width: int("width")?, height: int("height")? },
            "binary-in-tree" => Family::BinaryInTree { levels: int("levels")? },
            "butterfly" => Family::Butterfly { stages: int("stages")? },
            "layered-random" => {
                Family::LayeredRandom { layers: int("layers")?, width: int("width")?, d: int_or("d", 2)? }
            }
            "heavy-tail-random" => {
                let hubs = match get("hubs") {
                    Some(v) => v
                        .parse::<f64>()
                        .map_err(|e| SpecError::BadParam { key: "hubs".into(), reason: e.to_string() })?,
                    None => 0.05,
                };
                Family::HeavyTailRandom { n: int("n")?, hubs, base: int_or("base", 2)? }
            }
            other => return Err(SpecError::UnknownFamily(other.to_string())),
        };
        let known: &[&str] = match family {
            Family::Chain { .. } => &["n"],
            Family::Pyramid { .. } => &["height"],
            Family::Grid { .. } => &["width", "height"],
            Family::BinaryInTree { .. } => &["levels"],
            Family::Butterfly { .. } => &["stages"],
            Family::LayeredRandom { .. } => &["layers", "width", "d"],
            Family::HeavyTailRandom { .. } => &["n", "hubs", "base"],
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| k != "seed" && !known.contains(&k.as_str())) {
            return Err(SpecError::BadParam { key: k.clone(), reason: format!("not a parameter of {name}") });
        }
        Ok(InstanceSpec { family, seed })
    }
}

/// Builds the instance. Identical specs give identical graphs.
pub fn generate(spec: &InstanceSpec) -> Result<Dag, SpecError> {
    let range = |msg: String| Err(SpecError::OutOfRange(msg));
    match spec.family.vertex_count() {
        None => return range("instance is too large".into()),
        Some(0) => return range("instance must have at least one vertex".into()),
        Some(n) if n > MAX_VERTICES => return range(format!("{n} vertices exceed the limit of {MAX_VERTICES}")),
        Some(_) => {}
    }
    let mut rng = Draws::new(spec.seed);
    let dag = match spec.family {
        Family::Chain { n } => Dag::new(n, (1..n).map(|i| (i - 1, i))),
        Family::Pyramid { height } => pyramid(height),
        Family::Grid { width, height } => grid(width, height),
        Family::BinaryInTree { levels } => {
            let n = (1usize << levels) - 1;
            Dag::new(n, (1..n).map(|c| (c, (c - 1) / 2)))
        }
        Family::Butterfly { stages } => butterfly(stages),
        Family::LayeredRandom { layers, width, d } => {
            if d == 0 || d > width {
                return range(format!("layered-random needs 1 <= d <= width, got d={d}, width={width}"));
            }
            layered(layers, width, d, &mut rng)
        }
        Family::HeavyTailRandom { n, hubs, base } => {
            if !(0.0..=1.0).contains(&hubs) || base == 0 {
                return range("heavy-tail-random needs 0 <= hubs <= 1 and base >= 1".into());
            }
            return Ok(heavy_tail(n, hubs, base, spec.seed));
        }
    };
    Ok(dag.expect("generated edges are valid"))
}

fn pyramid(height: usize) -> Result<Dag, crate::graph::GraphError> {
    // Row r has height + 1 - r vertices.
    let mut start = Vec::with_capacity(height + 1);
    let mut acc = 0;
    for r in 0..=height {
        start.push(acc);
        acc += height + 1 - r;
    }
    let mut edges = Vec::new();
    for r in 1..=height {
        for i in 0..(height + 1 - r) {
            let v = start[r] + i;
            edges.push((start[r - 1] + i, v));
            edges.push((start[r - 1] + i + 1, v));
        }
    }
    Dag::new(acc, edges)
}

fn grid(width: usize, height: usize) -> Result<Dag, crate::graph::GraphError> {
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < height {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Dag::new(width * height, edges)
}

fn butterfly(stages: usize) -> Result<Dag, crate::graph::GraphError> {
    let w = 1usize << stages;
    let mut edges = Vec::new();
    for s in 0..stages {
        for i in 0..w {
            edges.push((s * w + i, (s + 1) * w + i));
            edges.push((s * w + i, (s + 1) * w + (i ^ (1 << s))));
        }
    }
    Dag::new((stages + 1) * w, edges)
}

fn layered(layers: usize, width: usize, d: usize, rng: &mut Draws) -> Result<Dag, crate::graph::GraphError> {
    let mut edges = Vec::new();
    for l in 1..layers {
        for i in 0..width {
            let k = 1 + rng.below(d as u64) as usize;
            for p in rng.distinct(width, k) {
                edges.push(((l - 1) * width + p, l * width + i));
            }
        }
    }
    Dag::new(layers * width, edges)
}

fn heavy_tail_once(n: usize, hubs: f64, base: usize, hub_degree: usize, seed: u64) -> (Dag, Vec<VertexId>) {
    let mut rng = Draws::new(seed);
    let mut edges = Vec::new();
    let mut hub_list = Vec::new();
    for v in 1..n {
        let is_hub = v >= n / 2 && v >= hub_degree && rng.chance(hubs);
        let k = if is_hub {
            hub_list.push(v);
            hub_degree
        } else {
            (1 + rng.below(base as u64) as usize).min(v)
        };
        for p in rng.distinct(v, k) {
            edges.push((p, v));
        }
    }
    (Dag::new(n, edges).expect("edges point forward"), hub_list)
}

fn heavy_tail(n: usize, hubs: f64, base: usize, seed: u64) -> Dag {
    // Raise the hub in-degree until it exceeds log2 of the resulting edge
    // count; each attempt replays the same seed.
    let mut hub_degree = 2;
    loop {
        let (dag, hub_list) = heavy_tail_once(n, hubs, base, hub_degree, seed);
        let m = dag.edge_count() as u128;
        let settled = hub_list.is_empty() || hub_degree >= 127 || (1u128 << hub_degree) > m;
        if settled || hub_degree + 1 > n / 2 {
            return dag;
        }
        hub_degree += 1;
    }
}
