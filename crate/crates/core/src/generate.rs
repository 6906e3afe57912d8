//! Seeded instance generators. All randomness is drawn from one caller-owned
//! generator, so a seed fixes the output bit for bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{Fleet, HvrpInstance, Metric};
use crate::io::{InstanceFile, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Uniform points in the unit square.
    Euclidean,
    /// Random symmetric weights closed under shortest paths.
    RandomMetric,
    /// Uniform points on `[0, 1]`.
    Line,
    /// Depot, `n` gray vertices and `n` black vertices; gray-gray,
    /// depot-gray and gray-black distances are 1, black-black is `1/n`.
    Figure1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub kind: MetricKind,
    /// Vertex count including the depot; for `Figure1`, the family parameter.
    pub n: usize,
    pub k: usize,
    /// Speeds are drawn uniformly from `[1, speed_spread]`.
    pub speed_spread: f64,
    pub capacity: Option<u64>,
    /// Demands are drawn uniformly from `0..=min(demand_max, capacity)`.
    pub demand_max: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self { kind: MetricKind::Euclidean, n: 10, k: 2, speed_spread: 4.0, capacity: None, demand_max: 1 }
    }
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, line: bool) -> Vec<[f64; 2]> {
    (0..n).map(|_| if line { [rng.gen::<f64>(), 0.0] } else { [rng.gen(), rng.gen()] }).collect()
}

/// Symmetric weights in `[0.1, 1)` closed under shortest paths.
pub fn random_metric_rows<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let w = rng.gen_range(0.1..1.0);
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    floyd_warshall(&mut d);
    d
}

pub fn floyd_warshall(d: &mut [Vec<f64>]) {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
}

/// The gray/black family for parameter `n` (`2n + 1` vertices). Gray
/// vertices are `1..=n`, black vertices `n+1..=2n`; depot-black is 2, the
/// shortest path through any gray vertex.
pub fn figure1_rows(n: usize) -> Vec<Vec<f64>> {
    let size = 2 * n + 1;
    let black = |v: usize| v > n;
    let mut d = vec![vec![0.0; size]; size];
    for u in 0..size {
        for v in 0..size {
            if u == v {
                continue;
            }
            d[u][v] = match (u, v) {
                (0, w) | (w, 0) if black(w) => 2.0,
                _ if black(u) && black(v) => 1.0 / n as f64,
                _ => 1.0,
            };
        }
    }
    d
}

pub fn random_speeds<R: Rng>(rng: &mut R, k: usize, spread: f64) -> Vec<f64> {
    (0..k).map(|_| if spread > 1.0 { rng.gen_range(1.0..=spread) } else { 1.0 }).collect()
}

pub fn generate<R: Rng>(cfg: &GenConfig, rng: &mut R) -> InstanceFile {
    let (points, matrix) = match cfg.kind {
        MetricKind::Euclidean => (Some(random_points(rng, cfg.n, false)), None),
        MetricKind::Line => (Some(random_points(rng, cfg.n, true)), None),
        MetricKind::RandomMetric => (None, Some(random_metric_rows(rng, cfg.n))),
        MetricKind::Figure1 => (None, Some(figure1_rows(cfg.n))),
    };
    let size = points.as_ref().map(Vec::len).or(matrix.as_ref().map(Vec::len)).unwrap_or(0);
    let speeds = random_speeds(rng, cfg.k, cfg.speed_spread);
    let demands = cfg.capacity.map(|q| {
        let hi = cfg.demand_max.min(q);
        (0..size).map(|v| if v == 0 { 0 } else { rng.gen_range(0..=hi) }).collect()
    });
    InstanceFile { schema_version: SCHEMA_VERSION, points, matrix, speeds, capacity: cfg.capacity, demands }
}

/// Instance `index` of a mixed test corpus: euclidean, random-metric and
/// line metrics in rotation, `2..=max_n` vertices and one to four distinct
/// speed classes.
pub fn corpus_instance<R: Rng>(rng: &mut R, index: usize, max_n: usize, max_k: usize) -> (Metric, Fleet) {
    let n = rng.gen_range(2..=max_n.max(2));
    let k = rng.gen_range(1..=max_k.max(1));
    let classes = rng.gen_range(1..=4u32);
    let metric = match index % 3 {
        0 => Metric::from_points(&random_points(rng, n, false)),
        1 => Metric::validate(&random_metric_rows(rng, n)),
        _ => Metric::from_points(&random_points(rng, n, true)),
    }
    .expect("generated metrics are valid");
    let speeds = random_speeds(rng, k, f64::from(1u32 << classes) - 1e-9);
    (metric, Fleet::round(&speeds).expect("speeds are at least 1"))
}

/// Capacitated corpus instance: capacity in `{1, 2, 3, 4, 8}` and demands
/// uniform in `0..=Q`.
pub fn hvrp_corpus_instance<R: Rng>(rng: &mut R, index: usize, max_n: usize, max_k: usize) -> HvrpInstance {
    let (metric, fleet) = corpus_instance(rng, index, max_n, max_k);
    let q = [1u64, 2, 3, 4, 8][rng.gen_range(0..5)];
    let demands = (0..metric.n()).map(|v| if v == 0 { 0 } else { rng.gen_range(0..=q) }).collect();
    HvrpInstance::new(metric, fleet, q, demands).expect("generated demands are in range")
}
