//! Instance data model: validated metrics, speed-rounded fleets and the
//! distance levels induced by a makespan guess.

use std::collections::BTreeMap;

use crate::error::{FleetError, HvrpError, MetricError};

/// Vertex identifier. Vertex `0` is always the depot.
pub type Vertex = usize;

/// The depot vertex.
pub const DEPOT: Vertex = 0;

/// Absolute slack allowed when checking the triangle inequality.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Largest vertex count accepted when parsing an instance.
pub const MAX_VERTICES: usize = 5000;

/// Symmetric distance matrix over `0..n` with the depot at vertex 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    n: usize,
    dist: Vec<f64>,
}

impl Metric {
    /// Validates a square matrix: zero diagonal, finite nonnegative entries,
    /// exact symmetry and the triangle inequality over all triples.
    pub fn validate(raw: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = raw.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if n > MAX_VERTICES {
            return Err(MetricError::TooLarge { n, max: MAX_VERTICES });
        }
        for (u, row) in raw.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare { row: u, len: row.len(), n });
            }
        }
        for u in 0..n {
            for v in 0..n {
                let x = raw[u][v];
                if !x.is_finite() {
                    return Err(MetricError::NonFinite { u, v });
                }
                if x < 0.0 {
                    return Err(MetricError::NegativeDistance { u, v, value: x });
                }
            }
            if raw[u][u] != 0.0 {
                return Err(MetricError::NonZeroDiagonal { u, value: raw[u][u] });
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if raw[u][v] != raw[v][u] {
                    return Err(MetricError::AsymmetricDistance { u, v });
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                let uv = raw[u][v];
                for w in 0..n {
                    if raw[u][w] > uv + raw[v][w] + TRIANGLE_TOLERANCE {
                        return Err(MetricError::TriangleViolation { u, v, w });
                    }
                }
            }
        }
        let dist = raw.iter().flat_map(|row| row.iter().copied()).collect();
        Ok(Self { n, dist })
    }

    /// Euclidean metric over planar points; point 0 is the depot.
    pub fn from_points(points: &[[f64; 2]]) -> Result<Self, MetricError> {
        let n = points.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if n > MAX_VERTICES {
            return Err(MetricError::TooLarge { n, max: MAX_VERTICES });
        }
        if let Some(u) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(MetricError::NonFinite { u, v: u });
        }
        let mut dist = vec![0.0; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                let d = (points[u][0] - points[v][0]).hypot(points[u][1] - points[v][1]);
                dist[u * n + v] = d;
                dist[v * n + u] = d;
            }
        }
        Ok(Self { n, dist })
    }

    /// Builds a metric from a row-major matrix without the O(n³) triangle
    /// check. Callers must guarantee the metric axioms hold by construction.
    pub fn from_trusted(n: usize, dist: Vec<f64>) -> Self {
        assert_eq!(dist.len(), n * n, "distance buffer must be n*n");
        assert!(n > 0, "metric needs at least the depot");
        Self { n, dist }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn depot(&self) -> Vertex {
        DEPOT
    }

    #[inline]
    pub fn d(&self, u: Vertex, v: Vertex) -> f64 {
        self.dist[u * self.n + v]
    }

    /// Distance from the depot.
    #[inline]
    pub fn radius(&self, u: Vertex) -> f64 {
        self.d(DEPOT, u)
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Total length of a vertex sequence (consecutive pairs only).
    pub fn walk_length(&self, walk: &[Vertex]) -> f64 {
        walk.windows(2).map(|w| self.d(w[0], w[1])).sum()
    }

    /// Smallest strictly positive distance, if any.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.dist.iter().copied().filter(|&x| x > 0.0).reduce(f64::min)
    }
}

/// A fleet with speeds rounded down to powers of two.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    raw: Vec<f64>,
    class: Vec<u32>,
}

impl Fleet {
    /// Rounds every speed down to `2^floor(log2 s)`.
    pub fn round(raw_speeds: &[f64]) -> Result<Self, FleetError> {
        let mut class = Vec::with_capacity(raw_speeds.len());
        for (index, &s) in raw_speeds.iter().enumerate() {
            if !s.is_finite() {
                return Err(FleetError::NonFiniteSpeed { index });
            }
            if s < 1.0 {
                return Err(FleetError::SpeedBelowOne { index, speed: s });
            }
            class.push(floor_log2(s));
        }
        Ok(Self { raw: raw_speeds.to_vec(), class })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw_speeds(&self) -> &[f64] {
        &self.raw
    }

    pub fn raw_speed(&self, vehicle: usize) -> f64 {
        self.raw[vehicle]
    }

    /// Speed class `j` of a vehicle, so its rounded speed is `2^j`.
    pub fn class(&self, vehicle: usize) -> u32 {
        self.class[vehicle]
    }

    pub fn rounded_speed(&self, vehicle: usize) -> f64 {
        pow2(self.class[vehicle] as i32)
    }

    pub fn rounded_speeds(&self) -> Vec<f64> {
        (0..self.len()).map(|u| self.rounded_speed(u)).collect()
    }

    /// Vehicle counts `μ_j` per speed class.
    pub fn mu(&self) -> BTreeMap<u32, usize> {
        let mut mu = BTreeMap::new();
        for &j in &self.class {
            *mu.entry(j).or_insert(0) += 1;
        }
        mu
    }

    pub fn max_class(&self) -> Option<u32> {
        self.class.iter().copied().max()
    }

    /// `Σ_{j ≥ max(level−1, 0)} 2^j μ_j`: total rounded speed of the vehicles
    /// allowed to serve level-`level` work.
    pub fn suffix_capacity(&self, level: u32) -> f64 {
        let from = level.saturating_sub(1);
        self.class.iter().filter(|&&j| j >= from).map(|&j| pow2(j as i32)).sum()
    }

    /// Sum of rounded speeds.
    pub fn total_rounded_speed(&self) -> f64 {
        self.suffix_capacity(0)
    }
}

/// Exact `2^e` for moderate exponents.
#[inline]
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn floor_log2(s: f64) -> u32 {
    let mut j = s.log2().floor().max(0.0) as u32;
    while pow2(j as i32 + 1) <= s {
        j += 1;
    }
    while j > 0 && pow2(j as i32) > s {
        j -= 1;
    }
    j
}

/// Assignment of vertices to distance levels for a makespan guess `M`.
///
/// Level 0 holds every vertex within `M` of the depot (the depot included);
/// level `i ≥ 1` holds the vertices with depot distance in `(2^{i−1}M, 2^iM]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Leveling {
    m: f64,
    level: Vec<u32>,
}

impl Leveling {
    pub fn compute(metric: &Metric, m: f64) -> Self {
        assert!(m > 0.0 && m.is_finite(), "makespan guess must be positive");
        let level = metric.vertices().map(|u| level_of(metric.radius(u), m)).collect();
        Self { m, level }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn level(&self, u: Vertex) -> u32 {
        self.level[u]
    }

    pub fn edge_level(&self, u: Vertex, v: Vertex) -> u32 {
        self.level[u].max(self.level[v])
    }

    pub fn levels(&self) -> &[u32] {
        &self.level
    }

    pub fn max_level(&self) -> u32 {
        self.level.iter().copied().max().unwrap_or(0)
    }

    /// `2^i · M`.
    pub fn scale(&self, i: i32) -> f64 {
        self.m * pow2(i)
    }

    pub fn vertices_at(&self, i: u32) -> Vec<Vertex> {
        (0..self.level.len()).filter(|&u| self.level[u] == i).collect()
    }

    /// `V_{≤i}`.
    pub fn vertices_upto(&self, i: u32) -> Vec<Vertex> {
        (0..self.level.len()).filter(|&u| self.level[u] <= i).collect()
    }

    /// `V_{<i}`; always contains the depot.
    pub fn vertices_below(&self, i: u32) -> Vec<Vertex> {
        (0..self.level.len()).filter(|&u| self.level[u] < i || u == DEPOT).collect()
    }
}

fn level_of(radius: f64, m: f64) -> u32 {
    if radius <= m {
        return 0;
    }
    let mut i = (radius / m).log2().ceil().max(1.0) as u32;
    while radius > m * pow2(i as i32) {
        i += 1;
    }
    while i > 1 && radius <= m * pow2(i as i32 - 1) {
        i -= 1;
    }
    i
}

/// Largest total demand accepted by the copy reduction.
pub const MAX_TOTAL_DEMAND: u64 = 1_000_000;

/// Capacitated instance: uniform capacity `Q`, integral demands in `0..=Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HvrpInstance {
    pub metric: Metric,
    pub fleet: Fleet,
    capacity: u64,
    demands: Vec<u64>,
}

impl HvrpInstance {
    pub fn new(
        metric: Metric,
        fleet: Fleet,
        capacity: u64,
        demands: Vec<u64>,
    ) -> Result<Self, HvrpError> {
        if capacity == 0 {
            return Err(HvrpError::ZeroCapacity);
        }
        if demands.len() != metric.n() {
            return Err(HvrpError::DemandCount { expected: metric.n(), found: demands.len() });
        }
        if demands[DEPOT] != 0 {
            return Err(HvrpError::DepotDemand(demands[DEPOT]));
        }
        if let Some(v) = demands.iter().position(|&q| q > capacity) {
            return Err(HvrpError::DemandOutOfRange { vertex: v, demand: demands[v], capacity });
        }
        let total: u64 = demands.iter().sum();
        if total > MAX_TOTAL_DEMAND {
            return Err(HvrpError::TooManyCopies { total, max: MAX_TOTAL_DEMAND });
        }
        Ok(Self { metric, fleet, capacity, demands })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn demands(&self) -> &[u64] {
        &self.demands
    }

    pub fn demand(&self, v: Vertex) -> u64 {
        self.demands[v]
    }

    pub fn total_demand(&self) -> u64 {
        self.demands.iter().sum()
    }
}
