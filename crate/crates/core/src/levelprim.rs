//! Level-Prim spanning trees.
//!
//! Layer `H_0` is an MST of the level-0 vertices; for `i ≥ 1`, layer `H_i` is
//! an MST of `G[V_{≤i}]` with `V_{<i}` contracted into one vertex. The union
//! of the layers spans every vertex, and depot-to-leaf paths never descend a
//! level.

use serde::Serialize;

use crate::graph::{mst, mst_contracted, Edge, RootedTree};
use crate::instance::{Fleet, Leveling, Metric, Vertex, DEPOT};
use crate::le_rel;

/// Constant of the suffix-weight bound `Σ_{j≥i} d(H_j) ≤ 8·MST(G/V_{<i})`.
pub const SUFFIX_FACTOR: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct LevelPrimTree {
    leveling: Leveling,
    /// `layers[i]` holds the `(parent, child)` edges of `H_i`.
    layers: Vec<Vec<Edge>>,
    layer_lengths: Vec<f64>,
    parent: Vec<Option<Vertex>>,
    union: RootedTree,
}

impl LevelPrimTree {
    pub fn build(metric: &Metric, leveling: &Leveling) -> Self {
        let top = leveling.max_level();
        let mut layers = Vec::with_capacity(top as usize + 1);
        for i in 0..=top {
            let active = leveling.vertices_upto(i);
            let contracted = if i == 0 { vec![DEPOT] } else { leveling.vertices_below(i) };
            layers.push(mst_contracted(metric, &active, &contracted).edges);
        }
        let layer_lengths: Vec<f64> =
            layers.iter().map(|l| l.iter().map(|&(a, b)| metric.d(a, b)).sum()).collect();
        let mut parent = vec![None; metric.n()];
        for &(p, c) in layers.iter().flatten() {
            parent[c] = Some(p);
        }
        let union = RootedTree::new(DEPOT, layers.iter().flatten().copied().collect(), metric);
        Self { leveling: leveling.clone(), layers, layer_lengths, parent, union }
    }

    pub fn leveling(&self) -> &Leveling {
        &self.leveling
    }

    pub fn m(&self) -> f64 {
        self.leveling.m()
    }

    pub fn top_level(&self) -> u32 {
        self.layers.len() as u32 - 1
    }

    pub fn layer(&self, i: u32) -> &[Edge] {
        self.layers.get(i as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn layer_length(&self, i: u32) -> f64 {
        self.layer_lengths.get(i as usize).copied().unwrap_or(0.0)
    }

    /// `Σ_{j≥i} d(H_j)`.
    pub fn suffix_length(&self, i: u32) -> f64 {
        self.layer_lengths.iter().skip(i as usize).sum()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn union(&self) -> &RootedTree {
        &self.union
    }

    pub fn total_length(&self) -> f64 {
        self.suffix_length(0)
    }

    /// First tree edge whose parent sits on a higher level than its child.
    pub fn monotonicity_violation(&self) -> Option<Edge> {
        self.layers
            .iter()
            .flatten()
            .copied()
            .find(|&(p, c)| self.leveling.level(p) > self.leveling.level(c))
    }

    /// Every edge of `H_i` must have edge level exactly `i`.
    pub fn layers_consistent(&self) -> bool {
        self.layers.iter().enumerate().all(|(i, l)| {
            l.iter().all(|&(a, b)| self.leveling.edge_level(a, b) == i as u32)
        })
    }

    /// Per-level comparison of `Σ_{j≥i} d(H_j)` against `8·MST(G/V_{<i})`.
    pub fn check_suffix_bound(&self, metric: &Metric) -> Vec<SuffixBound> {
        let all: Vec<Vertex> = metric.vertices().collect();
        (0..=self.top_level())
            .map(|i| {
                let mst_weight = if i == 0 {
                    mst(metric, &all).length
                } else {
                    mst_contracted(metric, &all, &self.leveling.vertices_below(i)).length
                };
                let lhs = self.suffix_length(i);
                let rhs = SUFFIX_FACTOR * mst_weight;
                SuffixBound { level: i, lhs, mst: mst_weight, rhs, holds: le_rel(lhs, rhs, 1e-6) }
            })
            .collect()
    }

    /// The guess-acceptance test: `Σ_{j≥i} d(H_j) ≤ 8M Σ_{j≥max(i−1,0)} 2^j μ_j`
    /// for every level.
    pub fn vehicle_condition(&self, fleet: &Fleet) -> VehicleCondition {
        let m = self.m();
        let levels = (0..=self.top_level())
            .map(|i| {
                let capacity = fleet.suffix_capacity(i);
                let lhs = self.suffix_length(i);
                let rhs = SUFFIX_FACTOR * m * capacity;
                LevelMargin { level: i, lhs, rhs, holds: lhs <= rhs }
            })
            .collect();
        VehicleCondition { m, levels }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuffixBound {
    pub level: u32,
    pub lhs: f64,
    pub mst: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelMargin {
    pub level: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VehicleCondition {
    pub m: f64,
    pub levels: Vec<LevelMargin>,
}

impl VehicleCondition {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|l| l.holds)
    }
}

/// Builds the Level-Prim tree for guess `m` and evaluates the vehicle
/// condition in one step.
pub fn check_vehicle_condition(metric: &Metric, fleet: &Fleet, m: f64) -> bool {
    let tree = LevelPrimTree::build(metric, &Leveling::compute(metric, m));
    tree.vehicle_condition(fleet).holds()
}
