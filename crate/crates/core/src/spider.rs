//! Depot-centred spanning spiders with bounded root stretch.
//!
//! Starting from the preorder walk of an MST, the scan adds a shortcut edge
//! from the depot to any vertex whose current path distance exceeds `α` times
//! its metric distance, then drops the walk edge entering every shortcut
//! vertex. The result is a spider (only the centre may have degree above two)
//! with stretch at most `α` and length at most `(1 + 1/(α−1))·d(S⁰)`, where
//! `d(S⁰) ≤ 2·MST`.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{euler_shortcut, mst, Edge};
use crate::instance::{Metric, Vertex, DEPOT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpiderError {
    #[error("alpha must exceed 1, got {0}")]
    AlphaOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spider {
    pub center: Vertex,
    /// Each leg starts at the centre.
    pub legs: Vec<Vec<Vertex>>,
    pub alpha: f64,
    /// The preorder walk the legs were cut from, without the closing return.
    pub walk: Vec<Vertex>,
    pub marked: Vec<Vertex>,
}

impl Spider {
    pub fn build(metric: &Metric, alpha: f64) -> Result<Self, SpiderError> {
        if alpha.is_nan() || alpha <= 1.0 || alpha.is_infinite() {
            return Err(SpiderError::AlphaOutOfRange(alpha));
        }
        let all: Vec<Vertex> = metric.vertices().collect();
        let mut walk = euler_shortcut(&mst(metric, &all));
        if walk.len() > 1 {
            walk.pop();
        }

        let mut legs: Vec<Vec<Vertex>> = Vec::new();
        let mut marked = Vec::new();
        let mut current: Vec<Vertex> = vec![DEPOT];
        // distance from the depot to walk[i] in the walk-plus-shortcuts graph
        let mut reach = 0.0;
        for i in 1..walk.len() {
            let u = walk[i];
            reach += metric.d(walk[i - 1], u);
            if reach > alpha * metric.radius(u) {
                marked.push(u);
                reach = metric.radius(u);
                if current.len() > 1 {
                    legs.push(std::mem::replace(&mut current, vec![DEPOT]));
                } else {
                    current = vec![DEPOT];
                }
            }
            current.push(u);
        }
        if current.len() > 1 {
            legs.push(current);
        }
        Ok(Self { center: DEPOT, legs, alpha, walk, marked })
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.legs.iter().flat_map(|leg| leg.windows(2).map(|w| (w[0], w[1]))).collect()
    }

    pub fn length(&self, metric: &Metric) -> f64 {
        self.edges().iter().map(|&(a, b)| metric.d(a, b)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SpiderViolation {
    /// A vertex other than the centre has degree above two.
    Degree { vertex: Vertex, degree: usize },
    NotSpanning { vertex: Vertex },
    Stretch { vertex: Vertex, tree_distance: f64, bound: f64 },
    Length { length: f64, bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpiderReport {
    pub worst_stretch: f64,
    pub worst_vertex: Option<Vertex>,
    pub length: f64,
    pub mst: f64,
    pub length_ratio: f64,
    /// `(2 + 4/(α−1))·MST`.
    pub length_bound: f64,
    pub violations: Vec<SpiderViolation>,
}

impl SpiderReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Length-bound factor `2 + 4/(α−1)` relative to the MST.
pub fn length_factor(alpha: f64) -> f64 {
    2.0 + 4.0 / (alpha - 1.0)
}

/// Factor `2α/(α−1)` of the sharper bound `(1 + 1/(α−1))·d(S⁰)`, with
/// `d(S⁰) ≤ 2·MST`; equals 4 at `α = 2`.
pub fn tight_length_factor(alpha: f64) -> f64 {
    2.0 * alpha / (alpha - 1.0)
}

/// Re-derives tree distances by walking the spider's adjacency from the
/// centre and checks degree, spanning, stretch and length, each with `1e-9`
/// absolute slack.
pub fn verify_spider(spider: &Spider, metric: &Metric, alpha: f64) -> SpiderReport {
    const TOL: f64 = 1e-9;
    let n = metric.n();
    let edges = spider.edges();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut violations = Vec::new();
    for v in 0..n {
        if v != spider.center && adj[v].len() > 2 {
            violations.push(SpiderViolation::Degree { vertex: v, degree: adj[v].len() });
        }
    }

    let mut dist = vec![f64::NAN; n];
    dist[spider.center] = 0.0;
    let mut stack = vec![spider.center];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if dist[w].is_nan() {
                dist[w] = dist[u] + metric.d(u, w);
                stack.push(w);
            }
        }
    }

    let mut worst_stretch: f64 = 1.0;
    let mut worst_vertex = None;
    for v in 0..n {
        if dist[v].is_nan() {
            violations.push(SpiderViolation::NotSpanning { vertex: v });
            continue;
        }
        let r = metric.radius(v);
        let bound = alpha * r;
        if dist[v] > bound + TOL {
            violations.push(SpiderViolation::Stretch { vertex: v, tree_distance: dist[v], bound });
        }
        if r > 0.0 && dist[v] / r > worst_stretch {
            worst_stretch = dist[v] / r;
            worst_vertex = Some(v);
        }
    }
    if edges.len() + 1 != n && violations.is_empty() {
        violations.push(SpiderViolation::NotSpanning { vertex: spider.center });
    }

    let all: Vec<Vertex> = metric.vertices().collect();
    let mst_weight = mst(metric, &all).length;
    let length = spider.length(metric);
    let length_bound = length_factor(alpha) * mst_weight;
    if length > length_bound + TOL {
        violations.push(SpiderViolation::Length { length, bound: length_bound });
    }
    let length_ratio = if mst_weight > 0.0 { length / mst_weight } else { 1.0 };
    SpiderReport {
        worst_stretch,
        worst_vertex,
        length,
        mst: mst_weight,
        length_ratio,
        length_bound,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_must_exceed_one() {
        let m = Metric::validate(&[vec![0.0]]).unwrap();
        assert_eq!(Spider::build(&m, 1.0), Err(SpiderError::AlphaOutOfRange(1.0)));
        assert!(Spider::build(&m, f64::NAN).is_err());
    }

    #[test]
    fn two_vertices_single_edge() {
        let m = Metric::from_points(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let s = Spider::build(&m, 2.0).unwrap();
        assert_eq!(s.legs, vec![vec![0, 1]]);
        let r = verify_spider(&s, &m, 2.0);
        assert!(r.passed());
        assert_eq!(r.worst_stretch, 1.0);
        assert_eq!(r.length, r.mst);
    }

    #[test]
    fn depot_only() {
        let m = Metric::validate(&[vec![0.0]]).unwrap();
        let s = Spider::build(&m, 2.0).unwrap();
        assert!(s.legs.is_empty());
        assert!(verify_spider(&s, &m, 2.0).passed());
    }

    #[test]
    fn shortcut_breaks_long_detour() {
        // walk 0 → 1 → 2 where vertex 2 is near the depot but far along the path
        let m = Metric::from_points(&[[0.0, 0.0], [10.0, 0.0], [0.0, 1.0]]).unwrap();
        let s = Spider::build(&m, 2.0).unwrap();
        let r = verify_spider(&s, &m, 2.0);
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.worst_stretch <= 2.0);
    }

    #[test]
    fn star_metric_is_already_a_spider() {
        // depot equidistant (1) from three points pairwise 2 apart
        let raw = vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ];
        let m = Metric::validate(&raw).unwrap();
        let s = Spider::build(&m, 2.0).unwrap();
        let r = verify_spider(&s, &m, 2.0);
        assert!(r.passed());
        assert_eq!(r.length, 3.0);
        assert_eq!(r.length_ratio, 1.0);
    }

    #[test]
    fn hand_built_violation_is_caught() {
        let m = Metric::from_points(&[[0.0, 0.0], [10.0, 0.0], [0.0, 1.0]]).unwrap();
        let bad = Spider {
            center: 0,
            legs: vec![vec![0, 1, 2]],
            alpha: 2.0,
            walk: vec![0, 1, 2],
            marked: vec![],
        };
        let r = verify_spider(&bad, &m, 2.0);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, SpiderViolation::Stretch { vertex: 2, .. })));
    }
}
