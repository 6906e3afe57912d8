//! Tree-to-vehicle assignment.
//!
//! Trees of level `i` may go to vehicles of speed class `j ≥ i − 1`. Because
//! these eligibility sets are nested suffixes, a greedy fill from the highest
//! tree level downward (fastest vehicles first) finds a left-saturating
//! b-matching whenever one exists, with tree supply `d(T)` and vehicle
//! capacity `β·2^j·M`. The fractional solution is then made integral by
//! cancelling cycles in its support and sending each remaining split tree to
//! a child vehicle in the resulting forest, so every vehicle gains at most
//! one extra tree.

use serde::Serialize;

use crate::decompose::AssignableCollection;
use crate::error::AssignError;
use crate::instance::Fleet;

/// Snap threshold for fractions near 0 or 1.
pub const FRACTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeInfo {
    pub level: u32,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FractionalAssignment {
    /// Trees in collection order (by level, then index within the family).
    pub trees: Vec<TreeInfo>,
    /// `x[t]` lists `(vehicle, fraction)` with positive fraction.
    pub x: Vec<Vec<(usize, f64)>>,
    /// `Σ_T x(T,u)·d(T)/2^{j_u}` per vehicle.
    pub loads: Vec<f64>,
}

impl FractionalAssignment {
    pub fn max_load(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }
}

/// Vehicle speed classes allowed for a level-`level` tree.
#[inline]
pub fn eligible(level: u32, class: u32) -> bool {
    class + 1 >= level
}

fn tree_infos(collection: &AssignableCollection) -> Vec<TreeInfo> {
    collection.iter().map(|(level, _, t)| TreeInfo { level, length: t.length }).collect()
}

/// Suffix Hall check at `β`; returns the first violated level.
pub fn hall_check(collection: &AssignableCollection, fleet: &Fleet) -> Result<(), AssignError> {
    for i in 0..collection.families.len() as u32 {
        let lhs = collection.suffix_length(i);
        let rhs = collection.beta * collection.m * fleet.suffix_capacity(i);
        if lhs > rhs * (1.0 + 1e-9) {
            return Err(AssignError::HallViolation { level: i, lhs, rhs });
        }
    }
    Ok(())
}

pub fn fractional_match(
    collection: &AssignableCollection,
    fleet: &Fleet,
) -> Result<FractionalAssignment, AssignError> {
    hall_check(collection, fleet)?;
    let trees = tree_infos(collection);
    let k = fleet.len();
    let m = collection.m;
    let mut residual: Vec<f64> =
        (0..k).map(|u| collection.beta * fleet.rounded_speed(u) * m).collect();
    let mut by_speed: Vec<usize> = (0..k).collect();
    by_speed.sort_by(|&a, &b| fleet.class(b).cmp(&fleet.class(a)).then(a.cmp(&b)));

    let mut x: Vec<Vec<(usize, f64)>> = vec![Vec::new(); trees.len()];
    let mut order: Vec<usize> = (0..trees.len()).collect();
    order.sort_by(|&a, &b| trees[b].level.cmp(&trees[a].level).then(a.cmp(&b)));
    for t in order {
        let TreeInfo { level, length } = trees[t];
        let candidates: Vec<usize> =
            by_speed.iter().copied().filter(|&u| eligible(level, fleet.class(u))).collect();
        let Some(&fastest) = candidates.first() else {
            return Err(AssignError::NoEligibleVehicle { level });
        };
        if length <= 0.0 {
            x[t].push((fastest, 1.0));
            continue;
        }
        let mut remaining = length;
        let mut shares: Vec<(usize, f64)> = Vec::new();
        for &u in &candidates {
            if remaining <= 0.0 {
                break;
            }
            let take = remaining.min(residual[u]);
            if take > 0.0 {
                residual[u] -= take;
                remaining -= take;
                shares.push((u, take));
            }
        }
        if remaining > 0.0 {
            // summation noise only; anything larger is a real violation
            if remaining > 1e-9 * length {
                let lhs = collection.suffix_length(level);
                let rhs = collection.beta * m * fleet.suffix_capacity(level);
                return Err(AssignError::HallViolation { level, lhs, rhs });
            }
            match shares.last_mut() {
                Some(last) => last.1 += remaining,
                None => shares.push((fastest, remaining)),
            }
        }
        x[t] = shares.into_iter().map(|(u, mass)| (u, mass / length)).collect();
    }
    let loads = loads_of(&trees, &x, fleet);
    Ok(FractionalAssignment { trees, x, loads })
}

fn loads_of(trees: &[TreeInfo], x: &[Vec<(usize, f64)>], fleet: &Fleet) -> Vec<f64> {
    let mut loads = vec![0.0; fleet.len()];
    for (t, row) in x.iter().enumerate() {
        for &(u, f) in row {
            loads[u] += f * trees[t].length / fleet.rounded_speed(u);
        }
    }
    loads
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralAssignment {
    /// Owning vehicle per tree, in collection order.
    pub owner: Vec<usize>,
    /// Total processing time `Σ d(T)/2^{j_u}` per vehicle.
    pub loads: Vec<f64>,
}

impl IntegralAssignment {
    pub fn max_load(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }

    /// Tree indices owned by a vehicle, in collection order.
    pub fn trees_of(&self, vehicle: usize) -> Vec<usize> {
        (0..self.owner.len()).filter(|&t| self.owner[t] == vehicle).collect()
    }
}

/// Rounds a fractional assignment. Each vehicle's load grows by at most the
/// largest processing time among trees it fractionally held.
pub fn round_assignment(frac: &FractionalAssignment, fleet: &Fleet) -> IntegralAssignment {
    let nt = frac.trees.len();
    let k = fleet.len();
    let mut owner = vec![usize::MAX; nt];

    // support edges in mass units: (tree, vehicle, mass)
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (t, row) in frac.x.iter().enumerate() {
        let len = frac.trees[t].length;
        if len <= 0.0 || row.len() == 1 {
            owner[t] = pick_largest(row);
            continue;
        }
        if let Some(&(u, _)) = row.iter().find(|&&(_, f)| f >= 1.0 - FRACTION_EPS) {
            owner[t] = u;
            continue;
        }
        for &(u, f) in row {
            if f > FRACTION_EPS {
                edges.push((t, u, f * len));
            }
        }
    }

    cancel_cycles(&mut edges, nt, k, &frac.trees);

    // forest rounding
    let node_count = nt + k;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); node_count];
    for (e, &(t, u, _)) in edges.iter().enumerate() {
        adj[t].push((nt + u, e));
        adj[nt + u].push((t, e));
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    let mut visited = vec![false; node_count];
    for root in nt..node_count {
        if visited[root] || adj[root].is_empty() {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            let kids: Vec<(usize, usize)> =
                adj[node].iter().copied().filter(|&(w, _)| !visited[w]).collect();
            for &(w, _) in &kids {
                visited[w] = true;
                stack.push(w);
            }
            if node < nt && owner[node] == usize::MAX {
                // a tree node: leaves go to their parent vehicle, split trees
                // to the child vehicle carrying the most mass
                owner[node] = match kids
                    .iter()
                    .max_by(|a, b| edges[a.1].2.total_cmp(&edges[b.1].2).then(b.0.cmp(&a.0)))
                {
                    Some(&(w, _)) => w - nt,
                    None => adj[node]
                        .iter()
                        .map(|&(w, _)| w - nt)
                        .next()
                        .expect("tree node has a vehicle"),
                };
            }
        }
    }
    // trees whose support collapsed to nothing after snapping
    for t in 0..nt {
        if owner[t] == usize::MAX {
            owner[t] = pick_largest(&frac.x[t]);
        }
    }

    let mut loads = vec![0.0; k];
    for t in 0..nt {
        loads[owner[t]] += frac.trees[t].length / fleet.rounded_speed(owner[t]);
    }
    IntegralAssignment { owner, loads }
}

fn pick_largest(row: &[(usize, f64)]) -> usize {
    row.iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|&(u, _)| u)
        .expect("every tree has a vehicle")
}

/// Shifts mass around support cycles until the support is a forest. Mass
/// moves alternate `+δ/−δ` along the cycle, so every tree's total and every
/// vehicle's total stay fixed.
fn cancel_cycles(edges: &mut Vec<(usize, usize, f64)>, nt: usize, k: usize, trees: &[TreeInfo]) {
    loop {
        let Some(cycle) = find_cycle(edges, nt, k) else {
            return;
        };
        // cycle lists edge indices, alternating starting with a "+" edge
        let delta = cycle.iter().skip(1).step_by(2).map(|&e| edges[e].2).fold(f64::INFINITY, f64::min);
        let mut zeroed = None;
        for (pos, &e) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                edges[e].2 += delta;
            } else if edges[e].2 == delta && zeroed.is_none() {
                edges[e].2 = 0.0;
                zeroed = Some(e);
            } else {
                edges[e].2 -= delta;
            }
        }
        edges.retain(|&(t, _, mass)| mass > FRACTION_EPS * trees[t].length);
    }
}

/// Finds a cycle in the bipartite support graph (trees `0..nt`, vehicles
/// `nt..nt+k`) and returns its edges in traversal order.
fn find_cycle(edges: &[(usize, usize, f64)], nt: usize, k: usize) -> Option<Vec<usize>> {
    let n = nt + k;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(t, u, _)) in edges.iter().enumerate() {
        adj[t].push((nt + u, e));
        adj[nt + u].push((t, e));
    }
    let mut parent_edge = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    for start in 0..n {
        if depth[start] != usize::MAX {
            continue;
        }
        depth[start] = 0;
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            for &(b, e) in &adj[a] {
                if e == parent_edge[a] {
                    continue;
                }
                if depth[b] == usize::MAX {
                    depth[b] = depth[a] + 1;
                    parent[b] = a;
                    parent_edge[b] = e;
                    stack.push(b);
                } else {
                    // non-tree edge closes a cycle through the DFS forest
                    let mut left = Vec::new();
                    let mut right = Vec::new();
                    let (mut x, mut y) = (a, b);
                    while depth[x] > depth[y] {
                        left.push(parent_edge[x]);
                        x = parent[x];
                    }
                    while depth[y] > depth[x] {
                        right.push(parent_edge[y]);
                        y = parent[y];
                    }
                    while x != y {
                        left.push(parent_edge[x]);
                        x = parent[x];
                        right.push(parent_edge[y]);
                        y = parent[y];
                    }
                    // walk: b -> ... -> a via tree edges reversed, then a -> b
                    let mut cycle = vec![e];
                    cycle.extend(right.iter().copied());
                    cycle.extend(left.iter().rev().copied());
                    return Some(cycle);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RootedTree;

    fn tree(length: f64) -> RootedTree {
        RootedTree { root: 0, edges: vec![(0, 1)], length }
    }

    fn collection(m: f64, families: Vec<Vec<f64>>) -> AssignableCollection {
        AssignableCollection {
            m,
            alpha: 6.0,
            beta: 40.0,
            families: families.into_iter().map(|f| f.into_iter().map(tree).collect()).collect(),
        }
    }

    #[test]
    fn one_tree_one_vehicle() {
        let c = collection(1.0, vec![vec![3.0]]);
        let f = Fleet::round(&[1.0]).unwrap();
        let x = fractional_match(&c, &f).unwrap();
        assert_eq!(x.x, vec![vec![(0, 1.0)]]);
        assert_eq!(x.loads, vec![3.0]);
    }

    #[test]
    fn saturating_slow_vehicle() {
        // two level-2 trees of 40 each; one speed-2 vehicle, capacity 40·2·1 = 80
        let c = collection(1.0, vec![vec![], vec![], vec![40.0, 40.0]]);
        let f = Fleet::round(&[2.0]).unwrap();
        let x = fractional_match(&c, &f).unwrap();
        assert_eq!(x.x, vec![vec![(0, 1.0)], vec![(0, 1.0)]]);
        assert_eq!(x.loads, vec![40.0]);
        let r = round_assignment(&x, &f);
        assert_eq!(r.owner, vec![0, 0]);
    }

    #[test]
    fn hall_violation_reports_level() {
        let c = collection(1.0, vec![vec![], vec![], vec![81.0]]);
        let f = Fleet::round(&[2.0, 1.0]).unwrap();
        match fractional_match(&c, &f) {
            Err(AssignError::HallViolation { level, lhs, rhs }) => {
                // 81 > 40·2 once the speed-1 vehicle drops out at level 2
                assert_eq!(level, 2);
                assert!(lhs > rhs);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
        let c = collection(1.0, vec![vec![], vec![], vec![], vec![40.0]]);
        let f = Fleet::round(&[2.0, 1.0]).unwrap();
        assert!(matches!(
            fractional_match(&c, &f),
            Err(AssignError::HallViolation { level: 3, .. })
        ));
    }

    #[test]
    fn edge_rule_respected() {
        // level-3 trees need class >= 2
        let c = collection(1.0, vec![vec![10.0], vec![], vec![], vec![100.0]]);
        let f = Fleet::round(&[1.0, 4.0, 8.0]).unwrap();
        let x = fractional_match(&c, &f).unwrap();
        for &(u, _) in &x.x[1] {
            assert!(f.class(u) >= 2);
        }
    }

    #[test]
    fn already_integral_is_fixed_point() {
        let frac = FractionalAssignment {
            trees: vec![TreeInfo { level: 0, length: 2.0 }, TreeInfo { level: 0, length: 3.0 }],
            x: vec![vec![(1, 1.0)], vec![(0, 1.0)]],
            loads: vec![3.0, 2.0],
        };
        let f = Fleet::round(&[1.0, 1.0]).unwrap();
        let r = round_assignment(&frac, &f);
        assert_eq!(r.owner, vec![1, 0]);
        assert_eq!(r.loads, vec![3.0, 2.0]);
    }

    #[test]
    fn single_split_job() {
        let frac = FractionalAssignment {
            trees: vec![TreeInfo { level: 0, length: 4.0 }],
            x: vec![vec![(0, 0.5), (1, 0.5)]],
            loads: vec![2.0, 2.0],
        };
        let f = Fleet::round(&[1.0, 1.0]).unwrap();
        let r = round_assignment(&frac, &f);
        assert!(r.owner[0] == 0 || r.owner[0] == 1);
        assert_eq!(r.max_load(), 4.0);
    }

    #[test]
    fn cycle_is_cancelled() {
        // two trees both split across the same two vehicles form a 4-cycle
        let frac = FractionalAssignment {
            trees: vec![TreeInfo { level: 0, length: 2.0 }, TreeInfo { level: 0, length: 2.0 }],
            x: vec![vec![(0, 0.5), (1, 0.5)], vec![(0, 0.5), (1, 0.5)]],
            loads: vec![2.0, 2.0],
        };
        let f = Fleet::round(&[1.0, 1.0]).unwrap();
        let r = round_assignment(&frac, &f);
        // each vehicle gains at most one extra tree over its fractional load
        for u in 0..2 {
            assert!(r.loads[u] <= frac.loads[u] + 2.0);
        }
        assert_eq!(r.loads.iter().sum::<f64>(), 4.0);
    }
}
