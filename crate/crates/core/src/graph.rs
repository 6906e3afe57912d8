//! Dense-graph primitives: Prim's MST (plain and with a contracted vertex
//! set), rooted trees and Euler-tour shortcutting.

use std::collections::BTreeSet;

use crate::instance::{Metric, Vertex};

/// Undirected edge; in rooted structures the first vertex is the parent.
pub type Edge = (Vertex, Vertex);

/// A tree given by its edge set, rooted at `root`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    pub root: Vertex,
    pub edges: Vec<Edge>,
    pub length: f64,
}

impl RootedTree {
    pub fn new(root: Vertex, edges: Vec<Edge>, metric: &Metric) -> Self {
        let length = edge_length(metric, &edges);
        Self { root, edges, length }
    }

    pub fn singleton(root: Vertex) -> Self {
        Self { root, edges: Vec::new(), length: 0.0 }
    }

    /// Sorted vertex set, root included.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut set = BTreeSet::from([self.root]);
        for &(a, b) in &self.edges {
            set.insert(a);
            set.insert(b);
        }
        set.into_iter().collect()
    }

    /// True iff the edges form a tree containing the root.
    pub fn is_valid(&self) -> bool {
        let verts = self.vertices();
        if verts.len() != self.edges.len() + 1 {
            return false;
        }
        let adj = adjacency(&verts, &self.edges);
        let mut seen = BTreeSet::from([self.root]);
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            for &w in adj.neighbors(u) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == verts.len()
    }

    pub fn recomputed_length(&self, metric: &Metric) -> f64 {
        edge_length(metric, &self.edges)
    }
}

pub fn edge_length(metric: &Metric, edges: &[Edge]) -> f64 {
    edges.iter().map(|&(a, b)| metric.d(a, b)).sum()
}

/// Sorted adjacency lists over an arbitrary vertex subset.
pub(crate) struct Adjacency {
    index: std::collections::HashMap<Vertex, usize>,
    lists: Vec<Vec<Vertex>>,
}

impl Adjacency {
    pub(crate) fn neighbors(&self, u: Vertex) -> &[Vertex] {
        self.index.get(&u).map(|&i| self.lists[i].as_slice()).unwrap_or(&[])
    }
}

pub(crate) fn adjacency(vertices: &[Vertex], edges: &[Edge]) -> Adjacency {
    let index: std::collections::HashMap<Vertex, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut lists = vec![Vec::new(); vertices.len()];
    for &(a, b) in edges {
        lists[index[&a]].push(b);
        lists[index[&b]].push(a);
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    Adjacency { index, lists }
}

/// Prim's algorithm on the complete graph over `active`, with every vertex of
/// `seeds` already in the tree. Returns `(tree side, new vertex)` edges in
/// insertion order.
///
/// Ties go to the smaller distance, then the smaller new-vertex index, then
/// the smaller parent index.
fn prim(metric: &Metric, active: &[Vertex], seeds: &[Vertex]) -> Vec<Edge> {
    let n = metric.n();
    let mut candidate = vec![false; n];
    for &v in active {
        candidate[v] = true;
    }
    let mut in_tree = vec![false; n];
    for &s in seeds {
        in_tree[s] = true;
        candidate[s] = false;
    }
    let frontier: Vec<Vertex> = {
        let mut f: Vec<Vertex> = active.iter().copied().filter(|&v| candidate[v]).collect();
        f.sort_unstable();
        f.dedup();
        f
    };
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let relax = |from: Vertex, key: &mut [f64], parent: &mut [usize], in_tree: &[bool]| {
        for &v in &frontier {
            if in_tree[v] {
                continue;
            }
            let d = metric.d(from, v);
            if d < key[v] || (d == key[v] && from < parent[v]) {
                key[v] = d;
                parent[v] = from;
            }
        }
    };
    let mut seeds_sorted = seeds.to_vec();
    seeds_sorted.sort_unstable();
    for &s in &seeds_sorted {
        relax(s, &mut key, &mut parent, &in_tree);
    }
    let mut edges = Vec::with_capacity(frontier.len());
    for _ in 0..frontier.len() {
        let mut best: Option<Vertex> = None;
        for &v in &frontier {
            if in_tree[v] {
                continue;
            }
            match best {
                None => best = Some(v),
                Some(b) if key[v] < key[b] => best = Some(v),
                _ => {}
            }
        }
        let v = best.expect("frontier vertex remains");
        in_tree[v] = true;
        edges.push((parent[v], v));
        relax(v, &mut key, &mut parent, &in_tree);
    }
    edges
}

/// Minimum spanning tree of the complete graph on `active`, rooted at its
/// smallest vertex.
pub fn mst(metric: &Metric, active: &[Vertex]) -> RootedTree {
    let root = *active.iter().min().expect("active set must be nonempty");
    let edges = prim(metric, active, &[root]);
    RootedTree::new(root, edges, metric)
}

/// MST of `G[active] / contracted`, reported in original vertex IDs.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedMst {
    /// `(tree side, new vertex)`; a super-vertex edge is realized by its
    /// nearest endpoint inside the contracted set.
    pub edges: Vec<Edge>,
    pub length: f64,
}

/// MST of the graph on `active ∪ contracted` with `contracted` merged into a
/// single super-vertex.
pub fn mst_contracted(metric: &Metric, active: &[Vertex], contracted: &[Vertex]) -> ContractedMst {
    assert!(!contracted.is_empty(), "contracted set must be nonempty");
    let edges = prim(metric, active, contracted);
    let length = edge_length(metric, &edges);
    ContractedMst { edges, length }
}

/// Doubles the tree, walks it in DFS preorder (children in ascending index
/// order) and shortcuts repeated vertices. The result starts and ends at the
/// root; a single-vertex tree yields `[root]`.
pub fn euler_shortcut(tree: &RootedTree) -> Vec<Vertex> {
    if tree.edges.is_empty() {
        return vec![tree.root];
    }
    let verts = tree.vertices();
    let adj = adjacency(&verts, &tree.edges);
    let mut order = Vec::with_capacity(verts.len() + 1);
    let mut seen = BTreeSet::new();
    let mut stack = vec![tree.root];
    while let Some(u) = stack.pop() {
        if !seen.insert(u) {
            continue;
        }
        order.push(u);
        for &w in adj.neighbors(u).iter().rev() {
            if !seen.contains(&w) {
                stack.push(w);
            }
        }
    }
    order.push(tree.root);
    order
}
