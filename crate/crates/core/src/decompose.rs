//! Decomposition of a Level-Prim tree into an assignable collection of
//! depot-rooted trees.
//!
//! 1. Split the tree into level subtrees: `H_0`, plus one subtree per maximal
//!    connected group of level-`i` vertices together with its head-edge.
//! 2. Mark `H_0` and every level-`i` subtree of length at least `2^{i−3}M`.
//! 3. Hang each unmarked subtree from the subtree owning the lower endpoint of
//!    its head-edge, which is always a marked subtree one level down.
//! 4. Cut each marked level-`i` subtree, together with what dangles from it,
//!    into pieces of length in `[2^{i+1}M, 2^{i+2}M)` plus one shorter
//!    remainder, and connect every piece to the depot by its shortest edge.
//!
//! The pieces of level `i` form family `T_i`; the result is
//! `(6, 40)`-assignable whenever the vehicle condition held for `M`.

use serde::Serialize;

use crate::error::DecomposeError;
use crate::graph::{Edge, RootedTree};
use crate::instance::{pow2, Fleet, Metric, Vertex, DEPOT};
use crate::levelprim::LevelPrimTree;
use crate::le_rel;

pub const ALPHA: f64 = 6.0;
pub const BETA: f64 = 40.0;
/// Per-subtree charging constant.
pub const CHARGE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelSubtree {
    pub id: usize,
    pub level: u32,
    /// Tree edges, head-edge included.
    pub edges: Vec<Edge>,
    /// The unique edge entering the subtree from `V_{<i}`; `None` for `H_0`.
    pub head_edge: Option<Edge>,
    /// Level-`i` vertices owned by this subtree.
    pub members: Vec<Vertex>,
    pub length: f64,
    pub marked: bool,
    /// Ids of unmarked level-`i+1` subtrees hanging from this one.
    pub dangling: Vec<usize>,
}

/// Level subtrees plus the owning subtree of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreePartition {
    pub subtrees: Vec<LevelSubtree>,
    pub owner: Vec<usize>,
}

/// Splits the Level-Prim tree into level subtrees. Subtree 0 is `H_0`.
pub fn split_into_level_subtrees(
    tree: &LevelPrimTree,
    metric: &Metric,
) -> Result<SubtreePartition, DecomposeError> {
    let lv = tree.leveling();
    let n = metric.n();
    if let Some((p, c)) = tree.monotonicity_violation() {
        return Err(DecomposeError::MonotonicityViolated {
            parent: p,
            child: c,
            parent_level: lv.level(p),
            child_level: lv.level(c),
        });
    }
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            children[p].push(v);
        }
    }

    let mut owner = vec![usize::MAX; n];
    let h0_edges = tree.layer(0).to_vec();
    let members = lv.vertices_at(0);
    for &v in &members {
        owner[v] = 0;
    }
    let mut subtrees = vec![LevelSubtree {
        id: 0,
        level: 0,
        length: h0_edges.iter().map(|&(a, b)| metric.d(a, b)).sum(),
        edges: h0_edges,
        head_edge: None,
        members,
        marked: false,
        dangling: Vec::new(),
    }];

    for i in 1..=tree.top_level() {
        for head in lv.vertices_at(i) {
            let p = tree.parent(head).expect("non-depot vertex has a parent");
            if lv.level(p) == i {
                continue;
            }
            let id = subtrees.len();
            let mut edges = vec![(p, head)];
            let mut members = vec![head];
            let mut stack = vec![head];
            owner[head] = id;
            while let Some(u) = stack.pop() {
                for &c in &children[u] {
                    if lv.level(c) == i {
                        edges.push((u, c));
                        members.push(c);
                        owner[c] = id;
                        stack.push(c);
                    }
                }
            }
            members.sort_unstable();
            subtrees.push(LevelSubtree {
                id,
                level: i,
                length: edges.iter().map(|&(a, b)| metric.d(a, b)).sum(),
                edges,
                head_edge: Some((p, head)),
                members,
                marked: false,
                dangling: Vec::new(),
            });
        }
    }
    Ok(SubtreePartition { subtrees, owner })
}

/// Marks `H_0` and every level-`i` subtree with `d(τ) ≥ 2^{i−3}M`.
pub fn mark_subtrees(subtrees: &mut [LevelSubtree], m: f64) {
    for s in subtrees {
        s.marked = s.level == 0 || s.length >= m * pow2(s.level as i32 - 3);
    }
}

/// Attaches every unmarked subtree to its parent subtree, checking that the
/// parent is marked and exactly one level down.
pub fn attach_dangling(partition: &mut SubtreePartition, m: f64) -> Result<(), DecomposeError> {
    let SubtreePartition { subtrees, owner } = partition;
    for s in subtrees.iter_mut() {
        s.dangling.clear();
    }
    for id in 0..subtrees.len() {
        if subtrees[id].marked {
            continue;
        }
        let level = subtrees[id].level;
        let (low, _) = subtrees[id].head_edge.expect("only H_0 lacks a head-edge and it is marked");
        let parent = owner[low];
        let ok = subtrees[parent].level + 1 == level && subtrees[parent].marked;
        // a dangling subtree under a level-(i−1) parent is shorter than 2^{i−3}M
        let short = subtrees[id].length <= m * pow2(level as i32 - 3);
        if !ok || !short {
            return Err(DecomposeError::OrphanUnmarkedSubtree {
                subtree: id,
                level,
                parent_desc: format!(
                    "subtree {parent} (level {}, marked {})",
                    subtrees[parent].level, subtrees[parent].marked
                ),
            });
        }
        subtrees[parent].dangling.push(id);
    }
    Ok(())
}

/// Cuts a tree (given as an edge list containing `root`) into connected
/// pieces: every piece but the last weighs in `[limit, 2·limit)` provided no
/// edge exceeds `limit`, and the last weighs less than `limit`.
///
/// Repeatedly picks a deepest vertex whose remaining subtree weighs at least
/// `limit` and detaches child branches from it: a single branch of weight at
/// least `limit` if one exists, otherwise branches in ascending vertex order
/// until their total reaches `limit`.
pub fn split_tree(metric: &Metric, root: Vertex, edges: &[Edge], limit: f64) -> Vec<Vec<Edge>> {
    if edges.is_empty() {
        return Vec::new();
    }
    let mut verts: Vec<Vertex> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    verts.push(root);
    verts.sort_unstable();
    verts.dedup();
    let idx = |v: Vertex| verts.binary_search(&v).expect("vertex in tree");
    let k = verts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(a, b) in edges {
        adj[idx(a)].push(idx(b));
        adj[idx(b)].push(idx(a));
    }
    for l in &mut adj {
        l.sort_unstable();
    }

    // BFS orientation from the root
    let r = idx(root);
    let mut parent = vec![usize::MAX; k];
    let mut depth = vec![0usize; k];
    let mut order = vec![r];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    parent[r] = r;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                depth[w] = depth[u] + 1;
                children[u].push(w);
                order.push(w);
            }
        }
    }
    debug_assert_eq!(order.len(), k, "edges must form a tree containing the root");

    // alive[c]: the edge from c's parent to c has not been cut away yet
    let mut alive = vec![true; k];
    alive[r] = false;
    let up = |c: usize| metric.d(verts[parent[c]], verts[c]);
    let mut pieces = Vec::new();
    loop {
        let mut weight = vec![0.0f64; k];
        for &u in order.iter().rev() {
            if u != r && alive[u] {
                let w = weight[u] + up(u);
                weight[parent[u]] += w;
            }
        }
        if weight[r] < limit {
            break;
        }
        let v = (0..k)
            .filter(|&v| (v == r || alive[v]) && weight[v] >= limit)
            .max_by(|&a, &b| depth[a].cmp(&depth[b]).then(verts[b].cmp(&verts[a])))
            .expect("root qualifies");
        let branches: Vec<(usize, f64)> = children[v]
            .iter()
            .filter(|&&c| alive[c])
            .map(|&c| (c, weight[c] + up(c)))
            .collect();
        let chosen: Vec<usize> = match branches.iter().find(|&&(_, b)| b >= limit) {
            Some(&(c, _)) => vec![c],
            None => {
                let mut acc = 0.0;
                let mut out = Vec::new();
                for &(c, b) in &branches {
                    out.push(c);
                    acc += b;
                    if acc >= limit {
                        break;
                    }
                }
                out
            }
        };
        let mut piece = Vec::new();
        for c in chosen {
            let mut stack = vec![c];
            while let Some(u) = stack.pop() {
                alive[u] = false;
                piece.push((verts[parent[u]], verts[u]));
                stack.extend(children[u].iter().copied().filter(|&w| alive[w]));
            }
        }
        pieces.push(piece);
    }
    let rest: Vec<Edge> = order
        .iter()
        .filter(|&&u| u != r && alive[u])
        .map(|&u| (verts[parent[u]], verts[u]))
        .collect();
    if !rest.is_empty() {
        pieces.push(rest);
    }
    pieces
}

/// Connects a piece to the depot through its nearest vertex (ties to the
/// smaller index); pieces already containing the depot are kept as they are.
pub fn root_piece(metric: &Metric, piece: Vec<Edge>) -> RootedTree {
    if piece.iter().any(|&(a, b)| a == DEPOT || b == DEPOT) {
        return RootedTree::new(DEPOT, piece, metric);
    }
    let nearest = piece
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .min_by(|&a, &b| metric.radius(a).total_cmp(&metric.radius(b)).then(a.cmp(&b)))
        .expect("piece has an edge");
    let mut edges = Vec::with_capacity(piece.len() + 1);
    edges.push((DEPOT, nearest));
    edges.extend(piece);
    RootedTree::new(DEPOT, edges, metric)
}

/// Per marked subtree: what went in and what came out of the cut-and-root step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PieceReport {
    pub subtree: usize,
    pub level: u32,
    pub subtree_length: f64,
    pub dangle_length: f64,
    pub piece_lengths: Vec<f64>,
    pub tree_lengths: Vec<f64>,
    /// Unrooted pieces, before the depot edge is added.
    pub pieces: Vec<Vec<Edge>>,
}

/// Cuts `τ ∪ dangle(τ)` into pieces of target length `2^{i+1}M` and roots
/// each piece at the depot.
pub fn split_and_root(
    partition: &SubtreePartition,
    tau: usize,
    metric: &Metric,
    m: f64,
) -> (Vec<RootedTree>, PieceReport) {
    let t = &partition.subtrees[tau];
    let mut edges = t.edges.clone();
    let mut dangle_length = 0.0;
    for &s in &t.dangling {
        edges.extend(partition.subtrees[s].edges.iter().copied());
        dangle_length += partition.subtrees[s].length;
    }
    let root = t.head_edge.map(|(low, _)| low).unwrap_or(DEPOT);
    let limit = m * pow2(t.level as i32 + 1);
    let pieces = split_tree(metric, root, &edges, limit);
    let piece_lengths =
        pieces.iter().map(|p| p.iter().map(|&(a, b)| metric.d(a, b)).sum()).collect();
    let trees: Vec<RootedTree> = pieces.iter().cloned().map(|p| root_piece(metric, p)).collect();
    let report = PieceReport {
        subtree: tau,
        level: t.level,
        subtree_length: t.length,
        dangle_length,
        piece_lengths,
        tree_lengths: trees.iter().map(|t| t.length).collect(),
        pieces,
    };
    (trees, report)
}

/// Level-indexed families of depot-rooted trees.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignableCollection {
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `families[i]` is `T_i`; levels without marked subtrees hold an empty list.
    pub families: Vec<Vec<RootedTree>>,
}

impl AssignableCollection {
    pub fn family_length(&self, i: u32) -> f64 {
        self.families.get(i as usize).map_or(0.0, |f| f.iter().map(|t| t.length).sum())
    }

    /// `Σ_{j≥i} d(T_j)`.
    pub fn suffix_length(&self, i: u32) -> f64 {
        (i..self.families.len() as u32).map(|j| self.family_length(j)).sum()
    }

    pub fn tree_count(&self) -> usize {
        self.families.iter().map(Vec::len).sum()
    }

    /// `(level, index within family, tree)` in level order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, usize, &RootedTree)> {
        self.families
            .iter()
            .enumerate()
            .flat_map(|(i, f)| f.iter().enumerate().map(move |(j, t)| (i as u32, j, t)))
    }

    /// Checks both assignability conditions and vertex coverage.
    pub fn check(&self, fleet: &Fleet, metric: &Metric) -> AssignabilityReport {
        let mut worst_size_ratio: f64 = 0.0;
        let mut size_ok = true;
        for (i, _, t) in self.iter() {
            let cap = self.alpha * pow2(i as i32) * self.m;
            worst_size_ratio = worst_size_ratio.max(t.length / cap);
            size_ok &= le_rel(t.length, cap, 1e-6);
        }
        let top = self.families.len().max(1) as u32;
        let suffix: Vec<SuffixCheck> = (0..top)
            .map(|i| {
                let lhs = self.suffix_length(i);
                let rhs = self.beta * self.m * fleet.suffix_capacity(i);
                SuffixCheck { level: i, lhs, rhs, holds: le_rel(lhs, rhs, 1e-6) }
            })
            .collect();
        let mut covered = vec![false; metric.n()];
        covered[DEPOT] = true;
        for (_, _, t) in self.iter() {
            for v in t.vertices() {
                covered[v] = true;
            }
        }
        let uncovered: Vec<Vertex> = (0..metric.n()).filter(|&v| !covered[v]).collect();
        AssignabilityReport { worst_size_ratio, size_ok, suffix, uncovered }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuffixCheck {
    pub level: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssignabilityReport {
    /// Largest `d(T) / (α·2^i·M)`.
    pub worst_size_ratio: f64,
    pub size_ok: bool,
    pub suffix: Vec<SuffixCheck>,
    pub uncovered: Vec<Vertex>,
}

impl AssignabilityReport {
    pub fn holds(&self) -> bool {
        self.size_ok && self.suffix.iter().all(|s| s.holds) && self.uncovered.is_empty()
    }
}

/// Output of the full decomposition with its intermediate structure.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub collection: AssignableCollection,
    pub partition: SubtreePartition,
    pub pieces: Vec<PieceReport>,
}

/// Runs all decomposition steps for guess `m`.
pub fn decompose(
    tree: &LevelPrimTree,
    metric: &Metric,
    m: f64,
) -> Result<Decomposition, DecomposeError> {
    let mut partition = split_into_level_subtrees(tree, metric)?;
    mark_subtrees(&mut partition.subtrees, m);
    attach_dangling(&mut partition, m)?;
    let mut families = vec![Vec::new(); tree.top_level() as usize + 1];
    let mut pieces = Vec::new();
    for id in 0..partition.subtrees.len() {
        if !partition.subtrees[id].marked {
            continue;
        }
        let (trees, report) = split_and_root(&partition, id, metric, m);
        families[partition.subtrees[id].level as usize].extend(trees);
        pieces.push(report);
    }
    let collection = AssignableCollection { m, alpha: ALPHA, beta: BETA, families };
    Ok(Decomposition { collection, partition, pieces })
}

/// Numeric checks of the per-piece and per-subtree bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecompositionCheck {
    /// Largest `d(T) / (3·2^{i+1}M)` over all output trees.
    pub worst_piece_ratio: f64,
    /// Largest `Σ d(T) / (5·[d(τ) + d(dangle(τ))])` over marked subtrees.
    pub worst_charge_ratio: f64,
    /// Largest `Σ_{j≥i} d(T_j) / (5·Σ_{j≥i} d(H_j))` over levels.
    pub worst_suffix_charge_ratio: f64,
    /// Levels where the pieces did not reproduce the input edges exactly.
    pub edge_conservation_failures: Vec<usize>,
    pub holds: bool,
}

pub fn check_decomposition(
    d: &Decomposition,
    tree: &LevelPrimTree,
    metric: &Metric,
) -> DecompositionCheck {
    let m = d.collection.m;
    let mut worst_piece: f64 = 0.0;
    let mut ok = true;
    for (i, _, t) in d.collection.iter() {
        let cap = 3.0 * pow2(i as i32 + 1) * m;
        worst_piece = worst_piece.max(t.length / cap);
        ok &= le_rel(t.length, cap, 1e-6);
    }
    let mut worst_charge: f64 = 0.0;
    let mut conservation = Vec::new();
    for p in &d.pieces {
        let base = p.subtree_length + p.dangle_length;
        let total: f64 = p.tree_lengths.iter().sum();
        let bound = CHARGE * base;
        if base > 0.0 {
            worst_charge = worst_charge.max(total / bound);
        }
        ok &= le_rel(total, bound, 1e-6);
        let pieces: f64 = p.piece_lengths.iter().sum();
        if !le_rel(pieces, base, 1e-9) || !le_rel(base, pieces, 1e-9) {
            conservation.push(p.subtree);
        }
    }
    // every Level-Prim edge lands in exactly one piece, and rooting adds one
    // depot edge exactly when the piece lacks the depot
    let mut expected: Vec<Edge> = tree.union().edges.iter().map(|&(a, b)| norm(a, b)).collect();
    let mut got: Vec<Edge> = Vec::new();
    for p in &d.pieces {
        for (piece, &len) in p.pieces.iter().zip(&p.tree_lengths) {
            got.extend(piece.iter().map(|&(a, b)| norm(a, b)));
            let has_depot = piece.iter().any(|&(a, b)| a == DEPOT || b == DEPOT);
            let raw: f64 = piece.iter().map(|&(a, b)| metric.d(a, b)).sum();
            if has_depot && len != raw {
                conservation.push(p.subtree);
            }
        }
    }
    let rooted_edges: usize = d.collection.iter().map(|(_, _, t)| t.edges.len()).sum();
    let raw_edges: usize = d.pieces.iter().flat_map(|p| &p.pieces).map(Vec::len).sum();
    let added = d
        .pieces
        .iter()
        .flat_map(|p| &p.pieces)
        .filter(|piece| !piece.iter().any(|&(a, b)| a == DEPOT || b == DEPOT))
        .count();
    if rooted_edges != raw_edges + added {
        conservation.push(usize::MAX);
    }
    expected.sort_unstable();
    got.sort_unstable();
    if expected != got {
        conservation.push(usize::MAX);
    }
    let mut worst_suffix: f64 = 0.0;
    for i in 0..=tree.top_level() {
        let lhs = d.collection.suffix_length(i);
        let rhs = CHARGE * tree.suffix_length(i);
        if rhs > 0.0 {
            worst_suffix = worst_suffix.max(lhs / rhs);
        }
        ok &= le_rel(lhs, rhs, 1e-6);
    }
    ok &= conservation.is_empty();
    DecompositionCheck {
        worst_piece_ratio: worst_piece,
        worst_charge_ratio: worst_charge,
        worst_suffix_charge_ratio: worst_suffix,
        edge_conservation_failures: conservation,
        holds: ok,
    }
}

fn norm(a: Vertex, b: Vertex) -> Edge {
    (a.min(b), a.max(b))
}
