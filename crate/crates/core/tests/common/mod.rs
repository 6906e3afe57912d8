//! Reference implementations shared by the integration targets.
#![allow(dead_code)]

use std::collections::VecDeque;

use hetroute::assign::eligible;
use hetroute::decompose::AssignableCollection;
use hetroute::graph::mst;
use hetroute::instance::{Fleet, Metric, Vertex};

pub fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn kruskal(metric: &Metric) -> f64 {
    let n = metric.n();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((metric.d(u, v), u, v));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut total = 0.0;
    for (w, u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            total += w;
        }
    }
    total
}

/// Edmonds-Karp on a dense capacity matrix.
pub fn max_flow(cap: &mut [Vec<f64>], s: usize, t: usize) -> f64 {
    let n = cap.len();
    let mut flow = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 1e-12 {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        flow += push;
    }
}

pub fn flow_feasible(c: &AssignableCollection, fleet: &Fleet) -> bool {
    let trees: Vec<(u32, f64)> = c.iter().map(|(i, _, t)| (i, t.length)).collect();
    let (nt, k) = (trees.len(), fleet.len());
    let (s, t) = (nt + k, nt + k + 1);
    let mut cap = vec![vec![0.0; nt + k + 2]; nt + k + 2];
    for (i, &(level, len)) in trees.iter().enumerate() {
        cap[s][i] = len;
        for u in 0..k {
            if eligible(level, fleet.class(u)) {
                cap[i][nt + u] = f64::INFINITY;
            }
        }
    }
    for u in 0..k {
        cap[nt + u][t] = c.beta * fleet.rounded_speed(u) * c.m;
    }
    let total: f64 = trees.iter().map(|t| t.1).sum();
    max_flow(&mut cap, s, t) >= total * (1.0 - 1e-9)
}

/// Exhaustive search over assignments and visiting orders.
pub fn brute_force(metric: &Metric, speeds: &[f64]) -> f64 {
    fn permutations(items: &mut Vec<Vertex>, k: usize, out: &mut dyn FnMut(&[Vertex])) {
        if k == items.len() {
            out(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let tsp = |set: &[Vertex]| {
        if set.is_empty() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        let mut items = set.to_vec();
        permutations(&mut items, 0, &mut |p| {
            let mut len = metric.d(0, p[0]);
            for w in p.windows(2) {
                len += metric.d(w[0], w[1]);
            }
            len += metric.d(p[p.len() - 1], 0);
            best = best.min(len);
        });
        best
    };
    let n = metric.n();
    let k = speeds.len();
    let mut best = f64::INFINITY;
    let total = k.pow((n - 1) as u32);
    for code in 0..total {
        let mut sets = vec![Vec::new(); k];
        let mut c = code;
        for v in 1..n {
            sets[c % k].push(v);
            c /= k;
        }
        let span = sets.iter().zip(speeds).map(|(s, &sp)| tsp(s) / sp).fold(0.0, f64::max);
        best = best.min(span);
    }
    best
}

/// Splits one tour into `k` consecutive depot tours of roughly equal length.
pub fn tour_splitting(metric: &Metric, k: usize) -> f64 {
    let all: Vec<Vertex> = metric.vertices().collect();
    let tour = hetroute::graph::euler_shortcut(&mst(metric, &all));
    let total = metric.walk_length(&tour);
    let far = metric.vertices().map(|v| metric.radius(v)).fold(0.0, f64::max);
    let inner = &tour[1..tour.len() - 1];
    let mut prefix = vec![0.0; inner.len()];
    for i in 1..inner.len() {
        prefix[i] = prefix[i - 1] + metric.d(inner[i - 1], inner[i]);
    }
    let mut cuts = vec![0usize];
    for j in 1..k {
        let target = j as f64 / k as f64 * (total - 2.0 * far);
        let idx = prefix.partition_point(|&p| p <= target);
        cuts.push(idx.max(*cuts.last().unwrap()));
    }
    cuts.push(inner.len());
    cuts.windows(2)
        .map(|w| {
            if w[0] == w[1] {
                return 0.0;
            }
            let seg = &inner[w[0]..w[1]];
            let mut walk = vec![0];
            walk.extend_from_slice(seg);
            walk.push(0);
            metric.walk_length(&walk)
        })
        .fold(0.0, f64::max)
}

/// Shortest paths on the explicit graph: originals, plus one leaf per copy
/// hanging off its vertex at `d(r, v) / q`. Rows are in augmented order.
pub fn explicit_copy_metric(metric: &Metric, copies: &[Vertex], q: u64) -> Vec<Vec<f64>> {
    let n = metric.n();
    let size = n + copies.len();
    let mut g = vec![vec![f64::INFINITY; size]; size];
    for u in 0..n {
        for v in 0..n {
            g[u][v] = metric.d(u, v);
        }
    }
    for (c, &v) in copies.iter().enumerate() {
        let w = metric.radius(v) / q as f64;
        g[n + c][v] = w;
        g[v][n + c] = w;
        g[n + c][n + c] = 0.0;
    }
    hetroute::generate::floyd_warshall(&mut g);
    let index = |a: usize| if a == 0 { 0 } else { n + a - 1 };
    let m = copies.len() + 1;
    (0..m).map(|a| (0..m).map(|b| g[index(a)][index(b)]).collect()).collect()
}
