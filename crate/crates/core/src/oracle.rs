//! Exact optimum for tiny instances and independent solution checking.

use rayon::prelude::*;
use serde::Serialize;

use crate::cvrp::Trip;
use crate::error::OracleError;
use crate::instance::{Fleet, HvrpInstance, Metric, Vertex, DEPOT};

pub const ORACLE_MAX_N: usize = 12;
pub const ORACLE_MAX_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleResult {
    pub opt_makespan: f64,
    /// Vehicle serving each vertex; `None` for the depot.
    pub assignment: Vec<Option<usize>>,
    pub tours: Vec<Vec<Vertex>>,
}

/// Held-Karp table over subsets of the non-depot vertices `1..n`; bit `i`
/// stands for vertex `i + 1`.
struct HeldKarp {
    m: usize,
    /// `end[mask * m + j]`: shortest depot path covering `mask`, ending at `j`.
    end: Vec<f64>,
    prev: Vec<u8>,
    /// Closed tour length per mask.
    tour: Vec<f64>,
}

impl HeldKarp {
    fn new(metric: &Metric) -> Self {
        let m = metric.n() - 1;
        let full = 1usize << m;
        let mut end = vec![f64::INFINITY; full * m.max(1)];
        let mut prev = vec![u8::MAX; full * m.max(1)];
        for j in 0..m {
            end[(1 << j) * m + j] = metric.d(DEPOT, j + 1);
        }
        for mask in 1..full {
            for j in 0..m {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let here = end[mask * m + j];
                if !here.is_finite() {
                    continue;
                }
                for l in 0..m {
                    if mask & (1 << l) != 0 {
                        continue;
                    }
                    let next = mask | (1 << l);
                    let cand = here + metric.d(j + 1, l + 1);
                    if cand < end[next * m + l] {
                        end[next * m + l] = cand;
                        prev[next * m + l] = j as u8;
                    }
                }
            }
        }
        let mut tour = vec![0.0; full];
        for (mask, t) in tour.iter_mut().enumerate().skip(1) {
            *t = (0..m)
                .filter(|&j| mask & (1 << j) != 0)
                .map(|j| end[mask * m + j] + metric.d(j + 1, DEPOT))
                .fold(f64::INFINITY, f64::min);
        }
        Self { m, end, prev, tour }
    }

    fn walk(&self, metric: &Metric, mask: usize) -> Vec<Vertex> {
        if mask == 0 {
            return vec![DEPOT];
        }
        let m = self.m;
        let mut last = (0..m)
            .filter(|&j| mask & (1 << j) != 0)
            .min_by(|&a, &b| {
                (self.end[mask * m + a] + metric.d(a + 1, DEPOT))
                    .total_cmp(&(self.end[mask * m + b] + metric.d(b + 1, DEPOT)))
            })
            .expect("nonempty mask");
        let mut rest = mask;
        let mut rev = Vec::new();
        loop {
            rev.push(last + 1);
            let p = self.prev[rest * m + last];
            rest &= !(1 << last);
            if p == u8::MAX {
                break;
            }
            last = p as usize;
        }
        let mut walk = vec![DEPOT];
        walk.extend(rev.into_iter().rev());
        walk.push(DEPOT);
        // orient so the smaller endpoint neighbour comes first
        if walk[1] > walk[walk.len() - 2] {
            walk.reverse();
        }
        walk
    }
}

/// Exact minimum makespan over all assignments of vertices to vehicles, with
/// optimal per-vehicle tours and raw speeds.
pub fn exact_htsp(metric: &Metric, fleet: &Fleet) -> Result<OracleResult, OracleError> {
    let (n, k) = (metric.n(), fleet.len());
    if k == 0 {
        return Err(OracleError::EmptyFleet);
    }
    if n > ORACLE_MAX_N || k > ORACLE_MAX_K {
        return Err(OracleError::InstanceTooLarge {
            n,
            k,
            max_n: ORACLE_MAX_N,
            max_k: ORACLE_MAX_K,
        });
    }
    let hk = HeldKarp::new(metric);
    let full = (1usize << (n - 1)) - 1;
    let speed = fleet.raw_speeds();
    let time = |mask: usize, u: usize| hk.tour[mask] / speed[u];

    // (makespan, masks) with ties to the lexicographically smallest masks
    type Best = (f64, [usize; ORACLE_MAX_K]);
    let better = |a: Best, b: Best| -> Best {
        match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        }
    };
    let none: Best = (f64::INFINITY, [usize::MAX; ORACLE_MAX_K]);
    let best = (0..=full)
        .into_par_iter()
        .map(|m0| {
            let t0 = time(m0, 0);
            let rest = full & !m0;
            match k {
                1 => {
                    if rest == 0 {
                        (t0, [m0, 0, 0])
                    } else {
                        none
                    }
                }
                2 => (t0.max(time(rest, 1)), [m0, rest, 0]),
                _ => {
                    let mut acc = none;
                    let mut m1 = rest;
                    loop {
                        let m2 = rest & !m1;
                        let cand = (t0.max(time(m1, 1)).max(time(m2, 2)), [m0, m1, m2]);
                        acc = better(acc, cand);
                        if m1 == 0 {
                            break;
                        }
                        m1 = (m1 - 1) & rest;
                    }
                    acc
                }
            }
        })
        .reduce(|| none, better);

    let (opt_makespan, masks) = best;
    let mut assignment = vec![None; n];
    let tours = (0..k)
        .map(|u| {
            for (j, slot) in assignment.iter_mut().enumerate().skip(1) {
                if masks[u] & (1 << (j - 1)) != 0 {
                    *slot = Some(u);
                }
            }
            hk.walk(metric, masks[u])
        })
        .collect();
    Ok(OracleResult { opt_makespan, assignment, tours })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Violation {
    TourCount { expected: usize, found: usize },
    MalformedTour { vehicle: usize },
    UnknownVertex { vehicle: usize, vertex: Vertex },
    UncoveredVertex { vertex: Vertex },
    DuplicateVertex { vertex: Vertex },
    MakespanMismatch { claimed: f64, recomputed: f64 },
    MalformedTrip { vehicle: usize, trip: usize },
    DeliveryOffRoute { vehicle: usize, trip: usize, vertex: Vertex },
    CapacityExceeded { vehicle: usize, trip: usize, load: u64, capacity: u64 },
    DemandMismatch { vertex: Vertex, delivered: u64, demand: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub recomputed_makespan: f64,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-300)
}

fn check_walk(walk: &[Vertex], vehicle: usize, n: usize, out: &mut Vec<Violation>) -> bool {
    if walk.first() != Some(&DEPOT) || walk.last() != Some(&DEPOT) {
        out.push(Violation::MalformedTour { vehicle });
        return false;
    }
    if let Some(&v) = walk.iter().find(|&&v| v >= n) {
        out.push(Violation::UnknownVertex { vehicle, vertex: v });
        return false;
    }
    true
}

/// Checks depot endpoints, exactly-once coverage and the claimed makespan.
pub fn verify_htsp(
    metric: &Metric,
    fleet: &Fleet,
    tours: &[Vec<Vertex>],
    makespan: f64,
) -> VerifyReport {
    let n = metric.n();
    let mut violations = Vec::new();
    if tours.len() != fleet.len() {
        violations.push(Violation::TourCount { expected: fleet.len(), found: tours.len() });
    }
    let mut visits = vec![0usize; n];
    let mut recomputed: f64 = 0.0;
    for (u, tour) in tours.iter().enumerate() {
        if !check_walk(tour, u, n, &mut violations) {
            continue;
        }
        for &v in tour {
            visits[v] += 1;
        }
        if u < fleet.len() {
            recomputed = recomputed.max(metric.walk_length(tour) / fleet.raw_speed(u));
        }
    }
    for v in 1..n {
        match visits[v] {
            0 => violations.push(Violation::UncoveredVertex { vertex: v }),
            1 => {}
            _ => violations.push(Violation::DuplicateVertex { vertex: v }),
        }
    }
    if !close(makespan, recomputed) {
        violations.push(Violation::MakespanMismatch { claimed: makespan, recomputed });
    }
    VerifyReport { recomputed_makespan: recomputed, violations }
}

/// Checks trip shape, capacity, exact demand conservation and the claimed
/// makespan; trip lengths are recomputed from the routes.
pub fn verify_hvrp(inst: &HvrpInstance, vehicles: &[Vec<Trip>], makespan: f64) -> VerifyReport {
    let metric = &inst.metric;
    let n = metric.n();
    let q = inst.capacity();
    let mut violations = Vec::new();
    if vehicles.len() != inst.fleet.len() {
        violations
            .push(Violation::TourCount { expected: inst.fleet.len(), found: vehicles.len() });
    }
    let mut delivered = vec![0u64; n];
    let mut recomputed: f64 = 0.0;
    for (u, trips) in vehicles.iter().enumerate() {
        let mut length = 0.0;
        for (t, trip) in trips.iter().enumerate() {
            if trip.route.len() < 2 || !check_walk(&trip.route, u, n, &mut violations) {
                violations.push(Violation::MalformedTrip { vehicle: u, trip: t });
                continue;
            }
            length += metric.walk_length(&trip.route);
            let mut load = 0u64;
            for &(v, a) in &trip.deliveries {
                if v >= n || !trip.route.contains(&v) {
                    violations.push(Violation::DeliveryOffRoute { vehicle: u, trip: t, vertex: v });
                    continue;
                }
                delivered[v] += a;
                load += a;
            }
            if load > q {
                violations.push(Violation::CapacityExceeded { vehicle: u, trip: t, load, capacity: q });
            }
        }
        if u < inst.fleet.len() {
            recomputed = recomputed.max(length / inst.fleet.raw_speed(u));
        }
    }
    for v in 0..n {
        if delivered[v] != inst.demand(v) {
            violations.push(Violation::DemandMismatch {
                vertex: v,
                delivered: delivered[v],
                demand: inst.demand(v),
            });
        }
    }
    if !close(makespan, recomputed) {
        violations.push(Violation::MakespanMismatch { claimed: makespan, recomputed });
    }
    VerifyReport { recomputed_makespan: recomputed, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Metric {
        let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.0]).collect();
        Metric::from_points(&pts).unwrap()
    }

    #[test]
    fn depot_only() {
        let m = Metric::validate(&[vec![0.0]]).unwrap();
        let r = exact_htsp(&m, &Fleet::round(&[1.0]).unwrap()).unwrap();
        assert_eq!(r.opt_makespan, 0.0);
        assert_eq!(r.tours, vec![vec![0]]);
    }

    #[test]
    fn single_vertex() {
        let m = line(&[0.0, 3.0]);
        let r = exact_htsp(&m, &Fleet::round(&[1.5]).unwrap()).unwrap();
        assert_eq!(r.opt_makespan, 4.0);
    }

    #[test]
    fn one_dimensional_instance() {
        // speed 4 takes c (16/4 = 4); speed 1 takes a and b (6/1 = 6), or the
        // fast vehicle does everything in 16/4 = 4
        let m = line(&[0.0, 2.0, 3.0, 8.0]);
        let r = exact_htsp(&m, &Fleet::round(&[1.0, 4.0]).unwrap()).unwrap();
        assert_eq!(r.opt_makespan, 4.0);
        assert_eq!(r.assignment, vec![None, Some(1), Some(1), Some(1)]);
        assert_eq!(r.tours[1], vec![0, 1, 2, 3, 0]);
    }

    #[test]
    fn limits() {
        let m = line(&(0..13).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            exact_htsp(&m, &Fleet::round(&[1.0]).unwrap()),
            Err(OracleError::InstanceTooLarge { n: 13, .. })
        ));
        let m = line(&[0.0, 1.0]);
        assert_eq!(exact_htsp(&m, &Fleet::round(&[]).unwrap()), Err(OracleError::EmptyFleet));
    }

    #[test]
    fn verify_flags_problems() {
        let m = line(&[0.0, 1.0, 2.0]);
        let f = Fleet::round(&[1.0]).unwrap();
        assert!(verify_htsp(&m, &f, &[vec![0, 1, 2, 0]], 4.0).passed());
        let r = verify_htsp(&m, &f, &[vec![0, 1, 0]], 2.0);
        assert_eq!(r.violations, vec![Violation::UncoveredVertex { vertex: 2 }]);
        let r = verify_htsp(&m, &f, &[vec![0, 1, 2, 0]], 3.0);
        assert_eq!(
            r.violations,
            vec![Violation::MakespanMismatch { claimed: 3.0, recomputed: 4.0 }]
        );
    }
}
