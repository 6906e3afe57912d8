//! Capacitated routing through demand copies.
//!
//! Every unit of demand at `v` becomes a copy `v_p` hanging from `v` by an
//! edge of length `d(r,v)/Q`. The uncapacitated solver runs on the shortest
//! path metric over the depot and the copies; each vehicle's tour is then
//! projected back to original vertices and cut into capacity-feasible trips.

use serde::{Deserialize, Serialize};

use crate::error::{HvrpError, SolveError};
use crate::graph::mst;
use crate::instance::{HvrpInstance, Metric, Vertex, DEPOT, MAX_VERTICES};
use crate::pipeline::{solve_htsp, HtspSolution};

/// Shortest-path metric over the depot (index 0) and demand copies.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMetric {
    /// `copies[c]` is the original vertex of augmented vertex `c + 1`.
    pub copies: Vec<Vertex>,
    pub metric: Metric,
}

impl AugmentedMetric {
    /// Original vertex behind an augmented vertex.
    pub fn original(&self, a: Vertex) -> Vertex {
        if a == DEPOT {
            DEPOT
        } else {
            self.copies[a - 1]
        }
    }
}

/// Closed-form distances of the copy graph:
/// `ℓ(r, v_p) = d(r,v)(1 + 1/Q)`, `ℓ(v_p, v_q) = 2d(r,v)/Q` and
/// `ℓ(u_p, v_q) = d(r,u)/Q + d(u,v) + d(r,v)/Q`.
pub fn build_augmented(inst: &HvrpInstance) -> Result<AugmentedMetric, HvrpError> {
    let total = inst.total_demand();
    let max = MAX_VERTICES as u64 - 1;
    if total > max {
        return Err(HvrpError::TooManyCopies { total, max });
    }
    let d = &inst.metric;
    let q = inst.capacity() as f64;
    let copies: Vec<Vertex> = d
        .vertices()
        .flat_map(|v| std::iter::repeat_n(v, inst.demand(v) as usize))
        .collect();
    let n = copies.len() + 1;
    let hang: Vec<f64> = copies.iter().map(|&v| d.radius(v) / q).collect();
    let mut dist = vec![0.0; n * n];
    for a in 1..n {
        let v = copies[a - 1];
        let ra = d.radius(v) + hang[a - 1];
        dist[a] = ra;
        dist[a * n] = ra;
        for b in a + 1..n {
            let u = copies[b - 1];
            let ell = if u == v { 2.0 * d.radius(v) / q } else { hang[a - 1] + d.d(v, u) + hang[b - 1] };
            dist[a * n + b] = ell;
            dist[b * n + a] = ell;
        }
    }
    Ok(AugmentedMetric { copies, metric: Metric::from_trusted(n, dist) })
}

/// One depot-to-depot trip with its deliveries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trip {
    pub route: Vec<Vertex>,
    /// `(vertex, amount)` in visiting order.
    pub deliveries: Vec<(Vertex, u64)>,
    pub length: f64,
}

impl Trip {
    pub fn load(&self) -> u64 {
        self.deliveries.iter().map(|&(_, a)| a).sum()
    }
}

/// Split-delivery iterated tour partitioning.
///
/// Demand units are laid out in tour order. Every offset `t ∈ 1..=min(Q, N)`
/// gives a partition with a first trip of `t` units and full trips of `Q`
/// units after it; the shortest partition is returned (ties to the smaller
/// offset). Averaging over offsets bounds the result by
/// `d(tour) + (2/Q)·Σ_v q_v·d(r,v)`.
pub fn tour_partition(tour: &[Vertex], demands: &[u64], capacity: u64, metric: &Metric) -> Vec<Trip> {
    // (vertex, first unit index) for vertices with positive demand, in tour order
    let mut stops: Vec<Vertex> = Vec::new();
    let mut seen = vec![false; metric.n()];
    for &v in tour {
        if v != DEPOT && demands[v] > 0 && !seen[v] {
            seen[v] = true;
            stops.push(v);
        }
    }
    if stops.is_empty() {
        return Vec::new();
    }
    let mut start = Vec::with_capacity(stops.len() + 1);
    let mut acc = 0u64;
    for &v in &stops {
        start.push(acc);
        acc += demands[v];
    }
    start.push(acc);
    let units = acc;
    // path[i] = length of stops[0..=i] walked in order
    let mut path = vec![0.0; stops.len()];
    for i in 1..stops.len() {
        path[i] = path[i - 1] + metric.d(stops[i - 1], stops[i]);
    }
    let stop_of = |unit: u64| start.partition_point(|&s| s <= unit) - 1;
    let cuts = |t: u64| {
        let mut bounds = vec![0u64];
        let mut c = t;
        while c < units {
            bounds.push(c);
            c += capacity;
        }
        bounds.push(units);
        bounds
    };
    let cost = |bounds: &[u64]| -> f64 {
        bounds
            .windows(2)
            .map(|w| {
                let (a, b) = (stop_of(w[0]), stop_of(w[1] - 1));
                metric.radius(stops[a]) + path[b] - path[a] + metric.radius(stops[b])
            })
            .sum()
    };
    let mut best: Option<(f64, Vec<u64>)> = None;
    for t in 1..=capacity.min(units) {
        let bounds = cuts(t);
        let c = cost(&bounds);
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, bounds));
        }
    }
    let (_, bounds) = best.expect("at least one offset");
    bounds
        .windows(2)
        .map(|w| {
            let (a, b) = (stop_of(w[0]), stop_of(w[1] - 1));
            let mut route = vec![DEPOT];
            let mut deliveries = Vec::new();
            for i in a..=b {
                let lo = start[i].max(w[0]);
                let hi = start[i + 1].min(w[1]);
                route.push(stops[i]);
                deliveries.push((stops[i], hi - lo));
            }
            route.push(DEPOT);
            let length = metric.walk_length(&route);
            Trip { route, deliveries, length }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LowerBounds {
    /// MST over the depot and every served vertex.
    pub connectivity: f64,
    /// `Σ_v c(v)·2·d(r,v)/Q`.
    pub radial: f64,
}

impl LowerBounds {
    pub fn best(&self) -> f64 {
        self.connectivity.max(self.radial)
    }
}

/// Lower bounds on the total length needed to deliver `served[v]` units to
/// every vertex `v`.
pub fn lower_bounds(inst: &HvrpInstance, served: &[u64]) -> LowerBounds {
    let d = &inst.metric;
    let q = inst.capacity() as f64;
    let mut terminals = vec![DEPOT];
    terminals.extend(d.vertices().filter(|&v| v != DEPOT && served[v] > 0));
    let connectivity = mst(d, &terminals).length;
    let radial = d.vertices().map(|v| served[v] as f64 * 2.0 * d.radius(v) / q).sum();
    LowerBounds { connectivity, radial }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VehicleRoute {
    pub trips: Vec<Trip>,
    pub length: f64,
    /// Length of the vehicle's tour in the copy metric.
    pub copy_tour_length: f64,
    /// `served[v]`: units this vehicle delivers to `v`.
    #[serde(skip)]
    pub served: Vec<u64>,
}

impl VehicleRoute {
    /// Trip-set length over copy-tour length; 1 for an idle vehicle.
    pub fn conversion_ratio(&self) -> f64 {
        if self.copy_tour_length > 0.0 {
            self.length / self.copy_tour_length
        } else if self.length > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }

    /// Trips chained into one closed walk.
    pub fn walk(&self) -> Vec<Vertex> {
        let mut walk = vec![DEPOT];
        for t in &self.trips {
            walk.extend_from_slice(&t.route[1..]);
        }
        walk
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HvrpSolution {
    /// Per vehicle, all trips chained through the depot.
    pub tours: Vec<Vec<Vertex>>,
    pub vehicles: Vec<VehicleRoute>,
    /// Longest vehicle time under raw speeds.
    pub makespan: f64,
    pub accepted_m: f64,
    pub htsp: HtspSolution,
}

pub fn solve_hvrp(inst: &HvrpInstance) -> Result<HvrpSolution, SolveError> {
    let aug = build_augmented(inst)?;
    let htsp = solve_htsp(&aug.metric, &inst.fleet)?;
    let n = inst.metric.n();
    let vehicles: Vec<VehicleRoute> = htsp
        .tours
        .iter()
        .map(|copy_tour| {
            let mut served = vec![0u64; n];
            let mut order = vec![DEPOT];
            for &a in copy_tour {
                let v = aug.original(a);
                if v != DEPOT {
                    if served[v] == 0 {
                        order.push(v);
                    }
                    served[v] += 1;
                }
            }
            order.push(DEPOT);
            let trips = tour_partition(&order, &served, inst.capacity(), &inst.metric);
            VehicleRoute {
                length: trips.iter().map(|t| t.length).sum(),
                trips,
                copy_tour_length: aug.metric.walk_length(copy_tour),
                served,
            }
        })
        .collect();
    let makespan = vehicles
        .iter()
        .enumerate()
        .map(|(u, r)| r.length / inst.fleet.raw_speed(u))
        .fold(0.0, f64::max);
    Ok(HvrpSolution {
        tours: vehicles.iter().map(VehicleRoute::walk).collect(),
        vehicles,
        makespan,
        accepted_m: htsp.accepted_m,
        htsp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Fleet;

    fn line_instance(xs: &[f64], speeds: &[f64], q: u64, demands: Vec<u64>) -> HvrpInstance {
        let pts: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.0]).collect();
        HvrpInstance::new(
            Metric::from_points(&pts).unwrap(),
            Fleet::round(speeds).unwrap(),
            q,
            demands,
        )
        .unwrap()
    }

    #[test]
    fn no_demand_means_depot_only() {
        let inst = line_instance(&[0.0, 3.0], &[1.0], 2, vec![0, 0]);
        let aug = build_augmented(&inst).unwrap();
        assert_eq!(aug.metric.n(), 1);
        let s = solve_hvrp(&inst).unwrap();
        assert_eq!(s.makespan, 0.0);
        assert_eq!(s.tours, vec![vec![0]]);
    }

    #[test]
    fn copy_formulas() {
        let inst = line_instance(&[0.0, 4.0], &[1.0], 2, vec![0, 2]);
        let aug = build_augmented(&inst).unwrap();
        assert_eq!(aug.metric.d(1, 2), 4.0);
        assert_eq!(aug.metric.d(0, 1), 6.0);
    }

    #[test]
    fn full_load_single_trip() {
        let inst = line_instance(&[0.0, 5.0], &[2.0], 3, vec![0, 3]);
        let s = solve_hvrp(&inst).unwrap();
        assert_eq!(s.vehicles[0].trips.len(), 1);
        assert_eq!(s.vehicles[0].trips[0].route, vec![0, 1, 0]);
        assert_eq!(s.vehicles[0].trips[0].deliveries, vec![(1, 3)]);
        assert_eq!(s.makespan, 5.0);
    }

    #[test]
    fn partition_within_capacity_is_one_trip() {
        let m = Metric::from_points(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let trips = tour_partition(&[0, 1, 2, 0], &[0, 1, 2], 3, &m);
        assert_eq!(trips.len(), 1);
        assert_eq!(trips[0].route, vec![0, 1, 2, 0]);
    }

    #[test]
    fn partition_two_full_vertices() {
        let m = Metric::from_points(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).unwrap();
        let trips = tour_partition(&[0, 1, 2, 0], &[0, 2, 2], 2, &m);
        assert_eq!(trips.len(), 2);
        assert!(trips.iter().all(|t| t.load() == 2));
    }

    #[test]
    fn split_delivery_conserves_demand() {
        let m = Metric::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let demands = [0, 3, 4, 2];
        let trips = tour_partition(&[0, 1, 2, 3, 0], &demands, 4, &m);
        let mut got = [0u64; 4];
        for t in &trips {
            assert!(t.load() <= 4);
            for &(v, a) in &t.deliveries {
                got[v] += a;
            }
        }
        assert_eq!(got, demands);
    }

    #[test]
    fn radial_bound_for_one_full_vertex() {
        let inst = line_instance(&[0.0, 5.0], &[1.0], 3, vec![0, 3]);
        let lb = lower_bounds(&inst, &[0, 3]);
        assert_eq!(lb.radial, 10.0);
        assert_eq!(lb.connectivity, 5.0);
        assert_eq!(lower_bounds(&inst, &[0, 0]).best(), 0.0);
    }
}
