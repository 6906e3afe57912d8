//! Hand-checked values on small fixed instances.

use hetroute::cvrp::{build_augmented, solve_hvrp, tour_partition};
use hetroute::decompose::{decompose, split_into_level_subtrees};
use hetroute::error::MetricError;
use hetroute::generate::figure1_rows;
use hetroute::instance::{Fleet, HvrpInstance, Leveling, Metric};
use hetroute::oracle::{exact_htsp, verify_htsp, verify_hvrp};
use hetroute::pipeline::{doubling_search, initial_guess, solve_htsp, MAKESPAN_FACTOR};
use hetroute::{check_vehicle_condition, compute_makespan, LevelPrimTree};

fn line(xs: &[f64]) -> Metric {
    Metric::from_points(&xs.iter().map(|&x| [x, 0.0]).collect::<Vec<_>>()).unwrap()
}

/// Depot at 0 and three customers at 2, 3 and 8 on a line; speeds 1 and 4.
fn i1() -> (Metric, Fleet) {
    (line(&[0.0, 2.0, 3.0, 8.0]), Fleet::round(&[1.0, 4.0]).unwrap())
}

#[test]
fn metric_validation() {
    assert_eq!(Metric::validate(&[vec![0.0]]).unwrap().n(), 1);
    assert_eq!(Metric::validate(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap().n(), 2);
    let bad = [vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
    assert_eq!(Metric::validate(&bad), Err(MetricError::TriangleViolation { u: 0, v: 1, w: 2 }));
}

#[test]
fn fleet_rounding() {
    let f = Fleet::round(&[3.0, 5.0, 8.0]).unwrap();
    assert_eq!(f.rounded_speeds(), vec![2.0, 4.0, 8.0]);
    assert_eq!(f.mu().into_iter().collect::<Vec<_>>(), vec![(1, 1), (2, 1), (3, 1)]);
    let f = Fleet::round(&[1.0, 4.0]).unwrap();
    assert_eq!(f.mu().into_iter().collect::<Vec<_>>(), vec![(0, 1), (2, 1)]);
    assert_eq!(Fleet::round(&[1.5]).unwrap().rounded_speeds(), vec![1.0]);
}

#[test]
fn leveling_intervals() {
    let m = line(&[0.0, 0.5, 1.5, 3.9, 2.0]);
    let lv = Leveling::compute(&m, 1.0);
    assert_eq!(lv.levels(), &[0, 0, 1, 2, 1]);
    assert_eq!(lv.edge_level(1, 3), 2);
}

#[test]
fn i1_search_and_subtrees() {
    let (m, f) = i1();
    assert_eq!(initial_guess(&m, &f), 4.0);
    assert!(check_vehicle_condition(&m, &f, 4.0));
    let s = doubling_search(&m, &f).unwrap();
    assert_eq!(s.accepted_m, 4.0);

    let tree = LevelPrimTree::build(&m, &Leveling::compute(&m, 4.0));
    let parts = split_into_level_subtrees(&tree, &m).unwrap();
    let mut edges: Vec<(u32, Vec<(usize, usize)>)> = parts
        .subtrees
        .iter()
        .map(|s| {
            let mut e: Vec<_> = s.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            e.sort_unstable();
            (s.level, e)
        })
        .collect();
    edges.sort();
    assert_eq!(edges, vec![(0, vec![(0, 1), (1, 2)]), (1, vec![(2, 3)])]);
}

#[test]
fn i1_collection() {
    let (m, f) = i1();
    let s = doubling_search(&m, &f).unwrap();
    let c = decompose(&s.tree, &m, s.accepted_m).unwrap().collection;
    assert_eq!(c.family_length(0), 3.0);
    // b to c plus the depot edge to b
    assert_eq!(c.family_length(1), 8.0);
    assert!(c.check(&f, &m).holds());
}

#[test]
fn i1_solution_and_optimum() {
    let (m, f) = i1();
    let s = solve_htsp(&m, &f).unwrap();
    // both trees go to the fast vehicle; the second tree only adds c
    assert_eq!(s.tours, vec![vec![0], vec![0, 1, 2, 0, 3, 0]]);
    assert_eq!(s.makespan, 5.5);
    assert_eq!(compute_makespan(&s.tours, &f, &m), Ok(5.5));
    assert!(s.makespan <= MAKESPAN_FACTOR * s.accepted_m);
    assert!(verify_htsp(&m, &f, &s.tours, s.makespan).passed());

    let o = exact_htsp(&m, &f).unwrap();
    assert_eq!(o.opt_makespan, 4.0);
    assert_eq!(o.assignment, vec![None, Some(1), Some(1), Some(1)]);
    assert_eq!(s.makespan / o.opt_makespan, 1.375);
}

#[test]
fn figure1_values() {
    for n in [5usize, 20, 100] {
        let m = Metric::validate(&figure1_rows(n)).unwrap();
        assert_eq!(m.d(0, 1), 1.0);
        assert_eq!(m.d(0, n + 1), 2.0);
        assert_eq!(m.d(n + 1, n + 2), 1.0 / n as f64);
        let tree = LevelPrimTree::build(&m, &Leveling::compute(&m, 1.0));
        // one unit edge into the black cluster plus n - 1 short ones
        let expected = 1.0 + (n - 1) as f64 / n as f64;
        assert!((tree.suffix_length(1) - expected).abs() < 1e-12);
    }
}

#[test]
fn copy_metric_formula() {
    let m = line(&[0.0, 4.0]);
    let inst = HvrpInstance::new(m, Fleet::round(&[1.0]).unwrap(), 2, vec![0, 2]).unwrap();
    let aug = build_augmented(&inst).unwrap();
    assert_eq!(aug.copies, vec![1, 1]);
    assert_eq!(aug.metric.d(1, 2), 4.0);
    assert_eq!(aug.metric.d(0, 1), 6.0);
}

#[test]
fn two_full_vertices_need_two_trips() {
    let m = line(&[0.0, 1.0, 2.0]);
    let trips = tour_partition(&[0, 1, 2, 0], &[0, 3, 3], 3, &m);
    assert_eq!(trips.len(), 2);
}

#[test]
fn one_dimensional_capacitated_instance() {
    let m = line(&[0.0, 1.0, 3.0, 6.0]);
    let inst = HvrpInstance::new(m, Fleet::round(&[1.0, 2.0]).unwrap(), 2, vec![0, 1, 2, 2]).unwrap();
    let s = solve_hvrp(&inst).unwrap();
    let trips: Vec<_> = s.vehicles.iter().map(|v| v.trips.clone()).collect();
    assert!(verify_hvrp(&inst, &trips, s.makespan).passed());
    // every delivery of the 2-unit vertex at 6 needs its own round trip
    assert!(s.makespan >= 12.0 / 2.0);
    let lb = hetroute::lower_bounds(&inst, inst.demands());
    assert!(s.makespan >= lb.best() / inst.fleet.raw_speeds().iter().sum::<f64>() * (1.0 - 1e-12));
}
