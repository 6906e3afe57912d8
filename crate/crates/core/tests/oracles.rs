//! Cross-checks against independent reference implementations.

mod common;

use hetroute::assign::fractional_match;
use hetroute::cvrp::build_augmented;
use hetroute::decompose::decompose;
use hetroute::generate::{corpus_instance, floyd_warshall, random_points};
use hetroute::graph::{mst, mst_contracted};
use hetroute::instance::{Fleet, HvrpInstance, Leveling, Metric, Vertex};
use hetroute::oracle::exact_htsp;
use hetroute::pipeline::{doubling_search, solve_htsp, MAKESPAN_FACTOR};
use hetroute::LevelPrimTree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force, explicit_copy_metric, flow_feasible, kruskal, rel_eq, tour_splitting};

#[test]
fn prim_matches_kruskal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = Metric::from_points(&random_points(&mut rng, 20, false)).unwrap();
        let all: Vec<Vertex> = m.vertices().collect();
        assert!(rel_eq(mst(&m, &all).length, kruskal(&m)));
    }
}

#[test]
fn figure1_contracted_mst_below_two() {
    for n in [5, 20, 100] {
        let m = Metric::validate(&hetroute::generate::figure1_rows(n)).unwrap();
        let all: Vec<Vertex> = m.vertices().collect();
        let v0: Vec<Vertex> = (0..=n).collect();
        let c = mst_contracted(&m, &all, &v0);
        assert!(c.length < 2.0);
        assert_eq!(c.edges.len(), n);
    }
}

#[test]
fn greedy_matching_agrees_with_max_flow() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut yes, mut no) = (0, 0);
    for i in 0..100 {
        let (metric, fleet) = corpus_instance(&mut rng, i, 30, 5);
        let s = doubling_search(&metric, &fleet).unwrap();
        let mut c = decompose(&s.tree, &metric, s.accepted_m).unwrap().collection;
        // shrink beta on half the cases to provoke infeasible networks
        if i % 2 == 1 {
            c.beta *= rng.gen_range(0.001..0.05);
        }
        let greedy = fractional_match(&c, &fleet).is_ok();
        assert_eq!(greedy, flow_feasible(&c, &fleet), "instance {i}");
        if greedy {
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 0 && no > 0, "both outcomes exercised ({yes}/{no})");
}

#[test]
fn held_karp_matches_permutation_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..40 {
        let (metric, fleet) = corpus_instance(&mut rng, i, 7, 3);
        let exact = exact_htsp(&metric, &fleet).unwrap().opt_makespan;
        assert_eq!(exact, brute_force(&metric, fleet.raw_speeds()), "instance {i}");
    }
}

#[test]
fn uniform_speed_sanity() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let metric = Metric::from_points(&random_points(&mut rng, 10, false)).unwrap();
        let fleet = Fleet::round(&[1.0, 1.0]).unwrap();
        let sol = solve_htsp(&metric, &fleet).unwrap();
        let split = tour_splitting(&metric, 2);
        let opt = exact_htsp(&metric, &fleet).unwrap().opt_makespan;
        assert!(sol.makespan <= MAKESPAN_FACTOR * sol.accepted_m);
        assert!(split >= opt - 1e-12);
        assert!(sol.makespan >= opt - 1e-12);
        assert!(sol.makespan <= 416.0 * split);
    }
}

#[test]
fn guarantees_against_the_exact_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for i in 0..60 {
        let (metric, fleet) = corpus_instance(&mut rng, i, 9, 3);
        let sol = solve_htsp(&metric, &fleet).unwrap();
        let opt = exact_htsp(&metric, &fleet).unwrap().opt_makespan;
        assert!(sol.makespan >= opt * (1.0 - 1e-12), "instance {i}");
        if opt > 0.0 {
            assert!(sol.makespan / opt <= 416.0);
        }
        // the optimum of the rounded instance bounds the accepted guess
        let rounded = Fleet::round(&fleet.rounded_speeds()).unwrap();
        let opt_r = exact_htsp(&metric, &rounded).unwrap().opt_makespan;
        assert!(sol.accepted_m <= 2.0 * opt_r * (1.0 + 1e-9) || opt_r == 0.0, "instance {i}");
        if opt_r > 0.0 {
            // the contracted MSTs fit the fleet at M = OPT
            let lv = Leveling::compute(&metric, opt_r);
            let all: Vec<Vertex> = metric.vertices().collect();
            for l in 0..=lv.max_level() {
                let w = if l == 0 { mst(&metric, &all).length } else { mst_contracted(&metric, &all, &lv.vertices_below(l)).length };
                let cap = opt_r * rounded.suffix_capacity(l);
                assert!(w <= cap * (1.0 + 1e-9), "instance {i}, level {l}: {w} > {cap}");
            }
            let tree = LevelPrimTree::build(&metric, &lv);
            assert!(tree.vehicle_condition(&rounded).holds(), "instance {i}");
        }
    }
}

#[test]
fn copy_metric_matches_explicit_shortest_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..30 {
        let n = rng.gen_range(2..8);
        let mut rows = vec![vec![0.0; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                let w = f64::from(rng.gen_range(1..=10u32));
                rows[u][v] = w;
                rows[v][u] = w;
            }
        }
        floyd_warshall(&mut rows);
        let metric = Metric::validate(&rows).unwrap();
        let q = [1u64, 2, 4, 8][rng.gen_range(0..4)];
        let demands: Vec<u64> = (0..n).map(|v| if v == 0 { 0 } else { rng.gen_range(0..=q) }).collect();
        let inst = HvrpInstance::new(metric.clone(), Fleet::round(&[1.0]).unwrap(), q, demands).unwrap();
        let aug = build_augmented(&inst).unwrap();
        assert!(aug.copies.len() <= 200);

        let explicit = explicit_copy_metric(&metric, &aug.copies, q);
        for a in 0..aug.metric.n() {
            for b in 0..aug.metric.n() {
                assert_eq!(aug.metric.d(a, b), explicit[a][b], "pair ({a}, {b})");
            }
        }
    }
}
