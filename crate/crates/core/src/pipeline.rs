//! End-to-end solver: doubling search over the makespan guess, Level-Prim,
//! decomposition, assignment and tour construction.

use serde::Serialize;

use crate::assign::{fractional_match, round_assignment, FractionalAssignment, IntegralAssignment};
use crate::decompose::{decompose, AssignableCollection, ALPHA, BETA};
use crate::error::{SolveError, TourError};
use crate::graph::{euler_shortcut, mst, RootedTree};
use crate::instance::{Fleet, Leveling, Metric, Vertex, DEPOT};
use crate::le_rel;
use crate::levelprim::{LevelPrimTree, VehicleCondition};

/// Doubling rounds before the search gives up.
pub const MAX_SEARCH_ROUNDS: usize = 2000;

/// Makespan cap `(4α + 2β)` in units of the accepted guess.
pub const MAKESPAN_FACTOR: f64 = 4.0 * ALPHA + 2.0 * BETA;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub initial_m: f64,
    pub search_rounds: usize,
    pub level_prim_weight: f64,
    pub condition: VehicleCondition,
    /// Whether the vehicle condition still holds at twice the accepted guess.
    pub holds_at_double_m: bool,
    pub tree_count: usize,
    pub fractional_loads: Vec<f64>,
    pub integral_loads: Vec<f64>,
    /// Makespan measured with rounded speeds.
    pub rounded_makespan: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HtspSolution {
    /// One closed tour per vehicle; an idle vehicle has `[0]`.
    pub tours: Vec<Vec<Vertex>>,
    /// Longest tour time under raw speeds.
    pub makespan: f64,
    pub accepted_m: f64,
    pub diagnostics: Diagnostics,
}

/// Starting guess: a lower bound on the optimum of the rounded instance.
///
/// Some vehicle must reach the farthest vertex and return, and the tours
/// together connect every vertex, so `OPT ≥ max(2·max_v d(r,v)/2^{j_max},
/// MST/Σ_u 2^{j_u})`. Falls back to 1 when both vanish.
pub fn initial_guess(metric: &Metric, fleet: &Fleet) -> f64 {
    let far = metric.vertices().map(|v| metric.radius(v)).fold(0.0, f64::max);
    let fastest = fleet.rounded_speeds().into_iter().fold(0.0, f64::max);
    let all: Vec<Vertex> = metric.vertices().collect();
    let tree = mst(metric, &all).length;
    let m0 = (2.0 * far / fastest).max(tree / fleet.total_rounded_speed());
    if m0 > 0.0 && m0.is_finite() {
        m0
    } else {
        1.0
    }
}

/// Outcome of the doubling search.
#[derive(Debug, Clone)]
pub struct Search {
    pub initial_m: f64,
    pub accepted_m: f64,
    pub rounds: usize,
    pub tree: LevelPrimTree,
    pub condition: VehicleCondition,
}

pub fn doubling_search(metric: &Metric, fleet: &Fleet) -> Result<Search, SolveError> {
    if fleet.is_empty() {
        return Err(SolveError::EmptyFleet);
    }
    let initial_m = initial_guess(metric, fleet);
    let mut m = initial_m;
    for round in 1..=MAX_SEARCH_ROUNDS {
        let tree = LevelPrimTree::build(metric, &Leveling::compute(metric, m));
        let condition = tree.vehicle_condition(fleet);
        if condition.holds() {
            return Ok(Search { initial_m, accepted_m: m, rounds: round, tree, condition });
        }
        m *= 2.0;
    }
    Err(SolveError::SearchExhausted(MAX_SEARCH_ROUNDS))
}

/// Everything the solver computed on the way to a solution.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub search: Search,
    pub collection: AssignableCollection,
    pub fractional: FractionalAssignment,
    pub integral: IntegralAssignment,
    pub solution: HtspSolution,
}

pub fn solve_htsp(metric: &Metric, fleet: &Fleet) -> Result<HtspSolution, SolveError> {
    solve_htsp_traced(metric, fleet).map(|t| t.solution)
}

pub fn solve_htsp_traced(metric: &Metric, fleet: &Fleet) -> Result<SolveTrace, SolveError> {
    let search = doubling_search(metric, fleet)?;
    let m = search.accepted_m;
    let holds_at_double_m = {
        let tree = LevelPrimTree::build(metric, &Leveling::compute(metric, 2.0 * m));
        tree.vehicle_condition(fleet).holds()
    };
    let decomposition = decompose(&search.tree, metric, m)?;
    let collection = decomposition.collection;
    let report = collection.check(fleet, metric);
    if !report.holds() {
        return Err(SolveError::GuaranteeViolated(format!(
            "collection at M = {m} is not ({ALPHA}, {BETA})-assignable: {report:?}"
        )));
    }
    let fractional = fractional_match(&collection, fleet)?;
    if !le_rel(fractional.max_load(), BETA * m, 1e-9) {
        return Err(SolveError::GuaranteeViolated(format!(
            "fractional load {} exceeds {BETA}·M = {}",
            fractional.max_load(),
            BETA * m
        )));
    }
    let integral = round_assignment(&fractional, fleet);
    let load_cap = (2.0 * ALPHA + BETA) * m;
    if !le_rel(integral.max_load(), load_cap, 1e-9) {
        return Err(SolveError::GuaranteeViolated(format!(
            "integral load {} exceeds {load_cap}",
            integral.max_load()
        )));
    }

    let trees: Vec<&RootedTree> = collection.iter().map(|(_, _, t)| t).collect();
    let tours = trees_to_tours(&integral, &trees, metric.n());
    let rounded_makespan = rounded_makespan(&tours, fleet, metric);
    for (u, tour) in tours.iter().enumerate() {
        let time = metric.walk_length(tour) / fleet.rounded_speed(u);
        if !le_rel(time, 2.0 * integral.loads[u], 1e-9) {
            return Err(SolveError::GuaranteeViolated(format!(
                "vehicle {u} needs {time} > twice its load {}",
                integral.loads[u]
            )));
        }
    }
    if !le_rel(rounded_makespan, MAKESPAN_FACTOR * m, 1e-9) {
        return Err(SolveError::GuaranteeViolated(format!(
            "makespan {rounded_makespan} exceeds {MAKESPAN_FACTOR}·M = {}",
            MAKESPAN_FACTOR * m
        )));
    }
    let makespan = compute_makespan(&tours, fleet, metric)?;
    let diagnostics = Diagnostics {
        initial_m: search.initial_m,
        search_rounds: search.rounds,
        level_prim_weight: search.tree.total_length(),
        condition: search.condition.clone(),
        holds_at_double_m,
        tree_count: collection.tree_count(),
        fractional_loads: fractional.loads.clone(),
        integral_loads: integral.loads.clone(),
        rounded_makespan,
    };
    let solution = HtspSolution { tours, makespan, accepted_m: m, diagnostics };
    Ok(SolveTrace { search, collection, fractional, integral, solution })
}

/// Turns each owned tree into a shortcut Euler tour and chains a vehicle's
/// tours through the depot. A vertex already visited earlier (in any tour)
/// is skipped.
pub fn trees_to_tours(
    assignment: &IntegralAssignment,
    trees: &[&RootedTree],
    n: usize,
) -> Vec<Vec<Vertex>> {
    let k = assignment.loads.len();
    let mut seen = vec![false; n];
    seen[DEPOT] = true;
    (0..k)
        .map(|u| {
            let mut tour = vec![DEPOT];
            for t in assignment.trees_of(u) {
                let walk = euler_shortcut(trees[t]);
                let fresh: Vec<Vertex> =
                    walk.into_iter().filter(|&v| !std::mem::replace(&mut seen[v], true)).collect();
                if !fresh.is_empty() {
                    tour.extend(fresh);
                    tour.push(DEPOT);
                }
            }
            tour
        })
        .collect()
}

fn check_tours(tours: &[Vec<Vertex>], k: usize, n: usize) -> Result<(), TourError> {
    if tours.len() != k {
        return Err(TourError::TourCount { expected: k, found: tours.len() });
    }
    for (u, tour) in tours.iter().enumerate() {
        if tour.first() != Some(&DEPOT) || tour.last() != Some(&DEPOT) {
            return Err(TourError::MalformedTour { vehicle: u });
        }
        if let Some(&v) = tour.iter().find(|&&v| v >= n) {
            return Err(TourError::UnknownVertex { vehicle: u, vertex: v });
        }
    }
    Ok(())
}

/// `max_u d(τ_u)/λ_u` with raw speeds.
pub fn compute_makespan(
    tours: &[Vec<Vertex>],
    fleet: &Fleet,
    metric: &Metric,
) -> Result<f64, TourError> {
    check_tours(tours, fleet.len(), metric.n())?;
    Ok(tours
        .iter()
        .enumerate()
        .map(|(u, t)| metric.walk_length(t) / fleet.raw_speed(u))
        .fold(0.0, f64::max))
}

fn rounded_makespan(tours: &[Vec<Vertex>], fleet: &Fleet, metric: &Metric) -> f64 {
    tours
        .iter()
        .enumerate()
        .map(|(u, t)| metric.walk_length(t) / fleet.rounded_speed(u))
        .fold(0.0, f64::max)
}
