//! Approximation algorithms for routing a heterogeneous-speed fleet from a
//! single depot so that the latest return time is small.
//!
//! The solver rounds speeds down to powers of two, searches for a makespan
//! guess `M` by doubling, builds a level-aware spanning tree, cuts it into
//! depot-rooted trees whose lengths fit the fleet, assigns trees to vehicles
//! through a b-matching and converts trees to tours. A capacitated variant is
//! reduced to the uncapacitated one through demand copies.

pub mod assign;
pub mod cvrp;
pub mod decompose;
pub mod error;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod io;
pub mod levelprim;
pub mod oracle;
pub mod pipeline;
pub mod spider;
pub mod suites;

pub use assign::{fractional_match, round_assignment, FractionalAssignment, IntegralAssignment};
pub use cvrp::{build_augmented, lower_bounds, solve_hvrp, tour_partition, AugmentedMetric, HvrpSolution};
pub use decompose::{decompose, AssignableCollection, Decomposition, LevelSubtree};
pub use error::*;
pub use graph::{euler_shortcut, mst, mst_contracted, Edge, RootedTree};
pub use instance::{Fleet, HvrpInstance, Leveling, Metric, Vertex, DEPOT};
pub use levelprim::{check_vehicle_condition, LevelPrimTree};
pub use oracle::{exact_htsp, OracleResult};
pub use pipeline::{compute_makespan, solve_htsp, HtspSolution};
pub use spider::{verify_spider, Spider};

/// `a ≤ b` up to `rel` times the larger magnitude.
pub fn le_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b + rel * a.abs().max(b.abs())
}
