use thiserror::Error;

use crate::instance::Vertex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("distance matrix is empty")]
    Empty,
    #[error("{n} vertices exceeds the supported maximum of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance ({u}, {v}) is not finite")]
    NonFinite { u: Vertex, v: Vertex },
    #[error("distance ({u}, {v}) = {value} is negative")]
    NegativeDistance { u: Vertex, v: Vertex, value: f64 },
    #[error("distance ({u}, {u}) = {value} must be zero")]
    NonZeroDiagonal { u: Vertex, value: f64 },
    #[error("distance ({u}, {v}) differs from ({v}, {u})")]
    AsymmetricDistance { u: Vertex, v: Vertex },
    #[error("triangle inequality fails: d({u},{w}) > d({u},{v}) + d({v},{w})")]
    TriangleViolation { u: Vertex, v: Vertex, w: Vertex },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FleetError {
    #[error("vehicle {index} has speed {speed} < 1")]
    SpeedBelowOne { index: usize, speed: f64 },
    #[error("vehicle {index} has a non-finite speed")]
    NonFiniteSpeed { index: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HvrpError {
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("expected {expected} demands, found {found}")]
    DemandCount { expected: usize, found: usize },
    #[error("depot demand must be zero, found {0}")]
    DepotDemand(u64),
    #[error("vertex {vertex} demands {demand} > capacity {capacity}")]
    DemandOutOfRange { vertex: Vertex, demand: u64, capacity: u64 },
    #[error("total demand {total} exceeds the copy limit {max}")]
    TooManyCopies { total: u64, max: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("tree edge ({parent}, {child}) descends from level {parent_level} to {child_level}")]
    MonotonicityViolated { parent: Vertex, child: Vertex, parent_level: u32, child_level: u32 },
    #[error("unmarked level-{level} subtree {subtree} hangs from {parent_desc}")]
    OrphanUnmarkedSubtree { subtree: usize, level: u32, parent_desc: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignError {
    #[error("suffix condition fails at level {level}: {lhs} > {rhs}")]
    HallViolation { level: u32, lhs: f64, rhs: f64 },
    #[error("no vehicle may serve level-{level} trees")]
    NoEligibleVehicle { level: u32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for the exact oracle: n = {n}, k = {k} (limits n <= {max_n}, k <= {max_k})")]
    InstanceTooLarge { n: usize, k: usize, max_n: usize, max_k: usize },
    #[error("fleet is empty")]
    EmptyFleet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TourError {
    #[error("expected {expected} tours, found {found}")]
    TourCount { expected: usize, found: usize },
    #[error("tour {vehicle} does not start and end at the depot")]
    MalformedTour { vehicle: usize },
    #[error("tour {vehicle} visits unknown vertex {vertex}")]
    UnknownVertex { vehicle: usize, vertex: Vertex },
}

/// Errors raised by the end-to-end solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("fleet is empty")]
    EmptyFleet,
    #[error("doubling search did not accept a guess after {0} rounds")]
    SearchExhausted(usize),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Tour(#[from] TourError),
    #[error(transparent)]
    Hvrp(#[from] HvrpError),
    /// A proven guarantee failed numerically; indicates a bug.
    #[error("guarantee violated: {0}")]
    GuaranteeViolated(String),
}

/// Errors raised while reading instance or solution files.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("instance must provide exactly one of `points` or `matrix`")]
    MetricSource,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Fleet(#[from] FleetError),
    #[error(transparent)]
    Hvrp(#[from] HvrpError),
    #[error("instance has demands but no capacity")]
    MissingCapacity,
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
