use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hetroute::generate::{generate, GenConfig, MetricKind};
use hetroute::io::{hvrp_solution_json, htsp_solution_json, to_pretty, InstanceFile, LoadedInstance, SolutionFile};
use hetroute::oracle::{exact_htsp, verify_htsp, verify_hvrp};
use hetroute::suites::{bench_table, run_suite, SweepConfig, SUITES};
use hetroute::{solve_htsp, solve_hvrp};

#[derive(Parser, Debug)]
#[command(name = "hetroute", version, about = "Routing for fleets with heterogeneous speeds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the uncapacitated problem.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the capacitated problem (instance must carry a capacity).
    SolveVrp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact optimum for tiny instances.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a solution file against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Generate a seeded instance.
    Gen {
        #[arg(long, value_enum, default_value_t = Kind::Euclidean)]
        kind: Kind,
        /// Vertex count including the depot; for figure1, the family parameter.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        speed_spread: f64,
        #[arg(long)]
        capacity: Option<u64>,
        #[arg(long, default_value_t = 1)]
        demand_max: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a property sweep.
    Props {
        /// One of levelprim, spider, decompose, assign, pipeline, hvrp, all.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 40)]
        max_n: usize,
        #[arg(long, default_value_t = 6)]
        max_k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve a seeded batch and tabulate makespans and oracle ratios.
    Bench {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        with_oracle: bool,
        /// Include wall time per row (makes the table nondeterministic).
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 9)]
        max_n: usize,
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Euclidean,
    RandomMetric,
    Line,
    Figure1,
}

impl From<Kind> for MetricKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Euclidean => MetricKind::Euclidean,
            Kind::RandomMetric => MetricKind::RandomMetric,
            Kind::Line => MetricKind::Line,
            Kind::Figure1 => MetricKind::Figure1,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure modes mapped to exit codes.
enum Failure {
    /// A check found a violation (exit 1).
    Violation(String),
    /// Bad input or usage (exit 2).
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> Result<LoadedInstance, Failure> {
    Ok(InstanceFile::read(path)?.load()?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { input, output } => {
            let inst = load(&input)?;
            let sol = solve_htsp(&inst.metric, &inst.fleet)
                .map_err(|e| Failure::Violation(e.to_string()))?;
            emit(&to_pretty(&htsp_solution_json(&sol)), output.as_deref())?;
            let report = verify_htsp(&inst.metric, &inst.fleet, &sol.tours, sol.makespan);
            if !report.passed() {
                return Err(Failure::Violation(format!("{:?}", report.violations)));
            }
        }
        Command::SolveVrp { input, output } => {
            let inst = load(&input)?;
            let hvrp = inst.hvrp.ok_or_else(|| Failure::Usage("instance has no capacity".into()))?;
            let sol = solve_hvrp(&hvrp).map_err(|e| Failure::Violation(e.to_string()))?;
            emit(&to_pretty(&hvrp_solution_json(&sol)), output.as_deref())?;
            let trips: Vec<_> = sol.vehicles.iter().map(|v| v.trips.clone()).collect();
            let report = verify_hvrp(&hvrp, &trips, sol.makespan);
            if !report.passed() {
                return Err(Failure::Violation(format!("{:?}", report.violations)));
            }
        }
        Command::Oracle { input, output } => {
            let inst = load(&input)?;
            let r = exact_htsp(&inst.metric, &inst.fleet)?;
            let mut v = serde_json::to_value(&r)?;
            v["schemaVersion"] = json!(1);
            emit(&to_pretty(&v), output.as_deref())?;
        }
        Command::Verify { instance, solution } => {
            let inst = load(&instance)?;
            let sol = SolutionFile::parse(&std::fs::read_to_string(&solution)?)?;
            let report = match (&inst.hvrp, &sol.trips) {
                (Some(h), Some(trips)) => verify_hvrp(h, trips, sol.makespan),
                (None, Some(_)) => return Err(Failure::Usage("solution has trips but instance has no capacity".into())),
                _ => verify_htsp(&inst.metric, &inst.fleet, &sol.tours, sol.makespan),
            };
            let mut v = serde_json::to_value(&report)?;
            v["schemaVersion"] = json!(1);
            v["passed"] = json!(report.passed());
            emit(&to_pretty(&v), None)?;
            if !report.passed() {
                return Err(Failure::Violation(format!("{} violation(s)", report.violations.len())));
            }
        }
        Command::Gen { kind, n, k, seed, speed_spread, capacity, demand_max, output } => {
            if n == 0 || k == 0 {
                return Err(Failure::Usage("--n and --k must be at least 1".into()));
            }
            if speed_spread.is_nan() || speed_spread < 1.0 {
                return Err(Failure::Usage("--speed-spread must be at least 1".into()));
            }
            let cfg = GenConfig { kind: kind.into(), n, k, speed_spread, capacity, demand_max };
            let file = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(seed));
            file.load()?;
            emit(&file.to_json(), output.as_deref())?;
        }
        Command::Props { suite, trials, seed, alpha, max_n, max_k, output } => {
            let cfg = SweepConfig { seed, trials, max_n, max_k, alpha };
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut reports = Vec::new();
            for name in names {
                let r = run_suite(name, &cfg)
                    .ok_or_else(|| Failure::Usage(format!("unknown suite `{name}`")))?;
                reports.push(r);
            }
            let passed = reports.iter().all(|r| r.passed());
            let v: Value = json!({ "schemaVersion": 1, "passed": passed, "suites": reports });
            emit(&to_pretty(&v), output.as_deref())?;
            if !passed {
                return Err(Failure::Violation("property sweep failed".into()));
            }
        }
        Command::Bench { count, seed, with_oracle, timing, format, max_n, max_k, output } => {
            let cfg = SweepConfig { seed, trials: count, max_n, max_k, alpha: 2.0 };
            let table = bench_table(&cfg, count, with_oracle, timing);
            let text = match format {
                Format::Json => {
                    let mut v = serde_json::to_value(&table)?;
                    v["schemaVersion"] = json!(1);
                    to_pretty(&v)
                }
                Format::Csv => table.to_csv(),
            };
            emit(&text, output.as_deref())?;
            let bad = table.rows.iter().any(|r| r.error.is_some() || r.ratio.is_some_and(|x| x > 416.0));
            if bad {
                return Err(Failure::Violation("bench found errors or ratios above 416".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("HETROUTE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // an already-initialised pool keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
