//! Seeded property sweeps and the solver-versus-oracle ratio table.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::assign::{eligible, fractional_match, round_assignment};
use crate::decompose::{check_decomposition, decompose, BETA, ALPHA};
use crate::generate::{corpus_instance, hvrp_corpus_instance};
use crate::instance::{Fleet, Leveling, Metric};
use crate::le_rel;
use crate::levelprim::LevelPrimTree;
use crate::oracle::{exact_htsp, verify_htsp, verify_hvrp};
use crate::pipeline::{doubling_search, initial_guess, solve_htsp, solve_htsp_traced, MAKESPAN_FACTOR};
use crate::spider::{tight_length_factor, verify_spider, Spider};
use crate::cvrp::{lower_bounds, solve_hvrp};

pub const SUITES: [&str; 6] = ["levelprim", "spider", "decompose", "assign", "pipeline", "hvrp"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    /// Worst observed margins, keyed by name.
    pub worst: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, trials: usize) -> Self {
        Self { suite: suite.into(), seed, trials, worst: BTreeMap::new(), failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn track(&mut self, key: &str, value: f64) {
        let e = self.worst.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        if value > *e {
            *e = value;
        }
    }

    fn fail(&mut self, trial: usize, msg: impl std::fmt::Display) {
        self.failures.push(format!("trial {trial}: {msg}"));
    }
}

/// Corpus parameters shared by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_n: usize,
    pub max_k: usize,
    pub alpha: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { seed: 1, trials: 100, max_n: 40, max_k: 6, alpha: 2.0 }
    }
}

pub fn run_suite(name: &str, cfg: &SweepConfig) -> Option<SuiteReport> {
    Some(match name {
        "levelprim" => levelprim_suite(cfg),
        "spider" => spider_suite(cfg),
        "decompose" => decompose_suite(cfg),
        "assign" => assign_suite(cfg),
        "pipeline" => pipeline_suite(cfg),
        "hvrp" => hvrp_suite(cfg),
        _ => return None,
    })
}

fn corpus(cfg: &SweepConfig) -> Vec<(Metric, Fleet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.trials).map(|i| corpus_instance(&mut rng, i, cfg.max_n, cfg.max_k)).collect()
}

/// Structural checks at the initial and the accepted guess.
pub fn levelprim_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("levelprim", cfg.seed, cfg.trials);
    for (t, (metric, fleet)) in corpus(cfg).iter().enumerate() {
        let accepted = match doubling_search(metric, fleet) {
            Ok(s) => s.accepted_m,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        for m in [initial_guess(metric, fleet), accepted] {
            let tree = LevelPrimTree::build(metric, &Leveling::compute(metric, m));
            if let Some(e) = tree.monotonicity_violation() {
                r.fail(t, format!("monotonicity fails on edge {e:?} at M = {m}"));
            }
            if !tree.layers_consistent() || !tree.union().is_valid() {
                r.fail(t, format!("layers inconsistent at M = {m}"));
            }
            for b in tree.check_suffix_bound(metric) {
                if b.mst > 0.0 {
                    r.track("suffixOverMst", b.lhs / b.mst);
                }
                if !b.holds {
                    r.fail(t, format!("suffix bound fails at level {}: {} > {}", b.level, b.lhs, b.rhs));
                }
            }
        }
    }
    r
}

pub fn spider_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("spider", cfg.seed, cfg.trials);
    let alpha = cfg.alpha;
    for (t, (metric, _)) in corpus(cfg).iter().enumerate() {
        let spider = match Spider::build(metric, alpha) {
            Ok(s) => s,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let rep = verify_spider(&spider, metric, alpha);
        r.track("stretch", rep.worst_stretch);
        r.track("lengthOverMst", rep.length_ratio);
        for v in &rep.violations {
            r.fail(t, format!("{v:?}"));
        }
        if rep.length > tight_length_factor(alpha) * rep.mst + 1e-6 {
            r.fail(t, format!("length {} exceeds {}·MST", rep.length, tight_length_factor(alpha)));
        }
    }
    r
}

pub fn decompose_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("decompose", cfg.seed, cfg.trials);
    for (t, (metric, fleet)) in corpus(cfg).iter().enumerate() {
        let search = match doubling_search(metric, fleet) {
            Ok(s) => s,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let d = match decompose(&search.tree, metric, search.accepted_m) {
            Ok(d) => d,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let check = check_decomposition(&d, &search.tree, metric);
        r.track("pieceOverCap", check.worst_piece_ratio);
        r.track("chargeRatio", check.worst_charge_ratio);
        r.track("suffixChargeRatio", check.worst_suffix_charge_ratio);
        if !check.holds {
            r.fail(t, format!("decomposition bounds fail: {check:?}"));
        }
        let a = d.collection.check(fleet, metric);
        r.track("sizeOverAlpha", a.worst_size_ratio);
        for s in &a.suffix {
            if s.rhs > 0.0 {
                r.track("suffixOverBeta", s.lhs / s.rhs);
            }
        }
        if !a.holds() {
            r.fail(t, format!("collection not ({ALPHA}, {BETA})-assignable: {a:?}"));
        }
    }
    r
}

pub fn assign_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("assign", cfg.seed, cfg.trials);
    for (t, (metric, fleet)) in corpus(cfg).iter().enumerate() {
        let search = match doubling_search(metric, fleet) {
            Ok(s) => s,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let m = search.accepted_m;
        let d = match decompose(&search.tree, metric, m) {
            Ok(d) => d,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let frac = match fractional_match(&d.collection, fleet) {
            Ok(x) => x,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let int = round_assignment(&frac, fleet);
        r.track("fractionalOverM", frac.max_load() / m);
        r.track("integralOverM", int.max_load() / m);
        if !le_rel(frac.max_load(), BETA * m, 1e-9) {
            r.fail(t, format!("fractional load {} > {BETA}M", frac.max_load()));
        }
        if !le_rel(int.max_load(), (2.0 * ALPHA + BETA) * m, 1e-9) {
            r.fail(t, format!("integral load {} > {}M", int.max_load(), 2.0 * ALPHA + BETA));
        }
        for (tree, &u) in int.owner.iter().enumerate() {
            if !eligible(frac.trees[tree].level, fleet.class(u)) {
                r.fail(t, format!("tree {tree} owned by ineligible vehicle {u}"));
            }
        }
        for u in 0..fleet.len() {
            let p_max = frac
                .x
                .iter()
                .enumerate()
                .filter(|(_, row)| row.iter().any(|&(w, _)| w == u))
                .map(|(tree, _)| frac.trees[tree].length / fleet.rounded_speed(u))
                .fold(0.0, f64::max);
            if !le_rel(int.loads[u], frac.loads[u] + p_max, 1e-9) {
                r.fail(t, format!("vehicle {u} rounded load {} > {} + {p_max}", int.loads[u], frac.loads[u]));
            }
        }
    }
    r
}

pub fn pipeline_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("pipeline", cfg.seed, cfg.trials);
    let mut double_misses = 0.0;
    for (t, (metric, fleet)) in corpus(cfg).iter().enumerate() {
        let trace = match solve_htsp_traced(metric, fleet) {
            Ok(s) => s,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let s = &trace.solution;
        if s.accepted_m > 0.0 {
            r.track("roundedMakespanOverM", s.diagnostics.rounded_makespan / s.accepted_m);
        }
        if !le_rel(s.diagnostics.rounded_makespan, MAKESPAN_FACTOR * s.accepted_m, 1e-9) {
            r.fail(t, "makespan cap exceeded");
        }
        let v = verify_htsp(metric, fleet, &s.tours, s.makespan);
        for x in &v.violations {
            r.fail(t, format!("{x:?}"));
        }
        if !s.diagnostics.holds_at_double_m {
            double_misses += 1.0;
        }
    }
    r.worst.insert("conditionFailsAtDoubleM".into(), double_misses);
    r
}

pub fn hvrp_suite(cfg: &SweepConfig) -> SuiteReport {
    let mut r = SuiteReport::new("hvrp", cfg.seed, cfg.trials);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for t in 0..cfg.trials {
        let inst = hvrp_corpus_instance(&mut rng, t, cfg.max_n.min(20), cfg.max_k);
        let s = match solve_hvrp(&inst) {
            Ok(s) => s,
            Err(e) => {
                r.fail(t, e);
                continue;
            }
        };
        let trips: Vec<_> = s.vehicles.iter().map(|v| v.trips.clone()).collect();
        for x in verify_hvrp(&inst, &trips, s.makespan).violations {
            r.fail(t, format!("{x:?}"));
        }
        for (u, v) in s.vehicles.iter().enumerate() {
            let ratio = v.conversion_ratio();
            r.track("conversionRatio", ratio);
            if ratio > 4.0 {
                r.fail(t, format!("vehicle {u} conversion ratio {ratio} > 4"));
            }
            let radial = lower_bounds(&inst, &v.served).radial;
            if v.length < radial * (1.0 - 1e-9) {
                r.fail(t, format!("vehicle {u} length {} below radial bound {radial}", v.length));
            }
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub makespan: f64,
    pub accepted_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchTable {
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("index,n,k,makespan,acceptedM,opt,ratio,wallMs,error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.index,
                r.n,
                r.k,
                r.makespan,
                r.accepted_m,
                opt(r.opt),
                opt(r.ratio),
                opt(r.wall_ms),
                r.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Solves `count` seeded instances in parallel; rows keep instance order.
/// Wall time is recorded only when `timing` is set, so default tables are
/// reproducible byte for byte.
pub fn bench_table(cfg: &SweepConfig, count: usize, with_oracle: bool, timing: bool) -> BenchTable {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (max_n, max_k) = if with_oracle { (cfg.max_n.min(9), cfg.max_k.min(3)) } else { (cfg.max_n, cfg.max_k) };
    let instances: Vec<(Metric, Fleet)> =
        (0..count).map(|i| corpus_instance(&mut rng, i, max_n, max_k)).collect();
    let rows: Vec<BenchRow> = instances
        .par_iter()
        .enumerate()
        .map(|(index, (metric, fleet))| {
            let start = Instant::now();
            let mut row = BenchRow {
                index,
                n: metric.n(),
                k: fleet.len(),
                makespan: f64::NAN,
                accepted_m: f64::NAN,
                opt: None,
                ratio: None,
                wall_ms: None,
                error: None,
            };
            match solve_htsp(metric, fleet) {
                Ok(s) => {
                    row.makespan = s.makespan;
                    row.accepted_m = s.accepted_m;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            if timing {
                row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            if with_oracle && row.error.is_none() {
                match exact_htsp(metric, fleet) {
                    Ok(o) => {
                        row.opt = Some(o.opt_makespan);
                        row.ratio = Some(if o.opt_makespan > 0.0 { row.makespan / o.opt_makespan } else { 1.0 });
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            row
        })
        .collect();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let mean_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    let max_ratio = ratios.iter().copied().reduce(f64::max);
    BenchTable { seed: cfg.seed, rows, mean_ratio, max_ratio }
}
