//! Parameter sweeps: every (axis value, trial) cell samples or loads a graph,
//! solves for the optimal intervention and scores each requested strategy
//! against it. Cells are independent and seeded from
//! `hash(base_seed, axis index, trial)`, so output does not depend on the
//! worker count.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::estimation::{
    default_walk_start, estimate_degrees_edge_queries, estimate_sbm_edge_queries, estimate_sbm_neighbor_queries,
    mixing_steps_default, random_walk_sampler, sbm_intervention_from_estimate, EdgeOracle, EstimationError,
    NeighborOracle,
};
use crate::game::{EquilibriumSolver, GameInstance};
use crate::graph::{ExpectedMatrix, Graph, Groups};
use crate::harness::community::girvan_newman_groups;
use crate::harness::config::{Axis, BetaSpec, ExperimentConfig, ModelSpec};
use crate::harness::io::{load_edge_list, EdgeListError, LoadOptions};
use crate::interventions::{
    competitive_ratio, heuristic, optimal_intervention, proportional_intervention, Intervention, InterventionError,
    Strategy, SuiteInputs, DEFAULT_BUDGET_TOL,
};
use crate::models::{expected_matrix, sample, GraphModel};
use crate::spectral::{cosine_similarity, first_eigenvector, DEFAULT_TOL, POWER_MAX_ITERS};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    EdgeList(#[from] EdgeListError),
    #[error("model: {0}")]
    Model(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub const CSV_COLUMNS: [&str; 12] = [
    "graph_id",
    "model",
    "axis",
    "axis_value",
    "seed",
    "strategy",
    "feasible",
    "welfare",
    "baseline_welfare",
    "competitive_ratio",
    "cosine_to_optimal",
    "queries_used",
];

/// One strategy evaluated on one realized graph. Numeric fields are `None`
/// when the cell is infeasible or the quantity is undefined (cosine of the
/// zero intervention, for instance).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub graph_id: String,
    pub model: String,
    pub axis: Axis,
    pub axis_index: usize,
    pub axis_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub feasible: bool,
    pub welfare: Option<f64>,
    pub baseline_welfare: Option<f64>,
    pub competitive_ratio: Option<f64>,
    pub cosine_to_optimal: Option<f64>,
    pub queries_used: Option<u64>,
    pub wall_time: Option<f64>,
    /// Why the strategy produced no numbers, if it failed. Not written to CSV.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub timing: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn cell_seed(base_seed: u64, axis_index: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ axis_index as u64) ^ trial as u64)
}

fn strategy_seed(cell: u64, strategy: Strategy) -> u64 {
    let idx = Strategy::ALL.iter().position(|&s| s == strategy).unwrap_or(0);
    splitmix64(cell ^ (0x5851_f42d_4c95_7f2d_u64.wrapping_mul(idx as u64 + 1)))
}

/// A realized graph plus what the model knows about it.
struct Realization {
    graph: Graph,
    expected: Option<ExpectedMatrix>,
    model_groups: Option<Groups>,
}

fn realize(
    cfg: &ExperimentConfig,
    loaded: Option<&Graph>,
    spec: &ModelSpec,
    seed: u64,
) -> Result<Realization, ExperimentError> {
    if let Some(g) = loaded {
        return Ok(Realization {
            graph: g.clone(),
            expected: None,
            model_groups: None,
        });
    }
    let model: GraphModel = spec
        .build(cfg.self_loops, cfg.clip)
        .map_err(|e| ExperimentError::Model(e.to_string()))?
        .ok_or_else(|| ExperimentError::Model("edge-list model has no generator".into()))?;
    let graph = sample(&model, seed).map_err(|e| ExperimentError::Model(e.to_string()))?;
    let expected = expected_matrix(&model).map_err(|e| ExperimentError::Model(e.to_string()))?;
    Ok(Realization {
        graph,
        expected: Some(expected),
        model_groups: model.groups(),
    })
}

fn resolve_beta(spec: BetaSpec, graph: &Graph) -> Result<f64, String> {
    match spec {
        BetaSpec::Absolute(b) => Ok(b),
        BetaSpec::Radius(r) => {
            if r == 0.0 {
                return Ok(0.0);
            }
            let top = first_eigenvector(&graph.to_matrix(), DEFAULT_TOL, POWER_MAX_ITERS).map_err(|e| e.to_string())?;
            // An edgeless graph has no network effect to scale.
            if top.value <= 0.0 {
                Ok(0.0)
            } else {
                Ok(r / top.value)
            }
        }
    }
}

#[derive(Debug)]
enum StrategyError {
    Intervention(InterventionError),
    Estimation(EstimationError),
    Other(String),
}

impl std::fmt::Display for StrategyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategyError::Intervention(e) => write!(f, "{e}"),
            StrategyError::Estimation(e) => write!(f, "{e}"),
            StrategyError::Other(e) => f.write_str(e),
        }
    }
}

impl From<InterventionError> for StrategyError {
    fn from(e: InterventionError) -> Self {
        StrategyError::Intervention(e)
    }
}

impl From<EstimationError> for StrategyError {
    fn from(e: EstimationError) -> Self {
        StrategyError::Estimation(e)
    }
}

struct CellContext<'a> {
    cfg: &'a ExperimentConfig,
    game: &'a GameInstance,
    graph: &'a Graph,
    expected: Option<&'a ExpectedMatrix>,
    groups: Option<&'a Groups>,
    budget: f64,
    seed: u64,
}

/// Intervention for one strategy and the number of oracle queries it used.
fn intervention_for(ctx: &CellContext<'_>, strategy: Strategy) -> Result<(Intervention, Option<u64>), StrategyError> {
    let cfg = ctx.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(strategy_seed(ctx.seed, strategy));
    let need_groups = || {
        ctx.groups
            .ok_or_else(|| StrategyError::Other(format!("strategy {strategy} needs group labels")))
    };
    match strategy {
        Strategy::EstimatedDegreeEdgeQueries => {
            let mut oracle = EdgeOracle::new(ctx.graph);
            let est = estimate_degrees_edge_queries(&mut oracle, cfg.est_epsilon, cfg.est_delta, &mut rng)?;
            let y = proportional_intervention(&est.estimate, ctx.budget)?.with_strategy(strategy);
            Ok((y, Some(est.queries)))
        }
        Strategy::EstimatedDegreeRandomWalk => {
            let start = default_walk_start(ctx.graph).ok_or(EstimationError::TooFewVertices(0))?;
            let mut oracle = NeighborOracle::new(ctx.graph, rng.gen::<u64>());
            let steps = mixing_steps_default(ctx.graph.n(), cfg.est_epsilon, cfg.c_mix);
            let est = random_walk_sampler(&mut oracle, start, cfg.walk_samples, steps, &mut rng)?;
            let y = proportional_intervention(&est.estimate, ctx.budget)?.with_strategy(strategy);
            Ok((y, Some(est.queries)))
        }
        Strategy::SbmEdgeQueries => {
            let groups = need_groups()?;
            let mut oracle = EdgeOracle::new(ctx.graph);
            let est = estimate_sbm_edge_queries(&mut oracle, groups, cfg.est_epsilon, cfg.est_delta, &mut rng)?;
            let y = sbm_intervention_from_estimate(&est.estimate, groups, ctx.budget)?.with_strategy(strategy);
            Ok((y, Some(est.queries)))
        }
        Strategy::SbmNeighborQueries => {
            let groups = need_groups()?;
            let mut oracle = NeighborOracle::new(ctx.graph, rng.gen::<u64>());
            let (est, _) = estimate_sbm_neighbor_queries(&mut oracle, groups, cfg.samples_per_group, &mut rng)?;
            let y = sbm_intervention_from_estimate(&est.estimate, groups, ctx.budget)?.with_strategy(strategy);
            Ok((y, Some(est.queries)))
        }
        _ => {
            let inputs = SuiteInputs {
                graph: Some(ctx.graph),
                expected: ctx.expected,
                groups: ctx.groups,
            };
            Ok((heuristic(ctx.game, strategy, inputs, ctx.budget)?, None))
        }
    }
}

struct Cell {
    axis_index: usize,
    axis_value: f64,
    trial: usize,
}

fn run_cell(
    cfg: &ExperimentConfig,
    loaded: Option<&Graph>,
    cell: &Cell,
    timing: bool,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let seed = cell_seed(cfg.seed, cell.axis_index, cell.trial);
    let spec = match cfg.axis {
        Axis::Density => cfg
            .model
            .with_density(cell.axis_value)
            .map_err(|e| ExperimentError::Model(e.to_string()))?,
        _ => cfg.model.clone(),
    };
    let real = realize(cfg, loaded, &spec, seed)?;
    let n = real.graph.n();
    let budget = cfg.budget_for(n, cell.axis_value);
    let template = ResultRow {
        graph_id: format!("{}-{}", cell.axis_index, cell.trial),
        model: spec.family().to_string(),
        axis: cfg.axis,
        axis_index: cell.axis_index,
        axis_value: cell.axis_value,
        trial: cell.trial,
        seed,
        strategy: Strategy::Baseline,
        feasible: false,
        welfare: None,
        baseline_welfare: None,
        competitive_ratio: None,
        cosine_to_optimal: None,
        queries_used: None,
        wall_time: None,
        error: None,
    };
    let infeasible = |reason: String| {
        cfg.strategies
            .iter()
            .map(|&strategy| ResultRow {
                strategy,
                error: Some(reason.clone()),
                ..template.clone()
            })
            .collect::<Vec<_>>()
    };

    let beta = match resolve_beta(cfg.beta_for(cell.axis_value), &real.graph) {
        Ok(b) => b,
        Err(e) => return Ok(infeasible(e)),
    };
    let game = GameInstance::new(&real.graph, beta, vec![cfg.b; n]).map_err(|e| ExperimentError::Model(e.to_string()))?;
    let solver = match EquilibriumSolver::new(&game) {
        Ok(s) => s,
        Err(e) => return Ok(infeasible(e.to_string())),
    };
    let optimal = match optimal_intervention(&game, budget, DEFAULT_BUDGET_TOL) {
        Ok(y) => y,
        Err(e) => return Ok(infeasible(e.to_string())),
    };

    let gn_groups;
    let groups = if real.model_groups.is_some() {
        real.model_groups.as_ref()
    } else if cfg
        .strategies
        .iter()
        .any(|s| matches!(s, Strategy::SbmReconstructed | Strategy::SbmEdgeQueries | Strategy::SbmNeighborQueries))
    {
        gn_groups = girvan_newman_groups(&real.graph, cfg.girvan_newman);
        Some(&gn_groups)
    } else {
        None
    };
    let ctx = CellContext {
        cfg,
        game: &game,
        graph: &real.graph,
        expected: real.expected.as_ref(),
        groups,
        budget,
        seed,
    };

    let baseline_welfare = solver.baseline_welfare();
    let mut rows = Vec::with_capacity(cfg.strategies.len());
    for &strategy in &cfg.strategies {
        let started = Instant::now();
        let mut row = ResultRow {
            strategy,
            feasible: true,
            baseline_welfare: Some(baseline_welfare),
            ..template.clone()
        };
        let outcome = if strategy == Strategy::Optimal {
            Ok((optimal.clone(), None))
        } else {
            intervention_for(&ctx, strategy)
        };
        match outcome {
            Ok((y, queries)) => {
                row.queries_used = queries;
                match competitive_ratio(&solver, &y, &optimal) {
                    Ok(report) => {
                        row.welfare = Some(report.welfare);
                        row.competitive_ratio = Some(report.ratio);
                    }
                    Err(InterventionError::ZeroOptimalWelfare) => {
                        row.welfare = solver.welfare_after(&y.y).ok();
                        row.error = Some(InterventionError::ZeroOptimalWelfare.to_string());
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row.cosine_to_optimal = cosine_similarity(&y.y, &optimal.y).ok();
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        if timing {
            row.wall_time = Some(started.elapsed().as_secs_f64());
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs the full sweep. Rows come back sorted by (axis index, trial, strategy).
pub fn run_experiment(cfg: &ExperimentConfig, options: RunOptions) -> Result<Vec<ResultRow>, ExperimentError> {
    let loaded = match &cfg.model {
        ModelSpec::EdgeList { path, indexing, compact } => Some(load_edge_list(
            path,
            LoadOptions {
                indexing: *indexing,
                allow_self_loops: cfg.self_loops,
                compact: *compact,
            },
        )?),
        _ => None,
    };
    let cells: Vec<Cell> = cfg
        .values
        .iter()
        .enumerate()
        .flat_map(|(axis_index, &axis_value)| {
            (0..cfg.trials).map(move |trial| Cell {
                axis_index,
                axis_value,
                trial,
            })
        })
        .collect();
    let workers = options.workers.unwrap_or(cfg.workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let per_cell: Vec<Result<Vec<ResultRow>, ExperimentError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cfg, loaded.as_ref(), cell, options.timing))
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_cell {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| (a.axis_index, a.trial, a.strategy).cmp(&(b.axis_index, b.trial, b.strategy)));
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn format_csv(rows: &[ResultRow], timing: bool) -> String {
    let mut out = CSV_COLUMNS.join(",");
    if timing {
        out.push_str(",wall_time");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.graph_id),
            csv_field(&r.model),
            r.axis.as_str(),
            r.axis_value,
            r.seed,
            r.strategy,
            r.feasible,
            opt(r.welfare),
            opt(r.baseline_welfare),
            opt(r.competitive_ratio),
            opt(r.cosine_to_optimal),
            opt(r.queries_used),
        );
        if timing {
            let _ = write!(out, ",{}", opt(r.wall_time));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[ResultRow], timing: bool, mut sink: impl io::Write) -> io::Result<()> {
    sink.write_all(format_csv(rows, timing).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> ExperimentConfig {
        let base = "model = gnp\nn = 30\np = 0.2\naxis = budget\nvalue = 0.5\nvalue = 2\ntrials = 3\nseed = 11\n";
        ExperimentConfig::parse(&format!("{base}{extra}")).unwrap()
    }

    #[test]
    fn baseline_only_rows() {
        let cfg = config("strategy = baseline\n");
        let rows = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.feasible);
            assert_eq!(r.welfare, r.baseline_welfare);
            assert!(r.cosine_to_optimal.is_none());
            assert!(r.competitive_ratio.unwrap() < 1.0);
        }
    }

    #[test]
    fn ratios_bounded_and_optimal_is_one() {
        let cfg = config(
            "strategy = optimal\nstrategy = uniform\nstrategy = realized_degree\nstrategy = first_eigenvector_expected\nstrategy = estimated_degree_edge_queries\nstrategy = estimated_degree_random_walk\nstrategy = sbm_reconstructed\nest_epsilon = 0.3\nwalk_samples = 500\ngn_min_big = 2\n",
        );
        let rows = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 7);
        for r in &rows {
            assert!(r.error.is_none(), "{:?}", r.error);
            let ratio = r.competitive_ratio.unwrap();
            assert!(ratio <= 1.0 + 1e-6, "{} {ratio}", r.strategy);
            if r.strategy == Strategy::Optimal {
                assert!((ratio - 1.0).abs() < 1e-12);
            }
            assert_eq!(r.queries_used.is_some(), r.strategy.is_estimated());
        }
    }

    #[test]
    fn infeasible_beta_flags_rows() {
        let cfg = config("strategy = uniform\nbeta_mode = absolute\nbeta = 5\n");
        let rows = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert!(rows.iter().all(|r| !r.feasible && r.welfare.is_none()));
        let csv = format_csv(&rows, false);
        assert!(csv.lines().nth(1).unwrap().ends_with(",uniform,false,,,,,"));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = config("strategy = uniform\nstrategy = optimal\nstrategy = estimated_degree_random_walk\nwalk_samples = 300\n");
        let one = format_csv(&run_experiment(&cfg, RunOptions { workers: Some(1), timing: false }).unwrap(), false);
        let eight = format_csv(&run_experiment(&cfg, RunOptions { workers: Some(8), timing: false }).unwrap(), false);
        assert_eq!(one, eight);
    }

    #[test]
    fn density_axis_changes_model() {
        let cfg = ExperimentConfig::parse(
            "model = sbm\nsize = 10\nsize = 10\np_in = 0.5\np_out = 0.05\naxis = density\nvalue = 0.3\nvalue = 0.6\nstrategy = sbm_neighbor_queries\nstrategy = sbm_edge_queries\ntrials = 2\nsamples_per_group = 200\nest_epsilon = 0.3\n",
        )
        .unwrap();
        let rows = run_experiment(&cfg, RunOptions::default()).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.competitive_ratio.is_some() && r.queries_used.unwrap() > 0));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn cell_seeds_differ() {
        let mut seeds: Vec<u64> = (0..5).flat_map(|a| (0..5).map(move |t| cell_seed(3, a, t))).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 25);
    }
}
