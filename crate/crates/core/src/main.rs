use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use netinterv::estimation::{
    default_walk_start, estimate_degrees_edge_queries, estimate_sbm_edge_queries, estimate_sbm_neighbor_queries,
    mixing_steps_default, random_walk_sampler, EdgeOracle, EstimationResult, NeighborOracle, DEFAULT_C_MIX,
};
use netinterv::game::{EquilibriumSolver, GameInstance};
use netinterv::graph::{Graph, Groups};
use netinterv::harness::community::{fit_sbm_from_groups, girvan_newman_groups, GirvanNewmanParams};
use netinterv::harness::config::{ExperimentConfig, GeneratorSpec, RawConfig};
use netinterv::harness::experiment::{run_experiment, write_csv, RunOptions};
use netinterv::harness::io::{format_edge_list, load_edge_list, Indexing, LoadOptions};
use netinterv::harness::plot::plot_script;
use netinterv::interventions::{competitive_ratio, heuristic, optimal_intervention, Strategy, SuiteInputs};
use netinterv::linalg::Matrix;
use netinterv::models::sample;
use netinterv::spectral::{first_eigenvector, DEFAULT_TOL, POWER_MAX_ITERS};

#[derive(Parser)]
#[command(name = "netinterv", version, about = "Interventions in linear-quadratic network games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and write it as an edge list.
    Generate {
        /// Model settings as KEY=VALUE (same keys as the experiment config).
        #[arg(required = true)]
        settings: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equilibrium actions as JSON lines, then a summary line.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        game: GameArgs,
    },
    /// One intervention strategy at budget C, scored against the optimum.
    Intervene {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        budget: f64,
        /// File with one group label per vertex (for sbm_reconstructed); defaults to Girvan-Newman.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Query-based estimation of degrees or block probabilities.
    Estimate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Walk samples (random_walk) or queries per group (sbm_neighbor_queries).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_C_MIX)]
        c_mix: f64,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Girvan-Newman groups and the fitted block matrix.
    FitSbm {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 10)]
        min_big_clusters: usize,
        #[arg(long, default_value_t = 5)]
        min_cluster_size: usize,
        #[arg(long, default_value_t = 50)]
        max_clusters: usize,
    },
    /// Run a sweep described by a config file and write CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Add a wall_time column (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// gnuplot script for mean competitive ratio per strategy.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "zero")]
    indexing: Indexing,
    #[arg(long)]
    self_loops: bool,
    #[arg(long)]
    compact: bool,
}

#[derive(Args)]
struct GameArgs {
    /// Absolute interaction strength.
    #[arg(long, conflicts_with = "radius")]
    beta: Option<f64>,
    /// Target spectral radius of beta A (default 0.8).
    #[arg(long)]
    radius: Option<f64>,
    /// Constant standalone value for every agent.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    DegreeEdgeQueries,
    RandomWalk,
    SbmEdgeQueries,
    SbmNeighborQueries,
}

enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn load_graph(args: &GraphArgs) -> Result<Graph, CliError> {
    load_edge_list(
        &args.graph,
        LoadOptions {
            indexing: args.indexing,
            allow_self_loops: args.self_loops,
            compact: args.compact,
        },
    )
    .map_err(data)
}

fn build_game(graph: &Graph, args: &GameArgs) -> Result<GameInstance, CliError> {
    let beta = match (args.beta, args.radius) {
        (Some(b), _) => b,
        (None, r) => {
            let r = r.unwrap_or(0.8);
            let top = first_eigenvector(&graph.to_matrix(), DEFAULT_TOL, POWER_MAX_ITERS).map_err(data)?;
            if top.value > 0.0 {
                r / top.value
            } else {
                0.0
            }
        }
    };
    GameInstance::new(graph, beta, vec![args.b; graph.n()]).map_err(config)
}

fn load_labels(path: &Path, n: usize) -> Result<Groups, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let labels = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| l.parse::<usize>().map_err(|_| data(format!("label {}: '{l}' is not an integer", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    let groups = Groups::from_labels(labels).map_err(data)?;
    groups.check_len(n).map_err(data)?;
    Ok(groups)
}

fn groups_for(graph: &Graph, labels: &Option<PathBuf>) -> Result<Groups, CliError> {
    match labels {
        Some(path) => load_labels(path, graph.n()),
        None => Ok(girvan_newman_groups(graph, GirvanNewmanParams::default())),
    }
}

fn matrix_json(m: &Matrix) -> serde_json::Value {
    json!((0..m.rows()).map(|i| m.row(i).to_vec()).collect::<Vec<_>>())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(data),
    }
}

fn estimation_json<T>(r: &EstimationResult<T>, estimate: serde_json::Value) -> serde_json::Value {
    json!({
        "method": r.method,
        "queries": r.queries,
        "epsilon": r.epsilon,
        "delta": r.delta,
        "flags": r.flags,
        "estimate": estimate,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { settings, out } => {
            let raw = RawConfig::from_pairs(&settings).map_err(config)?;
            let gen = GeneratorSpec::from_raw(&raw).map_err(config)?;
            let g = sample(&gen.model, gen.seed).map_err(config)?;
            emit(&out, &format_edge_list(&g))
        }
        Command::Solve { graph, game } => {
            let g = load_graph(&graph)?;
            let game = build_game(&g, &game)?;
            let solver = EquilibriumSolver::new(&game).map_err(data)?;
            let eq = solver.equilibrium();
            let mut text = String::new();
            for (i, a) in eq.actions.iter().enumerate() {
                text.push_str(&json!({"vertex": i, "action": a}).to_string());
                text.push('\n');
            }
            let summary = json!({
                "beta": game.beta(),
                "beta_lambda1": solver.beta_lambda1(),
                "welfare": eq.welfare,
                "residual": eq.residual,
            });
            text.push_str(&summary.to_string());
            text.push('\n');
            emit(&None, &text)
        }
        Command::Intervene {
            graph,
            game,
            strategy,
            budget,
            labels,
        } => {
            let g = load_graph(&graph)?;
            let game = build_game(&g, &game)?;
            let solver = EquilibriumSolver::new(&game).map_err(data)?;
            let groups = match strategy {
                Strategy::SbmReconstructed => Some(groups_for(&g, &labels)?),
                _ => None,
            };
            let inputs = SuiteInputs {
                graph: Some(&g),
                expected: None,
                groups: groups.as_ref(),
            };
            let y = heuristic(&game, strategy, inputs, budget).map_err(config)?;
            let y_star = optimal_intervention(&game, budget, netinterv::interventions::DEFAULT_BUDGET_TOL).map_err(data)?;
            let report = competitive_ratio(&solver, &y, &y_star).ok();
            let out = json!({
                "strategy": strategy.as_str(),
                "budget": budget,
                "beta": game.beta(),
                "y": y.y,
                "welfare": solver.welfare_after(&y.y).map_err(data)?,
                "baseline_welfare": solver.baseline_welfare(),
                "optimal_welfare": report.map(|r| r.optimal_welfare),
                "competitive_ratio": report.map(|r| r.ratio),
            });
            emit(&None, &format!("{out}\n"))
        }
        Command::Estimate {
            graph,
            method,
            epsilon,
            delta,
            seed,
            samples,
            c_mix,
            labels,
        } => {
            let g = load_graph(&graph)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = match method {
                Method::DegreeEdgeQueries => {
                    let mut oracle = EdgeOracle::new(&g);
                    let r = estimate_degrees_edge_queries(&mut oracle, epsilon, delta, &mut rng).map_err(config)?;
                    estimation_json(&r, json!(r.estimate))
                }
                Method::RandomWalk => {
                    let start = default_walk_start(&g).ok_or_else(|| data("graph has no vertices"))?;
                    let mut oracle = NeighborOracle::new(&g, seed);
                    let steps = mixing_steps_default(g.n(), epsilon, c_mix);
                    let r = random_walk_sampler(&mut oracle, start, samples.unwrap_or(20_000), steps, &mut rng)
                        .map_err(data)?;
                    let mut v = estimation_json(&r, json!(r.estimate));
                    v["mixing_steps"] = json!(steps);
                    v["start"] = json!(start);
                    v
                }
                Method::SbmEdgeQueries => {
                    let groups = groups_for(&g, &labels)?;
                    let mut oracle = EdgeOracle::new(&g);
                    let r = estimate_sbm_edge_queries(&mut oracle, &groups, epsilon, delta, &mut rng).map_err(config)?;
                    estimation_json(&r, matrix_json(&r.estimate))
                }
                Method::SbmNeighborQueries => {
                    let groups = groups_for(&g, &labels)?;
                    let mut oracle = NeighborOracle::new(&g, seed);
                    let (r, recovery) =
                        estimate_sbm_neighbor_queries(&mut oracle, &groups, samples.unwrap_or(10_000), &mut rng)
                            .map_err(data)?;
                    let mut v = estimation_json(&r, matrix_json(&r.estimate));
                    v["scale_inconsistency"] = json!(recovery.inconsistency);
                    v["tree_gap"] = json!(recovery.tree_gap);
                    v
                }
            };
            emit(&None, &format!("{out}\n"))
        }
        Command::FitSbm {
            graph,
            min_big_clusters,
            min_cluster_size,
            max_clusters,
        } => {
            let g = load_graph(&graph)?;
            let params = GirvanNewmanParams {
                min_big_clusters,
                min_cluster_size,
                max_clusters,
            };
            let groups = girvan_newman_groups(&g, params);
            let (_, est) = fit_sbm_from_groups(&g, &groups).map_err(data)?;
            let out = json!({
                "labels": groups.labels(),
                "sizes": groups.sizes(),
                "block": matrix_json(&est.block),
                "singleton_groups": est.singleton_groups,
            });
            emit(&None, &format!("{out}\n"))
        }
        Command::Experiment {
            config: path,
            out,
            workers,
            timing,
        } => {
            let text = fs::read_to_string(&path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            let cfg = ExperimentConfig::parse(&text).map_err(config)?;
            let rows = run_experiment(&cfg, RunOptions { workers, timing }).map_err(data)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                let first = rows.iter().find_map(|r| r.error.as_deref()).unwrap_or_default();
                eprintln!("warning: {failed} of {} rows have no result (first: {first})", rows.len());
            }
            let mut buf = Vec::new();
            write_csv(&rows, timing, &mut buf).map_err(data)?;
            emit(&out, &String::from_utf8(buf).expect("CSV is UTF-8"))
        }
        Command::Plot { csv, out } => {
            let text = fs::read_to_string(&csv).map_err(|e| data(format!("{}: {e}", csv.display())))?;
            let plot = plot_script(&text).map_err(data)?;
            for w in &plot.warnings {
                eprintln!("warning: {w}");
            }
            emit(&out, &plot.script)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Config(msg) | CliError::Data(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}
