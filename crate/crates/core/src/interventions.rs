//! Budget-constrained interventions `y` (new standalone values `b + y`,
//! `|y|^2 = C`), the optimal one and the heuristics compared against it.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::game::{EquilibriumSolver, GameError, GameInstance, FEASIBILITY_MARGIN};
use crate::graph::{expected_degree_vector, ExpectedMatrix, Graph, Groups};
use crate::linalg::{dot, norm2, Matrix};
use crate::spectral::{
    alpha_values, first_eigenvector, symmetric_eigen, EigenDecomposition, SpectralError, DEFAULT_TOL,
    POWER_MAX_ITERS,
};

/// Below `HARD_CASE_RATIO * |b|` the top-eigenspace component of `b` is treated as zero.
pub const HARD_CASE_RATIO: f64 = 1e-10;
pub const BISECTION_MAX_ITERS: usize = 200;
pub const DEFAULT_BUDGET_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Baseline,
    Custom,
    EstimatedDegreeEdgeQueries,
    EstimatedDegreeRandomWalk,
    ExpectedDegree,
    FirstEigenvectorExpected,
    FirstEigenvectorRealized,
    Optimal,
    RealizedDegree,
    SbmEdgeQueries,
    SbmNeighborQueries,
    SbmReconstructed,
    Uniform,
}

impl Strategy {
    pub const ALL: [Strategy; 13] = [
        Strategy::Baseline,
        Strategy::Custom,
        Strategy::EstimatedDegreeEdgeQueries,
        Strategy::EstimatedDegreeRandomWalk,
        Strategy::ExpectedDegree,
        Strategy::FirstEigenvectorExpected,
        Strategy::FirstEigenvectorRealized,
        Strategy::Optimal,
        Strategy::RealizedDegree,
        Strategy::SbmEdgeQueries,
        Strategy::SbmNeighborQueries,
        Strategy::SbmReconstructed,
        Strategy::Uniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Custom => "custom",
            Strategy::EstimatedDegreeEdgeQueries => "estimated_degree_edge_queries",
            Strategy::EstimatedDegreeRandomWalk => "estimated_degree_random_walk",
            Strategy::ExpectedDegree => "expected_degree",
            Strategy::FirstEigenvectorExpected => "first_eigenvector_expected",
            Strategy::FirstEigenvectorRealized => "first_eigenvector_realized",
            Strategy::Optimal => "optimal",
            Strategy::RealizedDegree => "realized_degree",
            Strategy::SbmEdgeQueries => "sbm_edge_queries",
            Strategy::SbmNeighborQueries => "sbm_neighbor_queries",
            Strategy::SbmReconstructed => "sbm_reconstructed",
            Strategy::Uniform => "uniform",
        }
    }

    /// Strategies that need query access to the graph rather than a closed form.
    pub fn is_estimated(self) -> bool {
        matches!(
            self,
            Strategy::EstimatedDegreeEdgeQueries
                | Strategy::EstimatedDegreeRandomWalk
                | Strategy::SbmEdgeQueries
                | Strategy::SbmNeighborQueries
        )
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy '{0}'")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterventionError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("budget must be finite and nonnegative, got {0}")]
    InvalidBudget(f64),
    #[error("intervention direction is the zero vector")]
    ZeroDirection,
    #[error("multiplier bisection did not converge (relative budget error {0:e})")]
    BisectionFailed(f64),
    #[error("strategy {strategy} needs {input}")]
    MissingInput { strategy: Strategy, input: &'static str },
    #[error("strategy {0} is not a closed-form heuristic")]
    Unsupported(Strategy),
    #[error("optimal welfare is zero; competitive ratio undefined")]
    ZeroOptimalWelfare,
    #[error("vector length {got} does not match game size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    pub y: Vec<f64>,
    pub budget: f64,
    pub strategy: Strategy,
}

impl Intervention {
    pub fn baseline(n: usize, budget: f64) -> Self {
        Self {
            y: vec![0.0; n],
            budget,
            strategy: Strategy::Baseline,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn norm_squared(&self) -> f64 {
        dot(&self.y, &self.y)
    }
}

fn check_budget(budget: f64) -> Result<(), InterventionError> {
    if !budget.is_finite() || budget < 0.0 {
        return Err(InterventionError::InvalidBudget(budget));
    }
    Ok(())
}

/// `y = sqrt(C) d / |d|`, labelled [`Strategy::Custom`].
pub fn proportional_intervention(direction: &[f64], budget: f64) -> Result<Intervention, InterventionError> {
    check_budget(budget)?;
    let norm = norm2(direction);
    if norm == 0.0 || !norm.is_finite() {
        return Err(InterventionError::ZeroDirection);
    }
    let s = budget.sqrt() / norm;
    Ok(Intervention {
        y: direction.iter().map(|d| d * s).collect(),
        budget,
        strategy: Strategy::Custom,
    })
}

/// Optimal intervention plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub intervention: Intervention,
    /// Lagrange multiplier `mu >= alpha_1`.
    pub mu: f64,
    pub hard_case: bool,
    /// Multiplicity of the top eigenvalue used for grouping.
    pub top_multiplicity: usize,
}

pub fn optimal_intervention(game: &GameInstance, budget: f64, tol: f64) -> Result<Intervention, InterventionError> {
    Ok(optimal_intervention_detailed(game, budget, tol)?.intervention)
}

pub fn optimal_intervention_detailed(
    game: &GameInstance,
    budget: f64,
    tol: f64,
) -> Result<OptimalSolution, InterventionError> {
    let decomp = symmetric_eigen(game.adjacency(), DEFAULT_TOL)?;
    optimal_from_decomposition(game, &decomp, budget, tol)
}

/// Finds `t > 0` with `g(t) = target` for `g` decreasing. Returns the smallest
/// bracket point when `g` stays at or above `target` down to underflow.
fn solve_decreasing(g: impl Fn(f64) -> f64, target: f64, tol: f64) -> Result<f64, InterventionError> {
    let mut hi = 1.0;
    while g(hi) > target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(InterventionError::BisectionFailed(f64::INFINITY));
        }
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(lo);
        }
        if g(lo) >= target {
            break;
        }
        hi = lo;
    }
    let mut mid = lo;
    for _ in 0..BISECTION_MAX_ITERS {
        // Geometric midpoint keeps relative precision when t is tiny.
        mid = (lo * hi).sqrt();
        let v = g(mid);
        if (v - target).abs() <= tol * target {
            return Ok(mid);
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let err = (g(mid) - target).abs() / target;
    if err > 1e-6 {
        return Err(InterventionError::BisectionFailed(err));
    }
    Ok(mid)
}

/// Solves `max W(b + y)` s.t. `|y|^2 = C` in the eigenbasis of `A`:
/// `ybar_l = alpha_l bbar_l / (mu - alpha_l)` with `mu > alpha_1` fixed by the budget.
pub fn optimal_from_decomposition(
    game: &GameInstance,
    decomp: &EigenDecomposition,
    budget: f64,
    tol: f64,
) -> Result<OptimalSolution, InterventionError> {
    check_budget(budget)?;
    let n = game.n();
    let beta_lambda1 = game.beta() * decomp.lambda1().max(0.0);
    if beta_lambda1 >= 1.0 - FEASIBILITY_MARGIN {
        return Err(GameError::Infeasible { beta_lambda1 }.into());
    }
    let alpha = alpha_values(decomp.values(), game.beta())?;
    let a1 = alpha[0];
    let top = alpha.iter().take_while(|&&a| a >= a1 * (1.0 - 1e-9)).count();
    let bbar = decomp.project(game.b());
    let b_norm = norm2(game.b());
    let top_norm = norm2(&bbar[..top]);

    if budget == 0.0 {
        return Ok(OptimalSolution {
            intervention: Intervention {
                y: vec![0.0; n],
                budget,
                strategy: Strategy::Optimal,
            },
            mu: f64::INFINITY,
            hard_case: false,
            top_multiplicity: top,
        });
    }

    // Components inside the top group share the denominator t = mu - alpha_1.
    let coord = |l: usize, t: f64| {
        let denom = if l < top { t } else { t + (a1 - alpha[l]) };
        alpha[l] * bbar[l] / denom
    };
    let g_all = |t: f64| (0..n).map(|l| coord(l, t).powi(2)).sum::<f64>();
    let g_rest = |t: f64| (top..n).map(|l| coord(l, t).powi(2)).sum::<f64>();

    let hard_case = b_norm == 0.0 || top_norm < HARD_CASE_RATIO * b_norm;
    let mut ybar = vec![0.0; n];
    let t;
    if !hard_case {
        t = solve_decreasing(g_all, budget, tol)?;
        for (l, y) in ybar.iter_mut().enumerate() {
            *y = coord(l, t);
        }
    } else if g_rest(0.0) >= budget {
        t = solve_decreasing(g_rest, budget, tol)?;
        for (l, y) in ybar.iter_mut().enumerate().skip(top) {
            *y = coord(l, t);
        }
    } else {
        t = 0.0;
        for (l, y) in ybar.iter_mut().enumerate().skip(top) {
            *y = coord(l, 0.0);
        }
        let used = dot(&ybar, &ybar);
        ybar[0] = (budget - used).max(0.0).sqrt();
    }

    let norm = norm2(&ybar);
    if norm > 0.0 {
        let s = budget.sqrt() / norm;
        ybar.iter_mut().for_each(|v| *v *= s);
    }
    Ok(OptimalSolution {
        intervention: Intervention {
            y: decomp.unproject(&ybar),
            budget,
            strategy: Strategy::Optimal,
        },
        mu: a1 + t,
        hard_case,
        top_multiplicity: top,
    })
}

/// Optional inputs some heuristics need.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteInputs<'a> {
    /// Realized graph, required for [`Strategy::SbmReconstructed`].
    pub graph: Option<&'a Graph>,
    pub expected: Option<&'a ExpectedMatrix>,
    pub groups: Option<&'a Groups>,
}

pub const DEFAULT_SUITE: [Strategy; 7] = [
    Strategy::Baseline,
    Strategy::Uniform,
    Strategy::RealizedDegree,
    Strategy::ExpectedDegree,
    Strategy::FirstEigenvectorRealized,
    Strategy::FirstEigenvectorExpected,
    Strategy::SbmReconstructed,
];

fn leading_vector(m: &Matrix) -> Result<Vec<f64>, InterventionError> {
    Ok(first_eigenvector(m, DEFAULT_TOL, POWER_MAX_ITERS)?.vector)
}

/// One closed-form strategy at budget `C`. Estimation-based strategies are
/// handled by the estimation module.
pub fn heuristic(
    game: &GameInstance,
    strategy: Strategy,
    inputs: SuiteInputs<'_>,
    budget: f64,
) -> Result<Intervention, InterventionError> {
    let n = game.n();
    let direction = match strategy {
        Strategy::Baseline => {
            check_budget(budget)?;
            return Ok(Intervention::baseline(n, budget));
        }
        Strategy::Optimal => return optimal_intervention(game, budget, DEFAULT_BUDGET_TOL),
        Strategy::Uniform => vec![1.0; n],
        Strategy::RealizedDegree => game.adjacency().row_sums(),
        Strategy::ExpectedDegree => {
            let expected = inputs.expected.ok_or(InterventionError::MissingInput {
                strategy,
                input: "an expected matrix",
            })?;
            expected_degree_vector(expected)
        }
        Strategy::FirstEigenvectorRealized => leading_vector(game.adjacency())?,
        Strategy::FirstEigenvectorExpected => {
            let expected = inputs.expected.ok_or(InterventionError::MissingInput {
                strategy,
                input: "an expected matrix",
            })?;
            leading_vector(expected.matrix())?
        }
        Strategy::SbmReconstructed => {
            let missing = |input| InterventionError::MissingInput { strategy, input };
            let groups = inputs.groups.ok_or(missing("group labels"))?;
            let graph = inputs.graph.ok_or(missing("the realized graph"))?;
            let tiled = groups.tile_without_loops(&groups.block_densities(graph));
            leading_vector(&tiled)?
        }
        Strategy::Custom
        | Strategy::EstimatedDegreeEdgeQueries
        | Strategy::EstimatedDegreeRandomWalk
        | Strategy::SbmEdgeQueries
        | Strategy::SbmNeighborQueries => return Err(InterventionError::Unsupported(strategy)),
    };
    if direction.len() != n {
        return Err(InterventionError::LengthMismatch {
            expected: n,
            got: direction.len(),
        });
    }
    Ok(proportional_intervention(&direction, budget)?.with_strategy(strategy))
}

pub fn heuristic_suite(
    game: &GameInstance,
    inputs: SuiteInputs<'_>,
    strategies: &[Strategy],
    budget: f64,
) -> Result<Vec<Intervention>, InterventionError> {
    strategies.iter().map(|&s| heuristic(game, s, inputs, budget)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    /// `W(y) / W(y*)`.
    pub ratio: f64,
    pub welfare: f64,
    pub optimal_welfare: f64,
    pub delta_welfare: f64,
    pub optimal_delta_welfare: f64,
}

pub fn competitive_ratio(
    solver: &EquilibriumSolver<'_>,
    y: &Intervention,
    y_star: &Intervention,
) -> Result<RatioReport, InterventionError> {
    let welfare = solver.welfare_after(&y.y)?;
    let optimal_welfare = solver.welfare_after(&y_star.y)?;
    if optimal_welfare == 0.0 {
        return Err(InterventionError::ZeroOptimalWelfare);
    }
    Ok(RatioReport {
        ratio: welfare / optimal_welfare,
        welfare,
        optimal_welfare,
        delta_welfare: welfare - solver.baseline_welfare(),
        optimal_delta_welfare: optimal_welfare - solver.baseline_welfare(),
    })
}

/// Guaranteed competitive ratio of an intervention whose cosine similarity
/// with the optimum is at least `gamma` (valid when `C > max(|b|^2, 1)`).
pub fn cosine_ratio_lower_bound(gamma: f64) -> f64 {
    1.0 - 4.0 * (2.0 * (1.0 - gamma).max(0.0)).sqrt()
}

/// Ceiling on the competitive ratio of an intervention with cosine similarity
/// at most `gamma` to the optimum, in the large-budget regime.
pub fn blind_ratio_upper_bound(gamma: f64, alpha1: f64, alpha2: f64) -> f64 {
    let r = alpha2 / alpha1;
    gamma * gamma * (1.0 - r) + r + 2.0 * r.sqrt()
}

/// Budget above which the expected-degree intervention is near-optimal on a
/// G(w) graph: `256 |b|^2 / (eps beta d_tilde)^2`.
pub fn gw_budget_threshold(b: &[f64], beta: f64, d_tilde: f64, epsilon: f64) -> f64 {
    256.0 * dot(b, b) / (epsilon * beta * d_tilde).powi(2)
}
