//! Linear-quadratic network game: equilibrium `a* = (I - beta A)^-1 b`,
//! welfare `W = |a*|^2 / 2`, and best-response dynamics.

use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{dot, norm_inf, LinalgError, Lu, Matrix};
use crate::spectral::{first_eigenvector, SpectralError, DEFAULT_TOL, POWER_MAX_ITERS};

/// `beta lambda_1` must stay below `1 - FEASIBILITY_MARGIN`.
pub const FEASIBILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("beta must be finite and nonnegative, got {0}")]
    InvalidBeta(f64),
    #[error("standalone value b[{index}] = {value} must be finite and nonnegative")]
    InvalidStandalone { index: usize, value: f64 },
    #[error("vector length {got} does not match game size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("infeasible game: beta * lambda_1 = {beta_lambda1} >= 1 - {FEASIBILITY_MARGIN:e}")]
    Infeasible { beta_lambda1: f64 },
    #[error("best responses did not converge in {rounds} rounds (last step {last_step:e})")]
    NotConverged { rounds: usize, last_step: f64 },
    #[error("best responses diverged at round {round} (step {step:e})")]
    Diverged { round: usize, step: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone)]
pub struct GameInstance {
    adjacency: Matrix,
    beta: f64,
    b: Vec<f64>,
}

impl GameInstance {
    pub fn new(graph: &Graph, beta: f64, b: Vec<f64>) -> Result<Self, GameError> {
        Self::from_matrix(graph.to_matrix(), beta, b)
    }

    /// Game on an arbitrary symmetric interaction matrix (e.g. an expected or
    /// reconstructed adjacency matrix).
    pub fn from_matrix(adjacency: Matrix, beta: f64, b: Vec<f64>) -> Result<Self, GameError> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(GameError::InvalidBeta(beta));
        }
        if let Some((index, &value)) = b.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(GameError::InvalidStandalone { index, value });
        }
        if !adjacency.is_square() {
            return Err(SpectralError::NotSquare {
                rows: adjacency.rows(),
                cols: adjacency.cols(),
            }
            .into());
        }
        if adjacency.rows() != b.len() {
            return Err(GameError::LengthMismatch {
                expected: adjacency.rows(),
                got: b.len(),
            });
        }
        Ok(Self { adjacency, beta, b })
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    /// Same network and beta with new standalone values.
    pub fn with_b(&self, b: Vec<f64>) -> Result<Self, GameError> {
        Self::from_matrix(self.adjacency.clone(), self.beta, b)
    }

    /// `I - beta A`.
    pub fn m(&self) -> Matrix {
        Matrix::identity(self.n()).sub(&self.adjacency.scale(self.beta))
    }

    /// `beta lambda_1(A)`.
    pub fn beta_lambda1(&self) -> Result<f64, GameError> {
        if self.beta == 0.0 || self.n() == 0 {
            return Ok(0.0);
        }
        let top = first_eigenvector(&self.adjacency, DEFAULT_TOL, POWER_MAX_ITERS)?;
        Ok(self.beta * top.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub actions: Vec<f64>,
    pub welfare: f64,
    /// `|a* - b - beta A a*|_inf`.
    pub residual: f64,
    pub feasible: bool,
}

pub fn welfare_of(actions: &[f64]) -> f64 {
    0.5 * dot(actions, actions)
}

/// Sum of utilities `b_i a_i - a_i^2/2 + beta sum_j A_ij a_i a_j` at `actions`.
/// At equilibrium this equals [`welfare_of`].
pub fn total_utility(game: &GameInstance, actions: &[f64]) -> f64 {
    let aa = game.adjacency.mul_vec(actions);
    (0..game.n())
        .map(|i| game.b[i] * actions[i] - 0.5 * actions[i] * actions[i] + game.beta * actions[i] * aa[i])
        .sum()
}

/// A feasible game with `I - beta A` factored once, for repeated solves.
#[derive(Debug, Clone)]
pub struct EquilibriumSolver<'g> {
    game: &'g GameInstance,
    lu: Lu,
    beta_lambda1: f64,
    baseline: Vec<f64>,
}

impl<'g> EquilibriumSolver<'g> {
    pub fn new(game: &'g GameInstance) -> Result<Self, GameError> {
        let beta_lambda1 = game.beta_lambda1()?;
        if beta_lambda1 >= 1.0 - FEASIBILITY_MARGIN {
            return Err(GameError::Infeasible { beta_lambda1 });
        }
        let lu = Lu::factorize(&game.m())?;
        let baseline = lu.solve(&game.b)?;
        Ok(Self {
            game,
            lu,
            beta_lambda1,
            baseline,
        })
    }

    pub fn game(&self) -> &GameInstance {
        self.game
    }

    pub fn beta_lambda1(&self) -> f64 {
        self.beta_lambda1
    }

    /// `M^-1 x`.
    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>, GameError> {
        self.check_len(x)?;
        Ok(self.lu.solve(x)?)
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GameError> {
        if x.len() != self.game.n() {
            return Err(GameError::LengthMismatch {
                expected: self.game.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn baseline_actions(&self) -> &[f64] {
        &self.baseline
    }

    pub fn baseline_welfare(&self) -> f64 {
        welfare_of(&self.baseline)
    }

    fn residual_for(&self, actions: &[f64], rhs: &[f64]) -> f64 {
        let aa = self.game.adjacency.mul_vec(actions);
        (0..actions.len())
            .map(|i| (actions[i] - rhs[i] - self.game.beta * aa[i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn equilibrium(&self) -> EquilibriumResult {
        EquilibriumResult {
            actions: self.baseline.clone(),
            welfare: self.baseline_welfare(),
            residual: self.residual_for(&self.baseline, &self.game.b),
            feasible: true,
        }
    }

    /// Equilibrium actions with standalone values `b + y`.
    pub fn actions_after(&self, y: &[f64]) -> Result<Vec<f64>, GameError> {
        let z = self.solve(y)?;
        Ok(self.baseline.iter().zip(&z).map(|(a, d)| a + d).collect())
    }

    pub fn welfare_after(&self, y: &[f64]) -> Result<f64, GameError> {
        Ok(welfare_of(&self.actions_after(y)?))
    }

    /// `(|M^-1 y|^2 + 2 (M^-1 b)^T (M^-1 y)) / 2`.
    pub fn delta_welfare(&self, y: &[f64]) -> Result<f64, GameError> {
        let z = self.solve(y)?;
        Ok(0.5 * (dot(&z, &z) + 2.0 * dot(&self.baseline, &z)))
    }
}

pub fn equilibrium(game: &GameInstance) -> Result<EquilibriumResult, GameError> {
    Ok(EquilibriumSolver::new(game)?.equilibrium())
}

pub fn welfare_after(game: &GameInstance, y: &[f64]) -> Result<f64, GameError> {
    EquilibriumSolver::new(game)?.welfare_after(y)
}

pub fn delta_welfare(game: &GameInstance, y: &[f64]) -> Result<f64, GameError> {
    EquilibriumSolver::new(game)?.delta_welfare(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseOutcome {
    /// Welfare `|a|^2 / 2` of the starting profile and after every round.
    pub welfare: Vec<f64>,
    pub actions: Vec<f64>,
    pub rounds: usize,
    pub last_step: f64,
}

/// Synchronous best responses `a <- b + beta A a` from `a0` (zero when `None`)
/// until the sup-norm step is at most `step_tol`.
pub fn best_response_dynamics(
    game: &GameInstance,
    a0: Option<&[f64]>,
    step_tol: f64,
    max_rounds: usize,
) -> Result<BestResponseOutcome, GameError> {
    let n = game.n();
    let mut a = match a0 {
        Some(v) if v.len() != n => {
            return Err(GameError::LengthMismatch {
                expected: n,
                got: v.len(),
            })
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let mut welfare = vec![welfare_of(&a)];
    let mut first_step = None;
    let mut step = f64::INFINITY;
    for round in 1..=max_rounds {
        let aa = game.adjacency.mul_vec(&a);
        let next: Vec<f64> = (0..n).map(|i| game.b[i] + game.beta * aa[i]).collect();
        let delta: Vec<f64> = next.iter().zip(&a).map(|(x, y)| x - y).collect();
        step = norm_inf(&delta);
        a = next;
        welfare.push(welfare_of(&a));
        let reference = *first_step.get_or_insert(step);
        if !step.is_finite() || step > 1e12 * reference.max(1.0) {
            return Err(GameError::Diverged { round, step });
        }
        if step <= step_tol {
            return Ok(BestResponseOutcome {
                welfare,
                actions: a,
                rounds: round,
                last_step: step,
            });
        }
    }
    Err(GameError::NotConverged {
        rounds: max_rounds,
        last_step: step,
    })
}
