//! Random graph families with independent edges: arbitrary expected matrices,
//! Chung–Lu style `G(w)`, `G(n, p)`, power-law `G(w)` and stochastic block models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ExpectedMatrix, Graph, Groups, GroupsError, MatrixViolation};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("weights must be non-empty, finite and strictly positive")]
    NonPositiveWeights,
    #[error("weights must be sorted in descending order (w[{0}] < w[{1}])")]
    UnsortedWeights(usize, usize),
    #[error("largest weight {w1} exceeds sqrt(sum of weights) = {sqrt_sum}; edge probabilities would exceed 1")]
    ProbabilityBound { w1: f64, sqrt_sum: f64 },
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("power-law parameters invalid: {0}")]
    InvalidPowerLaw(&'static str),
    #[error("no power-law fit with offset >= 0: the endpoints require offset {required_offset}")]
    InfeasibleFit { required_offset: f64 },
    #[error("degree range is degenerate (d_max = d_min); a constant sequence has no power-law fit")]
    DegenerateRange,
    #[error("group sizes sum to {sum}, expected {n}")]
    SizeMismatch { n: usize, sum: usize },
    #[error("block matrix is {got}x{got}, expected {expected}x{expected}")]
    BlockShape { expected: usize, got: usize },
    #[error("invalid groups: {0}")]
    Groups(#[from] GroupsError),
    #[error("invalid block/expected matrix: {0}")]
    Matrix(#[from] MatrixViolation),
    #[error("graph must have at least one vertex")]
    EmptyModel,
}

/// What to do when `w_i w_j / sum(w)` exceeds 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityOverflow {
    /// Refuse to build the model (the family assumes `w_1 <= sqrt(sum w)`).
    #[default]
    Reject,
    /// Clamp each pair probability at 1. Opt-in only; the clamped model is no
    /// longer an exact `G(w)` and expected degrees fall below `w`.
    Clip,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    IndependentEdges(ExpectedMatrix),
    Gw {
        weights: Vec<f64>,
    },
    Gnp {
        n: usize,
        p: f64,
    },
    PowerLaw {
        n: usize,
        sigma: f64,
        c: f64,
        offset: f64,
    },
    Sbm {
        sizes: Vec<usize>,
        probabilities: Matrix,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphModel {
    pub kind: ModelKind,
    pub allow_self_loops: bool,
    pub overflow: ProbabilityOverflow,
}

impl GraphModel {
    pub fn new(kind: ModelKind, allow_self_loops: bool) -> Result<Self, ModelError> {
        let model = Self {
            kind,
            allow_self_loops,
            overflow: ProbabilityOverflow::Reject,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_overflow(mut self, overflow: ProbabilityOverflow) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn gnp(n: usize, p: f64, allow_self_loops: bool) -> Result<Self, ModelError> {
        Self::new(ModelKind::Gnp { n, p }, allow_self_loops)
    }

    pub fn gw(weights: Vec<f64>, allow_self_loops: bool) -> Result<Self, ModelError> {
        Self::new(ModelKind::Gw { weights }, allow_self_loops)
    }

    pub fn power_law(
        n: usize,
        sigma: f64,
        c: f64,
        offset: f64,
        allow_self_loops: bool,
        overflow: ProbabilityOverflow,
    ) -> Result<Self, ModelError> {
        let model = Self {
            kind: ModelKind::PowerLaw { n, sigma, c, offset },
            allow_self_loops,
            overflow,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn sbm(sizes: Vec<usize>, probabilities: Matrix, allow_self_loops: bool) -> Result<Self, ModelError> {
        Self::new(ModelKind::Sbm { sizes, probabilities }, allow_self_loops)
    }

    pub fn n(&self) -> usize {
        match &self.kind {
            ModelKind::IndependentEdges(m) => m.n(),
            ModelKind::Gw { weights } => weights.len(),
            ModelKind::Gnp { n, .. } | ModelKind::PowerLaw { n, .. } => *n,
            ModelKind::Sbm { sizes, .. } => sizes.iter().sum(),
        }
    }

    /// Group labels for SBM models, `None` otherwise.
    pub fn groups(&self) -> Option<Groups> {
        match &self.kind {
            ModelKind::Sbm { sizes, .. } => Groups::from_sizes(sizes).ok(),
            _ => None,
        }
    }

    /// The weight sequence for `G(w)`-type models (`G(n,p)` uses `w_i = np`).
    pub fn weights(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ModelKind::Gw { weights } => Some(weights.clone()),
            ModelKind::Gnp { n, p } => Some(vec![*n as f64 * p; *n]),
            ModelKind::PowerLaw { n, sigma, c, offset } => Some(power_law_sequence(*n, *sigma, *c, *offset)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n() == 0 {
            return Err(ModelError::EmptyModel);
        }
        match &self.kind {
            ModelKind::IndependentEdges(_) => Ok(()),
            ModelKind::Gw { weights } => check_gw_weights(weights, self.overflow),
            ModelKind::Gnp { p, .. } => {
                if (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(ModelError::InvalidProbability(*p))
                }
            }
            ModelKind::PowerLaw { n, sigma, c, offset } => {
                check_power_law_params(*sigma, *c, *offset)?;
                check_gw_weights(&power_law_sequence(*n, *sigma, *c, *offset), self.overflow)
            }
            ModelKind::Sbm { sizes, probabilities } => {
                Groups::from_sizes(sizes)?;
                if probabilities.rows() != sizes.len() || !probabilities.is_square() {
                    return Err(ModelError::BlockShape {
                        expected: sizes.len(),
                        got: probabilities.rows(),
                    });
                }
                crate::graph::validate(probabilities, 0.0)?;
                Ok(())
            }
        }
    }
}

fn check_gw_weights(weights: &[f64], overflow: ProbabilityOverflow) -> Result<(), ModelError> {
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(ModelError::NonPositiveWeights);
    }
    if let Some(i) = weights.windows(2).position(|p| p[0] < p[1]) {
        return Err(ModelError::UnsortedWeights(i, i + 1));
    }
    if overflow == ProbabilityOverflow::Reject {
        check_probability_bound(weights)?;
    }
    Ok(())
}

/// `w_1 <= sqrt(sum w)`, which keeps every `w_i w_j / sum(w)` in `[0, 1]`.
pub fn check_probability_bound(weights: &[f64]) -> Result<(), ModelError> {
    let w1 = weights.iter().copied().fold(0.0, f64::max);
    let sqrt_sum = weights.iter().sum::<f64>().sqrt();
    if w1 > sqrt_sum {
        return Err(ModelError::ProbabilityBound { w1, sqrt_sum });
    }
    Ok(())
}

fn check_power_law_params(sigma: f64, c: f64, offset: f64) -> Result<(), ModelError> {
    if !(sigma > 2.0) || !sigma.is_finite() {
        return Err(ModelError::InvalidPowerLaw("exponent must exceed 2"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(ModelError::InvalidPowerLaw("scale c must be positive"));
    }
    if !(offset >= 0.0) || !offset.is_finite() {
        return Err(ModelError::InvalidPowerLaw("offset must be non-negative"));
    }
    Ok(())
}

/// `w_i = c (i + offset)^(-1/(sigma-1))` for `i = 1..=n`, without the probability check.
pub fn power_law_sequence(n: usize, sigma: f64, c: f64, offset: f64) -> Vec<f64> {
    let exponent = -1.0 / (sigma - 1.0);
    (1..=n).map(|i| c * (i as f64 + offset).powf(exponent)).collect()
}

/// Power-law weight sequence; fails if the parameters are invalid or the largest
/// weight breaks `w_1 <= sqrt(sum w)` (rescale `c` or opt into clipping).
pub fn power_law_weights(n: usize, sigma: f64, c: f64, offset: f64) -> Result<Vec<f64>, ModelError> {
    check_power_law_params(sigma, c, offset)?;
    let w = power_law_sequence(n, sigma, c, offset);
    check_probability_bound(&w)?;
    Ok(w)
}

/// Solves for `(c, offset)` such that the power-law sequence starts at `d_max`
/// and ends at `d_min`. The offset is found by bisection on the endpoint ratio.
pub fn power_law_from_degrees(n: usize, sigma: f64, d_max: f64, d_min: f64) -> Result<(f64, f64), ModelError> {
    if !(sigma > 2.0) {
        return Err(ModelError::InvalidPowerLaw("exponent must exceed 2"));
    }
    if !(d_min > 0.0) || !(d_max >= d_min) || n < 2 {
        return Err(ModelError::InvalidPowerLaw("need d_max >= d_min > 0 and n >= 2"));
    }
    if d_max == d_min {
        return Err(ModelError::DegenerateRange);
    }
    let inv = 1.0 / (sigma - 1.0);
    let n = n as f64;
    let target = d_max / d_min;
    // ratio(offset) = w_1 / w_n, strictly decreasing from n^inv towards 1.
    let ratio = |offset: f64| ((n + offset) / (1.0 + offset)).powf(inv);
    if ratio(0.0) < target {
        let q = target.powf(sigma - 1.0);
        return Err(ModelError::InfeasibleFit {
            required_offset: (n - q) / (q - 1.0),
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while ratio(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let offset = 0.5 * (lo + hi);
    let c = d_max * (1.0 + offset).powf(inv);
    Ok((c, offset))
}

fn gw_matrix(weights: &[f64], overflow: ProbabilityOverflow) -> Matrix {
    let total: f64 = weights.iter().sum();
    let n = weights.len();
    Matrix::from_fn(n, n, |i, j| {
        let p = weights[i] * weights[j] / total;
        match overflow {
            ProbabilityOverflow::Clip => p.min(1.0),
            ProbabilityOverflow::Reject => p,
        }
    })
}

/// Edge-probability matrix of `model`. The diagonal is zeroed when self-loops are off.
pub fn expected_matrix(model: &GraphModel) -> Result<ExpectedMatrix, ModelError> {
    model.validate()?;
    let mut m = match &model.kind {
        ModelKind::IndependentEdges(m) => m.matrix().clone(),
        ModelKind::Gw { weights } => gw_matrix(weights, model.overflow),
        ModelKind::Gnp { n, p } => Matrix::from_fn(*n, *n, |_, _| *p),
        ModelKind::PowerLaw { n, sigma, c, offset } => {
            gw_matrix(&power_law_sequence(*n, *sigma, *c, *offset), model.overflow)
        }
        ModelKind::Sbm { sizes, probabilities } => Groups::from_sizes(sizes)?.tile(probabilities),
    };
    if !model.allow_self_loops {
        for i in 0..m.rows() {
            m[(i, i)] = 0.0;
        }
    }
    // Products like w_i w_j / sum(w) can land a few ulps above 1 when the bound is tight.
    let n = m.rows();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if v > 1.0 && v < 1.0 + 1e-12 {
                m[(i, j)] = 1.0;
            }
        }
    }
    Ok(ExpectedMatrix::new(m, 0.0)?)
}

/// Samples a graph from `model` with a ChaCha8 stream seeded by `seed`.
pub fn sample(model: &GraphModel, seed: u64) -> Result<Graph, ModelError> {
    let expected = expected_matrix(model)?;
    Ok(sample_expected(&expected, model.allow_self_loops, seed))
}

/// Samples each pair `(i, j)`, `i <= j`, in row-major upper-triangular order with
/// one uniform draw per pair (diagonal only when self-loops are allowed). Every
/// pair consumes exactly one draw regardless of its probability.
pub fn sample_expected(expected: &ExpectedMatrix, allow_self_loops: bool, seed: u64) -> Graph {
    let n = expected.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        let start = if allow_self_loops { i } else { i + 1 };
        for j in start..n {
            let u: f64 = rng.gen();
            if u < expected.get(i, j) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges, allow_self_loops).expect("sampled edges are in range")
}
