//! Checkable versions of the concentration conditions for random graph models.
//! All logarithms are natural.

use serde::Serialize;

use crate::graph::{expected_degree_vector, ExpectedMatrix};
use crate::linalg::norm2;
use crate::spectral::{inverted_spectral_gap, symmetric_eigen, DEFAULT_TOL};

/// Explicit constant for the G(n, p) size requirement, `n >= 786^2 * 6 / eps^4`.
pub const GNP_SIZE_CONSTANT: f64 = 786.0 * 786.0 * 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub relation: Relation,
    pub required: f64,
    pub actual: f64,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

impl Condition {
    fn new(name: &'static str, actual: f64, relation: Relation, required: f64) -> Self {
        let satisfied = match relation {
            Relation::AtLeast => actual >= required,
            Relation::AtMost => actual <= required,
            Relation::Below => actual < required,
        };
        Self {
            name,
            relation,
            required,
            actual,
            satisfied,
            note: None,
        }
    }

    fn note(mut self, note: &'static str) -> Self {
        self.note = Some(note);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub model: String,
    pub epsilon: f64,
    pub delta: f64,
    pub conditions: Vec<Condition>,
    pub overall: bool,
}

impl ConcentrationReport {
    fn new(model: String, epsilon: f64, delta: f64, conditions: Vec<Condition>) -> Self {
        let overall = conditions.iter().all(|c| c.satisfied);
        Self {
            model,
            epsilon,
            delta,
            conditions,
            overall,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn log_term(n: usize, delta: f64) -> f64 {
    (2.0 * n as f64 / delta).ln()
}

/// Conditions on an arbitrary expected adjacency matrix.
pub fn check_general(expected: &ExpectedMatrix, epsilon: f64, delta: f64) -> ConcentrationReport {
    let n = expected.n();
    let l = log_term(n, delta);
    let d_max = expected_degree_vector(expected).into_iter().fold(0.0, f64::max);
    let (lambda1, kappa) = match symmetric_eigen(expected.matrix(), DEFAULT_TOL) {
        Ok(d) => (d.lambda1(), inverted_spectral_gap(&d).unwrap_or(f64::INFINITY)),
        Err(_) => (f64::NAN, f64::INFINITY),
    };
    let gap_term = lambda1 * (1.0 - kappa * kappa);
    let conditions = vec![
        Condition::new("d_max", d_max, Relation::AtLeast, 4.0 / 9.0 * l),
        Condition::new("kappa", kappa, Relation::Below, 1.0),
        Condition::new(
            "lambda1_gap",
            if kappa < 1.0 { gap_term } else { f64::NEG_INFINITY },
            Relation::AtLeast,
            1024.0 * (d_max * l).sqrt() / (epsilon * epsilon),
        ),
    ];
    ConcentrationReport::new(format!("general(n={n})"), epsilon, delta, conditions)
}

/// Conditions for the Chung-Lu model `G(w)`; `w` need not be sorted.
pub fn check_gw(w: &[f64], epsilon: f64, delta: f64) -> ConcentrationReport {
    let n = w.len();
    let l = log_term(n, delta);
    let w1 = w.iter().copied().fold(0.0, f64::max);
    let sum: f64 = w.iter().sum();
    let d_tilde = if sum > 0.0 { w.iter().map(|x| x * x).sum::<f64>() / sum } else { 0.0 };
    let conditions = vec![
        Condition::new("w1_lower", w1, Relation::AtLeast, 4.0 / 9.0 * l),
        Condition::new("w1_spread", w1, Relation::AtMost, norm2(w) / 6.0),
        Condition::new(
            "d_tilde",
            d_tilde,
            Relation::AtLeast,
            256.0 * ((4.0 * w1 * l).sqrt() + 1.0) / (epsilon * epsilon),
        ),
    ];
    ConcentrationReport::new(format!("gw(n={n})"), epsilon, delta, conditions)
}

/// Conditions for `G(n, p)`.
pub fn check_gnp(n: usize, p: f64, epsilon: f64, delta: f64) -> ConcentrationReport {
    let l = log_term(n, delta);
    let p_min = if n > 1 { 4.0 * l / (9.0 * (n - 1) as f64) } else { f64::INFINITY };
    let conditions = vec![
        Condition::new("p", p, Relation::AtLeast, p_min),
        Condition::new("n", n as f64, Relation::AtLeast, GNP_SIZE_CONSTANT / epsilon.powi(4))
            .note("loose constant; the source derivation says it can likely be optimized"),
    ];
    ConcentrationReport::new(format!("gnp(n={n},p={p})"), epsilon, delta, conditions)
}

/// Conditions for a power-law `G(w)` with exponent `sigma`. The lower bound on
/// `w_1` is only known up to an unstated constant, taken here as 1.
pub fn check_power_law(w: &[f64], sigma: f64, epsilon: f64, delta: f64) -> ConcentrationReport {
    let n = w.len();
    let l = log_term(n, delta);
    let w1 = w.iter().copied().fold(0.0, f64::max);
    let mut conditions = vec![
        Condition::new("sigma_lower", sigma, Relation::AtLeast, 2.0),
        Condition::new("sigma_upper", sigma, Relation::Below, 2.5),
    ];
    // Strict lower bound on sigma.
    conditions[0].satisfied = sigma > 2.0;
    let exponent = 1.0 / (5.0 - 2.0 * sigma);
    conditions.push(
        Condition::new("w1_lower", w1, Relation::AtLeast, (l / epsilon.powi(4)).powf(exponent))
            .note("unspecified constant; reported with constant 1"),
    );
    conditions.push(Condition::new("w1_spread", w1, Relation::AtMost, norm2(w) / 6.0));
    ConcentrationReport::new(format!("power_law(n={n},sigma={sigma})"), epsilon, delta, conditions)
}

/// High-probability bound on `|A - E[A]|`: `sqrt(4 d_max ln(2n/delta))`.
pub fn chung_radcliffe_deviation(d_max: f64, n: usize, delta: f64) -> f64 {
    (4.0 * d_max * log_term(n, delta)).sqrt()
}

/// Whether `d_max` meets the precondition of [`chung_radcliffe_deviation`].
pub fn chung_radcliffe_applies(d_max: f64, n: usize, delta: f64) -> bool {
    d_max >= 4.0 / 9.0 * log_term(n, delta)
}

/// Largest `beta` that keeps a sampled game feasible with probability `>= 1 - delta`.
pub fn spectral_radius_threshold(lambda1_expected: f64, d_max: f64, n: usize, delta: f64) -> f64 {
    1.0 / (lambda1_expected + chung_radcliffe_deviation(d_max, n, delta))
}
