//! Symmetric eigendecomposition and the spectral quantities built on it.
//!
//! Eigenvalues are ordered by signed value, largest first, so that the ordering
//! of `A` matches the ordering of `(I - beta A)^-1` for `beta > 0`. Eigenvector
//! signs are fixed so that the entry of largest magnitude is positive (lowest
//! index on ties); Perron vectors of nonnegative matrices therefore come out
//! nonnegative.

use thiserror::Error;

use crate::linalg::{dot, norm2, Matrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 100;
pub const POWER_MAX_ITERS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("largest eigenvalue {0} is not positive; inverted spectral gap undefined")]
    NonPositiveTop(f64),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("vector lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("beta * lambda_1 = {0} >= 1: equilibrium is unbounded")]
    Infeasible(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending by signed value.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    vectors: Matrix,
}

impl EigenDecomposition {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    /// Largest |eigenvalue|.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of eigenvalues within `tol * max(1, |lambda_1|)` of `lambda_1`.
    pub fn top_multiplicity(&self, tol: f64) -> usize {
        let l1 = self.values[0];
        let scale = tol * l1.abs().max(1.0);
        self.values.iter().take_while(|&&v| l1 - v <= scale).count()
    }

    /// `U diag(lambda) U^T`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.n();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        scaled.matmul(&self.vectors.transpose())
    }

    /// Coordinates of `x` in the eigenbasis, `U^T x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let row = self.vectors.row(i);
            for (o, &u) in out.iter_mut().zip(row) {
                *o += u * xi;
            }
        }
        out
    }

    /// `U c` for eigenbasis coordinates `c`.
    pub fn unproject(&self, coords: &[f64]) -> Vec<f64> {
        self.vectors.mul_vec(coords)
    }
}

fn check_symmetric(matrix: &Matrix) -> Result<(), SpectralError> {
    if !matrix.is_square() {
        return Err(SpectralError::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    if matrix.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let asym = matrix.asymmetry();
    if asym > 1e-9 * matrix.max_abs().max(1.0) {
        return Err(SpectralError::NotSymmetric(asym));
    }
    Ok(())
}

/// Flips `v` so its largest-magnitude entry is positive; near-ties (within a
/// relative 1e-9) resolve to the lowest index.
pub fn orient(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap_or(0);
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops to `tol` (or to a few ulps of
/// `||A||_F` when that is larger), at most [`MAX_SWEEPS`] sweeps.
pub fn symmetric_eigen(matrix: &Matrix, tol: f64) -> Result<EigenDecomposition, SpectralError> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
    let mut v = Matrix::identity(n);
    let target = tol.max(4.0 * f64::EPSILON * a.frobenius_norm());

    let mut off = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NotConverged {
                iterations: sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Skip rotations that cannot change the diagonal at working precision.
                if sweeps > 3 && apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps index order on exact ties.
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut u = v.column(src);
        orient(&mut u);
        for (row, x) in u.into_iter().enumerate() {
            vectors[(row, col)] = x;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Leading eigenpair from shifted power iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Set for the zero matrix, where every unit vector is an eigenvector.
    pub degenerate: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Largest (signed) eigenvalue and its unit eigenvector by power iteration on
/// `A + sI`, with `s` the largest absolute row sum. The shift makes every
/// eigenvalue nonnegative, so `lambda_1 + s` dominates even for bipartite graphs.
///
/// When the top eigenvalue is repeated the result is some unit vector of the top
/// eigenspace; use [`EigenDecomposition::top_multiplicity`] to detect that case.
pub fn first_eigenvector(matrix: &Matrix, tol: f64, max_iters: usize) -> Result<TopEigen, SpectralError> {
    check_symmetric(matrix)?;
    let n = matrix.rows();
    if n == 0 {
        return Err(SpectralError::InvalidArgument("empty matrix"));
    }
    if matrix.max_abs() == 0.0 {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        return Ok(TopEigen {
            value: 0.0,
            vector: e1,
            degenerate: true,
            iterations: 0,
            residual: 0.0,
        });
    }
    let shift = (0..n)
        .map(|i| matrix.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    // Deterministic, non-uniform start so it is not orthogonal to a signed top vector.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 13) as f64) / 13.0).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let ax = matrix.mul_vec(&x);
        let lambda = dot(&x, &ax);
        residual = ax
            .iter()
            .zip(&x)
            .map(|(a, v)| (a - lambda * v).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = lambda.abs().max(1.0);
        if residual <= tol * scale && (lambda - prev).abs() <= 1e-12 * scale {
            orient(&mut x);
            return Ok(TopEigen {
                value: lambda,
                vector: x,
                degenerate: false,
                iterations: it,
                residual,
            });
        }
        prev = lambda;
        let mut y: Vec<f64> = ax.iter().zip(&x).map(|(a, v)| a + shift * v).collect();
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        x = y;
    }
    Err(SpectralError::NotConverged {
        iterations: max_iters,
        residual,
    })
}

/// `max_i |lambda_i|`.
pub fn spectral_norm(matrix: &Matrix) -> Result<f64, SpectralError> {
    Ok(symmetric_eigen(matrix, DEFAULT_TOL)?.spectral_radius())
}

/// `max_{i>1} |lambda_i| / lambda_1`.
pub fn inverted_spectral_gap(decomp: &EigenDecomposition) -> Result<f64, SpectralError> {
    let l1 = decomp.lambda1();
    if !(l1 > 0.0) {
        return Err(SpectralError::NonPositiveTop(l1));
    }
    let rest = decomp.values()[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(rest / l1)
}

pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64, SpectralError> {
    if x.len() != y.len() {
        return Err(SpectralError::LengthMismatch(x.len(), y.len()));
    }
    let nx = norm2(x);
    let ny = norm2(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(SpectralError::ZeroVector);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// `||x/|x| - y/|y|||^2`, which equals `2 (1 - rho(x, y))`.
pub fn unit_distance_squared(x: &[f64], y: &[f64]) -> Result<f64, SpectralError> {
    let rho = cosine_similarity(x, y)?;
    Ok(2.0 * (1.0 - rho))
}

/// `alpha_i = 1 / (1 - beta lambda_i)^2`, the squared eigenvalues of `(I - beta A)^-1`.
pub fn alpha_values(eigenvalues: &[f64], beta: f64) -> Result<Vec<f64>, SpectralError> {
    let worst = eigenvalues.iter().fold(f64::NEG_INFINITY, |m, &l| m.max(beta * l));
    if worst >= 1.0 {
        return Err(SpectralError::Infeasible(worst));
    }
    Ok(eigenvalues.iter().map(|&l| 1.0 / (1.0 - beta * l).powi(2)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationBound {
    /// Upper bound on `||v_1(A) - v_1(B)||` for sign-aligned unit eigenvectors.
    pub value: f64,
    /// The formula gave nothing better than the trivial `sqrt(2)`.
    pub vacuous: bool,
}

/// Bound on the distance between the leading eigenvectors of two symmetric
/// matrices `A` and `B` with `||A - B|| <= eta`. `lambda1` is the
/// largest-magnitude eigenvalue of `A`, `kappa` its inverted spectral gap and
/// `mu1` the largest-magnitude eigenvalue of `B` (all as magnitudes):
///
/// `sqrt(2 (1 - sqrt(((mu1 - eta)^2 - lambda1^2 kappa^2) / (1 - kappa^2)) / lambda1))`
pub fn eigenvector_perturbation_bound(
    lambda1: f64,
    kappa: f64,
    mu1: f64,
    eta: f64,
) -> Result<PerturbationBound, SpectralError> {
    if !(lambda1 > 0.0) {
        return Err(SpectralError::NonPositiveTop(lambda1));
    }
    if !(0.0..1.0).contains(&kappa) {
        return Err(SpectralError::InvalidArgument("kappa must lie in [0, 1)"));
    }
    if !(eta >= 0.0) || !(mu1 >= 0.0) {
        return Err(SpectralError::InvalidArgument("mu1 and eta must be nonnegative"));
    }
    let trivial = PerturbationBound {
        value: std::f64::consts::SQRT_2,
        vacuous: true,
    };
    let gap = mu1 - eta;
    let radicand = (gap * gap - lambda1 * lambda1 * kappa * kappa) / (1.0 - kappa * kappa);
    if gap < 0.0 || radicand < 0.0 {
        return Ok(trivial);
    }
    let inner = (1.0 - radicand.sqrt() / lambda1).max(0.0);
    let value = (2.0 * inner).sqrt();
    if value >= std::f64::consts::SQRT_2 {
        return Ok(trivial);
    }
    Ok(PerturbationBound { value, vacuous: false })
}

/// Inputs to [`eigenvector_perturbation_bound`] measured from a pair of matrices,
/// using eigenvalues ranked by magnitude.
#[derive(Debug, Clone)]
pub struct PerturbationInputs {
    pub lambda1: f64,
    pub kappa: f64,
    pub mu1: f64,
    pub eta: f64,
    /// Leading eigenvector of `A` by magnitude.
    pub v_a: Vec<f64>,
    /// Leading eigenvector of `B` by magnitude, sign-aligned with `v_a`.
    pub v_b: Vec<f64>,
    /// The magnitude-leading eigenvalue of `A` is not its largest signed one.
    pub order_differs: bool,
}

fn magnitude_leader(d: &EigenDecomposition) -> (usize, usize) {
    let n = d.n();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d.values()[j].abs().partial_cmp(&d.values()[i].abs()).unwrap());
    (idx[0], if n > 1 { idx[1] } else { idx[0] })
}

pub fn perturbation_inputs(a: &Matrix, b: &Matrix) -> Result<PerturbationInputs, SpectralError> {
    let da = symmetric_eigen(a, DEFAULT_TOL)?;
    let db = symmetric_eigen(b, DEFAULT_TOL)?;
    let (ia, ia2) = magnitude_leader(&da);
    let (ib, _) = magnitude_leader(&db);
    let lambda1 = da.values()[ia].abs();
    let kappa = if da.n() > 1 && lambda1 > 0.0 {
        da.values()[ia2].abs() / lambda1
    } else {
        0.0
    };
    let eta = spectral_norm(&a.sub(b))?;
    let v_a = da.vector(ia);
    let mut v_b = db.vector(ib);
    if dot(&v_a, &v_b) < 0.0 {
        v_b.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(PerturbationInputs {
        lambda1,
        kappa,
        mu1: db.values()[ib].abs(),
        eta,
        v_a,
        v_b,
        order_differs: ia != 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix() {
        let d = symmetric_eigen(&Matrix::from_diagonal(&[3.0, 1.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(d.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(d.vector(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(d.vector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(d.vector(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_vertex_path() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = symmetric_eigen(&a, DEFAULT_TOL).unwrap();
        assert!((d.values()[0] - 1.0).abs() < 1e-14);
        assert!((d.values()[1] + 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = d.vector(0);
        let v2 = d.vector(1);
        assert!((v1[0] - h).abs() < 1e-14 && (v1[1] - h).abs() < 1e-14);
        // Tie in magnitude: lowest index is made positive.
        assert!((v2[0] - h).abs() < 1e-14 && (v2[1] + h).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 6, 17, 50] {
            let a = random_symmetric(n, &mut rng);
            let d = symmetric_eigen(&a, DEFAULT_TOL).unwrap();
            let err = d.reconstruct().sub(&a).frobenius_norm();
            assert!(err <= 10.0 * DEFAULT_TOL * a.frobenius_norm().max(1.0), "n={n} err={err}");
            let utu = d.vectors().transpose().matmul(d.vectors());
            assert!(utu.sub(&Matrix::identity(n)).max_abs() < 1e-10);
            for i in 0..n {
                let v = d.vector(i);
                let r: Vec<f64> = a.mul_vec(&v).iter().zip(&v).map(|(x, y)| x - d.values()[i] * y).collect();
                assert!(norm2(&r) <= 1e-8 * d.values()[i].abs().max(1.0));
            }
            assert!(d.values().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn power_iteration_examples() {
        let w = [2.0, 1.0, 1.0];
        let b = Matrix::from_fn(3, 3, |i, j| w[i] * w[j] / 4.0);
        let top = first_eigenvector(&b, DEFAULT_TOL, POWER_MAX_ITERS).unwrap();
        assert!((cosine_similarity(&top.vector, &w).unwrap() - 1.0).abs() < 1e-9);
        assert!((top.value - 1.5).abs() < 1e-9);

        let k4 = crate::graph::Graph::complete(4).to_matrix();
        let top = first_eigenvector(&k4, DEFAULT_TOL, POWER_MAX_ITERS).unwrap();
        for x in &top.vector {
            assert!((x - 0.5).abs() < 1e-9);
        }
        assert!((top.value - 3.0).abs() < 1e-9);

        let zero = first_eigenvector(&Matrix::zeros(3, 3), DEFAULT_TOL, 10).unwrap();
        assert!(zero.degenerate);
        assert_eq!(zero.vector, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn power_iteration_handles_bipartite() {
        // Star K_{1,3}: eigenvalues +-sqrt(3), 0, 0.
        let g = crate::graph::Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)], false).unwrap();
        let top = first_eigenvector(&g.to_matrix(), DEFAULT_TOL, POWER_MAX_ITERS).unwrap();
        assert!((top.value - 3f64.sqrt()).abs() < 1e-9);
        assert!(top.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 8, 25] {
            let a = random_symmetric(n, &mut rng);
            let d = symmetric_eigen(&a, DEFAULT_TOL).unwrap();
            if d.values()[0] - d.values()[1] < 0.05 {
                continue;
            }
            let top = first_eigenvector(&a, DEFAULT_TOL, POWER_MAX_ITERS).unwrap();
            assert!((top.value - d.lambda1()).abs() < 1e-9);
            assert!(cosine_similarity(&top.vector, &d.vector(0)).unwrap().abs() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3)).unwrap(), 0.0);
        let k2 = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((spectral_norm(&k2).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(spectral_norm(&Matrix::from_diagonal(&[-5.0, 2.0])).unwrap(), 5.0);
    }

    #[test]
    fn inverted_gap_examples() {
        let w = [3.0, 2.0, 2.0, 1.0];
        let s: f64 = w.iter().sum();
        let b = Matrix::from_fn(4, 4, |i, j| w[i] * w[j] / s);
        let k = inverted_spectral_gap(&symmetric_eigen(&b, DEFAULT_TOL).unwrap()).unwrap();
        assert!(k < 1e-12);
        let k3 = crate::graph::Graph::complete(3).to_matrix();
        let k = inverted_spectral_gap(&symmetric_eigen(&k3, DEFAULT_TOL).unwrap()).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
        let k2 = crate::graph::Graph::complete(2).to_matrix();
        let k = inverted_spectral_gap(&symmetric_eigen(&k2, DEFAULT_TOL).unwrap()).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        let neg = symmetric_eigen(&Matrix::from_diagonal(&[-1.0, -2.0]), DEFAULT_TOL).unwrap();
        assert!(matches!(inverted_spectral_gap(&neg), Err(SpectralError::NonPositiveTop(_))));
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let r = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), Err(SpectralError::ZeroVector));

        let x = [0.3, -1.2, 2.0];
        let y = [1.0, 0.5, 0.25];
        let (nx, ny) = (norm2(&x), norm2(&y));
        let direct: f64 = x.iter().zip(&y).map(|(a, b)| (a / nx - b / ny).powi(2)).sum();
        assert!((unit_distance_squared(&x, &y).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_values(&[3.0, 1.0, -2.0], 0.0).unwrap(), vec![1.0, 1.0, 1.0]);
        let a = alpha_values(&[2.0, -1.0], 0.25).unwrap();
        assert!((a[0] - 4.0).abs() < 1e-14);
        assert!((a[1] - 0.64).abs() < 1e-14);
        assert!(matches!(alpha_values(&[4.0, 1.0], 0.25), Err(SpectralError::Infeasible(_))));
        let a = alpha_values(&[3.0, 2.5, 0.0, -1.0, -4.0], 0.3).unwrap();
        assert!(a.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn perturbation_bound_examples() {
        let b = eigenvector_perturbation_bound(2.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(!b.vacuous);
        let b = eigenvector_perturbation_bound(2.0, 0.0, 1.8, 0.3).unwrap();
        assert!((b.value - 0.5f64.sqrt()).abs() < 1e-12);
        // sqrt(2 (1 - sqrt((1.8^2 - 1) / 0.75) / 2)) = 0.521346...
        let b = eigenvector_perturbation_bound(2.0, 0.5, 2.0, 0.2).unwrap();
        let oracle = (2.0 * (1.0 - ((1.8f64 * 1.8 - 1.0) / 0.75).sqrt() / 2.0)).sqrt();
        assert!((b.value - oracle).abs() < 1e-12);
        assert!((b.value - 0.52135).abs() < 1e-4);

        let b = eigenvector_perturbation_bound(2.0, 0.9, 1.0, 0.5).unwrap();
        assert!(b.vacuous);
        assert_eq!(b.value, std::f64::consts::SQRT_2);
        assert!(eigenvector_perturbation_bound(2.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn perturbation_bound_holds_empirically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..100 {
            let n = rng.gen_range(3..12);
            // Dominant rank-one part plus noise keeps many bounds non-vacuous.
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let scale = rng.gen_range(2.0..10.0);
            let mut a = random_symmetric(n, &mut rng).scale(0.3);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] += scale * u[i] * u[j];
                }
            }
            let e = random_symmetric(n, &mut rng).scale(rng.gen_range(0.0..0.5));
            let b = a.add(&e);
            let inp = perturbation_inputs(&a, &b).unwrap();
            if inp.kappa >= 1.0 {
                continue;
            }
            let bound = eigenvector_perturbation_bound(inp.lambda1, inp.kappa, inp.mu1, inp.eta).unwrap();
            if bound.vacuous {
                continue;
            }
            checked += 1;
            let dist: f64 = inp.v_a.iter().zip(&inp.v_b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(dist <= bound.value + 1e-9, "dist {dist} > bound {}", bound.value);
        }
        assert!(checked > 50, "only {checked} non-vacuous cases");
    }
}
