//! Query-model estimators: degrees from edge queries, stationary sampling from
//! neighbor queries, and stochastic block model recovery from either.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{largest_connected_component, Graph, Groups};
use crate::interventions::{proportional_intervention, Intervention, InterventionError, Strategy};
use crate::linalg::{LinalgError, Lu, Matrix};
use crate::spectral::{first_eigenvector, SpectralError, DEFAULT_TOL, POWER_MAX_ITERS};

pub const DEFAULT_C_MIX: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("need at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("epsilon and delta must lie in (0, 1), got epsilon={epsilon}, delta={delta}")]
    InvalidConfidence { epsilon: f64, delta: f64 },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("random walk trapped: start vertex {0} has no neighbors")]
    WalkTrapped(usize),
    #[error("group {0} has no vertex with a neighbor")]
    NoNeighbors(usize),
    #[error("group labels cover {got} vertices, graph has {expected}")]
    GroupSizeMismatch { expected: usize, got: usize },
    #[error("block matrix is zero; no leading direction")]
    ZeroMatrix,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Intervention(#[from] InterventionError),
}

/// Answers "is `{u, v}` an edge?" and counts every question.
#[derive(Debug)]
pub struct EdgeOracle<'g> {
    graph: &'g Graph,
    queries: u64,
}

impl<'g> EdgeOracle<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self { graph, queries: 0 }
    }

    pub fn query(&mut self, u: usize, v: usize) -> bool {
        self.queries += 1;
        self.graph.has_edge(u, v)
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }
}

/// Returns a uniformly random neighbor of the queried vertex.
#[derive(Debug)]
pub struct NeighborOracle<'g> {
    graph: &'g Graph,
    neighbors: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
    queries: u64,
}

impl<'g> NeighborOracle<'g> {
    pub fn new(graph: &'g Graph, seed: u64) -> Self {
        Self {
            graph,
            neighbors: graph.adjacency_lists(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            queries: 0,
        }
    }

    /// `None` for a vertex without neighbors (still counted as a query).
    pub fn query(&mut self, v: usize) -> Option<usize> {
        self.queries += 1;
        let list = &self.neighbors[v];
        if list.is_empty() {
            None
        } else {
            Some(list[self.rng.gen_range(0..list.len())])
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult<T> {
    pub estimate: T,
    pub queries: u64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub method: &'static str,
    pub flags: Vec<String>,
}

fn check_confidence(epsilon: f64, delta: f64) -> Result<(), EstimationError> {
    let ok = |x: f64| x > 0.0 && x < 1.0;
    if !ok(epsilon) || !ok(delta) {
        return Err(EstimationError::InvalidConfidence { epsilon, delta });
    }
    Ok(())
}

/// Hoeffding sample count `ceil(ln(2 count / delta) / (2 eps^2))`.
pub fn hoeffding_samples(count: f64, epsilon: f64, delta: f64) -> usize {
    ((2.0 * count / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as usize
}

/// Degree of every vertex from `k` edge queries against uniform partners
/// (with replacement): `w_i = (n - 1) * positive fraction`.
pub fn estimate_degrees_edge_queries(
    oracle: &mut EdgeOracle<'_>,
    epsilon: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<EstimationResult<Vec<f64>>, EstimationError> {
    check_confidence(epsilon, delta)?;
    let n = oracle.n();
    if n < 2 {
        return Err(EstimationError::TooFewVertices(n));
    }
    let before = oracle.queries();
    let k = hoeffding_samples(n as f64, epsilon, delta);
    let mut estimate = Vec::with_capacity(n);
    for i in 0..n {
        let mut hits = 0usize;
        for _ in 0..k {
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            if oracle.query(i, j) {
                hits += 1;
            }
        }
        estimate.push((n - 1) as f64 * hits as f64 / k as f64);
    }
    Ok(EstimationResult {
        estimate,
        queries: oracle.queries() - before,
        epsilon: Some(epsilon),
        delta: Some(delta),
        method: "degree_edge_queries",
        flags: Vec::new(),
    })
}

/// `ceil(c_mix ln(n / eps))`.
pub fn mixing_steps_default(n: usize, epsilon: f64, c_mix: f64) -> usize {
    (c_mix * (n as f64 / epsilon).ln()).ceil().max(1.0) as usize
}

/// Smallest vertex of the largest connected component.
pub fn default_walk_start(g: &Graph) -> Option<usize> {
    largest_connected_component(g).vertices.first().copied()
}

/// Empirical visit frequencies of a lazy random walk recorded every
/// `mixing_steps` steps. Each step issues one neighbor query and moves there
/// with probability 1/2; the laziness keeps bipartite graphs aperiodic without
/// changing the stationary distribution `d_i / sum d`.
pub fn random_walk_sampler(
    oracle: &mut NeighborOracle<'_>,
    start: usize,
    n_samples: usize,
    mixing_steps: usize,
    rng: &mut impl Rng,
) -> Result<EstimationResult<Vec<f64>>, EstimationError> {
    let n = oracle.graph().n();
    if start >= n {
        return Err(EstimationError::VertexOutOfRange(start));
    }
    let before = oracle.queries();
    let mut counts = vec![0usize; n];
    let mut at = start;
    for _ in 0..n_samples {
        for _ in 0..mixing_steps {
            let next = oracle.query(at).ok_or(EstimationError::WalkTrapped(at))?;
            if rng.gen_bool(0.5) {
                at = next;
            }
        }
        counts[at] += 1;
    }
    let total = n_samples.max(1) as f64;
    Ok(EstimationResult {
        estimate: counts.into_iter().map(|c| c as f64 / total).collect(),
        queries: oracle.queries() - before,
        epsilon: None,
        delta: None,
        method: "random_walk",
        flags: Vec::new(),
    })
}

/// Block edge frequencies and their `n x n` tiling (zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimate {
    pub block: Matrix,
    pub tiled: Matrix,
    /// Groups of size one, whose within-group frequency is undefined and set to 0.
    pub singleton_groups: Vec<usize>,
}

pub fn empirical_block_matrix(g: &Graph, groups: &Groups) -> Result<BlockEstimate, EstimationError> {
    if groups.n() != g.n() {
        return Err(EstimationError::GroupSizeMismatch {
            expected: g.n(),
            got: groups.n(),
        });
    }
    let block = groups.block_densities(g);
    Ok(BlockEstimate {
        tiled: groups.tile_without_loops(&block),
        singleton_groups: singletons(groups),
        block,
    })
}

fn singletons(groups: &Groups) -> Vec<usize> {
    groups
        .sizes()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == 1)
        .map(|(i, _)| i)
        .collect()
}

/// Block matrix from `k = ceil(ln(2 m^2 / delta) / (2 eps^2))` edge queries per
/// group pair, each on a freshly sampled vertex pair (distinct within a group).
pub fn estimate_sbm_edge_queries(
    oracle: &mut EdgeOracle<'_>,
    groups: &Groups,
    epsilon: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<EstimationResult<Matrix>, EstimationError> {
    check_confidence(epsilon, delta)?;
    if groups.n() != oracle.n() {
        return Err(EstimationError::GroupSizeMismatch {
            expected: oracle.n(),
            got: groups.n(),
        });
    }
    let before = oracle.queries();
    let m = groups.count();
    let members = groups.members();
    let k = hoeffding_samples((m * m) as f64, epsilon, delta);
    let mut p = Matrix::zeros(m, m);
    let mut flags = Vec::new();
    for a in 0..m {
        for b in a..m {
            let (ga, gb) = (&members[a], &members[b]);
            if a == b && ga.len() < 2 {
                flags.push(format!("group {a} has one vertex; within-group frequency set to 0"));
                continue;
            }
            let mut hits = 0usize;
            for _ in 0..k {
                let i = rng.gen_range(0..ga.len());
                let u = ga[i];
                let v = if a == b {
                    let mut j = rng.gen_range(0..ga.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    ga[j]
                } else {
                    gb[rng.gen_range(0..gb.len())]
                };
                if oracle.query(u, v) {
                    hits += 1;
                }
            }
            let f = hits as f64 / k as f64;
            p[(a, b)] = f;
            p[(b, a)] = f;
        }
    }
    Ok(EstimationResult {
        estimate: p,
        queries: oracle.queries() - before,
        epsilon: Some(epsilon),
        delta: Some(delta),
        method: "sbm_edge_queries",
        flags,
    })
}

/// Number of vertices in group `b` a vertex of group `a` can be adjacent to.
fn admissible(sizes: &[usize], a: usize, b: usize, loops: bool) -> f64 {
    if a == b && !loops {
        sizes[a].saturating_sub(1) as f64
    } else {
        sizes[b] as f64
    }
}

/// Expected fraction of a random neighbor of a group-`a` vertex that lands in
/// group `b`: `p_ab s_b / sum_c p_ac s_c` (with `s_a - 1` inside `a` when self-loops
/// are excluded).
pub fn neighbor_fractions(block: &Matrix, sizes: &[usize], loops: bool) -> Matrix {
    let m = sizes.len();
    Matrix::from_fn(m, m, |a, b| {
        let total: f64 = (0..m).map(|c| block[(a, c)] * admissible(sizes, a, c, loops)).sum();
        if total == 0.0 {
            0.0
        } else {
            block[(a, b)] * admissible(sizes, a, b, loops) / total
        }
    })
}

/// Diagnostics from the row-scale recovery in [`estimate_sbm_neighbor_queries`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecovery {
    /// `ln c_a`, pinned to 0 at the smallest group of each constraint component.
    pub log_scales: Vec<f64>,
    /// Largest `|x_b - x_a - d_ab|` left by the least-squares fit.
    pub inconsistency: f64,
    /// Largest gap between the least-squares and spanning-tree scales.
    pub tree_gap: f64,
    /// Connected components of the symmetry-constraint graph.
    pub components: usize,
}

/// Solves `x_b - x_a = d_ab` in least squares over the given constraint edges,
/// with one pinned vertex per component. Also returns spanning-tree values.
fn recover_log_scales(m: usize, constraints: &[(usize, usize, f64)]) -> Result<ScaleRecovery, EstimationError> {
    let mut adj = vec![Vec::new(); m];
    for (idx, &(a, b, _)) in constraints.iter().enumerate() {
        adj[a].push(idx);
        adj[b].push(idx);
    }
    let mut comp = vec![usize::MAX; m];
    let mut tree = vec![0.0; m];
    let mut roots = Vec::new();
    for r in 0..m {
        if comp[r] != usize::MAX {
            continue;
        }
        let id = roots.len();
        roots.push(r);
        comp[r] = id;
        let mut queue = std::collections::VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            for &e in &adj[u] {
                let (a, b, d) = constraints[e];
                let (v, val) = if a == u { (b, tree[u] + d) } else { (a, tree[u] - d) };
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    tree[v] = val;
                    queue.push_back(v);
                }
            }
        }
    }

    // Graph Laplacian normal equations, root rows replaced by x_root = 0.
    let mut lap = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    for &(a, b, d) in constraints {
        lap[(a, a)] += 1.0;
        lap[(b, b)] += 1.0;
        lap[(a, b)] -= 1.0;
        lap[(b, a)] -= 1.0;
        rhs[b] += d;
        rhs[a] -= d;
    }
    for &r in &roots {
        for j in 0..m {
            lap[(r, j)] = 0.0;
        }
        lap[(r, r)] = 1.0;
        rhs[r] = 0.0;
    }
    let x = Lu::factorize(&lap)?.solve(&rhs)?;
    let inconsistency = constraints
        .iter()
        .map(|&(a, b, d)| (x[b] - x[a] - d).abs())
        .fold(0.0, f64::max);
    let tree_gap = x.iter().zip(&tree).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ScaleRecovery {
        log_scales: x,
        inconsistency,
        tree_gap,
        components: roots.len(),
    })
}

/// Block matrix up to global scale (normalized to max entry 1) from
/// `samples_per_group` neighbor queries per group, each on a freshly drawn
/// uniform member of the group.
pub fn estimate_sbm_neighbor_queries(
    oracle: &mut NeighborOracle<'_>,
    groups: &Groups,
    samples_per_group: usize,
    rng: &mut impl Rng,
) -> Result<(EstimationResult<Matrix>, ScaleRecovery), EstimationError> {
    let n = oracle.graph().n();
    if groups.n() != n {
        return Err(EstimationError::GroupSizeMismatch { expected: n, got: groups.n() });
    }
    let loops = oracle.graph().allows_self_loops();
    let before = oracle.queries();
    let m = groups.count();
    let members = groups.members();
    let sizes = groups.sizes();

    let mut q = Matrix::zeros(m, m);
    for a in 0..m {
        let mut landed = vec![0usize; m];
        let mut total = 0usize;
        for _ in 0..samples_per_group {
            let u = members[a][rng.gen_range(0..members[a].len())];
            if let Some(v) = oracle.query(u) {
                landed[groups.label(v)] += 1;
                total += 1;
            }
        }
        if total == 0 {
            return Err(EstimationError::NoNeighbors(a));
        }
        for b in 0..m {
            q[(a, b)] = landed[b] as f64 / total as f64;
        }
    }

    // r_ab is proportional to p_ab / c_a for an unknown row scale c_a.
    let r = Matrix::from_fn(m, m, |a, b| {
        let adm = admissible(&sizes, a, b, loops);
        if adm == 0.0 {
            0.0
        } else {
            q[(a, b)] / adm
        }
    });
    let mut constraints = Vec::new();
    for a in 0..m {
        for b in (a + 1)..m {
            if r[(a, b)] > 0.0 && r[(b, a)] > 0.0 {
                constraints.push((a, b, r[(a, b)].ln() - r[(b, a)].ln()));
            }
        }
    }
    let recovery = recover_log_scales(m, &constraints)?;
    let c: Vec<f64> = recovery.log_scales.iter().map(|x| x.exp()).collect();
    let mut p = Matrix::from_fn(m, m, |a, b| 0.5 * (c[a] * r[(a, b)] + c[b] * r[(b, a)]));
    let max = p.max_abs();
    if max > 0.0 {
        p = p.scale(1.0 / max);
    }
    let mut flags = Vec::new();
    if recovery.components > 1 {
        flags.push(format!(
            "symmetry constraints split into {} components; relative scale between them is unidentified",
            recovery.components
        ));
    }
    Ok((
        EstimationResult {
            estimate: p,
            queries: oracle.queries() - before,
            epsilon: None,
            delta: None,
            method: "sbm_neighbor_queries",
            flags,
        },
        recovery,
    ))
}

/// Intervention along the leading eigenvector of the tiled block estimate.
/// Invariant under rescaling of `block`.
pub fn sbm_intervention_from_estimate(
    block: &Matrix,
    groups: &Groups,
    budget: f64,
) -> Result<Intervention, EstimationError> {
    let tiled = groups.tile_without_loops(block);
    if tiled.max_abs() == 0.0 {
        return Err(EstimationError::ZeroMatrix);
    }
    let v1 = first_eigenvector(&tiled, DEFAULT_TOL, POWER_MAX_ITERS)?.vector;
    Ok(proportional_intervention(&v1, budget)?.with_strategy(Strategy::SbmReconstructed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{EquilibriumSolver, GameInstance};
    use crate::graph::degree_vector;
    use crate::interventions::{competitive_ratio, optimal_intervention, DEFAULT_BUDGET_TOL};
    use crate::models::{expected_matrix, power_law_from_degrees, power_law_weights, sample, GraphModel};
    use crate::spectral::{cosine_similarity, spectral_norm, symmetric_eigen};

    fn sbm(sizes: Vec<usize>, p_in: f64, p_out: f64) -> GraphModel {
        let m = sizes.len();
        let block = Matrix::from_fn(m, m, |a, b| if a == b { p_in } else { p_out });
        GraphModel::sbm(sizes, block, false).unwrap()
    }

    fn l1(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    }

    #[test]
    fn degree_estimates_on_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k6 = Graph::complete(6);
        let mut oracle = EdgeOracle::new(&k6);
        let r = estimate_degrees_edge_queries(&mut oracle, 0.3, 0.2, &mut rng).unwrap();
        assert_eq!(r.estimate, vec![5.0; 6]);
        let k = hoeffding_samples(6.0, 0.3, 0.2);
        assert_eq!(r.queries, 6 * k as u64);
        assert_eq!(r.queries, oracle.queries());

        let empty = Graph::empty(4, false);
        let mut oracle = EdgeOracle::new(&empty);
        let r = estimate_degrees_edge_queries(&mut oracle, 0.3, 0.2, &mut rng).unwrap();
        assert_eq!(r.estimate, vec![0.0; 4]);

        let one = Graph::empty(1, false);
        assert_eq!(
            estimate_degrees_edge_queries(&mut EdgeOracle::new(&one), 0.3, 0.2, &mut rng),
            Err(EstimationError::TooFewVertices(1))
        );
    }

    #[test]
    fn degree_estimates_within_hoeffding_band() {
        let model = GraphModel::gnp(100, 0.3, false).unwrap();
        let mut good = 0;
        for trial in 0..100u64 {
            let g = sample(&model, trial).unwrap();
            let d = degree_vector(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
            let r = estimate_degrees_edge_queries(&mut EdgeOracle::new(&g), 0.1, 0.05, &mut rng).unwrap();
            if r.estimate.iter().zip(&d).all(|(w, &d)| (w - d as f64).abs() <= 9.9) {
                good += 1;
            }
        }
        assert!(good >= 95, "{good}");
    }

    #[test]
    fn mixing_step_examples() {
        assert_eq!(mixing_steps_default(100, 0.1, DEFAULT_C_MIX), 70);
        assert_eq!(mixing_steps_default(2, 0.5, 1.0), 2);
        assert!(mixing_steps_default(100, 0.5, 10.0) < mixing_steps_default(100, 0.1, 10.0));
    }

    #[test]
    fn random_walk_examples() {
        let cycle = Graph::from_edges(10, (0..10).map(|i| (i, (i + 1) % 10)), false).unwrap();
        let mut oracle = NeighborOracle::new(&cycle, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_walk_sampler(&mut oracle, 0, 5000, 20, &mut rng).unwrap();
        assert!(l1(&r.estimate, &[0.1; 10]) <= 0.2);
        assert_eq!(r.queries, 5000 * 20);
        assert_eq!(r.queries, oracle.queries());

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)], false).unwrap();
        let mut oracle = NeighborOracle::new(&star, 3);
        let r = random_walk_sampler(&mut oracle, 0, 10_000, 10, &mut rng).unwrap();
        assert!(l1(&r.estimate, &[0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) <= 0.1, "{:?}", r.estimate);

        let split = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)], false).unwrap();
        let mut oracle = NeighborOracle::new(&split, 4);
        let r = random_walk_sampler(&mut oracle, 3, 500, 5, &mut rng).unwrap();
        assert!(r.estimate[..3].iter().all(|&x| x == 0.0));

        let lonely = Graph::from_edges(3, [(1, 2)], false).unwrap();
        let mut oracle = NeighborOracle::new(&lonely, 5);
        assert_eq!(
            random_walk_sampler(&mut oracle, 0, 10, 3, &mut rng),
            Err(EstimationError::WalkTrapped(0))
        );
        assert_eq!(default_walk_start(&lonely), Some(1));
    }

    #[test]
    fn random_walk_error_shrinks_with_samples() {
        let g = sample(&GraphModel::gnp(30, 0.3, false).unwrap(), 9).unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.vertices.len(), 30);
        let d = degree_vector(&g);
        let total: usize = d.iter().sum();
        let pi: Vec<f64> = d.iter().map(|&x| x as f64 / total as f64).collect();
        let errs: Vec<f64> = [500, 4000, 32_000]
            .iter()
            .map(|&samples| {
                (0..5u64)
                    .map(|s| {
                        let mut oracle = NeighborOracle::new(&g, s);
                        let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
                        let r = random_walk_sampler(&mut oracle, 0, samples, 15, &mut rng).unwrap();
                        l1(&r.estimate, &pi)
                    })
                    .sum::<f64>()
                    / 5.0
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn block_matrix_examples() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)], false).unwrap();
        let groups = Groups::from_sizes(&[2, 2]).unwrap();
        let b = empirical_block_matrix(&g, &groups).unwrap();
        assert_eq!(b.block.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(b.tiled[(0, 1)], 1.0);
        assert_eq!(b.tiled[(0, 0)], 0.0);

        let groups = Groups::from_labels(vec![0, 1, 0, 2, 1, 2]).unwrap();
        let b = empirical_block_matrix(&Graph::complete(6), &groups).unwrap();
        assert!(b.block.as_slice().iter().all(|&x| x == 1.0));
        let b = empirical_block_matrix(&Graph::empty(6, false), &groups).unwrap();
        assert!(b.block.as_slice().iter().all(|&x| x == 0.0));

        let groups = Groups::from_sizes(&[1, 3]).unwrap();
        let b = empirical_block_matrix(&Graph::complete(4), &groups).unwrap();
        assert_eq!(b.singleton_groups, vec![0]);
        assert_eq!(b.block[(0, 0)], 0.0);
    }

    #[test]
    fn block_estimate_error_shrinks_relative_to_signal() {
        // The absolute spectral error of a block-constant estimate stays O(1) as n
        // grows; relative to |B| it falls roughly like 1/n.
        let block = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap();
        let rel: Vec<f64> = [50usize, 100, 200]
            .iter()
            .map(|&n| {
                let model = GraphModel::sbm(vec![n / 2, n / 2], block.clone(), false).unwrap();
                let groups = model.groups().unwrap();
                let e = expected_matrix(&model).unwrap();
                let scale = spectral_norm(e.matrix()).unwrap();
                (0..20u64)
                    .map(|seed| {
                        let g = sample(&model, seed).unwrap();
                        let a = empirical_block_matrix(&g, &groups).unwrap().tiled;
                        let d = spectral_norm(&a.sub(e.matrix())).unwrap();
                        assert!(d <= (n as f64 / 0.05).ln().powi(2));
                        d / scale
                    })
                    .sum::<f64>()
                    / 20.0
            })
            .collect();
        assert!(rel[0] > rel[1] && rel[1] > rel[2], "{rel:?}");
    }

    #[test]
    fn sbm_edge_query_examples() {
        let model = sbm(vec![5, 5], 1.0, 0.0);
        let g = sample(&model, 0).unwrap();
        let groups = model.groups().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut oracle = EdgeOracle::new(&g);
        let r = estimate_sbm_edge_queries(&mut oracle, &groups, 0.1, 0.1, &mut rng).unwrap();
        assert_eq!(r.estimate.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(r.queries, 3 * hoeffding_samples(4.0, 0.1, 0.1) as u64);
        assert_eq!(r.queries, oracle.queries());

        let g = sample(&GraphModel::gnp(20, 0.4, false).unwrap(), 1).unwrap();
        let one = Groups::from_sizes(&[20]).unwrap();
        let r = estimate_sbm_edge_queries(&mut EdgeOracle::new(&g), &one, 0.05, 0.1, &mut rng).unwrap();
        let density = g.edge_count() as f64 / 190.0;
        assert!((r.estimate[(0, 0)] - density).abs() < 0.05);
    }

    #[test]
    fn sbm_edge_queries_track_empirical_frequencies() {
        let model = sbm(vec![50, 50], 0.5, 0.1);
        let groups = model.groups().unwrap();
        let mut good = 0;
        for trial in 0..50u64 {
            let g = sample(&model, trial).unwrap();
            let emp = empirical_block_matrix(&g, &groups).unwrap().block;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let r = estimate_sbm_edge_queries(&mut EdgeOracle::new(&g), &groups, 0.05, 0.1, &mut rng).unwrap();
            if r.estimate.sub(&emp).max_abs() <= 0.05 {
                good += 1;
            }
        }
        assert!(good >= 45, "{good}");
    }

    #[test]
    fn sbm_edge_queries_are_unbiased() {
        let model = sbm(vec![20, 30], 0.4, 0.15);
        let groups = model.groups().unwrap();
        let g = sample(&model, 77).unwrap();
        let emp = empirical_block_matrix(&g, &groups).unwrap().block;
        let trials = 200;
        let mut mean = Matrix::zeros(2, 2);
        let mut k = 0;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(t);
            let r = estimate_sbm_edge_queries(&mut EdgeOracle::new(&g), &groups, 0.2, 0.2, &mut rng).unwrap();
            k = hoeffding_samples(4.0, 0.2, 0.2);
            mean = mean.add(&r.estimate.scale(1.0 / trials as f64));
        }
        for a in 0..2 {
            for b in 0..2 {
                let p = emp[(a, b)];
                let sd = (p * (1.0 - p) / (k * trials as usize) as f64).sqrt();
                assert!((mean[(a, b)] - p).abs() <= 3.0 * sd, "({a},{b})");
            }
        }
    }

    #[test]
    fn neighbor_fraction_formula() {
        let block = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.5]]).unwrap();
        let q = neighbor_fractions(&block, &[40, 40], true);
        assert!((q[(0, 0)] - 5.0 / 6.0).abs() < 1e-15);
        let q = neighbor_fractions(&block, &[40, 40], false);
        assert!((q[(0, 0)] - 0.5 * 39.0 / (0.5 * 39.0 + 0.1 * 40.0)).abs() < 1e-15);
    }

    #[test]
    fn neighbor_queries_recover_block_shape() {
        let block = Matrix::from_rows(&[
            vec![0.6, 0.1, 0.05],
            vec![0.1, 0.4, 0.2],
            vec![0.05, 0.2, 0.3],
        ])
        .unwrap();
        let model = GraphModel::sbm(vec![60, 60, 60], block.clone(), false).unwrap();
        let groups = model.groups().unwrap();
        let g = sample(&model, 4).unwrap();
        let mut oracle = NeighborOracle::new(&g, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (r, rec) = estimate_sbm_neighbor_queries(&mut oracle, &groups, 10_000, &mut rng).unwrap();
        assert_eq!(r.queries, 30_000);
        assert_eq!(r.queries, oracle.queries());
        assert_eq!(rec.components, 1);
        assert!(rec.tree_gap < 0.1);
        let cos = cosine_similarity(r.estimate.as_slice(), block.as_slice()).unwrap();
        assert!(cos >= 0.99, "{cos}");
        assert!((r.estimate.max_abs() - 1.0).abs() < 1e-15);

        let g = sample(&GraphModel::gnp(30, 0.3, false).unwrap(), 2).unwrap();
        let one = Groups::from_sizes(&[30]).unwrap();
        let (r, _) = estimate_sbm_neighbor_queries(&mut NeighborOracle::new(&g, 1), &one, 100, &mut rng).unwrap();
        assert_eq!(r.estimate.as_slice(), &[1.0]);
    }

    #[test]
    fn neighbor_queries_flag_split_constraints() {
        let model = sbm(vec![10, 10], 0.8, 0.0);
        let g = sample(&model, 3).unwrap();
        let groups = model.groups().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (r, rec) = estimate_sbm_neighbor_queries(&mut NeighborOracle::new(&g, 2), &groups, 500, &mut rng).unwrap();
        assert_eq!(rec.components, 2);
        assert_eq!(r.flags.len(), 1);
        assert_eq!(r.estimate[(0, 1)], 0.0);
    }

    #[test]
    fn sbm_intervention_examples() {
        let groups = Groups::from_sizes(&[5, 5]).unwrap();
        let p = Matrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.5]]).unwrap();
        let y = sbm_intervention_from_estimate(&p, &groups, 10.0).unwrap();
        assert!(y.y.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let y3 = sbm_intervention_from_estimate(&p.scale(3.0), &groups, 10.0).unwrap();
        for (a, b) in y.y.iter().zip(&y3.y) {
            assert!((a - b).abs() < 1e-9);
        }

        let groups = Groups::from_sizes(&[80, 20]).unwrap();
        let p = Matrix::from_rows(&[vec![0.3, 0.05], vec![0.05, 0.3]]).unwrap();
        let y = sbm_intervention_from_estimate(&p, &groups, 100.0).unwrap();
        assert!(y.y[0] > y.y[99]);
        let oracle = symmetric_eigen(&groups.tile_without_loops(&p), DEFAULT_TOL).unwrap().vector(0);
        let scaled: Vec<f64> = oracle.iter().map(|v| v * 10.0).collect();
        for (a, b) in y.y.iter().zip(&scaled) {
            assert!((a - b).abs() < 1e-9);
        }

        assert_eq!(
            sbm_intervention_from_estimate(&Matrix::zeros(2, 2), &Groups::from_sizes(&[2, 2]).unwrap(), 1.0),
            Err(EstimationError::ZeroMatrix)
        );
    }

    #[test]
    fn estimated_degree_beats_uniform_on_power_law() {
        let (c, offset) = power_law_from_degrees(300, 2.3, 25.0, 2.0).unwrap();
        let w = power_law_weights(300, 2.3, c, offset).unwrap();
        let model = GraphModel::gw(w, false).unwrap();
        let expected = expected_matrix(&model).unwrap();
        let l1 = crate::spectral::first_eigenvector(expected.matrix(), DEFAULT_TOL, POWER_MAX_ITERS)
            .unwrap()
            .value;
        let mut wins = 0;
        for seed in 0..10u64 {
            let g = sample(&model, seed).unwrap();
            let game = GameInstance::new(&g, 0.5 / (l1 + 10.0), vec![1.0; 300]).unwrap();
            let solver = EquilibriumSolver::new(&game).unwrap();
            let budget = 1000.0;
            let y_star = optimal_intervention(&game, budget, DEFAULT_BUDGET_TOL).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let est = estimate_degrees_edge_queries(&mut EdgeOracle::new(&g), 0.05, 0.1, &mut rng).unwrap();
            let y_deg = proportional_intervention(&est.estimate, budget).unwrap();
            let y_uni = proportional_intervention(&vec![1.0; 300], budget).unwrap();
            let rd = competitive_ratio(&solver, &y_deg, &y_star).unwrap().ratio;
            let ru = competitive_ratio(&solver, &y_uni, &y_star).unwrap().ratio;
            if rd > ru {
                wins += 1;
            }
        }
        assert!(wins >= 8, "{wins}");
    }
}
