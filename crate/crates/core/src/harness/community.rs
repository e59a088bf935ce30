//! Girvan-Newman community detection and block-model fitting from its groups.

use std::collections::{BTreeMap, VecDeque};

use crate::estimation::{empirical_block_matrix, BlockEstimate, EstimationError};
use crate::graph::{connected_components, ExpectedMatrix, Graph, Groups};

/// Edge betweenness per unordered pair `(u, v)`, `u < v`: the number of
/// vertex pairs whose shortest paths cross the edge, split evenly across
/// equally short paths. Self-loops carry no shortest paths and are omitted.
pub fn edge_betweenness(g: &Graph) -> BTreeMap<(usize, usize), f64> {
    let n = g.n();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| g.neighbors(v).filter(|&w| w != v).collect()).collect();
    let mut scores: BTreeMap<(usize, usize), f64> = g.edges().filter(|(u, v)| u != v).map(|e| (e, 0.0)).collect();

    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        delta.iter_mut().for_each(|x| *x = 0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                *scores.get_mut(&(v.min(w), v.max(w))).expect("edge present") += c;
                delta[v] += c;
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    scores.values_mut().for_each(|x| *x /= 2.0);
    scores
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GirvanNewmanParams {
    pub min_big_clusters: usize,
    pub min_cluster_size: usize,
    pub max_clusters: usize,
}

impl Default for GirvanNewmanParams {
    fn default() -> Self {
        Self {
            min_big_clusters: 10,
            min_cluster_size: 5,
            max_clusters: 50,
        }
    }
}

fn stop_rule_holds(labels: &[usize], params: GirvanNewmanParams) -> bool {
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in labels {
        sizes[l] += 1;
    }
    let big = sizes.iter().filter(|&&s| s >= params.min_cluster_size).count();
    big >= params.min_big_clusters || count >= params.max_clusters
}

/// Removes maximum-betweenness edges until either enough large components
/// exist or the total component count (of any size) reaches `max_clusters`.
/// Ties within a relative 1e-9 go to the lexicographically smallest pair.
pub fn girvan_newman_groups(g: &Graph, params: GirvanNewmanParams) -> Groups {
    let mut work = g.clone();
    loop {
        let labels = connected_components(&work);
        if stop_rule_holds(&labels, params) {
            return Groups::from_labels(labels).expect("component labels are dense");
        }
        let scores = edge_betweenness(&work);
        let Some(&max) = scores.values().max_by(|a, b| a.total_cmp(b)) else {
            return Groups::from_labels(labels).expect("component labels are dense");
        };
        let (&(u, v), _) = scores
            .iter()
            .find(|(_, &s)| s >= max - 1e-9 * max.abs().max(1.0))
            .expect("maximum exists");
        work.remove_edge(u, v).expect("edge in range");
    }
}

/// Fitted expected matrix: group-pair edge frequencies tiled to `n x n` with a
/// zero diagonal.
pub fn fit_sbm_from_groups(g: &Graph, groups: &Groups) -> Result<(ExpectedMatrix, BlockEstimate), EstimationError> {
    let est = empirical_block_matrix(g, groups)?;
    let expected = ExpectedMatrix::new(est.tiled.clone(), 0.0).expect("frequencies lie in [0, 1]");
    Ok((expected, est))
}
