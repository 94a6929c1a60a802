//! Eigenvector, betweenness and closeness centrality.
//!
//! Eigenvector centrality runs power iteration on `A + I` over the weighted
//! adjacency; the shift keeps bipartite graphs (stars, paths) from
//! oscillating and leaves the eigenvectors unchanged. Betweenness (Brandes)
//! and closeness use unweighted hops.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use super::indexed::IndexedGraph;
use crate::graph_builder::CoRefGraph;

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CentralityError {
    #[error("eigenvector centrality did not converge in {iterations} iterations")]
    NotConverged { iterations: usize },
}

/// Scores sorted descending; ties by address.
pub type Ranking = Vec<(String, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityReport {
    pub eigenvector: Ranking,
    pub betweenness: Ranking,
    pub closeness: Ranking,
}

impl CentralityReport {
    /// Keeps the first `n` entries of each list.
    pub fn truncated(&self, n: usize) -> CentralityReport {
        let cut = |r: &Ranking| r.iter().take(n).cloned().collect();
        CentralityReport {
            eigenvector: cut(&self.eigenvector),
            betweenness: cut(&self.betweenness),
            closeness: cut(&self.closeness),
        }
    }
}

/// Sort key that makes scores equal up to 1e-9 tie on name.
fn rank(names: &[&str], scores: &[f64]) -> Ranking {
    let mut out: Vec<(String, f64)> = names
        .iter()
        .zip(scores)
        .map(|(n, &s)| ((*n).to_owned(), s))
        .collect();
    out.sort_by(|a, b| {
        let qa = (a.1 * 1e9).round() as i64;
        let qb = (b.1 * 1e9).round() as i64;
        qb.cmp(&qa).then_with(|| a.0.cmp(&b.0))
    });
    out
}

pub(crate) fn eigenvector(graph: &IndexedGraph<'_>) -> Result<Vec<f64>, CentralityError> {
    let n = graph.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut x = vec![1.0f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..EIGEN_MAX_ITER {
        for (i, list) in graph.adj.iter().enumerate() {
            next[i] = x[i] + list.iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
        let max = next.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut delta = 0.0f64;
        for i in 0..n {
            next[i] /= max;
            delta = delta.max((next[i] - x[i]).abs());
        }
        std::mem::swap(&mut x, &mut next);
        if delta < EIGEN_TOLERANCE {
            return Ok(x);
        }
    }
    Err(CentralityError::NotConverged {
        iterations: EIGEN_MAX_ITER,
    })
}

/// Brandes' algorithm, normalised by `(n-1)(n-2)/2` pairs.
pub(crate) fn betweenness(graph: &IndexedGraph<'_>) -> Vec<f64> {
    let n = graph.len();
    let mut bc = vec![0.0f64; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::new();

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &(w, _) in &graph.adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    // every unordered pair was seen from both ends
    let scale = if n > 2 {
        1.0 / ((n - 1) * (n - 2)) as f64
    } else {
        0.0
    };
    bc.iter_mut().for_each(|b| *b *= scale);
    bc
}

/// `(n-1) / sum of hop distances`; zero for isolated nodes.
pub(crate) fn closeness(graph: &IndexedGraph<'_>) -> Vec<f64> {
    let n = graph.len();
    let mut dist = Vec::new();
    let mut queue = VecDeque::new();
    (0..n)
        .map(|s| {
            graph.bfs(s, &mut dist, &mut queue);
            let total: u64 = dist.iter().filter(|&&d| d != u32::MAX).map(|&d| d as u64).sum();
            if total == 0 {
                0.0
            } else {
                (n - 1) as f64 / total as f64
            }
        })
        .collect()
}

pub fn centralities_of(graph: &CoRefGraph) -> Result<CentralityReport, CentralityError> {
    let g = IndexedGraph::new(graph);
    let eig = eigenvector(&g)?;
    Ok(CentralityReport {
        eigenvector: rank(&g.names, &eig),
        betweenness: rank(&g.names, &betweenness(&g)),
        closeness: rank(&g.names, &closeness(&g)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> CoRefGraph {
        let mut g = CoRefGraph::new();
        for i in 0..leaves {
            g.add_weight("hub", &format!("leaf{i}"), 1);
        }
        g
    }

    fn path(n: usize) -> CoRefGraph {
        let mut g = CoRefGraph::new();
        for i in 1..n {
            g.add_weight(&format!("p{}", i - 1), &format!("p{i}"), 1);
        }
        g
    }

    #[test]
    fn star_center_first_everywhere() {
        let r = centralities_of(&star(4)).unwrap();
        for list in [&r.eigenvector, &r.betweenness, &r.closeness] {
            assert_eq!(list[0].0, "hub");
            assert_eq!(list.len(), 5);
        }
        assert!((r.eigenvector[0].1 - 1.0).abs() < 1e-12);
        assert!((r.betweenness[0].1 - 1.0).abs() < 1e-12);
        assert!((r.closeness[0].1 - 1.0).abs() < 1e-12);
        // leaves tie, ordered by name
        let leaves: Vec<&str> = r.closeness[1..].iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(leaves, ["leaf0", "leaf1", "leaf2", "leaf3"]);
    }

    #[test]
    fn path_middle_has_max_betweenness() {
        let r = centralities_of(&path(5)).unwrap();
        assert_eq!(r.betweenness[0].0, "p2");
        assert_eq!(r.closeness[0].0, "p2");
        assert_eq!(r.eigenvector[0].0, "p2");
        // P5 middle node lies on 4 of the 6 pairs not involving it
        assert!((r.betweenness[0].1 - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn path_eigenvector_closed_form() {
        // principal eigenvector of P_n: sin(pi*k/(n+1)), k = 1..n
        let n = 7;
        let pg = path(n);
        let g = IndexedGraph::new(&pg);
        let x = eigenvector(&g).unwrap();
        let exact: Vec<f64> = (1..=n)
            .map(|k| (std::f64::consts::PI * k as f64 / (n + 1) as f64).sin())
            .collect();
        let max = exact.iter().cloned().fold(0.0, f64::max);
        for (i, name) in g.names.iter().enumerate() {
            let k: usize = name[1..].parse().unwrap();
            assert!((x[i] - exact[k] / max).abs() < 1e-8, "{name}");
        }
    }

    #[test]
    fn weights_drive_eigenvector_only() {
        let mut g = star(3);
        g.add_weight("leaf0", "leaf1", 50);
        let r = centralities_of(&g).unwrap();
        assert_ne!(r.eigenvector[0].0, "hub");
        assert_eq!(r.betweenness[0].0, "hub");
    }
}
