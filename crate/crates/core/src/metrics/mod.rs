//! Component extraction, ranking and per-component network metrics.

mod centrality;
mod community;
mod components;
mod indexed;

use std::collections::VecDeque;

use serde::Serialize;

pub use centrality::{
    CentralityError, CentralityReport, Ranking, EIGEN_MAX_ITER, EIGEN_TOLERANCE,
};
pub use community::Partition;
pub use components::{connected_components, top_k, Component, ComponentSet, Coverage, TopK, UnionFind};

use crate::graph_builder::CoRefGraph;
use indexed::IndexedGraph;

/// Metric vector for one component. Path metrics count hops and ignore weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentMetrics {
    pub nodes: usize,
    pub edges: usize,
    /// `2 * edges / nodes`
    pub avg_degree: f64,
    /// `2 * total weight / nodes`
    pub avg_weighted_degree: f64,
    pub diameter: u32,
    pub density: f64,
    pub modularity: f64,
    pub avg_clustering: f64,
    pub avg_path_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PathStats {
    pub diameter: u32,
    pub avg_path_length: f64,
}

/// Exact all-pairs BFS. Unreachable pairs are skipped.
pub(crate) fn path_stats(g: &IndexedGraph<'_>) -> PathStats {
    let n = g.len();
    let mut dist = Vec::new();
    let mut queue = VecDeque::new();
    let mut diameter = 0u32;
    let mut total = 0u64;
    let mut pairs = 0u64;
    for s in 0..n {
        g.bfs(s, &mut dist, &mut queue);
        for &d in &dist[s + 1..] {
            if d != u32::MAX {
                diameter = diameter.max(d);
                total += d as u64;
                pairs += 1;
            }
        }
    }
    PathStats {
        diameter,
        avg_path_length: if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 },
    }
}

/// Mean local clustering coefficient; nodes of degree < 2 contribute zero.
pub(crate) fn avg_clustering(g: &IndexedGraph<'_>) -> f64 {
    let n = g.len();
    if n == 0 {
        return 0.0;
    }
    let mut mark = vec![false; n];
    let mut sum = 0.0;
    for v in 0..n {
        let nbrs = &g.adj[v];
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        for &(u, _) in nbrs {
            mark[u] = true;
        }
        let mut links = 0usize;
        for &(u, _) in nbrs {
            links += g.adj[u].iter().filter(|&&(w, _)| mark[w]).count();
        }
        for &(u, _) in nbrs {
            mark[u] = false;
        }
        // each triangle edge seen from both neighbours
        sum += links as f64 / (k * (k - 1)) as f64;
    }
    sum / n as f64
}

pub fn compute_metrics(component: &Component) -> ComponentMetrics {
    metrics_of(&component.subgraph)
}

/// Metrics for any graph; path metrics cover reachable pairs only.
pub fn metrics_of(graph: &CoRefGraph) -> ComponentMetrics {
    let g = IndexedGraph::new(graph);
    let nodes = g.len();
    let edges = g.edge_count();
    let weight = graph.total_weight();
    let paths = path_stats(&g);
    let per_node = |x: f64| if nodes == 0 { 0.0 } else { x / nodes as f64 };
    let density = if nodes < 2 {
        0.0
    } else {
        edges as f64 / (nodes as f64 * (nodes - 1) as f64 / 2.0)
    };
    let partition = community::partition_from(&g, &community::louvain(&g));
    ComponentMetrics {
        nodes,
        edges,
        avg_degree: per_node(2.0 * edges as f64),
        avg_weighted_degree: per_node(2.0 * weight as f64),
        diameter: paths.diameter,
        density,
        modularity: partition.modularity,
        avg_clustering: avg_clustering(&g),
        avg_path_length: paths.avg_path_length,
    }
}

pub fn detect_communities(component: &Component) -> Partition {
    community::detect_communities_in(&component.subgraph)
}

pub fn centralities(component: &Component) -> Result<CentralityReport, CentralityError> {
    centrality::centralities_of(&component.subgraph)
}

pub use centrality::centralities_of;
pub use community::detect_communities_in;
