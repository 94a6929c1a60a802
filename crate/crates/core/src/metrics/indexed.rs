use std::collections::{HashMap, VecDeque};

use crate::graph_builder::CoRefGraph;

/// Integer-indexed view of a [`CoRefGraph`]. Node `i` is the `i`-th address
/// in lexicographic order; neighbour lists are sorted by index.
#[derive(Debug, Clone)]
pub(crate) struct IndexedGraph<'a> {
    pub names: Vec<&'a str>,
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl<'a> IndexedGraph<'a> {
    pub fn new(graph: &'a CoRefGraph) -> Self {
        let names: Vec<&str> = graph.nodes().collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for (a, b, w) in graph.edges() {
            let (ia, ib) = (index[a], index[b]);
            adj[ia].push((ib, w as f64));
            adj[ib].push((ia, w as f64));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        IndexedGraph { names, adj }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `source`; `u32::MAX` marks unreachable nodes.
    pub fn bfs(&self, source: usize, dist: &mut Vec<u32>, queue: &mut VecDeque<usize>) {
        dist.clear();
        dist.resize(self.len(), u32::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let next = dist[v] + 1;
            for &(w, _) in &self.adj[v] {
                if dist[w] == u32::MAX {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
    }
}
