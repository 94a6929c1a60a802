//! Deterministic greedy modularity maximisation (Louvain style).
//!
//! Nodes are visited in lexicographic address order at the first level and in
//! community order afterwards; ties go to the current community, then to the
//! lowest community index. No randomness is involved.

use std::collections::BTreeMap;

use serde::Serialize;

use super::indexed::IndexedGraph;
use crate::graph_builder::CoRefGraph;

const MIN_GAIN: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    /// Communities ordered by size descending, then smallest member.
    pub communities: Vec<Vec<String>>,
    /// Weighted modularity, rounded to 4 decimals.
    pub modularity: f64,
}

impl Partition {
    pub fn membership(&self) -> BTreeMap<&str, usize> {
        let mut map = BTreeMap::new();
        for (c, members) in self.communities.iter().enumerate() {
            for m in members {
                map.insert(m.as_str(), c);
            }
        }
        map
    }
}

/// One aggregation level.
struct Level {
    /// Internal weight of each super-node (each edge counted once).
    inner: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Level {
    fn strength(&self, i: usize) -> f64 {
        2.0 * self.inner[i] + self.adj[i].iter().map(|&(_, w)| w).sum::<f64>()
    }
}

/// Local moving on one level. Returns community per node, renumbered by
/// first appearance.
fn local_moving(level: &Level, two_m: f64) -> Vec<usize> {
    let n = level.adj.len();
    let k: Vec<f64> = (0..n).map(|i| level.strength(i)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = k.clone();
    let mut links = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();

    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for i in 0..n {
            let own = comm[i];
            tot[own] -= k[i];
            for &(j, w) in &level.adj[i] {
                let c = comm[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            let gain = |c: usize, links: &[f64]| links[c] - tot[c] * k[i] / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &links);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, &links);
                if g > best_gain + MIN_GAIN {
                    best = c;
                    best_gain = g;
                }
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
            tot[best] += k[i];
            if best != own {
                comm[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let mut renumber = vec![usize::MAX; n];
    let mut next = 0;
    for c in comm.iter_mut() {
        if renumber[*c] == usize::MAX {
            renumber[*c] = next;
            next += 1;
        }
        *c = renumber[*c];
    }
    comm
}

fn aggregate(level: &Level, comm: &[usize], count: usize) -> Level {
    let mut inner = vec![0.0; count];
    let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
    for (i, list) in level.adj.iter().enumerate() {
        let ci = comm[i];
        inner[ci] += level.inner[i];
        for &(j, w) in list {
            let cj = comm[j];
            if ci == cj {
                // seen from both ends
                inner[ci] += w / 2.0;
            } else {
                *maps[ci].entry(cj).or_insert(0.0) += w;
            }
        }
    }
    Level {
        inner,
        adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
    }
}

/// Weighted modularity of an assignment of nodes to communities.
pub(crate) fn modularity_of(graph: &IndexedGraph<'_>, comm: &[usize]) -> f64 {
    let count = comm.iter().copied().max().map_or(0, |m| m + 1);
    let mut inside = vec![0.0; count];
    let mut tot = vec![0.0; count];
    let mut two_m = 0.0;
    for (i, list) in graph.adj.iter().enumerate() {
        for &(j, w) in list {
            two_m += w;
            tot[comm[i]] += w;
            if comm[i] == comm[j] {
                inside[comm[i]] += w;
            }
        }
    }
    if two_m == 0.0 {
        return 0.0;
    }
    (0..count)
        .map(|c| inside[c] / two_m - (tot[c] / two_m).powi(2))
        .sum()
}

pub(crate) fn louvain(graph: &IndexedGraph<'_>) -> Vec<usize> {
    let n = graph.len();
    let mut assignment: Vec<usize> = (0..n).collect();
    let two_m: f64 = graph.adj.iter().flatten().map(|&(_, w)| w).sum();
    if n == 0 || two_m == 0.0 {
        return vec![0; n];
    }
    let mut level = Level {
        inner: vec![0.0; n],
        adj: graph.adj.clone(),
    };
    loop {
        let comm = local_moving(&level, two_m);
        let count = comm.iter().copied().max().map_or(0, |m| m + 1);
        for a in assignment.iter_mut() {
            *a = comm[*a];
        }
        if count == level.adj.len() {
            break;
        }
        level = aggregate(&level, &comm, count);
    }
    // never worse than keeping everything together
    if modularity_of(graph, &assignment) < 0.0 {
        assignment.iter_mut().for_each(|a| *a = 0);
    }
    assignment
}

fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub(crate) fn partition_from(graph: &IndexedGraph<'_>, comm: &[usize]) -> Partition {
    let count = comm.iter().copied().max().map_or(0, |m| m + 1);
    let mut communities: Vec<Vec<String>> = vec![Vec::new(); count];
    for (i, &c) in comm.iter().enumerate() {
        communities[c].push(graph.names[i].to_owned());
    }
    communities.retain(|c| !c.is_empty());
    communities.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    Partition {
        communities,
        modularity: round4(modularity_of(graph, comm)),
    }
}

pub fn detect_communities_in(graph: &CoRefGraph) -> Partition {
    let indexed = IndexedGraph::new(graph);
    let comm = louvain(&indexed);
    partition_from(&indexed, &comm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(g: &mut CoRefGraph, names: &[String]) {
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                g.add_weight(&names[i], &names[j], 1);
            }
        }
    }

    fn names(p: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn two_cliques_split_at_bridge() {
        let mut g = CoRefGraph::new();
        let (a, b) = (names("a", 5), names("b", 5));
        clique(&mut g, &a);
        clique(&mut g, &b);
        g.add_weight("a4", "b0", 1);
        let p = detect_communities_in(&g);
        assert_eq!(p.communities.len(), 2);
        assert_eq!(p.communities[0], a);
        assert_eq!(p.communities[1], b);
        assert!(p.modularity > 0.4);
    }

    #[test]
    fn single_clique_is_one_community() {
        let mut g = CoRefGraph::new();
        clique(&mut g, &names("n", 6));
        let p = detect_communities_in(&g);
        assert_eq!(p.communities.len(), 1);
        assert_eq!(p.modularity, 0.0);
    }

    #[test]
    fn modularity_known_value() {
        // triangle a-b-c, bridge b-d, triangle d-e-f; 7 unit edges
        let mut g = CoRefGraph::new();
        for (x, y) in [("a", "b"), ("b", "c"), ("c", "a"), ("d", "b"), ("d", "e"), ("e", "f"), ("f", "d")] {
            g.add_weight(x, y, 1);
        }
        let idx = IndexedGraph::new(&g);
        let comm = [0, 0, 0, 1, 1, 1];
        let q = modularity_of(&idx, &comm);
        assert!((q - 0.3571428571428571).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut g = CoRefGraph::new();
        for i in 0..40u64 {
            for j in 0..40u64 {
                if i < j && (i * 7 + j * 13) % 5 == 0 {
                    g.add_weight(&format!("n{i}"), &format!("n{j}"), 1 + (i + j) % 3);
                }
            }
        }
        assert_eq!(detect_communities_in(&g), detect_communities_in(&g));
    }
}
