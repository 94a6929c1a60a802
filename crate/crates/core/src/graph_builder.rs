//! Co-reference network construction.
//!
//! Every distinct address becomes a node. Two occurrences with the same base
//! whose offsets differ by less than the window add one to the weight of the
//! edge between their addresses. Occurrences of the same address never pair.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::extractor::FeatureRecord;

/// Default window in bytes.
pub const DEFAULT_WINDOW: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("records are not sorted by (base, offset): index {index} precedes its predecessor")]
    Unsorted { index: usize },
    #[error("window must be at least 1 byte")]
    ZeroWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    pub window: u64,
}

impl WindowParams {
    pub fn new(window: u64) -> Result<Self, GraphError> {
        if window == 0 {
            return Err(GraphError::ZeroWindow);
        }
        Ok(WindowParams { window })
    }
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            window: DEFAULT_WINDOW,
        }
    }
}

/// Unordered address pair, stored smaller-first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(String, String);

impl EdgeKey {
    /// Panics on a self-pair.
    pub fn new(a: &str, b: &str) -> Self {
        assert_ne!(a, b, "self-loops are not representable");
        if a < b {
            EdgeKey(a.to_owned(), b.to_owned())
        } else {
            EdgeKey(b.to_owned(), a.to_owned())
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }
}

/// Undirected weighted graph over addresses. Iteration order is sorted, so
/// equal graphs always serialise identically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoRefGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<EdgeKey, u64>,
}

impl CoRefGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, address: &str) {
        if !self.nodes.contains(address) {
            self.nodes.insert(address.to_owned());
        }
    }

    /// Adds `weight` to edge `a`-`b`, creating both endpoints as needed.
    /// A zero weight or a self-pair only ensures the nodes exist.
    pub fn add_weight(&mut self, a: &str, b: &str, weight: u64) {
        self.add_node(a);
        self.add_node(b);
        if a == b || weight == 0 {
            return;
        }
        *self.edges.entry(EdgeKey::new(a, b)).or_insert(0) += weight;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, address: &str) -> bool {
        self.nodes.contains(address)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.iter().map(String::as_str)
    }

    /// Edges as `(a, b, weight)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.edges.iter().map(|(k, &w)| (k.first(), k.second(), w))
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        if a == b {
            return None;
        }
        self.edges.get(&EdgeKey::new(a, b)).copied()
    }

    /// Subgraph induced by `members`.
    pub fn induced<'a, I>(&self, members: I) -> CoRefGraph
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut sub = CoRefGraph::new();
        for m in members {
            if self.nodes.contains(m) {
                sub.add_node(m);
            }
        }
        for (k, &w) in &self.edges {
            if sub.nodes.contains(k.first()) && sub.nodes.contains(k.second()) {
                sub.edges.insert(k.clone(), w);
            }
        }
        sub
    }
}

fn check_sorted(records: &[FeatureRecord]) -> Result<(), GraphError> {
    for (i, pair) in records.windows(2).enumerate() {
        if pair[1].path < pair[0].path {
            return Err(GraphError::Unsorted { index: i + 1 });
        }
    }
    Ok(())
}

/// Builds the co-reference graph from records sorted by (base, offset).
pub fn build_graph(records: &[FeatureRecord], params: WindowParams) -> Result<CoRefGraph, GraphError> {
    if params.window == 0 {
        return Err(GraphError::ZeroWindow);
    }
    check_sorted(records)?;

    // Intern addresses so the inner loop works on integers.
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut names: Vec<&str> = Vec::new();
    let seq: Vec<u32> = records
        .iter()
        .map(|r| {
            *ids.entry(r.address.as_str()).or_insert_with(|| {
                names.push(r.address.as_str());
                (names.len() - 1) as u32
            })
        })
        .collect();

    let mut weights: HashMap<(u32, u32), u64> = HashMap::new();
    for i in 0..records.len() {
        let (base, off) = (records[i].path.base(), records[i].path.offset());
        for j in i + 1..records.len() {
            let other = &records[j].path;
            // sorted input: once the base changes or the gap reaches W, stop
            if other.base() != base || other.offset() - off >= params.window {
                break;
            }
            let (a, b) = (seq[i], seq[j]);
            if a != b {
                *weights.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }

    let mut graph = CoRefGraph::new();
    for name in &names {
        graph.add_node(name);
    }
    for ((a, b), w) in weights {
        graph
            .edges
            .insert(EdgeKey::new(names[a as usize], names[b as usize]), w);
    }
    Ok(graph)
}

/// Node union with edge weights summed.
pub fn merge_graphs(g1: &CoRefGraph, g2: &CoRefGraph) -> CoRefGraph {
    let mut out = g1.clone();
    for n in g2.nodes() {
        out.add_node(n);
    }
    for (k, &w) in &g2.edges {
        *out.edges.entry(k.clone()).or_insert(0) += w;
    }
    out
}

/// Splits sorted records into independent runs: a new run starts at every
/// base change or offset gap of at least the window. Building each run and
/// merging gives the same graph as one serial build.
pub fn independent_runs(records: &[FeatureRecord], params: WindowParams) -> Vec<&[FeatureRecord]> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..records.len() {
        let (prev, cur) = (&records[i - 1].path, &records[i].path);
        if prev.base() != cur.base() || cur.offset().saturating_sub(prev.offset()) >= params.window {
            runs.push(&records[start..i]);
            start = i;
        }
    }
    if start < records.len() {
        runs.push(&records[start..]);
    }
    runs
}

/// Parallel build over independent runs; identical to [`build_graph`].
pub fn build_graph_parallel(
    records: &[FeatureRecord],
    params: WindowParams,
) -> Result<CoRefGraph, GraphError> {
    use rayon::prelude::*;
    if params.window == 0 {
        return Err(GraphError::ZeroWindow);
    }
    check_sorted(records)?;
    let runs = independent_runs(records, params);
    // group small runs so each task has some work
    let target = (records.len() / (rayon::current_num_threads() * 4).max(1)).max(1024);
    let mut groups: Vec<&[FeatureRecord]> = Vec::new();
    let mut begin = 0usize;
    let mut size = 0usize;
    let mut pos = 0usize;
    for run in &runs {
        size += run.len();
        pos += run.len();
        if size >= target {
            groups.push(&records[begin..pos]);
            begin = pos;
            size = 0;
        }
    }
    if begin < records.len() {
        groups.push(&records[begin..]);
    }
    let parts: Vec<CoRefGraph> = groups
        .par_iter()
        .map(|g| build_graph(g, params))
        .collect::<Result<_, _>>()?;
    Ok(parts
        .iter()
        .fold(CoRefGraph::new(), |acc, g| merge_graphs(&acc, g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forensic_path::ForensicPath;

    fn rec(path: &str, addr: &str) -> FeatureRecord {
        FeatureRecord::new(ForensicPath::parse(path).unwrap(), addr, Vec::new())
    }

    fn w(n: u64) -> WindowParams {
        WindowParams::new(n).unwrap()
    }

    #[test]
    fn one_pair_inside_window() {
        let g = build_graph(&[rec("0", "a@x"), rec("50", "b@x")], w(100)).unwrap();
        assert_eq!(g.nodes().collect::<Vec<_>>(), ["a@x", "b@x"]);
        assert_eq!(g.weight("a@x", "b@x"), Some(1));
    }

    #[test]
    fn window_is_strict() {
        let g = build_graph(&[rec("0", "a@x"), rec("100", "b@x")], w(100)).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn occurrence_pairs_each_count() {
        let recs = [rec("0", "a@x"), rec("10", "b@x"), rec("20", "a@x"), rec("30", "b@x")];
        let g = build_graph(&recs, w(100)).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight("a@x", "b@x"), Some(4));
    }

    #[test]
    fn different_bases_never_link() {
        let recs = [rec("100-GZIP-0", "a@x"), rec("200-GZIP-0", "b@x")];
        let g = build_graph(&recs, w(u64::MAX)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn unsorted_input_rejected() {
        let recs = [rec("50", "a@x"), rec("10", "b@x")];
        assert_eq!(build_graph(&recs, w(10)), Err(GraphError::Unsorted { index: 1 }));
        assert_eq!(WindowParams::new(0), Err(GraphError::ZeroWindow));
    }

    #[test]
    fn merge_identity_and_doubling() {
        let recs = [rec("0", "a@x"), rec("10", "b@x"), rec("20", "c@x")];
        let g = build_graph(&recs, w(15)).unwrap();
        assert_eq!(merge_graphs(&g, &CoRefGraph::new()), g);
        let d = merge_graphs(&g, &g);
        for ((a, b, w1), (_, _, w2)) in g.edges().zip(d.edges()) {
            assert_eq!(w2, 2 * w1, "{a}-{b}");
        }
        assert_eq!(d.node_count(), g.node_count());
    }

    #[test]
    fn induced_subgraph() {
        let mut g = CoRefGraph::new();
        g.add_weight("a", "b", 2);
        g.add_weight("b", "c", 3);
        g.add_weight("c", "d", 1);
        let s = g.induced(["a", "b", "c"]);
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.total_weight(), 5);
    }

    #[test]
    fn parallel_matches_serial() {
        let mut recs = Vec::new();
        for i in 0..5000u64 {
            recs.push(rec(&(i * 37 % 100_000 + i * 100).to_string(), &format!("u{}@x.org", i % 97)));
        }
        recs.sort();
        let serial = build_graph(&recs, w(500)).unwrap();
        let parallel = build_graph_parallel(&recs, w(500)).unwrap();
        assert_eq!(serial, parallel);
    }
}
