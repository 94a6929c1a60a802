//! Connected components via union-find.

use std::collections::HashMap;

use serde::Serialize;

use crate::graph_builder::CoRefGraph;

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// A connected piece of the network, ranked by order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// `<drive-id>c<rank>`, e.g. `d1c2`.
    pub id: String,
    /// 1-based, by node count descending.
    pub rank: usize,
    pub subgraph: CoRefGraph,
}

impl Component {
    pub fn node_count(&self) -> usize {
        self.subgraph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.subgraph.edge_count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentSet {
    /// Non-singleton components in rank order.
    pub components: Vec<Component>,
    /// Addresses with no edges at all.
    pub singletons: Vec<String>,
}

/// Splits `graph` into maximal connected sets. Components are ordered by node
/// count descending, ties by smallest member address.
pub fn connected_components(graph: &CoRefGraph, drive_id: &str) -> ComponentSet {
    let names: Vec<&str> = graph.nodes().collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut uf = UnionFind::new(names.len());
    for (a, b, _) in graph.edges() {
        uf.union(index[a], index[b]);
    }

    // members come out in index (= lexicographic) order
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..names.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut slot = vec![usize::MAX; names.len()];
    let mut subgraphs = Vec::new();
    let mut singletons = Vec::new();
    for g in &groups {
        if g.len() == 1 {
            singletons.push(names[g[0]].to_owned());
            continue;
        }
        let mut sub = CoRefGraph::new();
        for &i in g {
            slot[i] = subgraphs.len();
            sub.add_node(names[i]);
        }
        subgraphs.push(sub);
    }
    for (a, b, w) in graph.edges() {
        subgraphs[slot[index[a]]].add_weight(a, b, w);
    }

    let components = subgraphs
        .into_iter()
        .enumerate()
        .map(|(i, subgraph)| Component {
            id: format!("{drive_id}c{}", i + 1),
            rank: i + 1,
            subgraph,
        })
        .collect();
    ComponentSet {
        components,
        singletons,
    }
}

/// The first `k` components plus how much of the non-singleton network they
/// hold, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    pub node_pct: f64,
    pub edge_pct: f64,
}

#[derive(Debug, Clone)]
pub struct TopK<'a> {
    pub components: &'a [Component],
    pub coverage: Coverage,
}

pub fn top_k(components: &[Component], k: usize) -> TopK<'_> {
    let k = k.max(1).min(components.len());
    let selected = &components[..k];
    let pct = |part: usize, whole: usize| {
        if whole == 0 {
            0.0
        } else {
            100.0 * part as f64 / whole as f64
        }
    };
    let nodes = |cs: &[Component]| cs.iter().map(Component::node_count).sum::<usize>();
    let edges = |cs: &[Component]| cs.iter().map(Component::edge_count).sum::<usize>();
    TopK {
        components: selected,
        coverage: Coverage {
            node_pct: pct(nodes(selected), nodes(components)),
            edge_pct: pct(edges(selected), edges(components)),
        },
    }
}
