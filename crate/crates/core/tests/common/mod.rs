//! Slow, obviously-correct reference implementations.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use emailnet_core::{CoRefGraph, FeatureRecord, ForensicPath};
use rand::Rng;

pub type EdgeMap = BTreeMap<(String, String), u64>;

fn key(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

/// Every occurrence pair tested against the window.
pub fn brute_graph(records: &[FeatureRecord], window: u64) -> (BTreeSet<String>, EdgeMap) {
    let nodes = records.iter().map(|r| r.address.clone()).collect();
    let mut edges = EdgeMap::new();
    for i in 0..records.len() {
        for j in i + 1..records.len() {
            let (a, b) = (&records[i], &records[j]);
            if a.address == b.address || a.path.base() != b.path.base() {
                continue;
            }
            if a.path.offset().abs_diff(b.path.offset()) < window {
                *edges.entry(key(&a.address, &b.address)).or_insert(0) += 1;
            }
        }
    }
    (nodes, edges)
}

pub fn as_maps(g: &CoRefGraph) -> (BTreeSet<String>, EdgeMap) {
    let nodes = g.nodes().map(str::to_owned).collect();
    let edges = g.edges().map(|(a, b, w)| (key(a, b), w)).collect();
    (nodes, edges)
}

/// Random sorted records over a few bases, some nested.
pub fn random_records<R: Rng>(rng: &mut R, n: usize, span: u64) -> Vec<FeatureRecord> {
    let bases = ["", "5000-GZIP", "9000-GZIP", "9000-GZIP-12-GZIP"];
    let addrs: Vec<String> = (0..rng.random_range(2..40)).map(|i| format!("u{i}@host{}.org", i % 3)).collect();
    let mut out: Vec<FeatureRecord> = (0..n)
        .map(|_| {
            let base = bases[rng.random_range(0..bases.len())];
            let offset = rng.random_range(0..span);
            let path = ForensicPath::new(base, offset).unwrap();
            let a = &addrs[rng.random_range(0..addrs.len())];
            FeatureRecord::new(path, a.clone(), Vec::new())
        })
        .collect();
    out.sort();
    out
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, max_w: u64) -> CoRefGraph {
    let mut g = CoRefGraph::new();
    for i in 0..n {
        g.add_node(&format!("v{i:03}@x.org"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_weight(&format!("v{i:03}@x.org"), &format!("v{j:03}@x.org"), rng.random_range(1..=max_w));
            }
        }
    }
    g
}

/// Random spanning tree plus extra edges, so always connected.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, p: f64) -> CoRefGraph {
    let mut g = random_graph(rng, n, p, 5);
    for i in 1..n {
        let j = rng.random_range(0..i);
        g.add_weight(&format!("v{i:03}@x.org"), &format!("v{j:03}@x.org"), 1);
    }
    g
}

fn adjacency(g: &CoRefGraph) -> (Vec<String>, Vec<Vec<usize>>) {
    let names: Vec<String> = g.nodes().map(str::to_owned).collect();
    let idx: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut adj = vec![Vec::new(); names.len()];
    for (a, b, _) in g.edges() {
        adj[idx[a]].push(idx[b]);
        adj[idx[b]].push(idx[a]);
    }
    (names, adj)
}

/// `(diameter, average path length)` over reachable pairs.
pub fn floyd_warshall(g: &CoRefGraph) -> (u32, f64) {
    let (names, adj) = adjacency(g);
    let n = names.len();
    const INF: u32 = u32::MAX / 2;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for &j in &adj[i] {
            d[i][j] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let (mut diam, mut total, mut pairs) = (0u32, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] < INF {
                diam = diam.max(d[i][j]);
                total += d[i][j] as u64;
                pairs += 1;
            }
        }
    }
    (diam, if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 })
}

/// Betweenness by listing every shortest path between every pair.
pub fn betweenness_by_paths(g: &CoRefGraph) -> BTreeMap<String, f64> {
    let (names, adj) = adjacency(g);
    let n = names.len();
    let dist: Vec<Vec<i64>> = (0..n)
        .map(|s| {
            let mut d = vec![-1i64; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w] < 0 {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect();

    fn walk(v: usize, t: usize, adj: &[Vec<usize>], dist: &[Vec<i64>], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == t {
            out.push(path.clone());
            return;
        }
        for &w in &adj[v] {
            if dist[w][t] == dist[v][t] - 1 {
                path.push(w);
                walk(w, t, adj, dist, path, out);
                path.pop();
            }
        }
    }

    let mut score = vec![0.0f64; n];
    for s in 0..n {
        for t in s + 1..n {
            if dist[s][t] < 0 {
                continue;
            }
            let mut paths = Vec::new();
            walk(s, t, &adj, &dist, &mut vec![s], &mut paths);
            let total = paths.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count() as f64;
                score[v] += through / total;
            }
        }
    }
    let pairs = if n > 2 { ((n - 1) * (n - 2)) as f64 / 2.0 } else { 0.0 };
    names
        .into_iter()
        .zip(score)
        .map(|(name, s)| (name, if pairs > 0.0 { s / pairs } else { 0.0 }))
        .collect()
}

/// Connected node sets by breadth-first flooding.
pub fn flood_components(g: &CoRefGraph) -> BTreeSet<BTreeSet<String>> {
    let (names, adj) = adjacency(g);
    let mut seen = vec![false; names.len()];
    let mut out = BTreeSet::new();
    for s in 0..names.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = BTreeSet::new();
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            comp.insert(names[v].clone());
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        out.insert(comp);
    }
    out
}

/// Pairwise agreement between two labelings of the same items.
pub fn rand_index(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    let keys: Vec<&String> = a.keys().filter(|k| b.contains_key(*k)).collect();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            let same_a = a[keys[i]] == a[keys[j]];
            let same_b = b[keys[i]] == b[keys[j]];
            agree += u64::from(same_a == same_b);
            total += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}
