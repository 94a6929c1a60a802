mod common;

use std::collections::BTreeSet;

use emailnet_core::metrics::{
    centralities_of, connected_components, detect_communities_in, metrics_of, top_k,
};
use emailnet_core::CoRefGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{betweenness_by_paths, flood_components, floyd_warshall, random_connected, random_graph};

fn graph_with(nodes: usize, edges: usize) -> CoRefGraph {
    let mut g = CoRefGraph::new();
    let name = |i: usize| format!("n{i:03}@x.org");
    for i in 0..nodes {
        g.add_node(&name(i));
    }
    let mut added = 0;
    'outer: for i in 0..nodes {
        for j in i + 1..nodes {
            if added == edges {
                break 'outer;
            }
            g.add_weight(&name(i), &name(j), 1);
            added += 1;
        }
    }
    assert_eq!(added, edges);
    g
}

fn star(n: usize) -> CoRefGraph {
    let mut g = CoRefGraph::new();
    for i in 1..n {
        g.add_weight("hub@x.org", &format!("leaf{i:02}@x.org"), 1);
    }
    g
}

fn path(n: usize) -> CoRefGraph {
    let mut g = CoRefGraph::new();
    for i in 0..n - 1 {
        g.add_weight(&format!("p{i:02}@x.org"), &format!("p{:02}@x.org", i + 1), 1);
    }
    g
}

fn cycle(n: usize) -> CoRefGraph {
    let mut g = path(n);
    g.add_weight(&format!("p{:02}@x.org", n - 1), "p00@x.org", 1);
    g
}

#[test]
fn average_degree_anchors() {
    for (n, e, expect, density) in [
        (50, 650, "26.00", "0.5306"),
        (10, 43, "8.60", "0.9556"),
        (37, 532, "28.76", "0.7988"),
    ] {
        let m = metrics_of(&graph_with(n, e));
        assert_eq!(format!("{:.2}", m.avg_degree), expect);
        assert_eq!(format!("{:.4}", m.density), density);
    }
}

#[test]
fn components_match_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.random_range(1..40);
        let p = rng.random_range(0.0..0.15);
        let g = random_graph(&mut rng, n, p, 5);
        let set = connected_components(&g, "d1");
        let mut ours: BTreeSet<BTreeSet<String>> = set
            .components
            .iter()
            .map(|c| c.subgraph.nodes().map(str::to_owned).collect())
            .collect();
        ours.extend(set.singletons.iter().map(|s| BTreeSet::from([s.clone()])));
        assert_eq!(ours, flood_components(&g));

        for w in set.components.windows(2) {
            assert!(w[0].node_count() >= w[1].node_count());
        }
        let edges: usize = set.components.iter().map(|c| c.edge_count()).sum();
        assert_eq!(edges, g.edge_count());
        for (i, c) in set.components.iter().enumerate() {
            assert_eq!(c.id, format!("d1c{}", i + 1));
        }
    }
}

#[test]
fn coverage_is_a_percentage() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = random_graph(&mut rng, 200, 0.006, 3);
    let set = connected_components(&g, "d1");
    let all = top_k(&set.components, usize::MAX);
    assert_eq!(all.components.len(), set.components.len());
    assert!((all.coverage.node_pct - 100.0).abs() < 1e-9);
    assert!((all.coverage.edge_pct - 100.0).abs() < 1e-9);
    let one = top_k(&set.components, 1);
    assert!(one.coverage.node_pct <= 100.0 && one.coverage.node_pct > 0.0);
}

#[test]
fn path_metrics_match_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(2..=60);
        let p = rng.random_range(0.02..0.3);
        let g = random_connected(&mut rng, n, p);
        let m = metrics_of(&g);
        let (diameter, apl) = floyd_warshall(&g);
        assert_eq!(m.diameter, diameter);
        assert!((m.avg_path_length - apl).abs() < 1e-12, "{} vs {apl}", m.avg_path_length);
    }
}

#[test]
fn betweenness_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let n = rng.random_range(3..=25);
        let p = rng.random_range(0.08..0.4);
        let g = random_connected(&mut rng, n, p);
        let report = centralities_of(&g).unwrap();
        let oracle = betweenness_by_paths(&g);
        assert_eq!(report.betweenness.len(), oracle.len());
        for (node, score) in &report.betweenness {
            assert!((score - oracle[node]).abs() < 1e-9, "{node}: {score} vs {}", oracle[node]);
        }
    }
}

#[test]
fn eigenvector_closed_forms() {
    let s = centralities_of(&star(9)).unwrap();
    assert_eq!(s.eigenvector[0].0, "hub@x.org");
    // hub : leaf = sqrt(n - 1) : 1
    let ratio = s.eigenvector[0].1 / s.eigenvector[1].1;
    assert!((ratio - 8f64.sqrt()).abs() < 1e-6, "{ratio}");
    assert_eq!(s.betweenness[0], ("hub@x.org".to_owned(), 1.0));
    assert_eq!(s.closeness[0].0, "hub@x.org");

    // path of 7: x_i proportional to sin(i * pi / 8), centre first
    let p = centralities_of(&path(7)).unwrap();
    let order: Vec<&str> = p.eigenvector.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(order, ["p03@x.org", "p02@x.org", "p04@x.org", "p01@x.org", "p05@x.org", "p00@x.org", "p06@x.org"]);
    let x = |i: usize| (i as f64 * std::f64::consts::PI / 8.0).sin();
    let score = |name: &str| p.eigenvector.iter().find(|(n, _)| n == name).unwrap().1;
    assert!((score("p01@x.org") / score("p03@x.org") - x(2) / x(4)).abs() < 1e-6);

    let c = centralities_of(&cycle(8)).unwrap();
    let first = c.eigenvector[0].1;
    assert!(c.eigenvector.iter().all(|(_, s)| (s - first).abs() < 1e-9));
    let names: Vec<&str> = c.eigenvector.iter().map(|(n, _)| n.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn eigenvector_ignores_uniform_weight_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.random_range(3..30);
        let g = random_connected(&mut rng, n, 0.2);
        let mut scaled = CoRefGraph::new();
        for (a, b, w) in g.edges() {
            scaled.add_weight(a, b, w * 5);
        }
        let a = centralities_of(&g).unwrap().eigenvector;
        let b = centralities_of(&scaled).unwrap().eigenvector;
        for ((na, sa), (nb, sb)) in a.iter().zip(&b) {
            assert_eq!(na, nb);
            assert!((sa - sb).abs() < 1e-8);
        }
    }
}

#[test]
fn clustering_closed_forms() {
    assert_eq!(metrics_of(&graph_with(6, 15)).avg_clustering, 1.0);
    assert_eq!(metrics_of(&star(6)).avg_clustering, 0.0);
    assert_eq!(metrics_of(&cycle(6)).avg_clustering, 0.0);
    let k5 = metrics_of(&graph_with(5, 10));
    assert_eq!((k5.diameter, k5.avg_path_length, k5.density), (1, 1.0, 1.0));
    let p = metrics_of(&path(5));
    assert_eq!(p.diameter, 4);
    assert!((p.avg_path_length - 2.0).abs() < 1e-12);
}

#[test]
fn communities_beat_the_trivial_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let n = rng.random_range(2..50);
        let p = rng.random_range(0.05..0.5);
        let g = random_connected(&mut rng, n, p);
        let part = detect_communities_in(&g);
        assert!(part.modularity >= 0.0);
        let members: usize = part.communities.iter().map(Vec::len).sum();
        assert_eq!(members, g.node_count());
        assert_eq!(part.membership().len(), g.node_count());
        assert_eq!(part, detect_communities_in(&g));
    }
}

#[test]
fn two_cliques_split_cleanly() {
    let mut g = CoRefGraph::new();
    for side in ["a", "b"] {
        for i in 0..6 {
            for j in i + 1..6 {
                g.add_weight(&format!("{side}{i}@x.org"), &format!("{side}{j}@x.org"), 3);
            }
        }
    }
    g.add_weight("a0@x.org", "b0@x.org", 1);
    let part = detect_communities_in(&g);
    assert_eq!(part.communities.len(), 2);
    for c in &part.communities {
        let first = &c[0][..1];
        assert!(c.iter().all(|m| &m[..1] == first));
    }
    assert!(part.modularity > 0.4);
}
