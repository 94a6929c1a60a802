//! Drive-level analysis: graph, ranked components, metrics, labels.

use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{classify, extract_signals, ComponentLabel, Policy, SignalVector, StopList};
use crate::extractor::FeatureRecord;
use crate::graph_builder::{build_graph_parallel, CoRefGraph, GraphError, WindowParams, DEFAULT_WINDOW};
use crate::metrics::{
    centralities, compute_metrics, connected_components, detect_communities, top_k, CentralityReport, Component,
    ComponentMetrics, Coverage, Partition,
};

/// Column headers of the metrics table, in order.
pub const METRICS_COLUMNS: [&str; 10] = [
    "Component ID",
    "Nodes",
    "Edges",
    "Average Degree",
    "Avg. Weighted Degree",
    "Diameter",
    "Density",
    "Modularity",
    "Avg. Clustering Coefficient",
    "Avg. Path Length",
];

/// Entries kept per centrality list in reports.
pub const CENTRALITY_LISTING: usize = 20;

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub drive_id: String,
    pub window: u64,
    pub top_k: usize,
    pub include_singletons: bool,
    pub policy: Policy,
    pub stoplist: StopList,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            drive_id: "d1".to_owned(),
            window: DEFAULT_WINDOW,
            top_k: 20,
            include_singletons: false,
            policy: Policy::default(),
            stoplist: StopList::default(),
        }
    }
}

/// Everything computed for one ranked component.
#[derive(Debug, Clone)]
pub struct ComponentAnalysis {
    pub component: Component,
    pub metrics: ComponentMetrics,
    pub signals: SignalVector,
    pub label: ComponentLabel,
    pub partition: Partition,
    /// Full rankings, or the reason they are missing.
    pub centrality: Result<CentralityReport, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub records: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Non-singleton components.
    pub components: usize,
    pub singletons: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub id: String,
    pub rank: usize,
    pub metrics: ComponentMetrics,
    pub label: ComponentLabel,
    pub signals: SignalSummary,
    pub communities: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centrality: Option<CentralityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centrality_error: Option<String>,
}

/// Signals other than the metric vector, which is reported separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalSummary {
    pub weight_cv: f64,
    pub top_domain_share: f64,
    pub stoplist_domain_hit: bool,
    pub alias_similarity: f64,
    pub degree_skew: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveReport {
    pub drive_id: String,
    pub window: u64,
    pub top_k: usize,
    pub totals: Totals,
    pub coverage: Coverage,
    /// In rank order.
    pub components: Vec<ComponentSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singletons: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: DriveReport,
    pub components: Vec<ComponentAnalysis>,
}

pub fn analyze_component(component: Component, policy: &Policy, stoplist: &StopList) -> ComponentAnalysis {
    let metrics = compute_metrics(&component);
    let signals = extract_signals(&component, &metrics, stoplist);
    let label = classify(&signals, policy);
    let partition = detect_communities(&component);
    let centrality = centralities(&component).map_err(|e| e.to_string());
    ComponentAnalysis {
        component,
        metrics,
        signals,
        label,
        partition,
        centrality,
    }
}

/// Builds the graph from sorted records and analyses it.
pub fn analyze_records(records: &[FeatureRecord], opts: &AnalysisOptions) -> Result<Analysis, GraphError> {
    let params = WindowParams::new(opts.window)?;
    let graph = build_graph_parallel(records, params)?;
    Ok(analyze_graph(&graph, records.len(), opts))
}

pub fn analyze_graph(graph: &CoRefGraph, records: usize, opts: &AnalysisOptions) -> Analysis {
    let set = connected_components(graph, &opts.drive_id);
    let selection = top_k(&set.components, opts.top_k);
    let coverage = if set.components.is_empty() {
        Coverage {
            node_pct: 0.0,
            edge_pct: 0.0,
        }
    } else {
        selection.coverage
    };
    let components: Vec<ComponentAnalysis> = selection
        .components
        .par_iter()
        .map(|c| analyze_component(c.clone(), &opts.policy, &opts.stoplist))
        .collect();

    let summaries = components
        .iter()
        .map(|a| ComponentSummary {
            id: a.component.id.clone(),
            rank: a.component.rank,
            metrics: a.metrics.clone(),
            label: a.label.clone(),
            signals: SignalSummary {
                weight_cv: a.signals.weight_cv,
                top_domain_share: a.signals.top_domain_share,
                stoplist_domain_hit: a.signals.stoplist_domain_hit,
                alias_similarity: a.signals.alias_similarity,
                degree_skew: a.signals.degree_skew,
            },
            communities: a.partition.communities.len(),
            centrality: a.centrality.as_ref().ok().map(|c| c.truncated(CENTRALITY_LISTING)),
            centrality_error: a.centrality.as_ref().err().cloned(),
        })
        .collect();

    let report = DriveReport {
        drive_id: opts.drive_id.clone(),
        window: opts.window,
        top_k: opts.top_k,
        totals: Totals {
            records,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            components: set.components.len(),
            singletons: set.singletons.len(),
        },
        coverage,
        components: summaries,
        singletons: opts.include_singletons.then(|| set.singletons.clone()),
    };
    Analysis { report, components }
}

fn metric_row(id: &str, m: &ComponentMetrics) -> [String; 10] {
    [
        id.to_owned(),
        m.nodes.to_string(),
        m.edges.to_string(),
        format!("{:.2}", m.avg_degree),
        format!("{:.2}", m.avg_weighted_degree),
        m.diameter.to_string(),
        format!("{:.4}", m.density),
        format!("{:.4}", m.modularity),
        format!("{:.4}", m.avg_clustering),
        format!("{:.2}", m.avg_path_length),
    ]
}

impl DriveReport {
    /// Tab-separated metrics table, one row per reported component.
    pub fn write_metrics_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", METRICS_COLUMNS.join("\t"))?;
        for c in &self.components {
            writeln!(out, "{}", metric_row(&c.id, &c.metrics).join("\t"))?;
        }
        out.flush()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let t = &self.totals;
        let _ = writeln!(s, "drive {}", self.drive_id);
        let _ = writeln!(s, "window {} bytes", self.window);
        let _ = writeln!(s, "records {}", t.records);
        let _ = writeln!(
            s,
            "network {} nodes, {} edges, {} components, {} singletons",
            t.nodes, t.edges, t.components, t.singletons
        );
        let _ = writeln!(
            s,
            "top {} components hold {:.2}% of nodes and {:.2}% of edges",
            self.components.len(),
            self.coverage.node_pct,
            self.coverage.edge_pct
        );

        if !self.components.is_empty() {
            s.push('\n');
            let rows: Vec<[String; 10]> = std::iter::once(METRICS_COLUMNS.map(str::to_owned))
                .chain(self.components.iter().map(|c| metric_row(&c.id, &c.metrics)))
                .collect();
            let widths: Vec<usize> = (0..10).map(|i| rows.iter().map(|r| r[i].len()).max().unwrap()).collect();
            for r in &rows {
                let line: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (cell, w))| if i == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                    .collect();
                let _ = writeln!(s, "{}", line.join("  ").trim_end());
            }
        }

        for c in &self.components {
            let _ = writeln!(s, "\n{} (rank {}): {}", c.id, c.rank, c.label);
            for e in &c.label.evidence {
                let _ = writeln!(s, "  {} = {:.4} (threshold {})", e.signal, e.value, e.threshold);
            }
            let sig = &c.signals;
            let _ = writeln!(
                s,
                "  signals: weight_cv {:.4}, top_domain_share {:.4}, stoplist {}, alias_similarity {:.4}, degree_skew {:.4}",
                sig.weight_cv, sig.top_domain_share, sig.stoplist_domain_hit, sig.alias_similarity, sig.degree_skew
            );
            let _ = writeln!(s, "  communities {} (modularity {:.4})", c.communities, c.metrics.modularity);
            match (&c.centrality, &c.centrality_error) {
                (Some(r), _) => {
                    let _ = writeln!(s, "  {:<4} {:<40} {:<40} closeness", "rank", "eigenvector", "betweenness");
                    for i in 0..r.eigenvector.len() {
                        let cell = |list: &[(String, f64)]| format!("{} ({:.4})", list[i].0, list[i].1);
                        let _ = writeln!(
                            s,
                            "  {:<4} {:<40} {:<40} {}",
                            i + 1,
                            cell(&r.eigenvector),
                            cell(&r.betweenness),
                            cell(&r.closeness)
                        );
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "  centrality unavailable: {e}");
                }
                (None, None) => {}
            }
        }

        if let Some(singles) = &self.singletons {
            let _ = writeln!(s, "\nsingletons");
            for a in singles {
                let _ = writeln!(s, "  {a}");
            }
        }
        s
    }
}
