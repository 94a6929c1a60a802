//! GraphML, DOT and CSV exports of analysed components.
//!
//! Nodes carry their address, community index and the three centrality
//! scores; edges carry their weight. Output depends only on the component.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::report::ComponentAnalysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExportFormat {
    GraphMl,
    Dot,
    Csv,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 3] = [ExportFormat::GraphMl, ExportFormat::Dot, ExportFormat::Csv];

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::Csv => "csv",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownFormat(pub String);

impl fmt::Display for UnknownFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown export format {:?} (expected graphml, dot or csv)", self.0)
    }
}

impl std::error::Error for UnknownFormat {}

impl FromStr for ExportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, UnknownFormat> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            "csv" => Ok(ExportFormat::Csv),
            _ => Err(UnknownFormat(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeAttributes {
    pub community: usize,
    pub eigenvector: f64,
    pub betweenness: f64,
    pub closeness: f64,
}

type Setter = fn(&mut NodeAttributes, f64);

/// Per-node attributes in address order. Scores are zero when centrality
/// could not be computed.
pub fn node_attributes(a: &ComponentAnalysis) -> BTreeMap<&str, NodeAttributes> {
    let mut out: BTreeMap<&str, NodeAttributes> = a
        .component
        .subgraph
        .nodes()
        .map(|n| (n, NodeAttributes::default()))
        .collect();
    for (node, community) in a.partition.membership() {
        if let Some(attrs) = out.get_mut(node) {
            attrs.community = community;
        }
    }
    if let Ok(c) = &a.centrality {
        let lists: [(&[(String, f64)], Setter); 3] = [
            (&c.eigenvector, |n, v| n.eigenvector = v),
            (&c.betweenness, |n, v| n.betweenness = v),
            (&c.closeness, |n, v| n.closeness = v),
        ];
        for (list, set) in lists {
            for (node, score) in list {
                if let Some(attrs) = out.get_mut(node.as_str()) {
                    set(attrs, *score);
                }
            }
        }
    }
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn write_graphml<W: Write>(a: &ComponentAnalysis, mut out: W) -> io::Result<()> {
    let attrs = node_attributes(a);
    let index: BTreeMap<&str, usize> = attrs.keys().enumerate().map(|(i, n)| (*n, i)).collect();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(out, r#"  <key id="address" for="node" attr.name="address" attr.type="string"/>"#)?;
    writeln!(out, r#"  <key id="community" for="node" attr.name="community" attr.type="int"/>"#)?;
    for k in ["eigenvector", "betweenness", "closeness"] {
        writeln!(out, r#"  <key id="{k}" for="node" attr.name="{k}" attr.type="double"/>"#)?;
    }
    writeln!(out, r#"  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>"#)?;
    writeln!(out, r#"  <graph id="{}" edgedefault="undirected">"#, xml_escape(&a.component.id))?;
    for (i, (node, at)) in attrs.iter().enumerate() {
        writeln!(out, r#"    <node id="n{i}">"#)?;
        writeln!(out, r#"      <data key="address">{}</data>"#, xml_escape(node))?;
        writeln!(out, r#"      <data key="community">{}</data>"#, at.community)?;
        writeln!(out, r#"      <data key="eigenvector">{}</data>"#, at.eigenvector)?;
        writeln!(out, r#"      <data key="betweenness">{}</data>"#, at.betweenness)?;
        writeln!(out, r#"      <data key="closeness">{}</data>"#, at.closeness)?;
        writeln!(out, "    </node>")?;
    }
    for (i, (x, y, w)) in a.component.subgraph.edges().enumerate() {
        writeln!(
            out,
            r#"    <edge id="e{i}" source="n{}" target="n{}"><data key="weight">{w}</data></edge>"#,
            index[x], index[y]
        )?;
    }
    writeln!(out, "  </graph>")?;
    writeln!(out, "</graphml>")?;
    out.flush()
}

pub fn write_dot<W: Write>(a: &ComponentAnalysis, mut out: W) -> io::Result<()> {
    let attrs = node_attributes(a);
    writeln!(out, "graph {} {{", dot_quote(&a.component.id))?;
    for (node, at) in &attrs {
        writeln!(
            out,
            "  {} [community={}, eigenvector={}, betweenness={}, closeness={}];",
            dot_quote(node),
            at.community,
            at.eigenvector,
            at.betweenness,
            at.closeness
        )?;
    }
    for (x, y, w) in a.component.subgraph.edges() {
        writeln!(out, "  {} -- {} [weight={w}];", dot_quote(x), dot_quote(y))?;
    }
    writeln!(out, "}}")?;
    out.flush()
}

/// Weighted edge list with a header row.
pub fn write_edges_csv<W: Write>(a: &ComponentAnalysis, mut out: W) -> io::Result<()> {
    writeln!(out, "source,target,weight")?;
    for (x, y, w) in a.component.subgraph.edges() {
        writeln!(out, "{},{},{w}", csv_field(x), csv_field(y))?;
    }
    out.flush()
}

pub fn write_nodes_csv<W: Write>(a: &ComponentAnalysis, mut out: W) -> io::Result<()> {
    writeln!(out, "address,community,eigenvector,betweenness,closeness")?;
    for (node, at) in node_attributes(a) {
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(node),
            at.community,
            at.eigenvector,
            at.betweenness,
            at.closeness
        )?;
    }
    out.flush()
}

/// Writes the files for one format into `dir`, returning their names.
/// CSV produces an edge list and a node table.
pub fn export_component(
    a: &ComponentAnalysis,
    format: ExportFormat,
    dir: &std::path::Path,
) -> io::Result<Vec<std::path::PathBuf>> {
    let create = |name: String| -> io::Result<(std::path::PathBuf, io::BufWriter<std::fs::File>)> {
        let path = dir.join(name);
        let file = std::fs::File::create(&path)?;
        Ok((path, io::BufWriter::new(file)))
    };
    let id = &a.component.id;
    Ok(match format {
        ExportFormat::GraphMl => {
            let (p, w) = create(format!("{id}.graphml"))?;
            write_graphml(a, w)?;
            vec![p]
        }
        ExportFormat::Dot => {
            let (p, w) = create(format!("{id}.dot"))?;
            write_dot(a, w)?;
            vec![p]
        }
        ExportFormat::Csv => {
            let (p1, w1) = create(format!("{id}.edges.csv"))?;
            write_edges_csv(a, w1)?;
            let (p2, w2) = create(format!("{id}.nodes.csv"))?;
            write_nodes_csv(a, w2)?;
            vec![p1, p2]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{Policy, StopList};
    use crate::graph_builder::CoRefGraph;
    use crate::metrics::connected_components;
    use crate::report::analyze_component;

    fn single_edge() -> ComponentAnalysis {
        let mut g = CoRefGraph::new();
        g.add_weight("a@x.org", "b@y.org", 7);
        let c = connected_components(&g, "d1").components.remove(0);
        analyze_component(c, &Policy::default(), &StopList::default())
    }

    #[test]
    fn dot_has_one_edge_line() {
        let mut buf = Vec::new();
        write_dot(&single_edge(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let edges: Vec<&str> = text.lines().filter(|l| l.contains(" -- ")).collect();
        assert_eq!(edges, [r#"  "a@x.org" -- "b@y.org" [weight=7];"#]);
        assert!(text.starts_with("graph \"d1c1\" {"));
    }

    #[test]
    fn csv_rows_match_edges() {
        let mut buf = Vec::new();
        write_edges_csv(&single_edge(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "source,target,weight\na@x.org,b@y.org,7\n");
    }

    #[test]
    fn format_names() {
        assert_eq!("GraphML".parse::<ExportFormat>().unwrap(), ExportFormat::GraphMl);
        assert!("png".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn escaping() {
        assert_eq!(xml_escape("a&b<c>"), "a&amp;b&lt;c&gt;");
        assert_eq!(dot_quote("x\"y"), "\"x\\\"y\"");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
