//! Triage labels for components.
//!
//! A component is summarised as a [`SignalVector`] and run through a fixed
//! rule cascade; the first rule that fires decides the label. Thresholds live
//! in [`Policy`], which loads from a `key = value` file. Domain rules run
//! before structural ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{Component, ComponentMetrics};

/// Cap on address pairs compared for alias similarity.
pub const MAX_ALIAS_PAIRS: usize = 10_000;

pub const DEFAULT_STOPLIST: &[&str] = &[
    "ubuntu.com",
    "canonical.com",
    "debian.org",
    "microsoft.com",
    "mozilla.org",
];

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad policy file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Useful,
    NotUseful,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Subtype {
    Communication,
    Logon,
    SoftwareArtifact,
    RepositoryCoauthor,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Useful => "USEFUL",
            Label::NotUseful => "NOT_USEFUL",
            Label::Uncertain => "UNCERTAIN",
        })
    }
}

impl fmt::Display for Subtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subtype::Communication => "COMMUNICATION",
            Subtype::Logon => "LOGON",
            Subtype::SoftwareArtifact => "SOFTWARE_ARTIFACT",
            Subtype::RepositoryCoauthor => "REPOSITORY_COAUTHOR",
        })
    }
}

/// A signal that took part in the deciding rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub signal: &'static str,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentLabel {
    pub label: Label,
    pub subtype: Option<Subtype>,
    pub evidence: Vec<Evidence>,
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subtype {
            Some(s) => write!(f, "{}/{}", self.label, s),
            None => write!(f, "{}", self.label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalVector {
    pub metrics: ComponentMetrics,
    /// Coefficient of variation of edge weights.
    pub weight_cv: f64,
    /// Fraction of nodes in the most common domain.
    pub top_domain_share: f64,
    pub stoplist_domain_hit: bool,
    /// Mean normalised edit similarity of local parts.
    pub alias_similarity: f64,
    /// Skewness of the degree sequence.
    pub degree_skew: f64,
}

/// Classification thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Policy {
    pub repository_min_domain_share: f64,
    pub logon_max_nodes: usize,
    pub logon_min_density: f64,
    pub logon_min_alias_similarity: f64,
    pub artifact_max_weight_cv: f64,
    pub artifact_min_nodes: usize,
    pub artifact_min_domain_share: f64,
    pub communication_min_weight_cv: f64,
    pub communication_min_degree_skew: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            repository_min_domain_share: 0.8,
            logon_max_nodes: 15,
            logon_min_density: 0.8,
            logon_min_alias_similarity: 0.5,
            artifact_max_weight_cv: 0.25,
            artifact_min_nodes: 20,
            artifact_min_domain_share: 0.6,
            communication_min_weight_cv: 0.75,
            communication_min_degree_skew: 1.0,
        }
    }
}

impl Policy {
    /// Parses `key = value` lines; `#` starts a comment. Missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self, PolicyError> {
        toml::from_str(text).map_err(|e| PolicyError::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Domains known to carry software-artifact addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    domains: BTreeSet<String>,
}

impl Default for StopList {
    fn default() -> Self {
        StopList {
            domains: DEFAULT_STOPLIST.iter().map(|d| d.to_string()).collect(),
        }
    }
}

impl StopList {
    /// One domain per line; `#` comments and blank lines are ignored.
    pub fn parse(text: &str) -> Self {
        let domains = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_ascii_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        StopList { domains }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|t| Self::parse(&t))
            .map_err(|source| PolicyError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    /// Matches the domain itself and any subdomain of it.
    pub fn contains(&self, domain: &str) -> bool {
        let domain = domain.to_ascii_lowercase();
        let mut rest = domain.as_str();
        loop {
            if self.domains.contains(rest) {
                return true;
            }
            match rest.split_once('.') {
                Some((_, tail)) if tail.contains('.') => rest = tail,
                _ => return false,
            }
        }
    }

    pub fn domains(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(String::as_str)
    }
}

fn split_address(address: &str) -> (&str, &str) {
    address.rsplit_once('@').unwrap_or((address, ""))
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a = a.as_bytes();
    let b = b.as_bytes();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / longer length`; two empty strings are identical.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let max = a.len().max(b.len());
    if max == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max as f64
}

fn coefficient_of_variation(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Population skewness; zero for constant sequences.
fn skewness(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if m2 <= f64::EPSILON * mean.abs().max(1.0) {
        return 0.0;
    }
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

pub fn extract_signals(component: &Component, metrics: &ComponentMetrics, stoplist: &StopList) -> SignalVector {
    let g = &component.subgraph;
    let weights: Vec<f64> = g.edges().map(|(_, _, w)| w as f64).collect();

    let mut degree: BTreeMap<&str, usize> = g.nodes().map(|n| (n, 0)).collect();
    for (a, b, _) in g.edges() {
        *degree.get_mut(a).unwrap() += 1;
        *degree.get_mut(b).unwrap() += 1;
    }
    let degrees: Vec<f64> = degree.values().map(|&d| d as f64).collect();

    let mut domains: BTreeMap<&str, usize> = BTreeMap::new();
    let mut locals: Vec<String> = Vec::new();
    for n in g.nodes() {
        let (local, domain) = split_address(n);
        *domains.entry(domain).or_insert(0) += 1;
        locals.push(local.to_ascii_lowercase());
    }
    let nodes = g.node_count().max(1) as f64;
    let top_domain_share = domains.values().copied().max().unwrap_or(0) as f64 / nodes;
    let stoplist_domain_hit = domains.keys().any(|d| stoplist.contains(d));

    SignalVector {
        metrics: metrics.clone(),
        weight_cv: coefficient_of_variation(&weights),
        top_domain_share,
        stoplist_domain_hit,
        alias_similarity: alias_similarity(&locals),
        degree_skew: skewness(&degrees),
    }
}

/// Mean pairwise similarity over the first addresses (nodes iterate in
/// lexicographic order) such that at most [`MAX_ALIAS_PAIRS`] pairs are used.
fn alias_similarity(locals: &[String]) -> f64 {
    let mut k = locals.len();
    while k * k.saturating_sub(1) / 2 > MAX_ALIAS_PAIRS {
        k -= 1;
    }
    let sample = &locals[..k];
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..sample.len() {
        for j in i + 1..sample.len() {
            sum += edit_similarity(&sample[i], &sample[j]);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        sum / pairs as f64
    }
}

fn at_least(signal: &'static str, value: f64, threshold: f64) -> Option<Evidence> {
    (value >= threshold).then_some(Evidence {
        signal,
        value,
        threshold,
    })
}

fn at_most(signal: &'static str, value: f64, threshold: f64) -> Option<Evidence> {
    (value <= threshold).then_some(Evidence {
        signal,
        value,
        threshold,
    })
}

/// All parts must fire for the rule to fire.
fn all(parts: Vec<Option<Evidence>>) -> Option<Vec<Evidence>> {
    parts.into_iter().collect()
}

pub fn classify(s: &SignalVector, policy: &Policy) -> ComponentLabel {
    let m = &s.metrics;
    let rules: [(Label, Subtype, Option<Vec<Evidence>>); 4] = [
        (
            Label::NotUseful,
            Subtype::RepositoryCoauthor,
            all(vec![
                at_least("stoplist_domain_hit", f64::from(u8::from(s.stoplist_domain_hit)), 1.0),
                at_least("top_domain_share", s.top_domain_share, policy.repository_min_domain_share),
            ]),
        ),
        (
            Label::Useful,
            Subtype::Logon,
            all(vec![
                at_most("nodes", m.nodes as f64, policy.logon_max_nodes as f64),
                at_least("density", m.density, policy.logon_min_density),
                at_least("alias_similarity", s.alias_similarity, policy.logon_min_alias_similarity),
            ]),
        ),
        (
            Label::NotUseful,
            Subtype::SoftwareArtifact,
            all(vec![
                at_most("weight_cv", s.weight_cv, policy.artifact_max_weight_cv),
                at_least("nodes", m.nodes as f64, policy.artifact_min_nodes as f64),
                at_least("top_domain_share", s.top_domain_share, policy.artifact_min_domain_share),
            ]),
        ),
        (
            Label::Useful,
            Subtype::Communication,
            all(vec![
                at_least("weight_cv", s.weight_cv, policy.communication_min_weight_cv),
                at_least("degree_skew", s.degree_skew, policy.communication_min_degree_skew),
            ]),
        ),
    ];
    for (label, subtype, evidence) in rules {
        if let Some(evidence) = evidence {
            return ComponentLabel {
                label,
                subtype: Some(subtype),
                evidence,
            };
        }
    }
    ComponentLabel {
        label: Label::Uncertain,
        subtype: None,
        evidence: Vec::new(),
    }
}
