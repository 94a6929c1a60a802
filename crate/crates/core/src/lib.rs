//! Email co-reference networks from raw storage images.
//!
//! The pipeline scans an image for email addresses ([`extractor`]), links
//! addresses that sit within a byte window of each other ([`graph_builder`]),
//! splits the network into ranked components and measures them ([`metrics`]),
//! and labels each component as useful to an investigation or not
//! ([`classifier`]). [`report`] ties these together per drive and [`export`]
//! writes components out for graph tools. [`synth`] generates images with
//! known ground truth.

pub mod classifier;
pub mod export;
pub mod extractor;
pub mod feature_io;
pub mod forensic_path;
pub mod graph_builder;
pub mod metrics;
pub mod report;
pub mod synth;

pub use classifier::{classify, extract_signals, ComponentLabel, Label, Policy, SignalVector, StopList, Subtype};
pub use extractor::{scan_bytes, scan_image, FeatureRecord, FileImage, ImageSource, ScanConfig};
pub use export::ExportFormat;
pub use forensic_path::{distance, parse_forensic_path, Distance, ForensicPath};
pub use graph_builder::{build_graph, merge_graphs, CoRefGraph, WindowParams};
pub use metrics::{Component, ComponentMetrics, CentralityReport, Partition};
pub use report::{analyze_records, Analysis, AnalysisOptions, DriveReport};
pub use synth::{generate_image, generate_to_writer, Manifest, ScenarioSpec};
