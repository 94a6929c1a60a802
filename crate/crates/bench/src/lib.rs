//! Shared fixtures for the benchmarks.

use emailnet_core::synth::presets;
use emailnet_core::{build_graph, generate_image, scan_bytes, CoRefGraph, FeatureRecord, ScanConfig, WindowParams};

/// A mixed synthetic image of `size` bytes.
pub fn image(size: u64) -> Vec<u8> {
    let mut spec = presets::scale_image(size, 7);
    spec.separation = 65536;
    generate_image(&spec).expect("scenario fits").0
}

pub fn records(image: &[u8]) -> Vec<FeatureRecord> {
    scan_bytes(image, &ScanConfig::default()).expect("valid config")
}

pub fn graph(records: &[FeatureRecord], window: u64) -> CoRefGraph {
    build_graph(records, WindowParams::new(window).expect("window > 0")).expect("sorted records")
}

/// The largest component of a server drive with `accounts` mailboxes.
pub fn server_component(accounts: usize) -> CoRefGraph {
    let (img, _) = generate_image(&presets::server_drive(accounts, 11)).expect("scenario fits");
    let g = graph(&records(&img), 4096);
    emailnet_core::metrics::connected_components(&g, "d1")
        .components
        .remove(0)
        .subgraph
}
