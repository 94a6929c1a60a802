use emailnet_core::extractor::MIN_OVERLAP;
use emailnet_core::feature_io::{read_feature_file, write_feature_file};
use emailnet_core::synth::presets;
use emailnet_core::synth::RegionKind;
use emailnet_core::{analyze_records, generate_image, scan_bytes, AnalysisOptions, ForensicPath, ScanConfig, ScenarioSpec};

fn scanned(image: &[u8], config: &ScanConfig) -> Vec<(ForensicPath, String)> {
    scan_bytes(image, config)
        .unwrap()
        .into_iter()
        .map(|r| (r.path, r.address))
        .collect()
}

fn presets_under_test() -> Vec<(&'static str, ScenarioSpec)> {
    let mut compressed = presets::two_clusters(5, 65536);
    compressed.compressed_fraction = 1.0;
    for c in &mut compressed.clusters {
        c.compression_depth = Some(2);
    }
    vec![
        ("owner", presets::owner_drive(1)),
        ("server", presets::server_drive(3, 2)),
        ("two-clusters", presets::two_clusters(3, 65536)),
        ("communication", presets::communication(4)),
        ("logon-utf16", presets::logon(5)),
        ("logon", presets::logon(6)),
        ("software", presets::software(7)),
        ("coauthor", presets::coauthor(8)),
        ("nested-gzip", compressed),
        ("scale", presets::scale_image(48 << 20, 9)),
    ]
}

#[test]
fn scanner_recovers_exactly_the_planted_addresses() {
    for (name, spec) in presets_under_test() {
        let (image, manifest) = generate_image(&spec).unwrap();
        assert!(!manifest.is_empty(), "{name}");
        assert_eq!(scanned(&image, &ScanConfig::default()), manifest.expected_records(), "{name}");
    }
}

#[test]
fn chunk_size_does_not_change_output() {
    let mut spec = presets::owner_drive(21);
    spec.compressed_fraction = 0.5;
    let (image, manifest) = generate_image(&spec).unwrap();
    for chunk in [MIN_OVERLAP + 1, 4096, 65536, 1 << 20, usize::MAX / 2] {
        let config = ScanConfig {
            chunk_size: chunk,
            overlap: MIN_OVERLAP,
            ..ScanConfig::default()
        };
        assert_eq!(scanned(&image, &config), manifest.expected_records(), "chunk {chunk}");
    }
}

#[test]
fn feature_file_round_trip() {
    let (image, _) = generate_image(&presets::logon(3)).unwrap();
    let records = scan_bytes(&image, &ScanConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_feature_file(&records, &mut buf).unwrap();
    let back = read_feature_file(buf.as_slice()).unwrap();
    assert!(back.warnings.is_empty());
    assert_eq!(back.records, records);
}

#[test]
fn manifest_tsv_round_trip() {
    let (_, manifest) = generate_image(&presets::owner_drive(2)).unwrap();
    let mut buf = Vec::new();
    manifest.write_tsv(&mut buf).unwrap();
    assert_eq!(emailnet_core::Manifest::read_tsv(buf.as_slice()).unwrap(), manifest);
}

#[test]
fn separated_clusters_never_mix() {
    for seed in 0..20 {
        let spec = presets::two_clusters(seed, 8192);
        let (image, manifest) = generate_image(&spec).unwrap();
        let records = scan_bytes(&image, &ScanConfig::default()).unwrap();
        let opts = AnalysisOptions {
            window: 8192,
            ..AnalysisOptions::default()
        };
        let analysis = analyze_records(&records, &opts).unwrap();
        assert!(analysis.components.len() >= 2, "seed {seed}");
        let home = manifest.membership();
        for c in &analysis.components {
            let groups: std::collections::BTreeSet<usize> = c.component.subgraph.nodes().map(|n| home[n]).collect();
            assert_eq!(groups.len(), 1, "seed {seed}: {}", c.component.id);
        }
    }
}

#[test]
fn manifest_kinds_follow_the_spec() {
    let (_, manifest) = generate_image(&presets::owner_drive(4)).unwrap();
    let kinds = manifest.kind_of_group();
    let spec = presets::owner_drive(4);
    let clusters = spec.clusters.len();
    for (group, kind) in kinds {
        let expect = if group < clusters {
            RegionKind::Conversation
        } else if group < clusters + spec.artifacts.len() {
            RegionKind::Software
        } else {
            RegionKind::Logon
        };
        assert_eq!(kind, expect, "group {group}");
    }
    let owner = format!("drive.owner{}@homemail.net", 4);
    assert_eq!(manifest.owners(), [owner]);
}
