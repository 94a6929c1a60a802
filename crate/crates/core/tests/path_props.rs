use emailnet_core::{build_graph, distance, parse_forensic_path, Distance, FeatureRecord, ForensicPath, WindowParams};
use proptest::prelude::*;

fn base() -> impl Strategy<Value = String> {
    prop::collection::vec(1u64..100_000, 0..3)
        .prop_map(|parts| parts.iter().map(|p| format!("{p}-GZIP")).collect::<Vec<_>>().join("-"))
}

proptest! {
    #[test]
    fn parse_display_round_trip(b in base(), offset in any::<u64>()) {
        let p = ForensicPath::new(b, offset).unwrap();
        prop_assert_eq!(parse_forensic_path(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn distance_is_symmetric(b1 in base(), b2 in base(), o1 in 0u64..1 << 40, o2 in 0u64..1 << 40) {
        let p = ForensicPath::new(b1.clone(), o1).unwrap();
        let q = ForensicPath::new(b2.clone(), o2).unwrap();
        prop_assert_eq!(distance(&p, &q), distance(&q, &p));
        if b1 == b2 {
            prop_assert_eq!(distance(&p, &q), Distance::Finite(o1.abs_diff(o2)));
        } else {
            prop_assert_eq!(distance(&p, &q), Distance::Infinite);
        }
    }

    #[test]
    fn distinct_bases_never_share_an_edge(
        entries in prop::collection::vec((base(), 0u64..64, 0usize..6), 1..80),
        window in 1u64..1 << 20,
    ) {
        let mut records: Vec<FeatureRecord> = entries
            .iter()
            .map(|(b, o, a)| FeatureRecord::new(ForensicPath::new(b.clone(), *o).unwrap(), format!("a{a}@{}.org", b.len()), Vec::new()))
            .collect();
        records.sort();
        let g = build_graph(&records, WindowParams::new(window).unwrap()).unwrap();
        for (x, y, _) in g.edges() {
            let bases = |addr: &str| -> std::collections::BTreeSet<String> {
                records.iter().filter(|r| r.address == addr).map(|r| r.path.base().to_owned()).collect()
            };
            prop_assert!(!bases(x).is_disjoint(&bases(y)));
        }
        for (x, y, _) in g.edges() {
            prop_assert_eq!(x.split('@').nth(1), y.split('@').nth(1));
        }
    }
}

#[test]
fn window_is_strict() {
    for w in [1u64, 2, 100] {
        for gap in 0..=w + 1 {
            let records = [
                FeatureRecord::new(ForensicPath::at(1000), "a@x.org", Vec::new()),
                FeatureRecord::new(ForensicPath::at(1000 + gap), "b@x.org", Vec::new()),
            ];
            let g = build_graph(&records, WindowParams::new(w).unwrap()).unwrap();
            assert_eq!(g.weight("a@x.org", "b@x.org").is_some(), gap < w, "W={w} gap={gap}");
        }
    }
}

#[test]
fn malformed_paths_are_rejected() {
    for raw in ["", "abc", "12-", "-12", "12-GZIP", "12--5", "0x10"] {
        assert!(parse_forensic_path(raw).is_err(), "{raw}");
    }
    let p = parse_forensic_path("1048576-GZIP-512").unwrap();
    assert_eq!((p.base(), p.offset()), ("1048576-GZIP", 512));
}
