//! Ready-made scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{ArtifactBlock, ArtifactKind, ConversationCluster, LogonCache, ScenarioSpec};

/// One owner who is the hub of several conversation clusters, plus unrelated
/// artifact and logon regions.
pub fn owner_drive(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(4 << 20, seed);
    let owner = format!("drive.owner{}@homemail.net", seed % 1000);
    for _ in 0..rng.random_range(3..=5) {
        let mut c = ConversationCluster::new(rng.random_range(6..=14), rng.random_range(25..=50));
        c.hub = Some(owner.clone());
        c.owner = true;
        spec.clusters.push(c);
    }
    spec.artifacts.push(ArtifactBlock::new(ArtifactKind::Software, 24));
    spec.logon_caches.push(LogonCache::default());
    spec
}

/// A mail server holding `accounts` mailboxes. Each mailbox mentions the next
/// account once, so the accounts form one component.
pub fn server_drive(accounts: usize, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(4 << 20, seed);
    for i in 0..accounts {
        let mut c = ConversationCluster::new(rng.random_range(8..=12), rng.random_range(35..=50));
        if accounts > 1 {
            c.bridges.push((i + 1) % accounts);
        }
        spec.clusters.push(c);
    }
    spec
}

/// Two unrelated conversation clusters at least `separation` bytes apart.
pub fn two_clusters(seed: u64, separation: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new((512 << 10) + 4 * separation, seed);
    spec.separation = separation;
    for _ in 0..2 {
        spec.clusters.push(ConversationCluster::new(
            rng.random_range(4..=12),
            rng.random_range(10..=40),
        ));
    }
    spec
}

/// Communication cluster spread out enough that only nearby messages
/// co-occur, leaving a dominant hub.
pub fn communication(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(3 << 20, seed);
    let mut c = ConversationCluster::new(rng.random_range(20..=35), rng.random_range(80..=140));
    c.gap_min = 3500;
    c.gap_max = 9000;
    c.max_recipients = 2;
    c.zipf_exponent = 1.2;
    spec.clusters.push(c);
    spec
}

pub fn logon(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(1 << 20, seed);
    spec.logon_caches.push(LogonCache {
        aliases: Vec::new(),
        alias_count: rng.random_range(4..=8),
        repetitions: rng.random_range(8..=20),
        utf16: seed % 2 == 1,
    });
    spec
}

pub fn software(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(1 << 20, seed);
    let mut a = ArtifactBlock::new(ArtifactKind::Software, rng.random_range(20..=45));
    a.spacing = rng.random_range(80..=110);
    spec.artifacts.push(a);
    spec
}

pub fn coauthor(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(1 << 20, seed);
    let mut a = ArtifactBlock::new(ArtifactKind::Coauthor, rng.random_range(15..=30));
    a.gap_min = 500;
    a.gap_max = 3000;
    spec.artifacts.push(a);
    spec
}

/// Forty single-shape scenarios, ten of each shape.
pub fn classifier_suite() -> Vec<ScenarioSpec> {
    (0..10u64)
        .flat_map(|i| {
            [
                communication(1000 + i),
                logon(2000 + i),
                software(3000 + i),
                coauthor(4000 + i),
            ]
        })
        .collect()
}

/// A large image with a mix of everything, scaled to `image_size`.
pub fn scale_image(image_size: u64, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut spec = ScenarioSpec::new(image_size, seed);
    let units = (image_size >> 24).max(1) as usize;
    spec.separation = 1 << 20;
    spec.compressed_fraction = 0.25;
    for _ in 0..units {
        spec.clusters.push(ConversationCluster::new(
            rng.random_range(5..=20),
            rng.random_range(20..=60),
        ));
    }
    for i in 0..units.div_ceil(4) {
        let kind = if i % 2 == 0 { ArtifactKind::Software } else { ArtifactKind::Coauthor };
        spec.artifacts.push(ArtifactBlock::new(kind, rng.random_range(20..=40)));
    }
    for i in 0..units.div_ceil(2) {
        spec.logon_caches.push(LogonCache {
            utf16: i % 3 == 0,
            ..LogonCache::default()
        });
    }
    let needed = spec.separation * (spec.clusters.len() + spec.artifacts.len() + spec.logon_caches.len()) as u64;
    if needed * 2 > image_size {
        spec.separation = 65536;
    }
    spec
}
