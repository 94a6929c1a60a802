//! Synthetic images with known ground truth.
//!
//! A [`ScenarioSpec`] describes what to plant: conversation clusters (mail
//! headers around a hub address), software artifact blocks, repository
//! co-author changelogs and logon caches. [`generate_to_writer`] lays the
//! regions out between random filler and returns a [`Manifest`] listing every
//! planted occurrence with the forensic path the scanner will report.
//!
//! Filler is random bytes with every accidental address and gzip header
//! destroyed, and every region is scanned on its own before it is written, so
//! the manifest is exact.

mod manifest;
mod names;
pub mod presets;

use std::io::{self, Write};

use flate2::write::GzEncoder;
use flate2::Compression;
use memchr::memmem;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manifest::{Manifest, PlantedOccurrence, RegionKind};

use crate::extractor::{find_matches, scan_bytes, Encoding, ScanConfig, GZIP_MAGIC};
use crate::forensic_path::ForensicPath;
use names::{display_name, prose, AddressBook, MAIL_DOMAINS, PROJECT_DOMAINS, WEEKDAYS};

const FILLER_PIECE: usize = 1 << 20;
const MAX_COMPRESSION_DEPTH: u32 = 4;
const GZIP_PAD: usize = 2048;
const GZIP_ATTEMPTS: usize = 40;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Spec(String),
    #[error("planted content needs {needed} bytes but the image holds {image_size}")]
    Overflow { needed: u64, image_size: u64 },
    #[error("could not plant region {group} with exact ground truth")]
    Verify { group: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn default_separation() -> u64 {
    65536
}
fn default_gap_min() -> usize {
    256
}
fn default_gap_max() -> usize {
    2048
}
fn default_recipients() -> usize {
    3
}
fn default_zipf() -> f64 {
    1.0
}
fn default_spacing() -> usize {
    96
}
fn default_foreign() -> f64 {
    0.1
}
fn default_alias_count() -> usize {
    6
}
fn default_repetitions() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub image_size: u64,
    pub rng_seed: u64,
    /// Minimum filler between two regions.
    #[serde(default = "default_separation")]
    pub separation: u64,
    /// Fraction of clusters without an explicit depth that get gzipped.
    #[serde(default)]
    pub compressed_fraction: f64,
    #[serde(default)]
    pub clusters: Vec<ConversationCluster>,
    #[serde(default)]
    pub artifacts: Vec<ArtifactBlock>,
    #[serde(default)]
    pub logon_caches: Vec<LogonCache>,
}

/// Mail exchanged around one hub address.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConversationCluster {
    /// Explicit correspondents; generated when empty.
    #[serde(default)]
    pub members: Vec<String>,
    #[serde(default)]
    pub member_count: usize,
    /// Address present in every message; generated when absent.
    #[serde(default)]
    pub hub: Option<String>,
    /// Marks the hub as the drive owner.
    #[serde(default)]
    pub owner: bool,
    pub messages: usize,
    /// Prose between consecutive messages, in bytes.
    #[serde(default = "default_gap_min")]
    pub gap_min: usize,
    #[serde(default = "default_gap_max")]
    pub gap_max: usize,
    /// Correspondents per message besides the hub.
    #[serde(default = "default_recipients")]
    pub max_recipients: usize,
    /// Correspondents are drawn with weight `1 / rank^s`.
    #[serde(default = "default_zipf")]
    pub zipf_exponent: f64,
    /// Clusters whose hub gets one message in this cluster.
    #[serde(default)]
    pub bridges: Vec<usize>,
    /// Layers of gzip around the cluster; 0 is plain text.
    #[serde(default)]
    pub compression_depth: Option<u32>,
}

impl ConversationCluster {
    pub fn new(member_count: usize, messages: usize) -> Self {
        ConversationCluster {
            members: Vec::new(),
            member_count,
            hub: None,
            owner: false,
            messages,
            gap_min: default_gap_min(),
            gap_max: default_gap_max(),
            max_recipients: default_recipients(),
            zipf_exponent: default_zipf(),
            bridges: Vec::new(),
            compression_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    /// Author list of one project, one line per address at fixed spacing.
    Software,
    /// Package changelog signed by a maintainer, crediting contributors.
    Coauthor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactBlock {
    pub kind: ArtifactKind,
    /// Defaults to a project domain (software) or `ubuntu.com` (coauthor).
    #[serde(default)]
    pub domain: Option<String>,
    pub address_count: usize,
    /// Bytes per author line (software).
    #[serde(default = "default_spacing")]
    pub spacing: usize,
    /// Changelog entries (coauthor); defaults to three per address.
    #[serde(default)]
    pub entries: Option<usize>,
    /// Share of contributors outside `domain` (coauthor).
    #[serde(default = "default_foreign")]
    pub foreign_fraction: f64,
    #[serde(default = "default_gap_min")]
    pub gap_min: usize,
    #[serde(default = "default_gap_max")]
    pub gap_max: usize,
}

impl ArtifactBlock {
    pub fn new(kind: ArtifactKind, address_count: usize) -> Self {
        ArtifactBlock {
            kind,
            domain: None,
            address_count,
            spacing: default_spacing(),
            entries: None,
            foreign_fraction: default_foreign(),
            gap_min: default_gap_min(),
            gap_max: default_gap_max(),
        }
    }
}

/// Repeated alias records of one person, as left by a browser cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogonCache {
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default = "default_alias_count")]
    pub alias_count: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub utf16: bool,
}

impl Default for LogonCache {
    fn default() -> Self {
        LogonCache {
            aliases: Vec::new(),
            alias_count: default_alias_count(),
            repetitions: default_repetitions(),
            utf16: false,
        }
    }
}

impl ScenarioSpec {
    pub fn new(image_size: u64, rng_seed: u64) -> Self {
        ScenarioSpec {
            image_size,
            rng_seed,
            separation: default_separation(),
            compressed_fraction: 0.0,
            clusters: Vec::new(),
            artifacts: Vec::new(),
            logon_caches: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| SynthError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialise")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let err = |m: String| Err(SynthError::Spec(m));
        if !(0.0..=1.0).contains(&self.compressed_fraction) {
            return err("compressed_fraction must lie in [0, 1]".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.messages == 0 {
                return err(format!("cluster {i}: messages must be positive"));
            }
            if c.members.is_empty() && c.member_count == 0 {
                return err(format!("cluster {i}: needs members or member_count"));
            }
            if c.max_recipients == 0 {
                return err(format!("cluster {i}: max_recipients must be positive"));
            }
            if c.gap_min > c.gap_max {
                return err(format!("cluster {i}: gap_min exceeds gap_max"));
            }
            if !(c.zipf_exponent.is_finite() && c.zipf_exponent >= 0.0) {
                return err(format!("cluster {i}: bad zipf_exponent"));
            }
            if let Some(b) = c.bridges.iter().find(|&&b| b >= self.clusters.len() || b == i) {
                return err(format!("cluster {i}: bridge to {b} is not another cluster"));
            }
            if c.compression_depth.unwrap_or(0) > MAX_COMPRESSION_DEPTH {
                return err(format!("cluster {i}: compression_depth above {MAX_COMPRESSION_DEPTH}"));
            }
            for a in c.members.iter().chain(&c.hub) {
                if !crate::extractor::is_valid_address(a) {
                    return err(format!("cluster {i}: {a:?} is not an address"));
                }
            }
        }
        for (i, a) in self.artifacts.iter().enumerate() {
            if a.address_count < 2 {
                return err(format!("artifact {i}: needs at least 2 addresses"));
            }
            if a.gap_min > a.gap_max {
                return err(format!("artifact {i}: gap_min exceeds gap_max"));
            }
            if !(0.0..=1.0).contains(&a.foreign_fraction) {
                return err(format!("artifact {i}: foreign_fraction must lie in [0, 1]"));
            }
            if let Some(d) = &a.domain {
                if !crate::extractor::is_valid_address(&format!("x@{d}")) {
                    return err(format!("artifact {i}: bad domain {d:?}"));
                }
            }
        }
        for (i, l) in self.logon_caches.iter().enumerate() {
            if l.aliases.is_empty() && !(2..=8).contains(&l.alias_count) {
                return err(format!("logon cache {i}: alias_count must be 2..=8"));
            }
            if l.repetitions == 0 {
                return err(format!("logon cache {i}: repetitions must be positive"));
            }
            for a in &l.aliases {
                if !crate::extractor::is_valid_address(a) {
                    return err(format!("logon cache {i}: {a:?} is not an address"));
                }
            }
        }
        Ok(())
    }
}

struct Planted {
    offset: usize,
    address: String,
    encoding: Encoding,
}

/// Text under construction, tracking where addresses land.
#[derive(Default)]
struct TextBuilder {
    buf: Vec<u8>,
    planted: Vec<Planted>,
}

impl TextBuilder {
    fn push(&mut self, s: &str) {
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    fn address(&mut self, a: &str) {
        self.planted.push(Planted {
            offset: self.buf.len(),
            address: a.to_ascii_lowercase(),
            encoding: Encoding::Ascii,
        });
        self.push(a);
    }

    fn address_utf16(&mut self, a: &str) {
        self.planted.push(Planted {
            offset: self.buf.len(),
            address: a.to_ascii_lowercase(),
            encoding: Encoding::Utf16Le,
        });
        self.utf16(a);
    }

    fn utf16(&mut self, s: &str) {
        for u in s.encode_utf16() {
            self.buf.extend_from_slice(&u.to_le_bytes());
        }
    }

    fn named(&mut self, a: &str) {
        self.push(&display_name(a));
        self.push(" <");
        self.address(a);
        self.push(">");
    }
}

/// A finished region: bytes plus occurrences relative to its start.
struct Region {
    bytes: Vec<u8>,
    /// `(path relative to the region, address, encoding)`
    planted: Vec<(ForensicPath, String, Encoding)>,
    kind: RegionKind,
    group: usize,
}

fn date<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}, {} Mar 2023 {:02}:{:02}:{:02}",
        WEEKDAYS.choose(rng).unwrap(),
        rng.random_range(1..29),
        rng.random_range(0..24),
        rng.random_range(0..60),
        rng.random_range(0..60)
    )
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / (r as f64).powf(s))).expect("n is positive")
}

/// Up to `k` distinct indices drawn from `dist`.
fn distinct<R: Rng>(rng: &mut R, dist: &WeightedIndex<f64>, n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    let mut out: Vec<usize> = Vec::with_capacity(k);
    let mut tries = 0;
    while out.len() < k && tries < 64 * k {
        let i = dist.sample(rng);
        if !out.contains(&i) {
            out.push(i);
        }
        tries += 1;
    }
    out
}

struct ClusterPlan {
    hub: String,
    members: Vec<String>,
    depth: u32,
}

fn conversation_text<R: Rng>(
    rng: &mut R,
    c: &ConversationCluster,
    plan: &ClusterPlan,
    bridge_hubs: &[String],
) -> TextBuilder {
    let n = plan.members.len();
    let dist = zipf(n, c.zipf_exponent);
    let mut messages: Vec<Vec<String>> = (0..c.messages)
        .map(|_| {
            let k = rng.random_range(1..=c.max_recipients);
            distinct(rng, &dist, n, k)
                .into_iter()
                .map(|i| plan.members[i].clone())
                .collect()
        })
        .collect();
    for h in bridge_hubs {
        let at = rng.random_range(0..=messages.len());
        messages.insert(at, vec![h.clone()]);
    }

    let mut t = TextBuilder::default();
    for (i, others) in messages.iter().enumerate() {
        if i > 0 {
            let gap = rng.random_range(c.gap_min..=c.gap_max);
            let p = prose(rng, gap);
            t.bytes(&p);
            t.push("\n");
        }
        let hub_sends = rng.random_bool(0.5);
        t.push("From: ");
        if hub_sends {
            t.named(&plan.hub);
        } else {
            t.named(&others[0]);
        }
        t.push("\nTo: ");
        let recipients: Vec<&String> = if hub_sends {
            others.iter().collect()
        } else {
            std::iter::once(&plan.hub).chain(&others[1..]).collect()
        };
        for (j, r) in recipients.iter().enumerate() {
            if j > 0 {
                t.push(", ");
            }
            t.named(r);
        }
        t.push(&format!("\nDate: {}\nSubject: ", date(rng)));
        let len = rng.random_range(10..40);
        let subject = prose(rng, len);
        t.bytes(&subject.iter().map(|&b| if b == b'\n' { b' ' } else { b }).collect::<Vec<_>>());
        t.push("\n\n");
        let len = rng.random_range(80..400);
        let body = prose(rng, len);
        t.bytes(&body);
        t.push("\n");
    }
    t
}

fn software_text<R: Rng>(rng: &mut R, a: &ArtifactBlock, book: &mut AddressBook) -> TextBuilder {
    let domain = a
        .domain
        .clone()
        .unwrap_or_else(|| PROJECT_DOMAINS.choose(rng).unwrap().to_string());
    let mut t = TextBuilder::default();
    t.push("AUTHORS\n=======\n\n");
    for _ in 0..a.address_count {
        let addr = book.at_domain(rng, &domain);
        let start = t.buf.len();
        t.named(&addr);
        let used = t.buf.len() - start;
        let pad = a.spacing.saturating_sub(used + 1);
        t.bytes(&vec![b' '; pad]);
        t.push("\n");
    }
    t
}

fn coauthor_text<R: Rng>(rng: &mut R, a: &ArtifactBlock, book: &mut AddressBook) -> TextBuilder {
    let domain = a.domain.clone().unwrap_or_else(|| "ubuntu.com".to_owned());
    let hub = book.at_domain(rng, &domain);
    let contributors = a.address_count - 1;
    let foreign = ((a.foreign_fraction * a.address_count as f64).floor() as usize).min(contributors);
    let mut members: Vec<String> = (0..contributors - foreign)
        .map(|_| book.at_domain(rng, &domain))
        .collect();
    members.extend((0..foreign).map(|_| book.person(rng, MAIL_DOMAINS)));
    members.shuffle(rng);
    let dist = zipf(members.len(), 1.0);
    let entries = a.entries.unwrap_or(3 * a.address_count);
    let package = ["libfoo", "gtk-engine", "netplan", "apt-utils", "xorg-server"]
        .choose(rng)
        .unwrap()
        .to_string();

    let mut t = TextBuilder::default();
    let mut unused: Vec<usize> = (0..members.len()).collect();
    for e in 0..entries {
        if e > 0 {
            let gap = rng.random_range(a.gap_min..=a.gap_max);
            let p = prose(rng, gap);
            t.bytes(&p);
            t.push("\n");
        }
        t.push(&format!(
            "{package} (1.{}-0ubuntu{}) jammy; urgency=medium\n\n",
            entries - e,
            rng.random_range(1..9)
        ));
        // every contributor shows up at least once
        let k = rng.random_range(1..=2);
        let mut credited = distinct(rng, &dist, members.len(), k);
        if let Some(i) = unused.pop() {
            if !credited.contains(&i) {
                credited.push(i);
            }
        }
        for i in credited {
            t.push("  * ");
            let len = rng.random_range(20..60);
            let line = prose(rng, len);
            t.bytes(&line.iter().map(|&b| if b == b'\n' { b' ' } else { b }).collect::<Vec<_>>());
            t.push(". Thanks to ");
            t.named(&members[i]);
            t.push("\n");
        }
        t.push("\n -- ");
        t.named(&hub);
        t.push(&format!("  {}\n", date(rng)));
    }
    t
}

fn logon_text(aliases: &[String], repetitions: usize, utf16: bool) -> TextBuilder {
    let mut t = TextBuilder::default();
    for _ in 0..repetitions {
        t.bytes(&[0x00, 0x01, 0x02]);
        t.push("cache");
        t.bytes(&[0x00]);
        for a in aliases {
            if utf16 {
                t.utf16("login=");
                t.address_utf16(a);
                t.bytes(&[0x00, 0x00]);
            } else {
                t.push("login=");
                t.address(a);
                t.bytes(&[0x00]);
            }
        }
        t.bytes(&[0x00, 0x00, 0x00]);
    }
    t
}

fn gzip(data: &[u8], level: u32) -> Vec<u8> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::new(level));
    enc.write_all(data).expect("writing to a Vec");
    enc.finish().expect("writing to a Vec")
}

fn relative(planted: &[Planted]) -> Vec<(ForensicPath, String, Encoding)> {
    planted
        .iter()
        .map(|p| (ForensicPath::at(p.offset as u64), p.address.clone(), p.encoding))
        .collect()
}

/// Wraps text in `depth` gzip layers. Outer layers put compressible padding
/// around the inner stream so it is entropy coded rather than stored, which
/// would expose a verbatim copy of the inner stream to the scanner.
fn compress<R: Rng>(
    rng: &mut R,
    text: &TextBuilder,
    depth: u32,
    attempt: usize,
) -> (Vec<u8>, Vec<(ForensicPath, String, Encoding)>) {
    const LEVELS: [u32; 9] = [6, 9, 1, 5, 8, 2, 4, 7, 3];
    let level = LEVELS[attempt % LEVELS.len()];
    let mut plain = text.buf.clone();
    plain.extend(std::iter::repeat_n(b'\n', attempt / LEVELS.len()));
    let mut stream = gzip(&plain, level);
    let mut inner_offsets = Vec::new();
    for _ in 1..depth {
        let pad = prose(rng, GZIP_PAD);
        let mut outer = pad.clone();
        inner_offsets.push(outer.len());
        outer.extend_from_slice(&stream);
        outer.extend_from_slice(&pad);
        stream = gzip(&outer, level);
    }
    let mut prefix = String::from("0");
    for off in inner_offsets.iter().rev() {
        prefix.push_str(&format!("-GZIP-{off}"));
    }
    let planted = text
        .planted
        .iter()
        .map(|p| {
            let path = format!("{prefix}-GZIP-{}", p.offset);
            (path.parse().expect("well-formed path"), p.address.clone(), p.encoding)
        })
        .collect();
    (stream, planted)
}

/// Scans a region on its own and checks the result against its plan.
fn verified(bytes: &[u8], planted: &[(ForensicPath, String, Encoding)]) -> bool {
    let found = match scan_bytes(bytes, &ScanConfig::default()) {
        Ok(r) => r,
        Err(_) => return false,
    };
    let mut want: Vec<(&ForensicPath, &str)> = planted.iter().map(|(p, a, _)| (p, a.as_str())).collect();
    want.sort();
    let got: Vec<(&ForensicPath, &str)> = found.iter().map(|r| (&r.path, r.address.as_str())).collect();
    got == want
}

fn finish_region<R: Rng>(
    rng: &mut R,
    text: TextBuilder,
    depth: u32,
    kind: RegionKind,
    group: usize,
) -> Result<Region, SynthError> {
    if depth == 0 {
        let planted = relative(&text.planted);
        if !verified(&text.buf, &planted) {
            return Err(SynthError::Verify { group });
        }
        return Ok(Region {
            bytes: text.buf,
            planted,
            kind,
            group,
        });
    }
    for attempt in 0..GZIP_ATTEMPTS {
        let (bytes, planted) = compress(rng, &text, depth, attempt);
        if verified(&bytes, &planted) {
            return Ok(Region {
                bytes,
                planted,
                kind,
                group,
            });
        }
    }
    Err(SynthError::Verify { group })
}

fn build_regions<R: Rng>(rng: &mut R, spec: &ScenarioSpec) -> Result<(Vec<Region>, Vec<String>), SynthError> {
    let mut book = AddressBook::default();
    for c in &spec.clusters {
        for a in c.members.iter().chain(&c.hub) {
            book.claim(a);
        }
    }
    for l in &spec.logon_caches {
        for a in &l.aliases {
            book.claim(a);
        }
    }

    let mut compressed: Vec<usize> = (0..spec.clusters.len())
        .filter(|&i| spec.clusters[i].compression_depth.is_none())
        .collect();
    compressed.shuffle(rng);
    compressed.truncate((spec.compressed_fraction * compressed.len() as f64).round() as usize);

    let plans: Vec<ClusterPlan> = spec
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let hub = c.hub.clone().unwrap_or_else(|| book.person(rng, MAIL_DOMAINS));
            let members = if c.members.is_empty() {
                (0..c.member_count).map(|_| book.person(rng, MAIL_DOMAINS)).collect()
            } else {
                c.members.clone()
            };
            let depth = c
                .compression_depth
                .unwrap_or(if compressed.contains(&i) { 1 } else { 0 });
            ClusterPlan { hub, members, depth }
        })
        .collect();
    let owners: Vec<String> = spec
        .clusters
        .iter()
        .zip(&plans)
        .filter(|(c, _)| c.owner)
        .map(|(_, p)| p.hub.to_ascii_lowercase())
        .collect();

    let mut regions = Vec::new();
    let mut group = 0;
    for (c, plan) in spec.clusters.iter().zip(&plans) {
        let bridge_hubs: Vec<String> = c.bridges.iter().map(|&b| plans[b].hub.clone()).collect();
        let text = conversation_text(rng, c, plan, &bridge_hubs);
        regions.push(finish_region(rng, text, plan.depth, RegionKind::Conversation, group)?);
        group += 1;
    }
    for a in &spec.artifacts {
        let (text, kind) = match a.kind {
            ArtifactKind::Software => (software_text(rng, a, &mut book), RegionKind::Software),
            ArtifactKind::Coauthor => (coauthor_text(rng, a, &mut book), RegionKind::Coauthor),
        };
        regions.push(finish_region(rng, text, 0, kind, group)?);
        group += 1;
    }
    for l in &spec.logon_caches {
        let aliases = if l.aliases.is_empty() {
            book.aliases(rng, l.alias_count)
        } else {
            l.aliases.clone()
        };
        let text = logon_text(&aliases, l.repetitions, l.utf16);
        regions.push(finish_region(rng, text, 0, RegionKind::Logon, group)?);
        group += 1;
    }
    Ok((regions, owners))
}

/// Random bytes with no address matches and no gzip headers, bounded by
/// newlines so nothing can run into a neighbouring region.
pub(crate) fn fill_filler<R: RngCore>(rng: &mut R, piece: &mut [u8]) {
    rng.fill_bytes(piece);
    if let Some(first) = piece.first_mut() {
        *first = b'\n';
    }
    if let Some(last) = piece.last_mut() {
        *last = b'\n';
    }
    sanitize(piece);
}

pub(crate) fn sanitize(buf: &mut [u8]) {
    loop {
        let mut changed = false;
        for m in find_matches(buf, true) {
            for b in &mut buf[m.start..m.end] {
                if *b == b'@' {
                    *b = b'#';
                    changed = true;
                }
            }
        }
        let magic: Vec<usize> = memmem::find_iter(buf, GZIP_MAGIC).collect();
        for at in magic {
            buf[at + 1] = 0;
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

fn write_filler<W: Write, R: RngCore>(out: &mut W, rng: &mut R, mut len: u64, piece: &mut Vec<u8>) -> io::Result<()> {
    while len > 0 {
        let n = len.min(FILLER_PIECE as u64) as usize;
        piece.resize(n, 0);
        fill_filler(rng, piece);
        out.write_all(piece)?;
        len -= n as u64;
    }
    Ok(())
}

fn rebase(path: &ForensicPath, at: u64) -> ForensicPath {
    let s = path.to_string();
    match s.split_once('-') {
        None => ForensicPath::at(at + path.offset()),
        Some((head, rest)) => {
            let head: u64 = head.parse().expect("relative paths start with an offset");
            format!("{}-{rest}", at + head).parse().expect("well-formed path")
        }
    }
}

/// Streams the image to `out` and returns its manifest.
pub fn generate_to_writer<W: Write>(spec: &ScenarioSpec, mut out: W) -> Result<Manifest, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.rng_seed);
    let mut filler_rng = ChaCha8Rng::seed_from_u64(spec.rng_seed ^ 0x9e37_79b9_7f4a_7c15);

    let (mut regions, owners) = build_regions(&mut rng, spec)?;
    regions.shuffle(&mut rng);

    let content: u64 = regions.iter().map(|r| r.bytes.len() as u64).sum();
    let needed = content + spec.separation * regions.len().saturating_sub(1) as u64;
    if needed > spec.image_size {
        return Err(SynthError::Overflow {
            needed,
            image_size: spec.image_size,
        });
    }
    let slack = spec.image_size - needed;
    let mut cuts: Vec<u64> = (0..regions.len()).map(|_| rng.random_range(0..=slack)).collect();
    cuts.sort_unstable();
    let mut gaps = Vec::with_capacity(regions.len() + 1);
    let mut prev = 0;
    for (i, &c) in cuts.iter().enumerate() {
        gaps.push(c - prev + if i > 0 { spec.separation } else { 0 });
        prev = c;
    }
    gaps.push(slack - prev);

    let mut occurrences = Vec::new();
    let mut piece = Vec::new();
    let mut pos = 0u64;
    for (i, region) in regions.iter().enumerate() {
        write_filler(&mut out, &mut filler_rng, gaps[i], &mut piece)?;
        pos += gaps[i];
        out.write_all(&region.bytes)?;
        for (path, address, encoding) in &region.planted {
            occurrences.push(PlantedOccurrence {
                path: rebase(path, pos),
                owner: owners.contains(address),
                address: address.clone(),
                kind: region.kind,
                group: region.group,
                encoding: *encoding,
            });
        }
        pos += region.bytes.len() as u64;
    }
    write_filler(&mut out, &mut filler_rng, *gaps.last().unwrap(), &mut piece)?;
    out.flush()?;
    occurrences.sort();
    Ok(Manifest { occurrences })
}

/// In-memory variant of [`generate_to_writer`].
pub fn generate_image(spec: &ScenarioSpec) -> Result<(Vec<u8>, Manifest), SynthError> {
    let mut image = Vec::with_capacity(spec.image_size.min(1 << 30) as usize);
    let manifest = generate_to_writer(spec, &mut image)?;
    Ok((image, manifest))
}
