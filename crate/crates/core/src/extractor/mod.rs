//! Linear scanner that pulls email addresses out of raw images.
//!
//! The image is cut into chunks that are scanned independently (in parallel
//! when rayon has threads to spare). Each chunk is read together with an
//! `overlap` margin on both sides; a match belongs to the chunk that holds its
//! first byte, so margins never produce duplicates. GZIP streams are inflated
//! and scanned recursively, and their records get paths like `4096-GZIP-3`.

mod grammar;
mod source;

use std::io::{BufReader, Read};

use memchr::memmem;
use rayon::prelude::*;
use thiserror::Error;

pub use grammar::{find_matches, is_valid_address, match_email, EmailMatch, Encoding, MAX_ADDRESS_LEN};
pub use source::{FileImage, ImageSource};

use crate::forensic_path::ForensicPath;
use source::SourceReader;

/// Bytes of raw context kept on each side of a match.
pub const CONTEXT_LEN: usize = 16;

/// Smallest margin that lets a chunk see everything its own matches depend
/// on: the widest (UTF-16) match, one boundary unit and the context bytes.
pub const MIN_OVERLAP: usize = 2 * MAX_ADDRESS_LEN + 2 + CONTEXT_LEN;

pub(crate) const GZIP_MAGIC: &[u8] = &[0x1f, 0x8b, 0x08];

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("read failed at byte {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scan configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanConfig {
    pub chunk_size: usize,
    pub overlap: usize,
    /// Nesting limit for decompression; 0 disables it.
    pub max_recursion_depth: u32,
    pub scan_utf16: bool,
    /// Cap on the inflated size of any one compressed stream.
    pub max_inflated_size: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            chunk_size: 16 << 20,
            overlap: 1 << 10,
            max_recursion_depth: 5,
            scan_utf16: true,
            max_inflated_size: 256 << 20,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.overlap < MIN_OVERLAP {
            return Err(ScanError::Config(format!(
                "overlap {} is below the minimum of {MIN_OVERLAP} bytes",
                self.overlap
            )));
        }
        if self.chunk_size <= self.overlap {
            return Err(ScanError::Config(format!(
                "chunk size {} must exceed overlap {}",
                self.chunk_size, self.overlap
            )));
        }
        Ok(())
    }
}

/// One address occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureRecord {
    pub path: ForensicPath,
    /// Lowercased address; node identity in the graph.
    pub address: String,
    /// Raw bytes around the match as found on media.
    pub context: Vec<u8>,
}

impl FeatureRecord {
    pub fn new(path: ForensicPath, address: impl Into<String>, context: Vec<u8>) -> Self {
        FeatureRecord {
            path,
            address: address.into(),
            context,
        }
    }
}

fn record_from(m: &EmailMatch, buf: &[u8], path: ForensicPath) -> FeatureRecord {
    let lo = m.start.saturating_sub(CONTEXT_LEN);
    let hi = (m.end + CONTEXT_LEN).min(buf.len());
    FeatureRecord {
        path,
        address: m.address.to_ascii_lowercase(),
        context: buf[lo..hi].to_vec(),
    }
}

/// Scans a whole image. Output is sorted by path, then address.
pub fn scan_image<S>(image: &S, config: &ScanConfig) -> Result<Vec<FeatureRecord>, ScanError>
where
    S: ImageSource + ?Sized,
{
    config.validate()?;
    let len = image.len();
    let chunk = config.chunk_size as u64;
    let chunks = len.div_ceil(chunk);
    // bound memory: only a few chunks are resident at once
    let batch = (rayon::current_num_threads() * 2).max(1) as u64;

    let mut out = Vec::new();
    let mut first = 0u64;
    while first < chunks {
        let last = (first + batch).min(chunks);
        let found: Vec<Result<Vec<FeatureRecord>, ScanError>> = (first..last)
            .into_par_iter()
            .map(|i| scan_chunk(image, i * chunk, ((i + 1) * chunk).min(len), config))
            .collect();
        for part in found {
            out.extend(part?);
        }
        first = last;
    }
    out.sort();
    Ok(out)
}

/// Convenience wrapper for in-memory images.
pub fn scan_bytes(image: &[u8], config: &ScanConfig) -> Result<Vec<FeatureRecord>, ScanError> {
    scan_image(image, config)
}

fn scan_chunk<S>(
    image: &S,
    own_start: u64,
    own_end: u64,
    config: &ScanConfig,
) -> Result<Vec<FeatureRecord>, ScanError>
where
    S: ImageSource + ?Sized,
{
    let margin = config.overlap as u64;
    let buf_start = own_start.saturating_sub(margin);
    let buf_end = (own_end + margin).min(image.len());
    let mut buf = vec![0u8; (buf_end - buf_start) as usize];
    let n = image
        .read_at(buf_start, &mut buf)
        .map_err(|source| ScanError::Io {
            offset: buf_start,
            source,
        })?;
    buf.truncate(n);

    let owns = |rel: usize| {
        let abs = buf_start + rel as u64;
        abs >= own_start && abs < own_end
    };

    let mut out: Vec<FeatureRecord> = find_matches(&buf, config.scan_utf16)
        .iter()
        .filter(|m| owns(m.start))
        .map(|m| record_from(m, &buf, ForensicPath::at(buf_start + m.start as u64)))
        .collect();

    if config.max_recursion_depth > 0 {
        for rel in memmem::find_iter(&buf, GZIP_MAGIC).filter(|&rel| owns(rel)) {
            let at = buf_start + rel as u64;
            let reader = BufReader::new(SourceReader::new(image, at));
            let plain = inflate_partial(reader, config.max_inflated_size);
            let base = ForensicPath::at(at).child_base("GZIP");
            out.extend(scan_plaintext(&plain, &base, 0, config));
        }
    }
    Ok(out)
}

/// Inflates a gzip member, keeping whatever came out before any error.
fn inflate_partial<R: Read>(reader: R, limit: usize) -> Vec<u8> {
    let mut decoder = flate2::read::GzDecoder::new(reader);
    let mut out = Vec::new();
    let mut buf = vec![0u8; 64 << 10];
    loop {
        match decoder.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                out.extend_from_slice(&buf[..n]);
                if out.len() >= limit {
                    out.truncate(limit);
                    break;
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(_) => break,
        }
    }
    out
}

/// Scans a decompressed stream whose records live under `base`.
fn scan_plaintext(data: &[u8], base: &str, depth: u32, config: &ScanConfig) -> Vec<FeatureRecord> {
    let path = |offset: usize| {
        ForensicPath::new(base, offset as u64).expect("child base never ends with a hyphen")
    };
    let mut out: Vec<FeatureRecord> = find_matches(data, config.scan_utf16)
        .iter()
        .map(|m| record_from(m, data, path(m.start)))
        .collect();
    if depth + 1 < config.max_recursion_depth {
        for at in memmem::find_iter(data, GZIP_MAGIC) {
            out.extend(scan_compressed(&data[at..], &path(at), depth + 1, config));
        }
    }
    out
}

/// Inflates the gzip stream at the start of `region` and scans the result.
///
/// Records get base `parent_path + "-GZIP"` and offsets into the inflated
/// bytes. A corrupt stream contributes whatever inflated before the damage.
/// Returns nothing once `depth` reaches the configured recursion limit.
pub fn scan_compressed(
    region: &[u8],
    parent_path: &ForensicPath,
    depth: u32,
    config: &ScanConfig,
) -> Vec<FeatureRecord> {
    if depth >= config.max_recursion_depth || !region.starts_with(GZIP_MAGIC) {
        return Vec::new();
    }
    let plain = inflate_partial(region, config.max_inflated_size);
    let mut out = scan_plaintext(&plain, &parent_path.child_base("GZIP"), depth, config);
    out.sort();
    out
}
