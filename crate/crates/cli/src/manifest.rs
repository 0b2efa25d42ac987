//! Run manifest: a JSON sidecar recording what produced the artifacts —
//! tool version, task, config digest and full config text, thread count,
//! wall time, and a digest per output file. Re-running the embedded config
//! reproduces the outputs byte for byte (the manifest itself carries the
//! wall time and so is not part of that guarantee).

use serde::{Deserialize, Serialize};

/// 64-bit FNV-1a digest, rendered as 16 hex digits in the manifest.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn digest_string(bytes: &[u8]) -> String {
    format!("fnv1a64:{:016x}", fnv1a64(bytes))
}

/// One produced artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: u64,
    pub digest: String,
}

/// The manifest document (written as `manifest.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub task: String,
    pub config_digest: String,
    pub threads: usize,
    pub wall_time_ms: u64,
    pub outputs: Vec<OutputRecord>,
    /// Full text of the run configuration, sufficient to reproduce the run.
    pub config_toml: String,
}
