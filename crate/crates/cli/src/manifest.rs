//! Run manifests: the full parameter set behind every output, with input
//! hashes, so a run can be reproduced byte for byte.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// FNV-1a over raw bytes; used to fingerprint input files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub guards: BTreeMap<String, u64>,
    pub input_hashes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        RunManifest {
            tool: "forge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            params: BTreeMap::new(),
            seed,
            guards: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn guard(&mut self, key: &str, value: u64) -> &mut Self {
        self.guards.insert(key.into(), value);
        self
    }

    pub fn hash_input(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        self.input_hashes
            .insert(name.into(), format!("{:016x}", fnv1a64(bytes)));
        self
    }
}
