//! Run reports: what was run, on which inputs, with what outcome.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Input name to SHA-256 of its content.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub seed: u64,
    pub result: Json,
    pub fallback: bool,
    pub fallback_reasons: Vec<String>,
    pub oracle_calls: BTreeMap<String, u64>,
    pub timings_ms: BTreeMap<String, f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn input(&mut self, name: &str, content: &[u8]) {
        self.inputs.insert(name.to_string(), sha256_hex(content));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
