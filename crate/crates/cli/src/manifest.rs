use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use troptev::model::RawInstance;

/// Everything needed to reproduce a run and check that it did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, without `--manifest`.
    pub argv: Vec<String>,
    pub gamma: Option<RawInstance>,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub timing_ms: u128,
    /// SHA-256 of the JSON document printed on standard output.
    pub result_digest: String,
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([("troptev".to_string(), env!("CARGO_PKG_VERSION").to_string())])
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing manifest {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Drops `--manifest <path>` and `--manifest=<path>` from an argument list.
pub fn strip_manifest_flag(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_flag_is_removed_in_both_spellings() {
        let args: Vec<String> = ["compute", "--manifest", "m.json", "--input", "g.json", "--manifest=x"].iter().map(|s| s.to_string()).collect();
        assert_eq!(strip_manifest_flag(&args), vec!["compute", "--input", "g.json"]);
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(digest(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
