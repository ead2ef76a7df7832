//! Content-hash ledger deciding which work units must be re-run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Incremental SHA-256 over labeled fields.
#[derive(Clone, Default)]
pub struct Fingerprint(Sha256);

impl Fingerprint {
    pub fn new(domain: &str) -> Self {
        let mut fp = Fingerprint(Sha256::new());
        fp.field("domain", domain.as_bytes());
        fp
    }

    /// Length-prefixed so adjacent fields cannot alias.
    pub fn field(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        for part in [label.as_bytes(), bytes] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn text(&mut self, label: &str, s: &str) -> &mut Self {
        self.field(label, s.as_bytes())
    }

    pub fn finish(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    entries: BTreeMap<String, String>,
    #[serde(skip)]
    path: PathBuf,
    #[serde(skip)]
    dirty: bool,
}

impl Ledger {
    pub const FILE_NAME: &'static str = "ledger.json";

    pub fn open(output_dir: &Path) -> Result<Self> {
        let path = output_dir.join(Self::FILE_NAME);
        let mut ledger = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str::<Ledger>(&text).map_err(|e| {
                Error::validation(format!("corrupt ledger {}: {e}", path.display()))
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ledger::default(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        ledger.path = path;
        Ok(ledger)
    }

    pub fn get(&self, unit: &str) -> Option<&str> {
        self.entries.get(unit).map(String::as_str)
    }

    pub fn is_current(&self, unit: &str, hash: &str) -> bool {
        self.get(unit) == Some(hash)
    }

    pub fn record(&mut self, unit: String, hash: String) {
        if self.entries.get(&unit) != Some(&hash) {
            self.entries.insert(unit, hash);
            self.dirty = true;
        }
    }

    /// Writes the ledger only if an entry changed.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let text = serde_json::to_string_pretty(self).expect("ledger serializes") + "\n";
        fs::write(&self.path, text).map_err(|e| Error::io(&self.path, e))?;
        self.dirty = false;
        Ok(())
    }
}
