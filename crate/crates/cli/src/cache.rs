//! Append-only JSON-lines store of oracle values keyed by (ring, check, version).

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use cleangraph::verify::{Check, OracleCache, VerificationRecord};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize, Deserialize)]
struct Entry {
    ring: String,
    check: String,
    version: String,
    oracle: String,
}

pub struct FileCache {
    path: PathBuf,
    entries: HashMap<(String, String), String>,
}

impl FileCache {
    /// Loads entries for the running version; malformed lines are ignored.
    pub fn open(path: &Path) -> io::Result<Self> {
        let mut entries = HashMap::new();
        match File::open(path) {
            Ok(f) => {
                for line in BufReader::new(f).lines() {
                    let line = line?;
                    if let Ok(e) = serde_json::from_str::<Entry>(&line) {
                        if e.version == VERSION {
                            entries.insert((e.ring, e.check), e.oracle);
                        }
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(FileCache {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn append(&mut self, records: &[VerificationRecord]) -> io::Result<()> {
        let fresh: Vec<_> = records.iter().filter(|r| !r.cached).collect();
        if fresh.is_empty() {
            return Ok(());
        }
        let mut out = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        for r in fresh {
            let entry = Entry {
                ring: r.ring.clone(),
                check: r.check.to_string(),
                version: VERSION.to_string(),
                oracle: r.oracle.clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&entry)?)?;
            self.entries.insert((entry.ring, entry.check), entry.oracle);
        }
        Ok(())
    }
}

impl OracleCache for FileCache {
    fn get(&self, ring: &str, check: Check) -> Option<String> {
        self.entries
            .get(&(ring.to_string(), check.to_string()))
            .cloned()
    }
}
