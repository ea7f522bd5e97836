use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::svg::ColorScale;
use crate::error::Result;

pub const TOOL_NAME: &str = "nhknot";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the output directory.
    pub path: String,
    pub schema: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Written as `manifest.json` next to the outputs of every command that
/// writes files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration, defaults included.
    pub config: BTreeMap<String, String>,
    pub workers: usize,
    pub files: Vec<FileRecord>,
    /// Wall-clock seconds per stage.
    pub timings_s: BTreeMap<String, f64>,
    pub color_scale: Option<ColorScale>,
    pub created: String,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut f = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

impl OutputManifest {
    pub fn new<K: ToString, V: ToString>(command: &str, config: impl IntoIterator<Item = (K, V)>, workers: usize) -> Self {
        OutputManifest {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            config: config.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            workers,
            files: Vec::new(),
            timings_s: BTreeMap::new(),
            color_scale: None,
            created: chrono::Utc::now().to_rfc3339(),
        }
    }

    /// Checksums a file that has already been written under `dir`.
    pub fn record(&mut self, dir: &Path, name: &str, schema: &str) -> Result<()> {
        let (sha256, bytes) = sha256_file(&dir.join(name))?;
        self.files.push(FileRecord { path: name.into(), schema: schema.into(), sha256, bytes });
        Ok(())
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_s.insert(stage.into(), start.elapsed().as_secs_f64());
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        super::write_json(&dir.join("manifest.json"), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), b"abc").unwrap();
        let mut m = OutputManifest::new("test", [("t2", "2")], 1);
        m.record(dir.path(), "a.txt", "text/1").unwrap();
        assert_eq!(m.files[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(m.files[0].bytes, 3);
        m.timed("noop", || ());
        m.write(dir.path()).unwrap();
        let back: OutputManifest =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
