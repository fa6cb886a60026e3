//! Run manifest: config echo, version, timing, result summary and a
//! checksummed inventory of every written file.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn version() -> String {
    format!("{} ({})", env!("CARGO_PKG_VERSION"), env!("NSK_GIT_DESCRIBE"))
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Seconds since the Unix epoch at write time.
    pub timestamp: u64,
    pub wall_clock_seconds: f64,
    pub config_text: Option<String>,
    pub config: serde_json::Value,
    pub exit_code: i32,
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects written files and writes the manifest next to them.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        self.files.push(PathBuf::from(name));
        Ok(path)
    }

    pub fn finish(
        self,
        command: &str,
        elapsed: Duration,
        config_text: Option<String>,
        config: serde_json::Value,
        exit_code: i32,
        summary: serde_json::Value,
    ) -> io::Result<PathBuf> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let bytes = fs::read(self.root.join(rel))?;
            outputs.push(OutputFile {
                path: rel.to_string_lossy().into_owned(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        let manifest = RunManifest {
            command: command.into(),
            version: version(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_seconds: elapsed.as_secs_f64(),
            config_text,
            config,
            exit_code,
            summary,
            outputs,
        };
        let path = self.root.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_checksummed_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("a.csv", b"x,y\n1,2\n").unwrap();
        let path = out
            .finish("test", Duration::from_millis(5), None, serde_json::Value::Null, 0, serde_json::json!({}))
            .unwrap();
        let m: serde_json::Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
        let files = m["outputs"].as_array().unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(files[0]["path"], "a.csv");
        assert_eq!(files[0]["sha256"], sha256_hex(b"x,y\n1,2\n"));
        assert_eq!(files[0]["bytes"], 8);
    }
}
