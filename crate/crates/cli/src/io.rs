use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file and the SHA-256 digest of its content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Reads and parses a JSON input; parse errors keep serde's line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<(T, FileDigest), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::input("ReadFailed", format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| Failure::input("ParseError", format!("{}: {e}", path.display())))?;
    Ok((value, FileDigest { path: path.display().to_string(), sha256: sha256(&bytes) }))
}

fn pretty<T: Serialize + ?Sized>(value: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::input("WriteFailed", e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Output directory that records a digest for every file written.
pub struct OutputDir {
    dir: PathBuf,
    pub files: Vec<FileDigest>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::input("WriteFailed", format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| Failure::input("WriteFailed", format!("{}: {e}", path.display())))
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        self.write_raw(name, bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileDigest { path: name.to_string(), sha256: sha256(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = pretty(value)?;
        self.write(name, text.as_bytes())
    }

    /// Writes JSON without listing it among the outputs (the manifest itself).
    pub fn json_untracked<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), Failure> {
        self.write_raw(name, pretty(value)?.as_bytes())
    }

    /// Writes rows as CSV, with the header taken from the row's field names.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| Failure::input("WriteFailed", e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::input("WriteFailed", e.to_string()))?;
        self.write(name, &bytes)
    }
}
