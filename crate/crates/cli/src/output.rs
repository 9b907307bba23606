use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Output directory plus the directory relative paths in configs resolve
/// against.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out: PathBuf,
    pub base: PathBuf,
}

impl RunContext {
    pub fn new(out: &Path, base: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Self {
            out: out.to_path_buf(),
            base,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Writes `name` in the output directory via a temp file and rename.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.out.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        Ok(())
    }

    /// Runs `fill` into a buffer and writes it atomically.
    pub fn write_with<F>(&self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf).map_err(|e| CliError::io(self.out.join(name), e))?;
        self.write(name, &buf)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_path: String,
    pub config: String,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub exit_code: i32,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Full-precision CSV float.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
