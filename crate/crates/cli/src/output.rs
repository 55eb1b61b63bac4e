//! Output directories, atomic writes and run manifests.

use anyhow::{Context, Result};
use fbns::checkpoint;
use fbns::SpectralField;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Resolves every user path against `--workdir`.
#[derive(Clone, Debug)]
pub struct Workdir(PathBuf);

impl Workdir {
    pub fn new(root: PathBuf) -> Self {
        Self(root)
    }

    pub fn resolve(&self, p: impl AsRef<Path>) -> PathBuf {
        self.0.join(p)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NumericalFailure,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
    config: &'a str,
    outputs: &'a [OutputEntry],
}

/// Collects the files of one run and writes `manifest.json` last.
pub struct RunOutput {
    dir: PathBuf,
    subcommand: &'static str,
    config_echo: String,
    entries: Vec<OutputEntry>,
}

impl RunOutput {
    pub fn create(dir: PathBuf, subcommand: &'static str, config_echo: String) -> Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            subcommand,
            config_echo,
            entries: Vec::new(),
        })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        checkpoint::write_atomic(&path, data).with_context(|| format!("writing {}", path.display()))?;
        self.entries.push(OutputEntry {
            path: name.to_string(),
            bytes: data.len(),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn field(&mut self, name: &str, f: &SpectralField) -> Result<()> {
        self.bytes(name, &checkpoint::encode(f))
    }

    pub fn finish(self, status: Status, failure: Option<&str>) -> Result<PathBuf> {
        let manifest = Manifest {
            subcommand: self.subcommand,
            version: env!("CARGO_PKG_VERSION"),
            status,
            failure,
            config: &self.config_echo,
            outputs: &self.entries,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        checkpoint::write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// JSON text with a trailing newline, for standard output.
pub fn json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
