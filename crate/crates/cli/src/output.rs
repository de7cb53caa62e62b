use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Output directory that remembers what was written to it.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<S: Serialize + ?Sized>(&mut self, name: &str, value: &S) -> CliResult<PathBuf> {
        let mut text = latticefringe::io::to_json(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes a CSV produced by `fill` into memory first.
    pub fn csv(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> latticefringe::Result<()>,
    ) -> CliResult<PathBuf> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: Option<u64>,
    pub workers: usize,
    pub format: &'a str,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

pub fn write_manifest<C: Serialize>(
    out: &mut OutDir,
    command: &str,
    seed: Option<u64>,
    workers: usize,
    format: Format,
    config: &C,
    started: Instant,
) -> CliResult<()> {
    let config = serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        workers,
        format: format.extension(),
        config,
        outputs: out.written().to_vec(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(())
}
