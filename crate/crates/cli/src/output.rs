//! Artifact writers. Every artifact gets a `<stem>.config.json` sidecar holding
//! the resolved configuration; timestamps live only there.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub struct ArtifactWriter {
    dir: PathBuf,
    command: String,
    config: RunConfig,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    artifact: &'a str,
    version: &'a str,
    created_unix_s: u64,
    config: &'a RunConfig,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl ArtifactWriter {
    pub fn new(dir: &Path, command: &str, config: RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config,
            written: Vec::new(),
        })
    }

    fn sidecar(&mut self, stem: &str, artifact: &str) -> Result<(), CliError> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let sidecar = Sidecar {
            command: &self.command,
            artifact,
            version: env!("CARGO_PKG_VERSION"),
            created_unix_s: created,
            config: &self.config,
        };
        let path = self.dir.join(format!("{stem}.config.json"));
        let text = serde_json::to_string_pretty(&sidecar).map_err(|e| io_error(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// RFC 4180 CSV with one header row; rows serialize as tuples or structs
    /// whose fields follow `header`.
    pub fn csv<R: Serialize>(&mut self, stem: &str, header: &[&str], rows: &[R]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{stem}.csv"));
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::CRLF)
            .from_path(&path)
            .map_err(|e| io_error(&path, e))?;
        w.write_record(header).map_err(|e| io_error(&path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io_error(&path, e))?;
        }
        w.flush().map_err(|e| io_error(&path, e))?;
        self.written.push(path.clone());
        self.sidecar(stem, &format!("{stem}.csv"))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(value).map_err(|e| io_error(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
        self.written.push(path.clone());
        self.sidecar(stem, &format!("{stem}.json"))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "test", RunConfig::default()).unwrap();
        let rows: Vec<(f64, f64)> = Vec::new();
        let path = w.csv("empty", &["a", "b"], &rows).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "a,b\r\n");
        assert!(dir.path().join("empty.config.json").exists());
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "test", RunConfig::default()).unwrap();
        let path = w.csv("q", &["label", "x"], &[("|1,0>", 1.5)]).unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "label,x\r\n\"|1,0>\",1.5\r\n");
    }
}
