//! CSV files with a commented provenance header, and the run manifest.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Header lines written as `# key: value` before the column names.
#[derive(Debug, Clone)]
pub struct Header {
    pub config_hash: String,
    pub grid: String,
    pub normalization: String,
    pub extra: Vec<(String, String)>,
}

impl Header {
    pub fn with(&self, key: &str, value: impl ToString) -> Header {
        let mut h = self.clone();
        h.extra.push((key.to_string(), value.to_string()));
        h
    }

    pub fn normalized(&self, normalization: &str) -> Header {
        Header { normalization: normalization.to_string(), ..self.clone() }
    }
}

pub struct OutputDir {
    pub root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, header: &Header, columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<PathBuf> {
        let path = self.root.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# bsvsim {}", bsvsim_core::VERSION)?;
        writeln!(out, "# config_sha256: {}", header.config_hash)?;
        writeln!(out, "# grid: {}", header.grid)?;
        writeln!(out, "# normalization: {}", header.normalization)?;
        for (k, v) in &header.extra {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// Everything needed to reproduce a run. Written as `manifest.toml`.
pub struct RunManifest {
    pub subcommand: String,
    pub config_snapshot: String,
    pub config_hash: String,
    pub grid: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    pub diagnostics: Vec<(String, String)>,
}

impl RunManifest {
    pub fn write(&self, root: &Path) -> std::io::Result<PathBuf> {
        let mut s = String::new();
        let _ = writeln!(s, "subcommand = {:?}", self.subcommand);
        let _ = writeln!(s, "tool_version = {:?}", bsvsim_core::VERSION);
        let _ = writeln!(s, "config_sha256 = {:?}", self.config_hash);
        let _ = writeln!(s, "grid = {:?}", self.grid);
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time_s);
        let _ = writeln!(s, "outputs = [");
        for p in &self.outputs {
            let _ = writeln!(s, "  {:?},", p.display().to_string());
        }
        let _ = writeln!(s, "]\n\n[diagnostics]");
        for (k, v) in &self.diagnostics {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "\n[config]\nsnapshot = '''\n{}'''", self.config_snapshot);
        let path = root.join("manifest.toml");
        fs::write(&path, s)?;
        Ok(path)
    }
}
