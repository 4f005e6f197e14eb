//! Tables written as CSV or JSON lines, and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::numeric::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Serializes the table under a provenance header: `#` comment lines for
    /// CSV, a leading `{"provenance": ...}` object for JSON lines.
    pub fn render(&self, format: Format, provenance: &Provenance) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                for line in provenance.lines() {
                    out.push_str("# ");
                    out.push_str(&line);
                    out.push('\n');
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
            }
            Format::Jsonl => {
                out.push_str(&serde_json::json!({ "provenance": provenance }).to_string());
                out.push('\n');
                for row in &self.rows {
                    let obj: serde_json::Map<String, serde_json::Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    out.push_str(&serde_json::Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// The deterministic part of a run's description, embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
}

impl Provenance {
    fn lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("{} {}", self.tool, self.version),
            format!("command: {}", self.command.join(" ")),
            format!("seeds: {}", self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
        ];
        v.extend(self.inputs.iter().map(|d| format!("input: {} sha256={}", d.path, d.sha256)));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path)?;
    Ok(FileDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub outputs: Vec<FileDigest>,
    pub wall_clock_seconds: f64,
}

/// Collects output files of one run and writes the manifest at the end.
pub struct Outputs {
    pub dir: PathBuf,
    pub format: Format,
    pub provenance: Provenance,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: PathBuf, format: Format, provenance: Provenance) -> Self {
        Outputs { dir, format, provenance, written: Vec::new() }
    }

    fn prepare(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        Ok(())
    }

    /// Writes `table` to `<dir>/<stem>.<ext>` and returns the path.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.{}", self.format.extension()));
        self.prepare(&path)?;
        fs::write(&path, table.render(self.format, &self.provenance))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes an arbitrary file produced by `write`.
    pub fn file(&mut self, path: PathBuf, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<PathBuf> {
        self.prepare(&path)?;
        let mut f = fs::File::create(&path)?;
        write(&mut f)?;
        f.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a pretty-printed JSON record next to the tables.
    pub fn json(&mut self, stem: &str, value: &impl Serialize) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.json"));
        let record = serde_json::json!({ "provenance": &self.provenance, "record": value });
        let text = serde_json::to_string_pretty(&record).map_err(std::io::Error::from)? + "\n";
        self.file(path, |f| Ok(f.write_all(text.as_bytes())?))
    }

    pub fn finish(self, wall_clock_seconds: f64) -> Result<PathBuf> {
        let outputs = self.written.iter().map(|p| digest_file(p)).collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest { provenance: self.provenance, outputs, wall_clock_seconds };
        let path = self.dir.join("run_manifest.json");
        fs::create_dir_all(&self.dir)?;
        let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::from)? + "\n";
        fs::write(&path, text)?;
        Ok(path)
    }
}
