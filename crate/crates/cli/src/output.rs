//! Deterministic output: CSV with a `#` header row and 17-significant-digit
//! floats, or one JSON object per row.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

enum Sink {
    Stdout(std::io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    fn write_line(&mut self, line: &str) -> Result<()> {
        match self {
            Sink::Stdout(s) => writeln!(s, "{line}")?,
            Sink::File(f) => writeln!(f, "{line}")?,
        }
        Ok(())
    }
}

pub struct Writer {
    sink: Sink,
    format: OutputFormat,
}

impl Writer {
    /// Open the output destination. Relative paths are joined with
    /// `NLSG_OUT_DIR` when that variable is set.
    pub fn open(path: &Option<PathBuf>, format: OutputFormat) -> Result<Self> {
        let sink = match path {
            None => Sink::Stdout(std::io::stdout()),
            Some(p) => {
                let resolved = resolve_out_path(p);
                let file = File::create(&resolved)
                    .with_context(|| format!("creating {}", resolved.display()))?;
                Sink::File(BufWriter::new(file))
            }
        };
        Ok(Self { sink, format })
    }

    /// CSV column header (`# ...` comment row); no-op for JSON lines.
    pub fn header(&mut self, columns: &str) -> Result<()> {
        if self.format == OutputFormat::Csv {
            self.sink.write_line(&format!("# {columns}"))?;
        }
        Ok(())
    }

    /// One row: pre-formatted CSV fields, or the row object as JSON.
    pub fn row<T: Serialize>(&mut self, csv_fields: &[String], object: &T) -> Result<()> {
        match self.format {
            OutputFormat::Csv => self.sink.write_line(&csv_fields.join(",")),
            OutputFormat::Jsonl => self.sink.write_line(&serde_json::to_string(object)?),
        }
    }

    /// A single pretty-printed JSON document (reports).
    pub fn json_pretty<T: Serialize>(&mut self, object: &T) -> Result<()> {
        self.sink.write_line(&serde_json::to_string_pretty(object)?)
    }

    pub fn finish(mut self) -> Result<()> {
        if let Sink::File(f) = &mut self.sink {
            f.flush()?;
        }
        Ok(())
    }
}

fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("NLSG_OUT_DIR") {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}

/// 17 significant digits, scientific notation: round-trips every f64 and is
/// byte-stable across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[1.0, -0.8257928987544099, 4.004309521824425, 1e-12, 6.02e23] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
