//! "(node value)" vector files.
//!
//! One `node value` pair per line, `#` lines are headers. Values are written
//! with 17 significant digits so they parse back to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{AgpError, Result};

/// Shortest fixed-width form that round-trips any finite `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `# header` lines followed by one `node value` line per entry.
pub fn write_vector<W: Write>(
    mut w: W,
    header: &[String],
    entries: impl IntoIterator<Item = (u64, f64)>,
) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    for (node, v) in entries {
        writeln!(w, "{node} {}", format_value(v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_file(
    path: impl AsRef<Path>,
    header: &[String],
    entries: impl IntoIterator<Item = (u64, f64)>,
) -> Result<()> {
    write_vector(BufWriter::new(File::create(path)?), header, entries)
}

/// Header lines and `(node, value)` entries of a vector file.
pub type VectorFile = (Vec<String>, Vec<(u64, f64)>);

pub fn read_vector<R: BufRead>(r: R) -> Result<Vec<(u64, f64)>> {
    read_vector_with_header(r).map(|(_, entries)| entries)
}

/// Like [`read_vector`], also returning the `#` header lines without the marker.
pub fn read_vector_with_header<R: BufRead>(r: R) -> Result<VectorFile> {
    let mut header = Vec::new();
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            header.push(rest.trim().to_string());
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| AgpError::Parse { line: i + 1, message };
        let mut tokens = line.split_whitespace();
        let (Some(node), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(parse_err(format!("expected `node value`, got {line:?}")));
        };
        let node = node.parse::<u64>().map_err(|e| parse_err(format!("bad node id {node:?}: {e}")))?;
        let value = value.parse::<f64>().map_err(|e| parse_err(format!("bad value {value:?}: {e}")))?;
        out.push((node, value));
    }
    Ok((header, out))
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<Vec<(u64, f64)>> {
    read_vector(BufReader::new(File::open(path)?))
}

pub fn read_vector_file_with_header(path: impl AsRef<Path>) -> Result<VectorFile> {
    read_vector_with_header(BufReader::new(File::open(path)?))
}
