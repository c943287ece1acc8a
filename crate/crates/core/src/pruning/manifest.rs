use std::path::{Path, PathBuf};

use super::{ActivationDump, Matrix, PruneError};

/// One line of a dump manifest: `layer rows cols in_file out_file`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub layer_index: usize,
    pub rows: usize,
    pub cols: usize,
    pub in_file: PathBuf,
    pub out_file: PathBuf,
}

impl ManifestEntry {
    /// Reads both matrices as raw little-endian `f32`.
    pub fn load(&self) -> Result<ActivationDump, PruneError> {
        let read = |p: &Path| -> Result<Matrix, PruneError> {
            let bytes = std::fs::read(p).map_err(|source| PruneError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            let expected = self.rows * self.cols * 4;
            if bytes.len() != expected {
                return Err(PruneError::BadDump {
                    layer: self.layer_index,
                    message: format!("{}: expected {expected} bytes, found {}", p.display(), bytes.len()),
                });
            }
            let data = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            Ok(Matrix::new(self.rows, self.cols, data).expect("length checked"))
        };
        ActivationDump::new(self.layer_index, read(&self.in_file)?, read(&self.out_file)?)
    }
}

/// Parses manifest text; relative file names resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, PruneError> {
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| PruneError::BadManifest { line: i + 1, message };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", cols.len())));
        }
        let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(format!("bad {what} '{s}'")));
        let layer_index = num(cols[0], "layer index")?;
        if entries.iter().any(|e| e.layer_index == layer_index) {
            return Err(bad(format!("layer {layer_index} listed twice")));
        }
        entries.push(ManifestEntry {
            layer_index,
            rows: num(cols[1], "row count")?,
            cols: num(cols[2], "column count")?,
            in_file: base.join(cols[3]),
            out_file: base.join(cols[4]),
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, PruneError> {
    let text = std::fs::read_to_string(path).map_err(|source| PruneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Writes a matrix in the dump format.
pub fn write_matrix(path: &Path, m: &Matrix) -> std::io::Result<()> {
    let bytes: Vec<u8> = m.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    crate::io::write_atomic(path, &bytes)
}
