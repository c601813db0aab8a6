//! Deterministic artifact emission.
//!
//! Every CSV artifact starts with a metadata comment block (`# key=value`
//! lines recording the command, its parameters, the governing tolerances,
//! and the artifact version) followed by a header row. Floats are printed
//! with [`fnum`] so identical runs produce byte-identical files; nothing
//! time- or path-dependent is ever written. Files are written atomically:
//! content goes to a temporary file in the target directory which is then
//! renamed into place, so concurrent sweep items never expose partial
//! artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Artifact format version, recorded in every metadata block.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed-width scientific float formatting used in all artifacts. Infinite
/// values (sites that never switch) print as `inf` and undefined values
/// (absent roots) as `nan`; both read back via `f64::from_str`.
pub fn fnum(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.12e}")
    }
}

/// Accumulates one artifact: metadata block, header row, data rows.
pub struct Csv {
    buf: String,
}

impl Csv {
    /// Start an artifact for `command` with the standard metadata keys.
    pub fn new(command: &str) -> Self {
        let mut csv = Csv { buf: String::new() };
        csv.meta("command", command);
        csv.meta("artifact-version", ARTIFACT_VERSION);
        csv
    }

    /// Append one `# key=value` metadata line.
    pub fn meta(&mut self, key: &str, value: impl AsRef<str>) -> &mut Self {
        self.buf.push_str("# ");
        self.buf.push_str(key);
        self.buf.push('=');
        self.buf.push_str(value.as_ref());
        self.buf.push('\n');
        self
    }

    /// Append a metadata line with a float value.
    pub fn meta_f(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, fnum(value))
    }

    /// Append the header row. Call once, after all metadata.
    pub fn header(&mut self, columns: &str) -> &mut Self {
        self.buf.push_str(columns);
        self.buf.push('\n');
        self
    }

    /// Append one data row from pre-formatted fields.
    pub fn row(&mut self, fields: &[String]) -> &mut Self {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
        self
    }

    /// Append one raw line (for structured text reports).
    pub fn line(&mut self, text: &str) -> &mut Self {
        self.buf.push_str(text);
        self.buf.push('\n');
        self
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Atomically write `content` to `dir/name` and return the final path.
pub fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write_atomic_path(&path, content)?;
    Ok(path)
}

/// Atomically write `content` to `path` (temporary file plus rename in the
/// same directory).
pub fn write_atomic_path(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("invalid output path {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = match dir {
        Some(dir) => dir.join(&tmp_name),
        None => PathBuf::from(&tmp_name),
    };
    fs::write(&tmp, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnum_is_fixed_width_scientific() {
        assert_eq!(fnum(0.5), "5.000000000000e-1");
        assert_eq!(fnum(f64::INFINITY), "inf");
        assert_eq!(fnum(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout_is_meta_then_header_then_rows() {
        let mut csv = Csv::new("green");
        csv.meta("n-max", "3");
        csv.header("t,n,y");
        csv.row(&[fnum(1.0), "0".to_string(), fnum(0.25)]);
        let text = csv.into_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command=green");
        assert!(lines[1].starts_with("# artifact-version="));
        assert_eq!(lines[2], "# n-max=3");
        assert_eq!(lines[3], "t,n,y");
        assert_eq!(lines[4], "1.000000000000e0,0,2.500000000000e-1");
    }
}
