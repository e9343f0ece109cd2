//! Plain CSV helpers. Floats are written in scientific notation with a fixed
//! number of significant digits so outputs are byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Format `x` with `digits` significant digits.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        // normalise -0.0
        return format!("{:.*e}", digits.saturating_sub(1), 0.0);
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// Row-oriented CSV buffer.
#[derive(Debug, Default, Clone)]
pub struct CsvTable {
    buf: String,
}

impl CsvTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `# ...` comment line.
    pub fn comment(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(self.buf, "# {text}");
        self
    }

    pub fn header<S: AsRef<str>>(&mut self, cols: &[S]) -> &mut Self {
        self.row(cols)
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) -> &mut Self {
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(c.as_ref());
        }
        self.buf.push('\n');
        self
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        fs::write(path, &self.buf).map_err(|e| Error::io(path, e))
    }
}
