//! CSV tables with a provenance line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Fixed-width scientific notation so reruns are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self, hash: &str) -> String {
        let mut s = String::new();
        writeln!(s, "# bicwave {} {hash}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "{}", self.header.join(",")).unwrap();
        for r in &self.rows {
            writeln!(s, "{}", r.join(",")).unwrap();
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str, hash: &str) -> Result<PathBuf, CliError> {
        write_file(dir, name, &self.render(hash))
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_then_header() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(1.0), opt(None)]);
        let s = t.render("abc");
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# bicwave ") && lines[0].ends_with(" abc"));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1.000000000000e0,");
    }
}
