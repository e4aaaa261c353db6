use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: &'static str,
    /// Wall-clock derived; excluded from the digest.
    pub timing: bool,
}

/// One command's result: a versioned schema, named columns and string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// `columns` names ending in `*` are timing columns; the marker is stripped.
    pub fn new(schema: &'static str, columns: &[&'static str]) -> Table {
        let columns = columns
            .iter()
            .map(|c| match c.strip_suffix('*') {
                Some(name) => Column { name, timing: true },
                None => Column { name: c, timing: false },
            })
            .collect();
        Table { schema, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.schema);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Cells of column `name` in row order.
    pub fn values(&self, name: &str) -> Vec<&str> {
        let i = self.column(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].as_str()).collect()
    }

    /// A `# schema` comment line, the header, then one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# schema {}\n", self.schema);
        let names: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        s.push_str(&names.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn render(&self) -> String {
        let mut w: Vec<usize> = self.columns.iter().map(|c| c.name.len()).collect();
        for r in &self.rows {
            for (i, cell) in r.iter().enumerate() {
                w[i] = w[i].max(cell.len());
            }
        }
        let mut s = String::new();
        let line = |s: &mut String, cells: Vec<&str>| {
            let parts: Vec<String> = cells.iter().zip(&w).map(|(c, &w)| format!("{c:>w$}")).collect();
            s.push_str(parts.join("  ").trim_end());
            s.push('\n');
        };
        line(&mut s, self.columns.iter().map(|c| c.name).collect());
        let rule: Vec<String> = w.iter().map(|&w| "-".repeat(w)).collect();
        line(&mut s, rule.iter().map(String::as_str).collect());
        for r in &self.rows {
            line(&mut s, r.iter().map(String::as_str).collect());
        }
        s
    }

    /// SHA-256 over the schema and every non-timing column, hex encoded.
    pub fn digest(&self) -> String {
        let keep: Vec<usize> = (0..self.columns.len()).filter(|&i| !self.columns[i].timing).collect();
        let mut h = Sha256::new();
        h.update(self.schema.as_bytes());
        h.update(b"\n");
        let names: Vec<&str> = keep.iter().map(|&i| self.columns[i].name).collect();
        h.update(names.join(",").as_bytes());
        h.update(b"\n");
        for r in &self.rows {
            let cells: Vec<&str> = keep.iter().map(|&i| r[i].as_str()).collect();
            h.update(cells.join(",").as_bytes());
            h.update(b"\n");
        }
        let mut out = String::with_capacity(64);
        for b in h.finalize() {
            write!(out, "{b:02x}").unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

/// Schema, header names and rows.
pub type ParsedCsv = (String, Vec<String>, Vec<Vec<String>>);

/// Parses CSV written by [`Table::to_csv`], checking the schema line and that
/// every row has one cell per header column.
pub fn parse_csv(text: &str) -> Result<ParsedCsv, String> {
    let mut lines = text.lines();
    let schema = lines.next().and_then(|l| l.strip_prefix("# schema ")).ok_or("missing schema line")?.to_string();
    let header: Vec<String> = lines.next().ok_or("missing header")?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let r: Vec<String> = l.split(',').map(str::to_string).collect();
        if r.len() != header.len() {
            return Err(format!("row {}: {} cells, header has {}", i + 1, r.len(), header.len()));
        }
        rows.push(r);
    }
    Ok((schema, header, rows))
}

pub fn fmt_f64(x: f64, digits: usize) -> String {
    format!("{x:.digits$}")
}

pub fn fmt_sci(x: f64) -> String {
    format!("{x:.6e}")
}
