//! Versioned CSV tables: a `# schema=... key=value ...` comment line, a header row, and
//! data rows. Floats are written in Rust's shortest round-trip form.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: String,
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, header: &[&str]) -> Self {
        Self { schema: schema.to_string(), params: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::InvalidInput(format!("row has {} fields, header has {}", row.len(), self.header.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed numeric column; empty cells become `None`.
    pub fn floats(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.column(name).ok_or_else(|| Error::InvalidInput(format!("no column {name}")))?;
        self.rows
            .iter()
            .map(|r| {
                if r[i].is_empty() {
                    Ok(None)
                } else {
                    r[i].parse().map(Some).map_err(|_| Error::InvalidInput(format!("bad number {:?} in {name}", r[i])))
                }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut comment = format!("# schema={}", self.schema);
        for (k, v) in &self.params {
            comment.push_str(&format!(" {k}={v}"));
        }
        writeln!(w, "{comment}")?;
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Formats an optional float, leaving the cell empty when absent.
pub fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_schema_header_and_rows() {
        let mut t = Table::new("demo/v1", &["t", "p"]);
        t.param("omega", 0.1);
        t.push(vec!["0".into(), "1".into()]).unwrap();
        t.push(vec!["0.5".into(), cell(None)]).unwrap();
        assert_eq!(t.to_csv_string(), "# schema=demo/v1 omega=0.1\nt,p\n0,1\n0.5,\n");
        assert_eq!(t.floats("p").unwrap(), vec![Some(1.0), None]);
        assert!(t.push(vec!["1".into()]).is_err());
    }
}
