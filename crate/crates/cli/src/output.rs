//! CSV tables: comma separated, header row, LF line endings, shortest
//! round-trip decimal formatting.

use std::io::Write;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    /// Lines written before the header, each prefixed with "# ".
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Formats a float so that parsing it back gives the same bits.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { comments: vec![], header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_formatting() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 2.5e17, -0.0, 5.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(5.0), "5.0");
    }

    #[test]
    fn layout() {
        let mut t = Table::new(&["a", "b"]);
        t.comments.push("note".into());
        t.push(vec![num(1.5), "x".into()]);
        assert_eq!(t.to_csv_string(), "# note\na,b\n1.5,x\n");
    }
}
