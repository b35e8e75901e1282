use std::io::{self, Write};
use std::path::Path;

/// `v` with 15 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp).max(0) as usize, v)
    } else {
        format!("{v:.14e}")
    }
}

/// A CSV table with a header row; cells are preformatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_num(*v)).collect());
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> io::Result<()> {
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()
    }

    pub fn read_file(path: &Path) -> io::Result<Table> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("{} is empty", path.display())))?;
        let mut t = Table::new(header.split(','));
        for l in lines.filter(|l| !l.is_empty()) {
            let row: Vec<String> = l.split(',').map(String::from).collect();
            if row.len() != t.header.len() {
                return Err(io::Error::new(io::ErrorKind::InvalidData, format!("ragged row in {}: {l}", path.display())));
            }
            t.rows.push(row);
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as numbers.
    pub fn numbers(&self, name: &str) -> io::Result<Vec<f64>> {
        let c = self
            .column(name)
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("missing column {name}")))?;
        self.rows
            .iter()
            .map(|r| r[c].parse::<f64>().map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{name}: '{}': {e}", r[c]))))
            .collect()
    }
}
