//! Stable text formats: CSV tables and pretty JSON.

use serde::Serialize;

use crate::error::CliError;

/// Shortest decimal that parses back to `x`, with an exponent outside
/// `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Comma-separated table with a header row and LF line endings. Cells
/// never contain commas or newlines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Parse("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(CliError::Parse(format!(
                    "CSV line {}: {} cells, header has {}",
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

/// Replaces characters that would break a CSV cell.
pub fn sanitize_cell(s: &str) -> String {
    s.replace(',', ";").replace(['\n', '\r'], " ")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -2.5,
            1e-7,
            6.366197723675813e5,
            1.3712331086104636e-6,
            1e15,
            0.1 + 0.2,
            1e-4,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(636619.7723675813), "636619.7723675813");
        assert_eq!(fmt_f64(2e20), "2e20");
    }

    #[test]
    fn table_round_trips() {
        let mut t = Table::new(&["a", "b"]);
        t.push_numbers(&[1.0, 1e-9]);
        t.push(vec!["x".into(), String::new()]);
        let text = t.render();
        assert_eq!(text, "a,b\n1,1e-9\nx,\n");
        assert_eq!(Table::parse(&text).unwrap(), t);
        assert!(Table::parse("a,b\n1\n").is_err());
    }
}
