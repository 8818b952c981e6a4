use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::Format;

/// Fixed 12-significant-digit rendering used for every number in tables.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> Option<String> {
        match self {
            Cell::Num(x) => Some(format_float(*x)),
            Cell::Text(s) => Some(s.clone()),
            Cell::Empty => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Column-oriented output with `#` comment lines before and after.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub footer: Vec<String>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    header: &'a [String],
    columns: &'a [String],
    rows: Vec<Vec<Option<String>>>,
    footer: &'a [String],
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| Cell::Num(x)).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.render().unwrap_or_default())
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for line in &self.footer {
            let _ = writeln!(out, "# {line}");
        }
        out
    }

    /// JSON with numbers rendered as in the CSV (as strings, so formatting
    /// is identical between the two outputs).
    pub fn to_json(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect();
        let t = JsonTable {
            header: &self.header,
            columns: &self.columns,
            rows,
            footer: &self.footer,
        };
        serde_json::to_string_pretty(&t).expect("table serializes") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Numeric values of a column (`None` for empty or text cells).
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }
}
