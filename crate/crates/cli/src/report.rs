//! Tabular output shared by the table and CSV renderings.

use tuatara_core::numerics::{certified_decimal, digits, Enclosure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

/// Rows of already-formatted cells. Both renderings print the same cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                for row in std::iter::once(&self.headers).chain(&self.rows) {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            Format::Table => {
                let widths: Vec<usize> = (0..self.headers.len())
                    .map(|c| {
                        std::iter::once(&self.headers)
                            .chain(&self.rows)
                            .map(|r| r[c].chars().count())
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                for row in std::iter::once(&self.headers).chain(&self.rows) {
                    let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    out.push_str(cells.join("  ").trim_end());
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// One certified quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub label: String,
    pub enclosure: Enclosure,
    pub budget: usize,
    pub certified: bool,
}

pub const REPORT_HEADERS: [&str; 7] = ["label", "lo", "hi", "decimal", "binary", "budget", "certified"];

impl ReportRow {
    pub fn new(label: impl Into<String>, enclosure: Enclosure, budget: usize) -> Self {
        ReportRow {
            label: label.into(),
            certified: enclosure.is_bounded(),
            enclosure,
            budget,
        }
    }

    /// Cells under [`REPORT_HEADERS`]; decimal and binary show only the
    /// digits every point of the enclosure shares, at most `max_digits`.
    pub fn cells(&self, max_digits: usize) -> Vec<String> {
        let e = &self.enclosure;
        let hi = e.hi().map_or_else(|| "inf".to_string(), |h| h.to_string());
        let decimal = certified_decimal(e, max_digits).unwrap_or_else(|| "-".to_string());
        let d = digits(e, max_digits);
        let binary = if d.determined_count == 0 {
            "-".to_string()
        } else {
            format!("0.{}", d.digits)
        };
        vec![
            self.label.clone(),
            e.lo().to_string(),
            hi,
            decimal,
            binary,
            self.budget.to_string(),
            self.certified.to_string(),
        ]
    }
}

pub fn report_table(rows: &[ReportRow], max_digits: usize) -> Table {
    let mut t = Table::new(&REPORT_HEADERS);
    for r in rows {
        t.push(r.cells(max_digits));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use tuatara_core::numerics::ratio;

    #[test]
    fn renderings_share_cells() {
        let row = ReportRow::new("zeta", Enclosure::new(ratio(1, 3), ratio(3, 8)).unwrap(), 10);
        let t = report_table(&[row], 5);
        let csv = t.render(Format::Csv);
        assert_eq!(csv, "label,lo,hi,decimal,binary,budget,certified\nzeta,1/3,3/8,0.3,0.0101,10,true\n");
        let table = t.render(Format::Table);
        for cell in &t.rows[0] {
            assert!(table.contains(cell.as_str()));
        }
    }

    #[test]
    fn unbounded_is_uncertified() {
        let row = ReportRow::new("x", Enclosure::unbounded_above(ratio(1, 2)), 1);
        assert!(!row.certified);
        assert_eq!(row.cells(4)[2], "inf");
        assert_eq!(row.cells(4)[3], "-");
    }
}
