//! Deterministic CSV serialization of sweep tables.

use std::io::Write;

use crate::error::{Error, Result};

/// Marker written in place of values when the drift matrix is unstable.
pub const UNSTABLE: &str = "ERR:unstable";
/// Marker for any other per-cell numerical failure.
pub const FAILED: &str = "ERR:failed";

/// One table entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Unstable,
    Failed,
}

impl Cell {
    pub fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) if v.is_finite() => Cell::Value(v),
            Err(Error::UnstableDrift { .. }) => Cell::Unstable,
            _ => Cell::Failed,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_error(self) -> bool {
        !matches!(self, Cell::Value(_))
    }

    /// 17 significant digits, enough to round-trip any f64.
    pub fn render(self) -> String {
        match self {
            Cell::Value(v) => format!("{v:.16e}"),
            Cell::Unstable => UNSTABLE.to_string(),
            Cell::Failed => FAILED.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis: f64,
    pub lambda: Cell,
    pub cells: Vec<Cell>,
}

/// A sweep table: axis value, Λ, then the requested columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Axis header including its unit, e.g. `gamma (m^3/s)`.
    pub axis_label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.axis_label.clone(), "Lambda (rad/s)".to_string()];
        h.extend(self.columns.iter().cloned());
        h
    }

    /// Position of a column by its exact header text.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one output column, `None` where the cell holds a marker.
    pub fn values(&self, index: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.cells[index].value()).collect()
    }

    /// True when there are output columns and every one of their cells failed.
    pub fn all_rows_errored(&self) -> bool {
        !self.columns.is_empty() && self.rows.iter().all(|r| r.cells.iter().all(|c| c.is_error()))
    }
}

/// Writes the table with a header row and `\n` line endings.
pub fn emit_csv<W: Write>(result: &SweepResult, destination: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(destination);
    let io = |e: csv::Error| Error::IoError(e.to_string());
    w.write_record(result.header()).map_err(io)?;
    for row in &result.rows {
        let mut record = vec![Cell::Value(row.axis).render(), row.lambda.render()];
        record.extend(row.cells.iter().map(|c| c.render()));
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| Error::IoError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(columns: Vec<&str>, cells: Vec<Vec<Cell>>) -> SweepResult {
        SweepResult {
            axis_label: "gamma (m^3/s)".into(),
            columns: columns.into_iter().map(String::from).collect(),
            rows: cells
                .into_iter()
                .enumerate()
                .map(|(i, c)| Row { axis: i as f64 + 0.5, lambda: Cell::Value(0.1), cells: c })
                .collect(),
        }
    }

    fn render(t: &SweepResult) -> String {
        let mut buf = Vec::new();
        emit_csv(t, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_outputs() {
        let text = render(&table(vec![], vec![vec![], vec![]]));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "gamma (m^3/s),Lambda (rad/s)");
        assert_eq!(lines[1], "5.0000000000000000e-1,1.0000000000000001e-1");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn markers_and_round_trip() {
        let x = 1.0 / 3.0;
        let t = table(vec!["qfi_mech (s^2)", "snr_mech (1)"], vec![vec![Cell::Value(x), Cell::Unstable], vec![Cell::Failed, Cell::Value(-2.5e-300)]]);
        let text = render(&t);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",ERR:unstable"));
        for line in &lines[1..] {
            let fields: Vec<_> = line.split(',').collect();
            assert_eq!(fields.len(), 4);
            for f in fields {
                assert!(f == UNSTABLE || f == FAILED || f.parse::<f64>().unwrap().is_finite());
            }
        }
        let back: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(back, x);
        assert_eq!(render(&t), text);
        assert!(!t.all_rows_errored());
        assert!(table(vec!["a"], vec![vec![Cell::Failed], vec![Cell::Unstable]]).all_rows_errored());
        assert!(!table(vec![], vec![vec![]]).all_rows_errored());
    }

    #[test]
    fn cell_from_result() {
        assert_eq!(Cell::from_result(Ok(2.0)), Cell::Value(2.0));
        assert_eq!(Cell::from_result(Ok(f64::NAN)), Cell::Failed);
        assert_eq!(Cell::from_result(Err(Error::UnstableDrift { max_real: 1.0 })), Cell::Unstable);
        assert_eq!(Cell::from_result(Err(Error::NearPure)), Cell::Failed);
    }
}
