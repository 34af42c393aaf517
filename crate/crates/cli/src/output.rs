use std::fs;
use std::path::Path;

use crate::error::HarnessError;

/// Scientific notation with 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory table flushed to disk in one go.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| format_number(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|source| HarnessError::Io { path: parent.to_path_buf(), source })?;
        }
        let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
        let mut writer = csv::WriterBuilder::new().delimiter(b';').from_path(path).map_err(csv_err)?;
        writer.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            writer.write_record(row).map_err(csv_err)?;
        }
        writer.flush().map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.4, -3.0e-17, 1.0 / 3.0, 123456.789] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_number(3.0), "3.0000000000000000e0");
    }

    #[test]
    fn writes_semicolon_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("t.csv");
        let mut table = CsvTable::new(&["a", "b"]);
        table.push_numbers(&[1.0, 2.5]);
        table.push(vec!["slope".into(), "x".into()]);
        table.write(&path).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text, "a;b\n1.0000000000000000e0;2.5000000000000000e0\nslope;x\n");
    }

    #[test]
    #[should_panic]
    fn rejects_ragged_rows() {
        CsvTable::new(&["a", "b"]).push_numbers(&[1.0]);
    }
}
