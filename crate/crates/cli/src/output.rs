//! CSV and JSON writers. Reals are written with 17 significant digits so that
//! every value parses back to the same double.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// `x` in scientific notation with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table held in memory until the whole run has succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file_name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: &'static str, header: &[&'static str]) -> Self {
        Self { file_name, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        Ok(w.into_inner().expect("in-memory writer cannot fail to flush"))
    }
}

/// Writes every table and `summary.json` into `dir`. If any write fails the
/// files already written by this call are removed.
pub fn write_outputs(dir: &Path, tables: &[Table], summary: &serde_json::Value) -> Result<Vec<PathBuf>, CliError> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for t in tables {
            let path = dir.join(t.file_name);
            let bytes = t.to_bytes().map_err(|e| CliError::io(&path, std::io::Error::other(e)))?;
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}
