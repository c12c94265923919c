//! Dataset ingestion and persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::synth::{generate_gaussian_mixture, MixtureSpec};
use crate::error::{Error, Result};
use crate::model::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub skip_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            skip_header: false,
            delimiter: b',',
        }
    }
}

/// Reads a numeric CSV into a matrix. Rows must all have the same arity.
pub fn load_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let ingest = |row: usize, column: usize, message: String| Error::Ingestion {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.skip_header)
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => ingest(0, 0, format!("{other:?}")),
        })?;

    let mut values = Vec::new();
    let mut n = None;
    let mut m = 0;
    for (i, record) in reader.records().enumerate() {
        // 1-based line number in the file.
        let row = i + 1 + usize::from(options.skip_header);
        let record = record.map_err(|e| ingest(row, 0, e.to_string()))?;
        let arity = *n.get_or_insert(record.len());
        if record.len() != arity {
            return Err(ingest(
                row,
                record.len().min(arity) + 1,
                format!("expected {arity} fields, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| ingest(row, j + 1, format!("not a finite number: `{field}`")))?;
            values.push(v);
        }
        m += 1;
    }
    let n = n.filter(|&n| n > 0 && m > 0).ok_or_else(|| ingest(0, 0, "no data rows".into()))?;
    DataMatrix::new(m, n, values)
}

/// Writes a matrix as headerless CSV using shortest round-trip float formatting.
pub fn write_csv(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in data.iter_rows() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv { path: PathBuf, options: CsvOptions },
    Synthetic { spec: MixtureSpec, seed: u64 },
}

/// One dataset of an experiment, with optional known-best objectives per `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DatasetSource,
    pub expected_n: Option<usize>,
    pub best_known: BTreeMap<usize, f64>,
}

impl DatasetSpec {
    pub fn load(&self) -> Result<DataMatrix> {
        let data = match &self.source {
            DatasetSource::Csv { path, options } => load_csv(path, *options)?,
            DatasetSource::Synthetic { spec, seed } => generate_gaussian_mixture(spec, *seed)?,
        };
        if let Some(n) = self.expected_n {
            if data.cols() != n {
                return Err(Error::usage(format!(
                    "dataset {} has {} features, expected {n}",
                    self.name,
                    data.cols()
                )));
            }
        }
        Ok(data)
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self.source, DatasetSource::Synthetic { .. })
    }
}
