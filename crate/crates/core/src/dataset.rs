//! Tabular ingestion and per-column z-score normalization.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Minimum number of rows needed to triangulate anything.
pub const MIN_ROWS: usize = 3;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input has no header row")]
    MissingHeader,
    #[error("non-numeric cell at row {row}, column {col} ({value:?})")]
    NonNumericCell { row: usize, col: usize, value: String },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} has {found} fields, expected {expected}")]
    Arity {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("need at least {MIN_ROWS} rows, found {0}")]
    TooFewRows(usize),
    #[error("no numeric columns")]
    NoColumns,
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Drop columns containing any non-numeric cell instead of failing.
    pub skip_non_numeric: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            skip_non_numeric: false,
        }
    }
}

/// Statistics of the raw (pre-normalization) column values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormStats {
    pub mean: f64,
    pub stdev: f64,
    pub min: f64,
    pub max: f64,
}

impl NormStats {
    fn of(values: &[f64]) -> NormStats {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        NormStats {
            mean,
            stdev: var.sqrt(),
            min,
            max,
        }
    }

    /// Zero spread, up to rounding of the mean.
    fn is_constant(&self) -> bool {
        self.stdev <= 1e-12 * self.mean.abs().max(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub stats: NormStats,
    /// Set by [`normalize`] when the column had no spread and was zeroed.
    pub constant: bool,
}

/// Named numeric columns of equal length.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    row_count: usize,
    normalized: bool,
}

impl Dataset {
    /// Build a dataset from already-parsed columns.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Dataset, DatasetError> {
        if columns.is_empty() {
            return Err(DatasetError::NoColumns);
        }
        let row_count = columns[0].1.len();
        for (col, (_, values)) in columns.iter().enumerate() {
            if values.len() != row_count {
                return Err(DatasetError::Arity {
                    row: values.len().min(row_count),
                    found: values.len(),
                    expected: row_count,
                });
            }
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { row, col });
            }
        }
        if row_count < MIN_ROWS {
            return Err(DatasetError::TooFewRows(row_count));
        }
        let columns = columns
            .into_iter()
            .map(|(name, values)| {
                let stats = NormStats::of(&values);
                Column {
                    name,
                    values,
                    stats,
                    constant: false,
                }
            })
            .collect();
        Ok(Dataset {
            columns,
            row_count,
            normalized: false,
        })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Row `i` across all columns.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Values of column `idx` in original units, whether or not the dataset is normalized.
    pub fn raw_values(&self, idx: usize) -> Vec<f64> {
        let c = &self.columns[idx];
        if !self.normalized {
            return c.values.clone();
        }
        if c.constant {
            return vec![c.stats.mean; self.row_count];
        }
        c.values
            .iter()
            .map(|z| z * c.stats.stdev + c.stats.mean)
            .collect()
    }

    /// Inverse of [`normalize`]; a no-op on raw datasets.
    pub fn denormalize(&self) -> Dataset {
        if !self.normalized {
            return self.clone();
        }
        let columns = (0..self.dims())
            .map(|i| Column {
                name: self.columns[i].name.clone(),
                values: self.raw_values(i),
                stats: self.columns[i].stats,
                constant: false,
            })
            .collect();
        Dataset {
            columns,
            row_count: self.row_count,
            normalized: false,
        }
    }
}

/// Read a CSV file with a header row.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
    parse_csv(&text, options)
}

/// Parse CSV text; see [`load_csv`].
pub fn parse_csv(text: &str, options: &CsvOptions) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(DatasetError::MissingHeader);
    }

    let width = headers.len();
    let mut cells: Vec<Vec<Option<f64>>> = vec![Vec::new(); width];
    let mut raw_bad: Vec<Option<(usize, String)>> = vec![None; width];
    let mut rows = 0usize;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width {
            return Err(DatasetError::Arity {
                row,
                found: record.len(),
                expected: width,
            });
        }
        for (col, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => cells[col].push(Some(v)),
                Ok(_) => return Err(DatasetError::NonFinite { row, col }),
                Err(_) => {
                    if !options.skip_non_numeric {
                        return Err(DatasetError::NonNumericCell {
                            row,
                            col,
                            value: field.to_owned(),
                        });
                    }
                    raw_bad[col].get_or_insert((row, field.to_owned()));
                    cells[col].push(None);
                }
            }
        }
        rows += 1;
    }

    if rows < MIN_ROWS {
        return Err(DatasetError::TooFewRows(rows));
    }

    let columns: Vec<(String, Vec<f64>)> = headers
        .into_iter()
        .zip(cells)
        .zip(raw_bad)
        .filter(|(_, bad)| bad.is_none())
        .map(|((name, values), _)| (name, values.into_iter().flatten().collect()))
        .collect();
    Dataset::from_columns(columns)
}

/// Z-score every column. Constant columns become all-zero and are flagged.
///
/// Already-normalized datasets are returned unchanged, so the stored
/// statistics always describe the original units.
pub fn normalize(ds: &Dataset) -> Dataset {
    if ds.normalized {
        return ds.clone();
    }
    let columns = ds
        .columns
        .iter()
        .map(|c| {
            let constant = c.stats.is_constant();
            let values = if constant {
                vec![0.0; c.values.len()]
            } else {
                c.values
                    .iter()
                    .map(|v| (v - c.stats.mean) / c.stats.stdev)
                    .collect()
            };
            Column {
                name: c.name.clone(),
                values,
                stats: c.stats,
                constant,
            }
        })
        .collect();
    Dataset {
        columns,
        row_count: ds.row_count,
        normalized: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(cols: &[(&str, &[f64])]) -> Dataset {
        Dataset::from_columns(
            cols.iter()
                .map(|(n, v)| (n.to_string(), v.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_numeric_table() {
        let text = "a,b,c\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n";
        let d = parse_csv(text, &CsvOptions::default()).unwrap();
        assert_eq!(d.row_count(), 4);
        assert_eq!(d.dims(), 3);
        assert_eq!(d.names(), vec!["a", "b", "c"]);
        assert_eq!(d.column(1).values, vec![2.0, 5.0, 8.0, 11.0]);
    }

    #[test]
    fn skips_text_column_when_asked() {
        let text = "name,x,y\nford,1,2\nvw,3,4\nbmw,5,7\n";
        let opts = CsvOptions {
            skip_non_numeric: true,
            ..Default::default()
        };
        let d = parse_csv(text, &opts).unwrap();
        assert_eq!(d.names(), vec!["x", "y"]);

        let err = parse_csv(text, &CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            DatasetError::NonNumericCell { row: 0, col: 0, .. }
        ));
    }

    #[test]
    fn boundary_errors() {
        let err = parse_csv("a,b\n1,2\n3,4\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::TooFewRows(2)));

        let err = parse_csv("", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingHeader));

        let err = parse_csv("a,b\n1,2\n3\n4,5\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::Arity { row: 1, .. }));

        let err = parse_csv("a\n1\ninf\n2\n", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::NonFinite { row: 1, col: 0 }));
    }

    #[test]
    fn semicolon_delimiter() {
        let opts = CsvOptions {
            delimiter: b';',
            ..Default::default()
        };
        let d = parse_csv("a;b\n1;2\n3;4\n5;6\n", &opts).unwrap();
        assert_eq!(d.dims(), 2);
    }

    #[test]
    fn zscore_of_arithmetic_sequence() {
        let n = normalize(&ds(&[("x", &[1.0, 2.0, 3.0])]));
        let v = &n.column(0).values;
        let expect = [-1.224_744_871, 0.0, 1.224_744_871];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(!n.column(0).constant);
    }

    #[test]
    fn constant_column_zeroed_and_flagged() {
        let n = normalize(&ds(&[("k", &[5.0, 5.0, 5.0]), ("x", &[1.0, 2.0, 4.0])]));
        assert_eq!(n.column(0).values, vec![0.0; 3]);
        assert!(n.column(0).constant);
        assert_eq!(n.raw_values(0), vec![5.0; 3]);
        assert_eq!(n.column_index("x"), Some(1));
    }

    #[test]
    fn already_normalized_input_is_unchanged() {
        let z = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        let n = normalize(&ds(&[("z", &z)]));
        for (a, b) in n.column(0).values.iter().zip(z) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn normalize_properties(values in proptest::collection::vec(-1e3f64..1e3, 3..40)) {
            let d = ds(&[("v", &values)]);
            let n = normalize(&d);
            let col = n.column(0);
            let mean = col.values.iter().sum::<f64>() / values.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            if !col.constant {
                let sd = (col.values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
                prop_assert!((sd - 1.0).abs() < 1e-9);
            }
            // Re-normalizing the z-scores as raw data changes nothing.
            let again = normalize(&ds(&[("v", &col.values)]));
            for (a, b) in again.column(0).values.iter().zip(&col.values) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            // Round trip through the stored statistics.
            let back = n.denormalize();
            for (a, b) in back.column(0).values.iter().zip(&values) {
                prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
