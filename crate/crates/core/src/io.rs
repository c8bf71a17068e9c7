//! CSV tables and number formatting shared by the command-line tools.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::gp::{Dataset, GpError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: GpError,
    },
}

/// Numeric CSV table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }
}

pub fn read_table(path: &Path) -> Result<Table, IoError> {
    let file = File::open(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_table_from(file, path)
}

/// Parses a table; `path` is used only in error messages.
pub fn read_table_from<R: Read>(reader: R, path: &Path) -> Result<Table, IoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let row = rec
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| IoError::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not a number: `{field}`"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

/// Observations in the `x1,…,xm,y[,sigma]` layout. A missing `sigma` column
/// means exact observations.
pub fn dataset_from_table(table: &Table, path: &Path) -> Result<(Vec<String>, Dataset), IoError> {
    let y = table.column_index("y").ok_or_else(|| IoError::MissingColumn {
        path: path.to_path_buf(),
        column: "y".into(),
    })?;
    let sigma = table.column_index("sigma");
    let x_cols: Vec<usize> = (0..table.headers.len()).filter(|&c| c != y && Some(c) != sigma).collect();
    if x_cols.is_empty() {
        return Err(IoError::Schema {
            path: path.to_path_buf(),
            msg: "no input columns".into(),
        });
    }
    let names = x_cols.iter().map(|&c| table.headers[c].clone()).collect();
    let inputs: Vec<Vec<f64>> = table.rows.iter().map(|r| x_cols.iter().map(|&c| r[c]).collect()).collect();
    let outputs = table.column(y);
    let sd = match sigma {
        Some(s) => table.column(s),
        None => vec![0.0; outputs.len()],
    };
    let data = Dataset::from_rows(&inputs, &outputs, &sd).map_err(|source| IoError::Dataset {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((names, data))
}

pub fn read_dataset(path: &Path) -> Result<(Vec<String>, Dataset), IoError> {
    dataset_from_table(&read_table(path)?, path)
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, headers: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format_number(*v)))?;
    }
    w.flush()
}

pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let file = File::create(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(file, headers, rows).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}
