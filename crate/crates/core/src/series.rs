//! Multivariate time series: ingestion, validation, and per-dimension
//! min-max normalization.
//!
//! The CSV format is one row per time step, one column per dimension, with a
//! required header row. An optional final column named `label` carries 0/1
//! anomaly labels.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A length-n sequence of w-dimensional observations, immutable after
/// construction. Values are guaranteed finite; labels, when present, are
/// per-observation 0/1 flags of length n.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    values: Array2<f64>,
    dim_names: Option<Vec<String>>,
    labels: Option<Vec<u8>>,
}

impl MultivariateSeries {
    pub fn new(
        values: Array2<f64>,
        dim_names: Option<Vec<String>>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let (n, w) = values.dim();
        if n == 0 {
            return Err(Error::EmptyInput("series has no observations"));
        }
        if w == 0 {
            return Err(Error::EmptyInput("series has no dimensions"));
        }
        for ((row, col), &v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
        }
        if let Some(names) = &dim_names {
            if names.len() != w {
                return Err(Error::DimensionMismatch {
                    expected: w,
                    actual: names.len(),
                });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::LabelLengthMismatch {
                    labels: labels.len(),
                    series: n,
                });
            }
            if let Some(pos) = labels.iter().position(|&l| l > 1) {
                return Err(Error::InvalidLabel {
                    row: pos,
                    value: labels[pos].to_string(),
                });
            }
        }
        Ok(Self {
            values,
            dim_names,
            labels,
        })
    }

    /// Number of observations n.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Number of dimensions w.
    pub fn dims(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn observation(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Read a series from CSV. The header row is required; a final column
    /// named `label` is parsed as the 0/1 label vector.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() {
            return Err(Error::EmptyInput("CSV has no columns"));
        }
        let has_labels = headers.iter().last() == Some("label");
        let w = if has_labels {
            headers.len() - 1
        } else {
            headers.len()
        };
        if w == 0 {
            return Err(Error::EmptyInput("CSV has no value columns"));
        }
        let dim_names: Vec<String> = headers.iter().take(w).map(|s| s.to_string()).collect();

        let mut flat = Vec::new();
        let mut labels = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let record = record?;
            let line = idx + 2; // 1-based, after the header
            let expected = if has_labels { w + 1 } else { w };
            if record.len() != expected {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} fields, got {}", record.len()),
                });
            }
            for field in record.iter().take(w) {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("cannot parse `{field}` as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value `{field}`"),
                    });
                }
                flat.push(v);
            }
            if has_labels {
                let field = &record[w];
                let l: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("cannot parse label `{field}`"),
                })?;
                if l == 0.0 {
                    labels.push(0);
                } else if l == 1.0 {
                    labels.push(1);
                } else {
                    return Err(Error::InvalidLabel {
                        row: idx,
                        value: field.to_string(),
                    });
                }
            }
        }
        let n = flat.len() / w;
        if n == 0 {
            return Err(Error::EmptyInput("CSV has no data rows"));
        }
        let values = Array2::from_shape_vec((n, w), flat).expect("row-major shape");
        Self::new(values, Some(dim_names), has_labels.then_some(labels))
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Write the series back out in the same CSV format.
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let w = self.dims();
        let mut header: Vec<String> = match &self.dim_names {
            Some(names) => names.clone(),
            None => (0..w).map(|d| format!("dim_{d}")).collect(),
        };
        if self.labels.is_some() {
            header.push("label".to_string());
        }
        wtr.write_record(&header)?;
        for (i, row) in self.values.rows().into_iter().enumerate() {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if let Some(labels) = &self.labels {
                record.push(labels[i].to_string());
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.to_csv_writer(std::fs::File::create(path)?)
    }
}

/// Per-dimension min-max parameters learned from a training series and
/// reapplied verbatim to new data. Out-of-range values are not clipped:
/// anomalies may exceed the training range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalizer {
    pub fn fit(series: &MultivariateSeries) -> Self {
        let w = series.dims();
        let mut mins = vec![f64::INFINITY; w];
        let mut maxs = vec![f64::NEG_INFINITY; w];
        for row in series.values().rows() {
            for (d, &v) in row.iter().enumerate() {
                mins[d] = mins[d].min(v);
                maxs[d] = maxs[d].max(v);
            }
        }
        Self { mins, maxs }
    }

    /// Map each dimension to [0, 1] using the stored training range. A
    /// constant dimension (zero range) maps to 0.
    pub fn apply(&self, series: &MultivariateSeries) -> Result<MultivariateSeries> {
        if self.mins.len() != series.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                actual: series.dims(),
            });
        }
        let mut values = series.values().to_owned();
        for mut row in values.rows_mut() {
            for (d, v) in row.iter_mut().enumerate() {
                let range = self.maxs[d] - self.mins[d];
                *v = if range > 0.0 {
                    (*v - self.mins[d]) / range
                } else {
                    0.0
                };
            }
        }
        MultivariateSeries::new(
            values,
            series.dim_names().map(|n| n.to_vec()),
            series.labels().map(|l| l.to_vec()),
        )
    }
}
