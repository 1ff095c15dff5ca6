//! Datasets and CSV ingestion.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// `N` points in `d` dimensions with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    labels: Option<Vec<i64>>,
    ids: Vec<usize>,
}

impl Dataset {
    /// Validated constructor; ids default to row indices.
    pub fn new(points: Array2<f64>, labels: Option<Vec<i64>>) -> Result<Self> {
        let n = points.nrows();
        Self::with_ids(points, labels, (0..n).collect())
    }

    pub fn with_ids(points: Array2<f64>, labels: Option<Vec<i64>>, ids: Vec<usize>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(((row, column), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    what: "labels",
                    expected: n,
                    actual: l.len(),
                });
            }
        }
        if ids.len() != n {
            return Err(Error::LengthMismatch {
                what: "ids",
                expected: n,
                actual: ids.len(),
            });
        }
        Ok(Self { points, labels, ids })
    }

    /// Convenience constructor from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        let mut flat = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: d,
                    actual: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        let points = Array2::from_shape_vec((n, d), flat).expect("shape checked");
        Self::new(points, None)
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Rows `indices` as a new dataset; labels and ids follow the rows.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let points = self.points.select(ndarray::Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        let ids = indices.iter().map(|&i| self.ids[i]).collect();
        Self::with_ids(points, labels, ids)
    }

    /// Reads a numeric CSV. With `label_column`, that column becomes the
    /// integer labels; it is matched against the header, or read as a
    /// 0-based column index when there is no header.
    pub fn from_csv(path: impl AsRef<Path>, has_header: bool, label_column: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file, has_header, label_column)
    }

    pub fn from_reader<R: std::io::Read>(reader: R, has_header: bool, label_column: Option<&str>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let mut label_idx = None;
        let mut width = None;
        if has_header {
            let header = rdr.headers()?.clone();
            width = Some(header.len());
            if let Some(name) = label_column {
                label_idx = Some(
                    header
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| Error::MissingColumn(name.to_string()))?,
                );
            }
        } else if let Some(name) = label_column {
            label_idx = Some(name.parse::<usize>().map_err(|_| Error::MissingColumn(name.to_string()))?);
        }

        let mut flat = Vec::new();
        let mut labels = Vec::new();
        let mut n = 0usize;
        // Row numbers in errors are 0-based data rows, not counting the header.
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let w = *width.get_or_insert(rec.len());
            if rec.len() != w {
                return Err(Error::RaggedRow {
                    row,
                    expected: w,
                    actual: rec.len(),
                });
            }
            if let Some(li) = label_idx {
                if li >= w {
                    return Err(Error::MissingColumn(li.to_string()));
                }
            }
            for (column, cell) in rec.iter().enumerate() {
                if Some(column) == label_idx {
                    labels.push(parse_label(cell).ok_or_else(|| Error::Parse {
                        row,
                        column,
                        value: cell.to_string(),
                        reason: "expected an integer label".into(),
                    })?);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|e: std::num::ParseFloatError| Error::Parse {
                    row,
                    column,
                    value: cell.to_string(),
                    reason: e.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column,
                        value: cell.to_string(),
                        reason: "non-finite value".into(),
                    });
                }
                flat.push(v);
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let d = flat.len() / n;
        let points = Array2::from_shape_vec((n, d), flat).expect("rows checked for equal width");
        Self::new(points, label_idx.map(|_| labels))
    }

    /// Writes points (and labels as a trailing `label` column) with a header
    /// `x0,x1,...`. Floats use the shortest representation that parses back
    /// to the identical value.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut w = csv::Writer::from_writer(file);
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.points.rows().into_iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            if let Some(l) = &self.labels {
                rec.push(l[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }
}

fn parse_label(cell: &str) -> Option<i64> {
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    // Accept "3.0" style labels written by float-only tools.
    let f: f64 = cell.parse().ok()?;
    (f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
}
