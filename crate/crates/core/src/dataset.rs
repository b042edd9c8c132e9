//! Labelled datasets, CSV ingestion and train/test splitting.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::solvers::DesignMatrix;
use crate::stats::jitter_break_ties;

pub const INTERCEPT_NAME: &str = "intercept";

/// `n` labelled points stored column-wise. When `intercept_appended` is set,
/// the last feature column is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    names: Vec<String>,
    intercept_appended: bool,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != features.len() {
            return Err(Error::DimensionMismatch { expected: features.len(), got: names.len() });
        }
        for col in &features {
            if col.len() != labels.len() {
                return Err(Error::LengthMismatch { left: col.len(), right: labels.len() });
            }
        }
        if features.iter().flatten().chain(&labels).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset" });
        }
        Ok(Self { features, labels, names, intercept_appended: false })
    }

    /// Column-wise constructor with generated names `x0, x1, ...`.
    pub fn from_columns(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let names = (0..features.len()).map(|j| format!("x{j}")).collect();
        Self::new(features, labels, names)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of feature columns, including the intercept when appended.
    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.features[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn intercept_appended(&self) -> bool {
        self.intercept_appended
    }

    pub fn intercept_index(&self) -> Option<usize> {
        self.intercept_appended.then(|| self.d() - 1)
    }

    /// Feature columns eligible for selection (everything but the intercept).
    pub fn candidate_features(&self) -> Vec<usize> {
        let end = if self.intercept_appended { self.d() - 1 } else { self.d() };
        (0..end).collect()
    }

    pub fn with_intercept(mut self) -> Self {
        if !self.intercept_appended {
            self.features.push(vec![1.0; self.n()]);
            self.names.push(INTERCEPT_NAME.to_string());
            self.intercept_appended = true;
        }
        self
    }

    /// Adds tie-breaking jitter to every non-intercept column and the labels.
    ///
    /// The jitter width is scaled by the larger of the column's range and its
    /// largest magnitude, so ties break even where the float spacing is coarse.
    pub fn jittered<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        let hint = |c: &[f64]| {
            let (lo, hi, big) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, big), &v| {
                (lo.min(v), hi.max(v), big.max(v.abs()))
            });
            (hi - lo).max(big)
        };
        for j in self.candidate_features() {
            let h = hint(&self.features[j]);
            self.features[j] = jitter_break_ties(&self.features[j], h, rng);
        }
        let h = hint(&self.labels);
        self.labels = jitter_break_ties(&self.labels, h, rng);
        self
    }

    pub fn subset_rows(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            names: self.names.clone(),
            intercept_appended: self.intercept_appended,
        }
    }

    /// Keeps the given feature columns (in order) and re-appends the
    /// intercept if this dataset carries one.
    pub fn select_features(&self, selected: &[usize]) -> Self {
        let mut features: Vec<Vec<f64>> = selected.iter().map(|&j| self.features[j].clone()).collect();
        let mut names: Vec<String> = selected.iter().map(|&j| self.names[j].clone()).collect();
        if let Some(i) = self.intercept_index() {
            features.push(self.features[i].clone());
            names.push(self.names[i].clone());
        }
        Self { features, labels: self.labels.clone(), names, intercept_appended: self.intercept_appended }
    }

    /// Design matrix over the non-intercept features (the intercept is
    /// carried by the model).
    pub fn design(&self) -> DesignMatrix {
        self.design_rows(&(0..self.n()).collect::<Vec<_>>())
    }

    pub fn design_rows(&self, rows: &[usize]) -> DesignMatrix {
        let cols: Vec<&[f64]> = self.candidate_features().into_iter().map(|j| self.column(j)).collect();
        DesignMatrix::from_columns(&cols, rows)
    }

    /// Design matrix of every column, intercept included.
    pub fn design_with_intercept(&self) -> DesignMatrix {
        let cols: Vec<&[f64]> = self.features.iter().map(Vec::as_slice).collect();
        DesignMatrix::from_columns(&cols, &(0..self.n()).collect::<Vec<_>>())
    }

    /// Random split into `(train, test)` with `floor(test_frac * n)` test rows.
    pub fn split<R: Rng + ?Sized>(&self, test_frac: f64, rng: &mut R) -> Result<(Dataset, Dataset)> {
        let (train, test) = split_indices(self.n(), test_frac, rng)?;
        Ok((self.subset_rows(&train), self.subset_rows(&test)))
    }
}

/// Shuffled `(train, test)` row indices; the test part has
/// `floor(test_frac * n)` rows and the train part the rest.
pub fn split_indices<R: Rng + ?Sized>(n: usize, test_frac: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::InvalidParameter(format!("test fraction must lie in (0, 1), got {test_frac}")));
    }
    let n_test = (n as f64 * test_frac + 1e-9).floor() as usize;
    if n_test < 2 || n - n_test < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n_test.min(n - n_test) });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let test = idx.split_off(n - n_test);
    Ok((idx, test))
}

/// Reads a header-first CSV whose last column is the label, then applies
/// tie-breaking jitter and appends the intercept.
pub fn load_csv<R: Rng + ?Sized>(path: impl AsRef<Path>, rng: &mut R) -> Result<Dataset> {
    Ok(read_csv(path)?.jittered(rng).with_intercept())
}

/// Parses the CSV without jitter or intercept.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.len() < 2 {
        return Err(Error::Malformed { path: path.to_path_buf(), message: "need at least one feature and a label column".into() });
    }
    let width = headers.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != width {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                message: format!("row {row} has {} fields, expected {width}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                return Err(Error::MissingValue { path: path.to_path_buf(), row, column: headers[j].clone() });
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                path: path.to_path_buf(),
                row,
                column: headers[j].clone(),
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric { path: path.to_path_buf(), row, column: headers[j].clone(), cell: cell.to_string() });
            }
            columns[j].push(v);
        }
    }
    let rows = columns[0].len();
    if rows < 2 {
        return Err(Error::TooFewRows { path: path.to_path_buf(), rows });
    }
    let labels = columns.pop().expect("width >= 2");
    let mut names = headers;
    names.pop();
    Dataset::new(columns, labels, names)
}

/// Writes features and label as a header-first CSV.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>, label_name: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let cols: Vec<usize> = dataset.candidate_features();
    let mut header: Vec<&str> = cols.iter().map(|&j| dataset.names[j].as_str()).collect();
    header.push(label_name);
    writer.write_record(&header)?;
    for i in 0..dataset.n() {
        let mut rec: Vec<String> = cols.iter().map(|&j| format!("{:?}", dataset.features[j][i])).collect();
        rec.push(format!("{:?}", dataset.labels[i]));
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::Stream;
    use crate::stats::kendall_tau_scaled;
    use rand::SeedableRng;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_well_formed_file() {
        let f = write_tmp("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(f.path(), &mut Stream::seed_from_u64(0)).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 3));
        assert!(ds.intercept_appended());
        assert_eq!(ds.column(2), &[1.0, 1.0, 1.0]);
        assert_eq!(ds.candidate_features(), vec![0, 1]);
        assert_eq!(ds.names(), &["a", "b", "intercept"]);
    }

    #[test]
    fn diagnostics_are_distinct() {
        let f = write_tmp("a,b,y\n1,,3\n4,5,6\n");
        match read_csv(f.path()) {
            Err(Error::MissingValue { row, column, .. }) => assert_eq!((row, column.as_str()), (1, "b")),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("a,b,y\n1,x,3\n4,5,6\n");
        assert!(matches!(read_csv(f.path()), Err(Error::NonNumeric { row: 1, .. })));
        let f = write_tmp("a,b,y\n1,2,3\n");
        assert!(matches!(read_csv(f.path()), Err(Error::TooFewRows { rows: 1, .. })));
    }

    #[test]
    fn constant_column_becomes_tie_free() {
        let f = write_tmp("a,c,y\n1,5,1\n2,5,2\n3,5,2\n4,5,7\n");
        let ds = load_csv(f.path(), &mut Stream::seed_from_u64(3)).unwrap();
        assert!(kendall_tau_scaled(ds.column(1), ds.labels()).is_ok());
        assert!(kendall_tau_scaled(ds.column(0), ds.column(1)).is_ok());
    }

    #[test]
    fn huge_values_still_break_ties() {
        let ds = Dataset::from_columns(vec![vec![1e12, 1e12, 1e12 + 4096.0]], vec![1.0, 1.0, 2.0]).unwrap();
        let ds = ds.jittered(&mut Stream::seed_from_u64(1));
        assert!(kendall_tau_scaled(ds.column(0), ds.labels()).is_ok());
        assert!(ds.column(0)[2] > ds.column(0)[0]);
    }

    #[test]
    fn split_is_a_partition() {
        let (train, test) = split_indices(1003, 0.1, &mut Stream::seed_from_u64(5)).unwrap();
        assert_eq!(test.len(), 100);
        assert_eq!(train.len(), 903);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1003).collect::<Vec<_>>());
        let (_, test) = split_indices(30, 0.1, &mut Stream::seed_from_u64(5)).unwrap();
        assert_eq!(test.len(), 3);
    }

    #[test]
    fn select_features_keeps_intercept() {
        let ds = Dataset::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], vec![0.0, 1.0])
            .unwrap()
            .with_intercept();
        let s = ds.select_features(&[2, 0]);
        assert_eq!(s.d(), 3);
        assert_eq!(s.column(0), &[5.0, 6.0]);
        assert_eq!(s.column(2), &[1.0, 1.0]);
        assert_eq!(s.design().n_cols(), 2);
    }
}
