//! Training and test samples: real-valued features with labels in {-1, +1}.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the label column of a CSV file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".to_string())
    }
}

/// Maps raw label strings (trimmed) onto the internal sign convention.
pub type LabelMapping = BTreeMap<String, i8>;

/// The mapping used by every file this crate writes.
pub fn signed_label_mapping() -> LabelMapping {
    [("-1".to_string(), -1), ("1".to_string(), 1)]
        .into_iter()
        .collect()
}

/// An immutable sample of `m` examples with `d` features each.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<i8>,
    dim: usize,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from row-major features.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::from_flat(rows.into_iter().flatten().collect(), dim, labels, None)
    }

    pub fn from_flat(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<i8>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let m = labels.len();
        if m < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 examples, got {m}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidDataset("need at least 1 feature".into()));
        }
        if features.len() != m * dim {
            return Err(Error::DimensionMismatch {
                expected: m * dim,
                actual: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature value at example {}, feature {}",
                pos / dim,
                pos % dim
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} is not -1 or +1"
            )));
        }
        if let Some(names) = &feature_names {
            if names.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: names.len(),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            dim,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn feature(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.dim + j]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn has_both_labels(&self) -> bool {
        self.labels.contains(&1) && self.labels.contains(&-1)
    }

    /// Errors unless both labels occur, which boosting requires.
    pub fn require_both_labels(&self) -> Result<()> {
        if self.has_both_labels() {
            Ok(())
        } else {
            Err(Error::InvalidDataset(
                "training set must contain both labels".into(),
            ))
        }
    }

    /// The sub-dataset made of `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::from_flat(features, self.dim, labels, self.feature_names.clone())
    }

    /// Writes the dataset as CSV with a header and a trailing `label` column
    /// holding -1/1. Values use the shortest round-trip decimal form.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        let mut header: Vec<String> = match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.dim).map(|j| format!("x{j}")).collect(),
        };
        header.push("label".into());
        writer.write_record(&header)?;
        for (row, &y) in self.rows().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            record.push(y.to_string());
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Reads a comma-separated file. A header row is required when the label
/// column is given by name; with an index, the first row is treated as a
/// header when none of its feature cells parse as numbers.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    label_mapping: &LabelMapping,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();

    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::InvalidDataset("empty file".into())),
    };
    let width = first.len();

    let (label_idx, header) = match label_column {
        LabelColumn::Name(name) => {
            let idx = first
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?;
            (idx, Some(first.clone()))
        }
        LabelColumn::Index(idx) => {
            if *idx >= width {
                return Err(Error::MissingLabelColumn(idx.to_string()));
            }
            let is_header = first
                .iter()
                .enumerate()
                .filter(|(j, _)| j != idx)
                .all(|(_, c)| c.parse::<f64>().is_err());
            (*idx, is_header.then(|| first.clone()))
        }
    };

    let feature_names = header.map(|h| {
        h.iter()
            .enumerate()
            .filter(|(j, _)| *j != label_idx)
            .map(|(_, c)| c.to_string())
            .collect::<Vec<_>>()
    });
    let dim = width - 1;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut parse_record = |record: &csv::StringRecord, line: usize| -> Result<()> {
        if record.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                actual: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                let y = label_mapping
                    .get(cell)
                    .copied()
                    .ok_or_else(|| Error::UnknownLabel {
                        value: cell.to_string(),
                        line,
                    })?;
                if y != 1 && y != -1 {
                    return Err(Error::InvalidDataset(format!(
                        "label mapping sends {cell:?} to {y}, expected -1 or +1"
                    )));
                }
                labels.push(y);
            } else {
                let x: f64 = cell.parse().map_err(|_| Error::NonNumericFeature {
                    value: cell.to_string(),
                    line,
                    column: j,
                })?;
                features.push(x);
            }
        }
        Ok(())
    };

    let mut line = 1;
    if feature_names.is_none() {
        parse_record(&first, line)?;
    }
    for record in records {
        line += 1;
        parse_record(&record?, line)?;
    }

    if labels.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 rows, got {}",
            labels.len()
        )));
    }
    Dataset::from_flat(features, dim, labels, feature_names)
}

/// Randomly partitions `ds` into (train, test). Each part keeps the original
/// relative order of its examples.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::DegenerateSplit(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let m = ds.len();
    let n_test = (test_fraction * m as f64).round() as usize;
    if n_test == 0 || n_test >= m {
        return Err(Error::DegenerateSplit(format!(
            "fraction {test_fraction} of {m} examples leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();

    let labels = ds.labels();
    let pos = train_idx.iter().filter(|&&i| labels[i] == 1).count();
    if pos == 0 || pos == train_idx.len() {
        return Err(Error::DegenerateSplit(
            "training part contains a single label".into(),
        ));
    }
    // Parts of size 1 are valid samples here even though `Dataset` needs two
    // rows, so build them through the unchecked path below.
    Ok((
        ds.subset_unchecked(&train_idx),
        ds.subset_unchecked(&test_idx),
    ))
}

impl Dataset {
    fn subset_unchecked(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
            feature_names: self.feature_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn zero_one() -> LabelMapping {
        [("0".to_string(), -1), ("1".to_string(), 1)]
            .into_iter()
            .collect()
    }

    #[test]
    fn maps_labels_in_file_order() {
        let f = write_tmp("a,b,y\n1.0,2.0,0\n3.0,4.0,1\n5.0,6.0,0\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("y".into()), &zero_one()).unwrap();
        assert_eq!(ds.labels(), &[-1, 1, -1]);
        assert_eq!(ds.row(1), &[3.0, 4.0]);
        assert_eq!(ds.feature_names().unwrap(), &["a", "b"]);
    }

    #[test]
    fn headerless_with_index() {
        let f = write_tmp("1,0.5,2\n0,1.5,3\n");
        let ds = load_csv(f.path(), &LabelColumn::Index(0), &zero_one()).unwrap();
        assert_eq!(ds.labels(), &[1, -1]);
        assert_eq!(ds.row(0), &[0.5, 2.0]);
        assert!(ds.feature_names().is_none());
    }

    #[test]
    fn rejects_question_mark_cell() {
        let f = write_tmp("a,y\n1.0,0\n?,1\n2.0,1\n");
        let err = load_csv(f.path(), &LabelColumn::Name("y".into()), &zero_one()).unwrap_err();
        assert!(
            matches!(err, Error::NonNumericFeature { line: 3, .. }),
            "{err}"
        );
        assert!(err.to_string().contains("non-numeric feature"));
    }

    #[test]
    fn rejects_unknown_label_and_short_files() {
        let f = write_tmp("a,y\n1.0,0\n2.0,7\n");
        let err = load_csv(f.path(), &LabelColumn::Name("y".into()), &zero_one()).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { .. }));

        let f = write_tmp("a,y\n1.0,0\n");
        assert!(load_csv(f.path(), &LabelColumn::Name("y".into()), &zero_one()).is_err());

        let f = write_tmp("a,y\n1.0,0\n2.0,1\n");
        let err = load_csv(f.path(), &LabelColumn::Name("z".into()), &zero_one()).unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(Dataset::new(vec![vec![f64::NAN], vec![1.0]], vec![1, -1]).is_err());
        assert!(Dataset::new(vec![vec![f64::INFINITY], vec![1.0]], vec![1, -1]).is_err());
    }

    #[test]
    fn split_halves_are_disjoint_and_deterministic() {
        let rows = (0..10).map(|i| vec![i as f64]).collect();
        let labels = (0..10).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let ds = Dataset::new(rows, labels).unwrap();
        let (train, test) = split(&ds, 0.5, 7).unwrap();
        assert_eq!(train.len(), 5);
        assert_eq!(test.len(), 5);
        let mut all: Vec<f64> = train.rows().chain(test.rows()).map(|r| r[0]).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(f64::from).collect::<Vec<_>>());

        let (train2, test2) = split(&ds, 0.5, 7).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }

    #[test]
    fn split_rejects_degenerate_parts() {
        let rows = (0..10).map(|i| vec![i as f64]).collect();
        let labels = (0..10).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let ds = Dataset::new(rows, labels).unwrap();
        assert!(matches!(
            split(&ds, 0.99, 7),
            Err(Error::DegenerateSplit(_))
        ));
        assert!(split(&ds, 0.0, 7).is_err());
        // 9 of 10 in test: the single training example has one label.
        assert!(matches!(split(&ds, 0.9, 1), Err(Error::DegenerateSplit(_))));
    }
}
