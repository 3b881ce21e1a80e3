//! Multiclass classification data replayed as bandit feedback: predicting
//! the true class costs 0, anything else costs 1.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{ActionSet, ContextVector, Environment};
use crate::error::{BanditError, Result};

/// Parse options for comma-separated input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Label column index; `None` selects the last column.
    pub label_col: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DatasetEnv {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: Vec<String>,
    /// `order[i]` is the original row shown at stream position `i`.
    order: Vec<usize>,
    dim: usize,
}

/// Reads a CSV file and orders its rows by `permutation_seed` (0 keeps the
/// file order).
pub fn dataset_load(path: &Path, options: CsvOptions, permutation_seed: u64) -> Result<DatasetEnv> {
    let text = std::fs::read_to_string(path).map_err(|e| BanditError::io(path, e))?;
    parse_csv(&text, options, permutation_seed).map_err(|e| match e {
        BanditError::Parse { line, message, .. } => BanditError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

/// Parses CSV text. Errors carry 1-based line numbers.
pub fn parse_csv(text: &str, options: CsvOptions, permutation_seed: u64) -> Result<DatasetEnv> {
    let err = |line: usize, message: String| BanditError::Parse {
        path: "<memory>".into(),
        line,
        message,
    };
    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    let mut width = None;
    let mut header_pending = options.has_header;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if header_pending {
            header_pending = false;
            width = Some(fields.len());
            continue;
        }
        let n = *width.get_or_insert(fields.len());
        if fields.len() != n {
            return Err(err(lineno, format!("expected {n} fields, found {}", fields.len())));
        }
        if n < 2 {
            return Err(err(lineno, "need at least one feature and one label".into()));
        }
        let label_col = options.label_col.unwrap_or(n - 1);
        if label_col >= n {
            return Err(err(lineno, format!("label column {label_col} out of range")));
        }
        let mut row = Vec::with_capacity(n - 1);
        for (j, field) in fields.iter().enumerate() {
            if j == label_col {
                continue;
            }
            let value: f64 = field
                .parse()
                .map_err(|_| err(lineno, format!("column {j}: cannot parse {field:?} as a number")))?;
            if !value.is_finite() {
                return Err(err(lineno, format!("column {j}: non-finite value")));
            }
            row.push(value);
        }
        features.push(row);
        raw_labels.push(fields[label_col].to_string());
    }
    if features.is_empty() {
        return Err(err(0, "no data rows".into()));
    }
    DatasetEnv::from_rows(features, &raw_labels, permutation_seed)
}

impl DatasetEnv {
    /// Builds an environment from rows and categorical labels. Classes are
    /// numbered by first appearance.
    pub fn from_rows<S: AsRef<str>>(
        features: Vec<Vec<f64>>,
        raw_labels: &[S],
        permutation_seed: u64,
    ) -> Result<Self> {
        if features.is_empty() || features.len() != raw_labels.len() {
            return Err(BanditError::config("need one label per row and at least one row"));
        }
        let dim = features[0].len();
        if dim == 0 {
            return Err(BanditError::config("rows need at least one feature"));
        }
        for row in &features {
            if row.len() != dim {
                return Err(BanditError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if let Some(i) = row.iter().position(|x| !x.is_finite()) {
                return Err(BanditError::NonFiniteFeature(i));
            }
        }
        let mut classes: Vec<String> = Vec::new();
        let labels = raw_labels
            .iter()
            .map(|raw| {
                let raw = raw.as_ref();
                match classes.iter().position(|c| c == raw) {
                    Some(i) => i,
                    None => {
                        classes.push(raw.to_string());
                        classes.len() - 1
                    }
                }
            })
            .collect();
        let mut env = Self {
            order: (0..features.len()).collect(),
            features,
            labels,
            classes,
            dim,
        };
        env.reorder(permutation_seed);
        Ok(env)
    }

    fn reorder(&mut self, seed: u64) {
        self.order = (0..self.features.len()).collect();
        if seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            self.order.shuffle(&mut rng);
        }
    }

    /// Same rows under another permutation.
    pub fn permuted(&self, seed: u64) -> Self {
        let mut env = self.clone();
        env.reorder(seed);
        env
    }

    pub fn rows(&self) -> usize {
        self.features.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Label of the row at stream position `position` (0-based).
    pub fn label_at(&self, position: usize) -> Result<usize> {
        let row = self.row_at(position)?;
        Ok(self.labels[row])
    }

    fn row_at(&self, position: usize) -> Result<usize> {
        self.order
            .get(position)
            .copied()
            .ok_or(BanditError::RowOutOfRange {
                index: position,
                rows: self.rows(),
            })
    }

    /// 0 when `action` is the true class of stream position `position`, else 1.
    pub fn bandit_feedback(&self, position: usize, action: usize) -> Result<f64> {
        self.actions().check(action)?;
        Ok(if self.label_at(position)? == action { 0.0 } else { 1.0 })
    }
}

impl Environment for DatasetEnv {
    fn context_dim(&self) -> usize {
        self.dim
    }

    fn actions(&self) -> ActionSet {
        ActionSet::new(self.classes.len()).expect("at least one row means at least one class")
    }

    fn context(&self, round: usize) -> Option<ContextVector> {
        let row = *self.order.get(round.checked_sub(1)?)?;
        let c = ContextVector::new(self.features[row].clone()).expect("validated on load");
        Some(c.with_id(row as u64))
    }

    fn loss(&self, round: usize, _context: &ContextVector, action: usize) -> Result<f64> {
        let position = round.checked_sub(1).ok_or(BanditError::RowOutOfRange {
            index: 0,
            rows: self.rows(),
        })?;
        self.bandit_feedback(position, action)
    }

    fn label(&self, round: usize) -> Option<usize> {
        self.label_at(round.checked_sub(1)?).ok()
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_ROWS: &str = "1.0,2.0,b\n3.0,4.0,a\n5.0,6.0,b\n";

    #[test]
    fn labels_numbered_by_first_appearance() {
        let env = parse_csv(THREE_ROWS, CsvOptions::default(), 0).unwrap();
        assert_eq!(env.actions().count(), 2);
        assert_eq!(env.classes(), &["b".to_string(), "a".to_string()]);
        assert_eq!(env.label(1), Some(0));
        assert_eq!(env.label(2), Some(1));
        assert_eq!(env.label(3), Some(0));
        assert_eq!(env.label(4), None);
    }

    #[test]
    fn seed_zero_keeps_file_order() {
        let env = parse_csv(THREE_ROWS, CsvOptions::default(), 0).unwrap();
        assert_eq!(env.order(), &[0, 1, 2]);
        assert_eq!(env.context(2).unwrap().features(), &[3.0, 4.0]);
        assert!(env.context(0).is_none());
        assert!(env.context(4).is_none());
    }

    #[test]
    fn permutation_is_deterministic_bijection() {
        let text: String = (0..50).map(|i| format!("{i},{}\n", i % 3)).collect();
        let a = parse_csv(&text, CsvOptions::default(), 9).unwrap();
        let b = parse_csv(&text, CsvOptions::default(), 9).unwrap();
        assert_eq!(a.order(), b.order());
        assert_ne!(a.order(), (0..50).collect::<Vec<_>>().as_slice());
        let mut sorted = a.order().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_eq!(a.permuted(0).order(), (0..50).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn header_and_label_column() {
        let text = "label,x,y\ncat,0.5,1.5\ndog,2.5,3.5\n";
        let opts = CsvOptions {
            has_header: true,
            label_col: Some(0),
        };
        let env = parse_csv(text, opts, 0).unwrap();
        assert_eq!(env.context_dim(), 2);
        assert_eq!(env.context(2).unwrap().features(), &[2.5, 3.5]);
        assert_eq!(env.label(2), Some(1));
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        let err = parse_csv("1,2,a\n1,x,b\n", CsvOptions::default(), 0).unwrap_err();
        match err {
            BanditError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_csv("1,2,a\n1,b\n", CsvOptions::default(), 0).unwrap_err();
        assert!(matches!(err, BanditError::Parse { line: 2, .. }));
        assert!(parse_csv("", CsvOptions::default(), 0).is_err());
    }

    #[test]
    fn bandit_feedback_values() {
        let env = DatasetEnv::from_rows(
            vec![vec![0.0]; 3],
            &["x", "y", "z"],
            0,
        )
        .unwrap();
        assert_eq!(env.bandit_feedback(2, 2).unwrap(), 0.0);
        assert_eq!(env.bandit_feedback(2, 0).unwrap(), 1.0);
        assert!(matches!(
            env.bandit_feedback(3, 0),
            Err(BanditError::RowOutOfRange { index: 3, rows: 3 })
        ));
        assert!(env.bandit_feedback(0, 3).is_err());
    }

    #[test]
    fn no_ground_truth_for_datasets() {
        let env = parse_csv(THREE_ROWS, CsvOptions::default(), 0).unwrap();
        let c = env.context(1).unwrap();
        assert!(matches!(env.expected_losses(&c), Err(BanditError::NoGroundTruth)));
    }
}
