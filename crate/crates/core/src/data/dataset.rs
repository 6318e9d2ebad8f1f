use std::io::{Read, Write};
use std::path::Path;

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Regression,
    Classification,
}

/// Feature matrix plus targets, one row per example.
///
/// `row_ids` records where each row came from (its index in the source the
/// dataset was generated or loaded from) so splits can be audited.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Array2<f64>,
    pub targets: Array2<f64>,
    pub task: TaskKind,
    pub feature_names: Option<Vec<String>>,
    pub row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        targets: Array2<f64>,
        task: TaskKind,
    ) -> Result<Self> {
        let row_ids = (0..features.nrows()).collect();
        let ds = Dataset {
            name: name.into(),
            features,
            targets,
            task,
            feature_names: None,
            row_ids,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.feature_dim() {
            return Err(Error::Data(format!(
                "{} feature names for {} columns",
                names.len(),
                self.feature_dim()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.nrows() != self.targets.nrows() {
            return Err(Error::Data(format!(
                "`{}`: {} feature rows but {} target rows",
                self.name,
                self.features.nrows(),
                self.targets.nrows()
            )));
        }
        if self.row_ids.len() != self.features.nrows() {
            return Err(Error::Data(format!("`{}`: row id count mismatch", self.name)));
        }
        if self.task == TaskKind::Classification
            && self.targets.iter().any(|&t| t != 0.0 && t != 1.0)
        {
            return Err(Error::Data(format!(
                "`{}`: classification targets must be 0 or 1",
                self.name
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.targets.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        Dataset {
            name: name.into(),
            features: self.features.select(Axis(0), indices),
            targets: self.targets.select(Axis(0), indices),
            task: self.task,
            feature_names: self.feature_names.clone(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Stacks datasets in the given order.
    pub fn concat(name: impl Into<String>, parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Data("nothing to concatenate".into()))?;
        for p in parts {
            if p.feature_dim() != first.feature_dim() || p.target_dim() != first.target_dim() {
                return Err(Error::Data(format!(
                    "cannot concatenate `{}` ({}→{}) with `{}` ({}→{})",
                    first.name,
                    first.feature_dim(),
                    first.target_dim(),
                    p.name,
                    p.feature_dim(),
                    p.target_dim()
                )));
            }
            if p.task != first.task {
                return Err(Error::Data("cannot mix task kinds".into()));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| p.features.view()).collect();
        let features = concatenate(Axis(0), &views).map_err(|e| Error::Data(e.to_string()))?;
        let views: Vec<_> = parts.iter().map(|p| p.targets.view()).collect();
        let targets = concatenate(Axis(0), &views).map_err(|e| Error::Data(e.to_string()))?;
        Ok(Dataset {
            name: name.into(),
            features,
            targets,
            task: first.task,
            feature_names: first.feature_names.clone(),
            row_ids: parts.iter().flat_map(|p| p.row_ids.iter().copied()).collect(),
        })
    }

    /// Fraction of rows whose first target equals 1.
    pub fn positive_fraction(&self) -> Result<f64> {
        if self.task != TaskKind::Classification {
            return Err(Error::TaskKind(format!(
                "`{}` is a regression dataset",
                self.name
            )));
        }
        if self.is_empty() {
            return Err(Error::Data(format!("`{}` is empty", self.name)));
        }
        let pos = self.targets.column(0).iter().filter(|&&t| t == 1.0).count();
        Ok(pos as f64 / self.len() as f64)
    }

    fn column_names(&self) -> Vec<String> {
        let mut names = match &self.feature_names {
            Some(n) => n.clone(),
            None => (1..=self.feature_dim()).map(|i| format!("x{i}")).collect(),
        };
        if self.target_dim() == 1 {
            names.push("y".into());
        } else {
            names.extend((1..=self.target_dim()).map(|i| format!("y{i}")));
        }
        names
    }

    /// Comma-separated text with a header row (`x1..xn,y`); targets last.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(self.column_names()).map_err(csv_err)?;
        for (x, y) in self.features.rows().into_iter().zip(self.targets.rows()) {
            let record: Vec<String> = x.iter().chain(y.iter()).map(|v| v.to_string()).collect();
            w.write_record(&record).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    /// Reads the format written by [`Dataset::write_csv`]; the last
    /// `target_dim` columns are targets.
    pub fn read_csv<R: Read>(
        name: impl Into<String>,
        input: R,
        target_dim: usize,
        task: TaskKind,
    ) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = reader
            .headers()
            .map_err(|e| Error::Parse {
                row: 0,
                message: e.to_string(),
            })?
            .clone();
        if header.len() <= target_dim {
            return Err(Error::Parse {
                row: 0,
                message: format!("{} columns cannot hold {target_dim} targets", header.len()),
            });
        }
        let dim = header.len() - target_dim;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("column {} is not a number: `{field}`", c + 1),
                })?;
                if c < dim {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        let rows = xs.len() / dim;
        let features =
            Array2::from_shape_vec((rows, dim), xs).map_err(|e| Error::Data(e.to_string()))?;
        let targets = Array2::from_shape_vec((rows, target_dim), ys)
            .map_err(|e| Error::Data(e.to_string()))?;
        let names = header.iter().take(dim).map(str::to_owned).collect();
        Dataset::new(name, features, targets, task)?.with_feature_names(names)
    }

    pub fn load_csv(path: impl AsRef<Path>, target_dim: usize, task: TaskKind) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Dataset::read_csv(path.display().to_string(), file, target_dim, task)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy() -> Dataset {
        Dataset::new(
            "toy",
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
            array![[0.0], [1.0], [1.0]],
            TaskKind::Classification,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_labels_and_shapes() {
        assert!(Dataset::new("c", array![[1.0]], array![[0.5]], TaskKind::Classification).is_err());
        assert!(Dataset::new("r", array![[1.0], [2.0]], array![[0.5]], TaskKind::Regression).is_err());
    }

    #[test]
    fn subset_and_concat_track_ids() {
        let ds = toy();
        let a = ds.subset("a", &[2]);
        let b = ds.subset("b", &[0, 1]);
        assert_eq!(a.row_ids, vec![2]);
        let joined = Dataset::concat("ab", &[&a, &b]).unwrap();
        assert_eq!(joined.row_ids, vec![2, 0, 1]);
        assert_eq!(joined.features.row(0), ds.features.row(2));
        assert!((joined.positive_fraction().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn concat_rejects_mismatch() {
        let ds = toy();
        let other = Dataset::new("o", array![[1.0]], array![[1.0]], TaskKind::Classification).unwrap();
        assert!(Dataset::concat("x", &[&ds, &other]).is_err());
        assert!(Dataset::concat("x", &[]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::new(
            "r",
            array![[0.1, -2.5e-7], [1.0 / 3.0, 4.0]],
            array![[1e10], [-0.0]],
            TaskKind::Regression,
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x1,x2,y\n"));
        let back = Dataset::read_csv("r", &buf[..], 1, TaskKind::Regression).unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.targets, ds.targets);
    }

    #[test]
    fn csv_parse_error_names_row() {
        let text = "x1,y\n1,2\nfoo,3\n";
        match Dataset::read_csv("t", text.as_bytes(), 1, TaskKind::Regression) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
