//! Wisconsin Diagnostic Breast Cancer (WDBC) ingestion.
//!
//! Rows are `id, diagnosis (M|B), 30 real features`, no header. The features
//! are ten cell-nucleus measurements, each given as mean, standard error and
//! worst value.

use std::io::Read;
use std::path::Path;

use ndarray::Array2;

use super::dataset::{Dataset, TaskKind};
use crate::{Error, Result};

const BASE_NAMES: [&str; 10] = [
    "radius",
    "texture",
    "perimeter",
    "area",
    "smoothness",
    "compactness",
    "concavity",
    "concave_points",
    "symmetry",
    "fractal_dimension",
];

const COLUMNS: usize = 32;

/// `<measurement>_<stat>` for stat in mean, se, worst (file column order).
pub fn wdbc_feature_names() -> Vec<String> {
    ["mean", "se", "worst"]
        .iter()
        .flat_map(|stat| BASE_NAMES.iter().map(move |b| format!("{b}_{stat}")))
        .collect()
}

static BUILTIN: &str = include_str!("../../data/wdbc.data");

/// The bundled copy of the 569-row dataset.
pub fn builtin_wdbc() -> Dataset {
    parse_wdbc(BUILTIN.as_bytes(), "wdbc").expect("bundled WDBC file is well formed")
}

pub fn load_wdbc(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_wdbc(file, &path.display().to_string())
}

/// Parses WDBC text; malignant (`M`) maps to 1, benign (`B`) to 0, the id
/// column is dropped. Row numbers in errors are 1-based.
pub fn parse_wdbc<R: Read>(input: R, name: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != COLUMNS {
            return Err(Error::Parse {
                row,
                message: format!("expected {COLUMNS} columns, found {}", record.len()),
            });
        }
        let label = match record[1].trim() {
            "M" => 1.0,
            "B" => 0.0,
            other => {
                return Err(Error::Parse {
                    row,
                    message: format!("unknown diagnosis `{other}` (expected M or B)"),
                })
            }
        };
        ys.push(label);
        for (c, field) in record.iter().enumerate().skip(2) {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {} is not a number: `{field}`", c + 1),
            })?;
            xs.push(v);
        }
    }
    if ys.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: format!("`{name}` contains no rows"),
        });
    }
    let rows = ys.len();
    let features = Array2::from_shape_vec((rows, COLUMNS - 2), xs).expect("row width checked");
    let targets = Array2::from_shape_vec((rows, 1), ys).expect("one label per row");
    Dataset::new(name, features, targets, TaskKind::Classification)?
        .with_feature_names(wdbc_feature_names())
}
