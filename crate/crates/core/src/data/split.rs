use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::{seed, Error, Result};

/// How many rows go to the shared test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestSize {
    /// `ceil(fraction · N)` rows.
    Fraction(f64),
    /// Exactly this many rows.
    Count(usize),
}

impl TestSize {
    fn rows(self, total: usize) -> Result<usize> {
        match self {
            TestSize::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::Config(format!(
                        "test fraction must lie in (0, 1), got {f}"
                    )));
                }
                Ok((f * total as f64).ceil() as usize)
            }
            TestSize::Count(c) => {
                if c == 0 || c >= total {
                    return Err(Error::Config(format!(
                        "test count must lie in [1, {}), got {c}",
                        total
                    )));
                }
                Ok(c)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub parts: Vec<Dataset>,
    pub test: Dataset,
}

impl Split {
    /// All training rows in party order (the data-sharing view).
    pub fn pooled_train(&self) -> Result<Dataset> {
        let refs: Vec<&Dataset> = self.parts.iter().collect();
        Dataset::concat("pooled-train", &refs)
    }
}

/// Seeded shuffle; the last rows form the test set and the rest is cut into
/// `parties` contiguous parts whose sizes differ by at most one (earlier
/// parts take the remainder).
pub fn split_dataset(ds: &Dataset, test: TestSize, parties: usize, seed: u64) -> Result<Split> {
    if parties < 1 {
        return Err(Error::Config("need at least one party".into()));
    }
    let n = ds.len();
    let n_test = test.rows(n)?;
    let n_train = n - n_test.min(n);
    if n_test >= n || parties > n_train {
        return Err(Error::Config(format!(
            "{n} rows leave {n_train} training rows for {parties} parties"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed::derive(seed, "split", 0)));

    let base = n_train / parties;
    let extra = n_train % parties;
    let mut parts = Vec::with_capacity(parties);
    let mut start = 0;
    for j in 0..parties {
        let len = base + usize::from(j < extra);
        parts.push(ds.subset(format!("{}-party{}", ds.name, j + 1), &order[start..start + len]));
        start += len;
    }
    let test = ds.subset(format!("{}-test", ds.name), &order[n_train..]);
    Ok(Split { parts, test })
}
