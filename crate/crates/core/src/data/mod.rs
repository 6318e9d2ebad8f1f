//! Datasets: synthetic polynomial regression, WDBC ingestion, normalisation
//! and the party split protocol.

mod dataset;
mod normalize;
mod polynomial;
mod split;
mod synth;
mod wdbc;

pub use dataset::{Dataset, TaskKind};
pub use normalize::{fit_normalizer, fit_target_scaler, NormStats, TargetScaler};
pub use polynomial::{monomials_up_to, Polynomial, Term, NUM_VARS};
pub use split::{split_dataset, Split, TestSize};
pub use synth::{generate_dataset, NoiseSpec, DEFAULT_FEATURE_RANGE};
pub use wdbc::{builtin_wdbc, load_wdbc, parse_wdbc, wdbc_feature_names};
