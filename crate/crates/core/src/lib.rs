//! Neural network aggregation toolkit.
//!
//! Multilayer perceptrons are trained independently on disjoint, party-held
//! datasets and then combined without pooling any raw rows:
//!
//! - **average ensemble**: element-wise (optionally weighted) mean of the
//!   flat parameter vectors of identically shaped networks,
//! - **series networks**: frozen "expert" networks whose outputs become extra
//!   inputs of a head network trained on the last party's data,
//! - **transfer**: one network trained on each dataset in turn without
//!   re-initialisation.
//!
//! A data-sharing baseline (labelled `none`) trains one network on the
//! concatenation of all parties' rows. The [`harness`] module runs the
//! synthetic polynomial regression and WDBC classification comparisons and
//! writes CSV / JSON reports.

pub mod aggregation;
mod dd;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
