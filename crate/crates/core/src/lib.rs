//! Empirical estimation of concentration of measure under a label
//! uncertainty constraint, and the intrinsic-robustness bound it implies.
//!
//! The main entry points are [`search::run_search`], which builds a union
//! of l2 balls or l-inf hypercubes over a training set, and
//! [`pipeline::repeated_trials`], which runs the split/search/evaluate
//! protocol and summarizes the held-out risks. [`gaussmix`] provides a
//! closed-form reference for a two-Gaussian mixture.

// `!(x >= 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abstain;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod gaussmix;
pub mod geometry;
pub mod normal;
pub mod pipeline;
pub mod search;
pub mod uncertainty;

pub use dataset::{Dataset, LabelSet, PointFormat, PointSet, SoftLabelSet};
pub use error::{Error, Result};
pub use geometry::{Metric, Region, RegionSpec};
pub use search::{run_search, SearchOptions, SearchParams, Searcher};
