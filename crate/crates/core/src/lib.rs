//! Multi-resolution dependence measures between categorical variables and
//! exhaustive feature selection over the lattice of feature subsets.
//!
//! Lift, mutual information and the η coefficient are computed from a
//! [`JointTable`] of observed counts. The η coefficient is also available
//! restricted to a window of the feature range, which lets the search find
//! the levels of a feature set that carry the dependence.

pub mod cli;
pub mod dataio;
pub mod discretize;
pub mod distribution;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod search;

pub use discretize::{discretize_joint, DiscretizationModel, QuantileSpec};
pub use distribution::{build_table, CategoricalColumn, Column, Dataset, JointTable};
pub use error::{Error, Result};
pub use metrics::{
    conditional_entropy, entropy, eta_global, eta_window, lift, mutual_information, LiftTable,
    Window, WindowScorer,
};
pub use search::{
    brute_force_oracle, select_global, select_profile, select_window, Candidate, FeatureSubset,
    Locus, Mode, Resolution, SearchConfig, SearchOutcome,
};
