//! Feature-aware ranking from pairwise comparisons.
//!
//! Items carry feature vectors; the link-transformed preference matrix is
//! modelled as `A^T L A` for a small latent skew matrix `L`. Ranking runs in
//! four stages: build the empirical preference matrix from comparison
//! counts, complete its link transform by trace-norm regularized inductive
//! matrix completion, map back through the inverse link, and aggregate with
//! the Copeland procedure.
//!
//! ```
//! use flrank::{model, pipeline, sampling, Link};
//!
//! let inst = model::generate_synthetic(model::SyntheticModel::Model1, 30, 4, 2, 7).unwrap();
//! let mut rng = sampling::seeded_rng(7, sampling::Stream::Support);
//! let support = sampling::all_pairs(30);
//! let data = sampling::sample_comparisons(&inst.preference, &inst.features, &support, 200, &mut rng).unwrap();
//! let out = pipeline::ipr(&data, &pipeline::IprConfig::new(Link::Logit)).unwrap();
//! assert_eq!(out.ranking.len(), 30);
//! ```

pub mod aggregate;
pub mod dataset;
pub mod diagnostics;
mod error;
pub mod features;
pub mod imc;
pub mod io;
pub mod linalg;
pub mod link;
pub mod model;
pub mod pipeline;
pub mod preference;
pub mod sampling;

pub use dataset::{ComparisonDataset, Mask, PairCount};
pub use error::{Error, Result};
pub use features::FeatureSet;
pub use link::Link;
pub use preference::{dist, is_stochastic_transitive, PreferenceMatrix, Ranking};
