//! Bayesian Bradley-Terry stochastic block model.
//!
//! Items compared in pairs are grouped into ordered blocks that share a
//! common Bradley-Terry strength. The partition follows a Gnedin prior, the
//! block strengths a Gamma prior, and inference runs a conjugate
//! single-site Gibbs sampler on the Gamma-augmented likelihood.
//!
//! Module map:
//!
//! - [`numerics`]: special functions, seeded random streams, Gamma variates,
//!   generalized Pareto tail fitting.
//! - [`prior`]: the Gnedin partition prior.
//! - [`model`]: comparison data, partitions, strengths and likelihoods.
//! - [`sampler`]: the Gibbs sampler and posterior traces.
//! - [`postprocess`]: relabelling, VI consensus, credible balls and other
//!   posterior summaries.
//! - [`compare`]: the individual-strength Bradley-Terry baseline and PSIS-LOO.
//! - [`synthgen`]: synthetic data generators.
//! - [`io`]: CSV ingestion, trace files and the command workflows.

pub mod compare;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod postprocess;
pub mod prior;
pub mod sampler;
pub mod synthgen;

pub use error::{Error, Result};
pub use model::{BlockStrengths, ComparisonData, Hyperparameters, Partition};
pub use numerics::RngStream;
pub use sampler::{SamplerConfig, Trace};
