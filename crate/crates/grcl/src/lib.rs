//! Two-task continual-learning linear regression.
//!
//! The crate implements the four two-phase learners (OCL, ℓ2-RCL, GRCL and
//! joint learning) on diagonal-covariance problems, the exact noise-integrated
//! bias/variance of each for fixed designs, Monte-Carlo expectations over
//! random one-hot or Gaussian designs, closed-form bound surrogates, and
//! exhaustive one-hot enumeration for small instances.

pub mod error;
pub mod estimators;
mod linalg;
pub mod model;
pub mod oracle;
pub mod regularizers;
pub mod risk;
pub mod sampler;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{fit_grcl, fit_joint, fit_l2rcl, fit_min_norm, fit_ocl, SolveOptions, Weights};
pub use model::{
    effective_rank, gaussian_index_set, make_problem_pk, make_spectrum, one_hot_index_sets, Design, IndexSet,
    ProblemInstance, RiskDecomposition, Spectrum,
};
pub use regularizers::{
    head_regularizer, onehot_frequency, sketch_regularizer, topk_empirical, topk_spectrum_regularizer,
    Regularizer, RegularizerForm,
};
pub use risk::{
    conditional_risk, conditional_risk_joint, monte_carlo_expected_excess, population_excess, Algorithm,
    MonteCarloEstimate, MonteCarloOptions, MonteCarloResult, RegularizerBuilder, RiskOptions, RiskRoute,
    RiskWeighting,
};
pub use sampler::{sample_gaussian_design, sample_labels, sample_one_hot_design, Dataset};

pub use faer;
