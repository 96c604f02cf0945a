//! Gaussian-process computations on the joint Markov model: sampling,
//! regression, likelihood, and a dense Kullback–Leibler divergence.

mod kl;
mod model;
mod posterior;
mod sampling;

pub use kl::kl_divergence;
pub use model::{build_joint, ComponentModel, JointModel};
pub use posterior::{loglik, posterior, posterior_partial, predict, Diagnostics, RegressionResult, MERGE_TOL};
pub use sampling::{sample, sample_derivatives, sample_state};
