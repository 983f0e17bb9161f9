//! Simulators and probes for learning k-fold skill compositions.
//!
//! The learner is the scalar product model `f_w(X) = ∏_t w[x_t]` trained on
//! labels `∏_t w*[x_t]` with skills drawn i.i.d. from a uniform or power-law
//! distribution. Around it sit the closed-form population dynamics, checks of
//! the landscape and concentration properties, stage-wise instrumentation,
//! dataset generators for four compositional reasoning tasks, and a
//! reproducible experiment runner.

pub mod composition;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod pca;
pub mod population;
pub mod probes;
pub mod rng;
pub mod sgd;
pub mod stages;
pub mod trajectory;

pub use error::{Error, Result};
