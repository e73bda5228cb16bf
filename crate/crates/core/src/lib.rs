//! Probabilistic time-arrow inference from information loss.
//!
//! The posterior probability that physical time runs along the reference-time
//! labelling is `1 / (1 + exp(-s D))`, where `D` is the log-likelihood ratio of
//! the observed process under the forward and the time-reversed laws. This
//! crate evaluates `D` and the resulting fidelity in three settings:
//!
//! - [`langevin`]: driven overdamped Langevin paths, whose `D` is the entropy
//!   production plus a boundary term;
//! - [`classical`]: two multinomial snapshots of an ensemble, where observing
//!   both snapshots doubles `D` relative to the Shannon information change;
//! - [`quantum`]: typical-subspace measurements on tensor-power states, where
//!   the fidelity equals `1 / (1 + exp(-ΔI))`.
//!
//! [`config`], [`runner`] and [`emit`] make up the file-driven experiment
//! harness behind the `intrinsic-arrow` binary; [`verify`] holds the
//! acceptance checks.

pub mod arrow;
pub mod classical;
pub mod config;
pub mod emit;
pub mod error;
pub mod langevin;
pub mod quantum;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod verify;

pub use arrow::{
    arrow_probability, average_arrow_probability, bayes_posterior, log_ratio, log_ratio_from_logs,
    mean_fidelity, thermodynamic_arrow, DecisionStatistic, FidelityEstimate, InformationChange,
    Provenance, TimeArrow,
};
pub use error::{Error, Result};

/// Version string embedded in every result summary.
pub const VERSION: &str = env!("INTRINSIC_ARROW_VERSION");
