//! Photon-counting quantum illumination toolkit.
//!
//! Twin-beam (quantum) and split-thermal (classical) illumination of a
//! partially reflecting target hidden in multithermal background light.
//! The crate provides:
//!
//! - [`analytic`]: closed-form photon-number moments and figures of merit
//!   (Cauchy-Schwarz parameter, covariance SNR, enhancement, error probability).
//! - [`sampler`]: seeded, order-independent Monte Carlo generation of frames.
//! - [`estimator`]: the covariance receiver applied to frames.
//! - [`oracle`]: brute-force enumeration of the joint count distribution for
//!   small instances.
//! - [`scenario`]: parameter sweeps with CSV output.
//! - [`cli`]: configuration and subcommands of the `qillum` binary.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod sampler;
pub mod scenario;

pub use analytic::{BackgroundSpec, ChannelSpec, MomentSet, Scenario, SourceKind, SourceSpec};
pub use error::{Error, Result};
pub use sampler::{Frame, Hypothesis, SeedSpec};
