//! Entanglement generated by a contact-interaction collision of two Gaussian
//! wave packets in one dimension.
//!
//! The pipeline is [`model`] (parameters, grids, fields) → [`propagators`] and
//! [`evolution`] (exact time evolution through the delta-interaction kernel)
//! → [`entanglement`] (Schmidt spectrum and entropy), with [`asymptotics`]
//! providing the closed-form long-time state and [`runner`] the experiments.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod model;
pub mod propagators;
pub mod runner;
pub mod specfun;

pub use asymptotics::{asymptotic_entropy, AsymptoticState};
pub use entanglement::{entropy, schmidt, EntropyTrace, SchmidtSpectrum, Subsystem};
pub use error::{Error, Result};
pub use evolution::QuadratureSpec;
pub use model::{derive, ComplexField1D, ComplexField2D, DerivedParams, Grid1D, PhysParams};
pub use num_complex::Complex64;
pub use propagators::ScatteringAmplitudes;
pub use runner::{Experiment, Format, ResultManifest, RunConfig, RunStatus, SweepAxis, SweepRange};
