//! Simulation and numerical theory for a preferential-attachment random graph
//! in which the oldest vertex still holding its original edges periodically
//! loses them.
//!
//! The crate has three layers:
//!
//! * [`theory`] — limiting constants and functions of the model (the survival
//!   function `q`, the rate function `p`, the degree sequence `x_k`), evaluated
//!   with numerically stable rescalings. Generic over the float type.
//! * [`cmj`] and [`process`] — event-driven simulation of the continuous-time
//!   branching process and the on-line graph process.
//! * [`master`] and [`analysis`] — the lazy off-line coupling of the whole
//!   graph (assign/reveal/expose/component-search) and the observables used to
//!   compare simulation against theory.

pub mod analysis;
pub mod cmj;
pub mod error;
pub mod fenwick;
pub mod master;
pub mod process;
pub mod stats;
pub mod theory;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete scalar used by the simulation layer.
pub type Real = f64;

/// Model parameters at the default precision.
pub type Params = theory::ModelParams<Real>;
/// Spectral constants at the default precision.
pub type Spectral = theory::SpectralConstants<Real>;
/// Theory function tables at the default precision.
pub type Fns = theory::TheoryFns<Real>;
/// Limiting degree sequence at the default precision.
pub type Law = theory::DegreeLaw<Real>;
