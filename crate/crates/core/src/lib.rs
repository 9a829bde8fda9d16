//! Near-field beam training for extremely large-scale RIS (XL-RIS) links.
//!
//! This crate holds the pure algorithmic side: panel geometry, spherical-wave
//! steering vectors and cascaded channel realizations, far- and near-field
//! codebooks, the beam training schemes (exhaustive sweep, two-level
//! hierarchical search, far-field-probe training, partial near-field training
//! and its candidate-refinement variant) and the rate/gain metrics.
//!
//! It builds without `std`; only `alloc` is required. File formats, the CLI and
//! the external predictor protocol live in the `xlris-sim` companion crate.

#![cfg_attr(not(test), no_std)]
// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod codebook;
pub mod config;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod rng;
pub mod schemes;

pub use num_complex::Complex64;

pub use channel::{ChannelRealization, NoiseModel, PathTerm, PhaseMode};
pub use codebook::{FarFieldCodebook, NearFieldCodebook, ProbeSet};
pub use config::{GridSpec, Region, SystemConfig};
pub use error::Error;
pub use geometry::{ArrayGeometry, Position3D};
pub use metrics::TrialMetrics;
pub use schemes::{Predictor, ProbabilityPair, SchemeResult};

pub type Result<T, E = Error> = core::result::Result<T, E>;
