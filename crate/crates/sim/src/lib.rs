//! Dataset generation, external predictors, evaluation and the command line
//! front end for the XL-RIS beam training simulator.

pub mod cache;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod external;
pub mod tensor;

pub use error::{ExternalError, Result, SimError};
