//! Learning correspondences between dynamical systems through a shared latent
//! state space and a shared latent dynamics model.
//!
//! Two systems A and B each get an encoder/decoder pair into a common latent
//! space; a residual network `F` models the latent dynamics. The map from A to
//! B is `D_B ∘ E_A`.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynsys;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod nn;
pub mod rng;
pub mod trainer;

pub use error::{L2cdsError, Result};
