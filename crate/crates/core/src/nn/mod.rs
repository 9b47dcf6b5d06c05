//! Dense networks with hand-written reverse mode, the RAdam optimiser and a
//! finite-difference gradient checker.

mod gradcheck;
mod mlp;
mod optim;

pub use gradcheck::{grad_check, relative_error, GradCheckOptions, GradCheckReport};
pub use mlp::{Mlp, OutputActivation, Tape};
pub use optim::{OptimizerState, RAdamConfig};
