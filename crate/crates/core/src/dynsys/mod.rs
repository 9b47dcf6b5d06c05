//! Simulated dynamical systems and transition dataset collection.

mod dataset;
mod normalize;
mod system;

pub use dataset::{
    collect_dataset, CollectOptions, TrajectoryDataset, TransitionPair, DATASET_FORMAT,
    DATASET_FORMAT_VERSION,
};
pub use normalize::{denormalize, normalize, NormalizationStats};
pub use system::{mirror, step, State, SystemKind, SystemSpec};
