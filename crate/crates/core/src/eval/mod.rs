//! Projection paths, the MSNN metric, the ablation grid, latent rollouts,
//! perturbation regression and the mirror-map check.

mod ablate;
mod metrics;
mod path;
mod regress;
mod report;
mod rollout;

pub use ablate::{ablate, AblationCell, AblationReport, Variant};
pub use metrics::{mirror_error, mirror_error_with, msnn, msnn_rows, path_msnn};
pub use path::{project, Hop, ProjectionPath, Space};
pub use regress::{fit_linear, ols, perturb_regress, OlsFit, PerturbOptions, PerturbationRegression, RegressionResult};
pub use report::{aligned_table, to_jsonl};
pub use rollout::{autocorrelation, dominant_period, latent_rollout, Pca, Rollout};
