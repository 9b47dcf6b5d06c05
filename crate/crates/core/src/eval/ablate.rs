use log::{info, warn};
use serde::Serialize;

use crate::dynsys::TrajectoryDataset;
use crate::error::{L2cdsError, Result};
use crate::trainer::{train, TrainConfig};

use super::metrics::path_msnn;
use super::path::ProjectionPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// `λ_FD = λ_PV = 0`.
    NoFdPv,
    /// `λ_NN = 0`.
    NoNn,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Full, Variant::NoFdPv, Variant::NoNn];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "Full model",
            Variant::NoFdPv => "No L_FD, L_PV",
            Variant::NoNn => "No L_NN",
        }
    }

    pub fn apply(self, base: &TrainConfig, noise: bool) -> TrainConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Full => {}
            Variant::NoFdPv => {
                cfg.lambda_fd = 0.0;
                cfg.lambda_pv = 0.0;
            }
            Variant::NoNn => cfg.lambda_nn = 0.0,
        }
        if !noise {
            cfg.sigma = 0.0;
        }
        cfg
    }
}

/// One (noise, variant, path) entry of the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationCell {
    pub noise: bool,
    pub variant: Variant,
    pub path: String,
    /// Mean over the seeds that trained successfully; `None` if none did.
    pub mean: Option<f64>,
    /// Population standard deviation over the same seeds.
    pub std: Option<f64>,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationReport {
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub test_states: usize,
    pub paths: Vec<String>,
    /// Row-major over (noise on, noise off) × [`Variant::ALL`], then paths.
    pub cells: Vec<AblationCell>,
}

impl AblationReport {
    pub fn cell(&self, noise: bool, variant: Variant, path: &str) -> Option<&AblationCell> {
        self.cells.iter().find(|c| c.noise == noise && c.variant == variant && c.path == path)
    }

    pub fn rows() -> [(bool, Variant); 6] {
        let mut rows = [(true, Variant::Full); 6];
        for (i, noise) in [true, false].into_iter().enumerate() {
            for (j, v) in Variant::ALL.into_iter().enumerate() {
                rows[3 * i + j] = (noise, v);
            }
        }
        rows
    }
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Trains every (noise, variant) configuration once per seed and evaluates
/// the MSNN of each path on `test_states` states drawn from the held-out
/// datasets. A configuration that fails to train is recorded in its cells
/// and the grid continues.
#[allow(clippy::too_many_arguments)]
pub fn ablate(
    train_a: &TrajectoryDataset,
    train_b: &TrajectoryDataset,
    test_a: &TrajectoryDataset,
    test_b: &TrajectoryDataset,
    base: &TrainConfig,
    seeds: &[u64],
    paths: &[ProjectionPath],
    test_states: usize,
) -> Result<AblationReport> {
    if seeds.is_empty() {
        return Err(L2cdsError::InvalidArgument("ablation needs at least one seed".into()));
    }
    if paths.is_empty() {
        return Err(L2cdsError::InvalidArgument("ablation needs at least one path".into()));
    }
    base.validate()?;
    let n = test_states.min(test_a.len()).min(test_b.len());
    if n == 0 {
        return Err(L2cdsError::Empty("ablation test set"));
    }
    let xa = TrajectoryDataset::states_matrix(&test_a.sample_states(n, test_a.seed))?;
    let xb = TrajectoryDataset::states_matrix(&test_b.sample_states(n, test_b.seed))?;

    let mut cells = Vec::new();
    for (noise, variant) in AblationReport::rows() {
        let mut per_path: Vec<(Vec<f64>, Vec<u64>, Vec<String>)> = vec![Default::default(); paths.len()];
        for &seed in seeds {
            let mut cfg = variant.apply(base, noise);
            cfg.seed = seed;
            info!("ablation: {} ({}), seed {seed}", variant.label(), if noise { "noise" } else { "no noise" });
            match train(train_a, train_b, &cfg) {
                Ok(out) => {
                    for (k, path) in paths.iter().enumerate() {
                        match path_msnn(&out.model, path, &xa, &xb) {
                            Ok(v) => {
                                per_path[k].0.push(v);
                                per_path[k].1.push(seed);
                            }
                            Err(e) => per_path[k].2.push(format!("seed {seed}: {e}")),
                        }
                    }
                }
                Err(e) => {
                    warn!("ablation cell failed: seed {seed}: {e}");
                    for p in &mut per_path {
                        p.2.push(format!("seed {seed}: {e}"));
                    }
                }
            }
        }
        for (path, (values, ok_seeds, failures)) in paths.iter().zip(per_path) {
            let (mean, std) = mean_std(&values);
            cells.push(AblationCell {
                noise,
                variant,
                path: path.to_string(),
                mean,
                std,
                values,
                seeds: ok_seeds,
                failures,
            });
        }
    }
    Ok(AblationReport {
        seeds: seeds.to_vec(),
        sigma: base.sigma,
        test_states: n,
        paths: paths.iter().map(|p| p.to_string()).collect(),
        cells,
    })
}
