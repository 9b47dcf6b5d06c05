use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::Matrix;
use crate::model::{CorrespondenceModel, LatentState};

/// A latent trajectory simulated with `F` and decoded into both systems.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    /// `s'_1 .. s'_T`, one row per step; the start state is not included.
    pub latent: Matrix,
    /// Decoder outputs in each system's normalised units.
    pub decoded_a_normalized: Matrix,
    pub decoded_b_normalized: Matrix,
    /// Decoded states in raw units.
    pub decoded_a: Matrix,
    pub decoded_b: Matrix,
    /// Step at which a non-finite latent state appeared, if any; the
    /// trajectory stops just before it.
    pub truncated_at: Option<usize>,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.latent.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.latent.rows() == 0
    }
}

/// Iterates `s'_{t+1} = s'_t + F(s'_t)` for `steps` steps from `start` and
/// decodes every visited state.
pub fn latent_rollout(model: &CorrespondenceModel, start: &LatentState, steps: usize) -> Result<Rollout> {
    if steps == 0 {
        return Err(L2cdsError::InvalidArgument("rollout needs at least one step".into()));
    }
    check_dim("rollout start state", model.latent_dim, start.0.len())?;
    let l = model.latent_dim;
    let mut latent = Vec::with_capacity(steps * l);
    let mut z = Matrix::from_vec(1, l, start.0.clone())?;
    let mut truncated_at = None;
    for t in 1..=steps {
        let mut next = model.dynamics.forward(&z)?;
        next.add_assign(&z)?;
        if !next.all_finite() {
            warn!("latent rollout produced a non-finite state at step {t}; truncating");
            truncated_at = Some(t);
            break;
        }
        latent.extend_from_slice(next.as_slice());
        z = next;
    }
    let rows = latent.len() / l;
    let latent = Matrix::from_vec(rows, l, latent)?;
    let decoded_a_normalized = model.decoder_a.forward(&latent)?;
    let decoded_b_normalized = model.decoder_b.forward(&latent)?;
    let denorm = |norm: &crate::dynsys::NormalizationStats, m: &Matrix| -> Result<Matrix> {
        let mut out = Matrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            norm.denormalize_into(m.row(i), out.row_mut(i))?;
        }
        Ok(out)
    };
    Ok(Rollout {
        decoded_a: denorm(&model.norm_a, &decoded_a_normalized)?,
        decoded_b: denorm(&model.norm_b, &decoded_b_normalized)?,
        decoded_a_normalized,
        decoded_b_normalized,
        latent,
        truncated_at,
    })
}

/// Principal axes of a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit axes in order of decreasing variance. Each axis is signed so that
    /// its largest-magnitude entry is positive.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    pub fn fit(data: &Matrix, components: usize) -> Result<Pca> {
        let (n, d) = (data.rows(), data.cols());
        if n == 0 {
            return Err(L2cdsError::Empty("PCA data"));
        }
        if components == 0 || components > d {
            return Err(L2cdsError::InvalidArgument(format!("cannot take {components} components of {d} dims")));
        }
        let mut mean = vec![0.0; d];
        for r in data.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n as f64;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for r in data.iter_rows() {
            for i in 0..d {
                for j in 0..d {
                    cov[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]) / n as f64;
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let mut comps = Vec::with_capacity(components);
        let mut var = Vec::with_capacity(components);
        for &k in order.iter().take(components) {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            comps.push(v);
            var.push(eig.eigenvalues[k].max(0.0));
        }
        Ok(Pca {
            mean,
            components: comps,
            explained_variance: var,
        })
    }

    pub fn transform(&self, data: &Matrix) -> Result<Matrix> {
        check_dim("PCA input width", self.mean.len(), data.cols())?;
        let k = self.components.len();
        let mut out = Matrix::zeros(data.rows(), k);
        for (i, r) in data.iter_rows().enumerate() {
            for (c, axis) in self.components.iter().enumerate() {
                out.row_mut(i)[c] = r.iter().zip(&self.mean).zip(axis).map(|((x, m), a)| (x - m) * a).sum();
            }
        }
        Ok(out)
    }
}

/// Autocorrelation of a multivariate series for lags `0..=max_lag`, pooling
/// the mean-removed autocovariances of all columns and normalising by the
/// lag-0 value.
pub fn autocorrelation(series: &Matrix, max_lag: usize) -> Result<Vec<f64>> {
    let n = series.rows();
    if n < 2 {
        return Err(L2cdsError::InvalidArgument("autocorrelation needs at least two samples".into()));
    }
    let max_lag = max_lag.min(n - 1);
    let d = series.cols();
    let mut means = vec![0.0; d];
    for r in series.iter_rows() {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut acf = vec![0.0; max_lag + 1];
    for (lag, a) in acf.iter_mut().enumerate() {
        for t in 0..n - lag {
            let (x, y) = (series.row(t), series.row(t + lag));
            for j in 0..d {
                *a += (x[j] - means[j]) * (y[j] - means[j]);
            }
        }
        *a /= n as f64;
    }
    let c0 = acf[0];
    if !(c0 > 0.0) {
        return Err(L2cdsError::InvalidArgument("series has zero variance".into()));
    }
    Ok(acf.into_iter().map(|a| a / c0).collect())
}

/// Lag of the highest autocorrelation peak after the function first turns
/// negative, or `None` if it never does or has no later local maximum.
pub fn dominant_period(acf: &[f64]) -> Option<usize> {
    let first_negative = acf.iter().position(|&a| a < 0.0)?;
    let mut best: Option<(usize, f64)> = None;
    for lag in first_negative.max(1)..acf.len().saturating_sub(1) {
        if acf[lag] >= acf[lag - 1] && acf[lag] > acf[lag + 1] && best.is_none_or(|(_, v)| acf[lag] > v) {
            best = Some((lag, acf[lag]));
        }
    }
    best.map(|(lag, _)| lag)
}
