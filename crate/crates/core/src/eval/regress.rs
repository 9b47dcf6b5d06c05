use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dynsys::{State, TrajectoryDataset};
use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::Matrix;
use crate::model::CorrespondenceModel;
use crate::rng::Rng;

use super::path::{project, ProjectionPath};

/// Ordinary least squares fit with two-sided t-tests on each coefficient.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    /// `RSS / (n − p)`.
    pub residual_variance: f64,
    pub samples: usize,
    pub dof: usize,
}

impl OlsFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.p_values[i])
    }
}

/// Relative singular-value cut-off below which a design counts as rank
/// deficient.
const RANK_TOLERANCE: f64 = 1e-12;

fn two_sided_p(t: f64, dof: usize) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, dof as f64).expect("dof is positive");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Fits `y ≈ X β` for the `n × p` design `x` (one column per name).
pub fn ols(x: &Matrix, y: &[f64], names: &[&str]) -> Result<OlsFit> {
    let (n, p) = (x.rows(), x.cols());
    check_dim("regression response length", n, y.len())?;
    check_dim("regression coefficient names", p, names.len())?;
    if p == 0 {
        return Err(L2cdsError::InvalidArgument("design has no columns".into()));
    }
    if n <= p {
        return Err(L2cdsError::DegenerateDesign(format!("{n} samples for {p} coefficients")));
    }
    if !x.all_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(L2cdsError::InvalidArgument("regression data must be finite".into()));
    }
    let xm = DMatrix::from_row_slice(n, p, x.as_slice());
    let yv = DVector::from_column_slice(y);
    let sv = xm.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(L2cdsError::DegenerateDesign(format!(
            "design matrix is rank deficient (singular values {smax:e} .. {smin:e})"
        )));
    }
    let qr = xm.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| L2cdsError::DegenerateDesign("singular triangular factor".into()))?;
    let resid = &yv - &xm * &beta;
    let dof = n - p;
    let residual_variance = resid.norm_squared() / dof as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| L2cdsError::DegenerateDesign("singular triangular factor".into()))?;
    let cov_unscaled = &r_inv * r_inv.transpose();
    let mut fit = OlsFit {
        names: names.iter().map(|s| s.to_string()).collect(),
        coefficients: beta.iter().copied().collect(),
        std_errors: Vec::with_capacity(p),
        t_stats: Vec::with_capacity(p),
        p_values: Vec::with_capacity(p),
        residual_variance,
        samples: n,
        dof,
    };
    for j in 0..p {
        let se = (residual_variance * cov_unscaled[(j, j)]).sqrt();
        let b = fit.coefficients[j];
        let t = if se > 0.0 {
            b / se
        } else if b == 0.0 {
            0.0
        } else {
            b.signum() * f64::INFINITY
        };
        fit.std_errors.push(se);
        fit.t_stats.push(t);
        fit.p_values.push(two_sided_p(t, dof));
    }
    Ok(fit)
}

/// The two simple linear models `y ~ β x` and `y ~ β₀ + β₁ x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub no_intercept: OlsFit,
    pub with_intercept: OlsFit,
}

impl RegressionResult {
    /// `β` of the no-intercept model.
    pub fn slope_no_intercept(&self) -> f64 {
        self.no_intercept.coefficients[0]
    }

    /// `β₁` of the intercept model.
    pub fn slope_with_intercept(&self) -> f64 {
        self.with_intercept.coefficients[1]
    }
}

pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    check_dim("regression response length", x.len(), y.len())?;
    if x.is_empty() {
        return Err(L2cdsError::Empty("regression data"));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(L2cdsError::DegenerateDesign("regressor has zero variance".into()));
    }
    let n = x.len();
    let no_intercept = ols(&Matrix::from_vec(n, 1, x.to_vec())?, y, &["beta"])?;
    let design: Vec<f64> = x.iter().flat_map(|&v| [1.0, v]).collect();
    let with_intercept = ols(&Matrix::from_vec(n, 2, design)?, y, &["beta0", "beta1"])?;
    Ok(RegressionResult {
        no_intercept,
        with_intercept,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbOptions {
    /// Coordinate of A's state that is perturbed.
    pub source_index: usize,
    /// Coordinate of the projected B state used as the response.
    pub target_index: usize,
    /// Half-width of the uniform perturbation as a fraction of the source
    /// coordinate's standard deviation over the dataset.
    pub noise_scale: f64,
    /// Perturbed copies per sampled state.
    pub copies: usize,
    /// Number of sampled states.
    pub states: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationRegression {
    pub options: PerturbOptions,
    /// Absolute half-width of the uniform perturbation actually used.
    pub noise_half_width: f64,
    pub result: RegressionResult,
}

/// Perturbs one coordinate of sampled A states, maps every copy through
/// `A → L → B`, and regresses the chosen B coordinate on the perturbed A
/// coordinate. Values are in raw (unnormalised) units.
pub fn perturb_regress(
    model: &CorrespondenceModel,
    dataset: &TrajectoryDataset,
    opts: &PerturbOptions,
) -> Result<PerturbationRegression> {
    if dataset.is_empty() {
        return Err(L2cdsError::Empty("dataset"));
    }
    check_dim("dataset state width", model.dim_a(), dataset.state_dim())?;
    if opts.source_index >= model.dim_a() || opts.target_index >= model.dim_b() {
        return Err(L2cdsError::InvalidArgument(format!(
            "velocity indices ({}, {}) out of range for widths ({}, {})",
            opts.source_index,
            opts.target_index,
            model.dim_a(),
            model.dim_b()
        )));
    }
    if opts.copies == 0 || opts.states == 0 {
        return Err(L2cdsError::InvalidArgument("copies and states must be >= 1".into()));
    }
    if !(opts.noise_scale >= 0.0 && opts.noise_scale.is_finite()) {
        return Err(L2cdsError::InvalidArgument(format!("noise scale must be >= 0, got {}", opts.noise_scale)));
    }
    let col: Vec<f64> = dataset.pairs.iter().map(|p| p.s_t.0[opts.source_index]).collect();
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
    let half = opts.noise_scale * std;

    let base = dataset.sample_states(opts.states, opts.seed);
    let mut rng = Rng::with_stream(opts.seed, crate::rng::streams::EVAL + 1);
    let mut perturbed: Vec<State> = Vec::with_capacity(base.len() * opts.copies);
    for s in &base {
        for _ in 0..opts.copies {
            let mut c = s.clone();
            c.0[opts.source_index] += rng.uniform_range(-half, half);
            perturbed.push(c);
        }
    }
    let x: Vec<f64> = perturbed.iter().map(|s| s.0[opts.source_index]).collect();
    let projected = project(model, &ProjectionPath::parse("ALB")?, &TrajectoryDataset::states_matrix(&perturbed)?)?;
    let y: Vec<f64> = projected.iter_rows().map(|r| r[opts.target_index]).collect();
    Ok(PerturbationRegression {
        options: opts.clone(),
        noise_half_width: half,
        result: fit_linear(&x, &y)?,
    })
}
