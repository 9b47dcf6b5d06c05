use serde::Serialize;

/// Outcome of comparing an analytic gradient against central differences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Parameter index attaining `max_rel_error`.
    pub worst_index: Option<usize>,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct GradCheckOptions {
    pub step: f64,
    /// Denominator floor so entries whose true gradient is (near) zero are
    /// judged by absolute error.
    pub floor: f64,
    pub tolerance: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-5,
            floor: 1e-6,
            tolerance: 1e-4,
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(floor)
}

/// Checks `analytic` (the gradient of `loss` at `params`) entry by entry
/// against `(loss(p + h·e_i) - loss(p - h·e_i)) / 2h`.
pub fn grad_check(
    params: &[f64],
    analytic: &[f64],
    mut loss: impl FnMut(&[f64]) -> f64,
    opts: GradCheckOptions,
) -> GradCheckReport {
    assert_eq!(params.len(), analytic.len(), "gradient length must match parameters");
    let mut p = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst_index: None,
        checked: params.len(),
        tolerance: opts.tolerance,
        passed: true,
    };
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + opts.step;
        let plus = loss(&p);
        p[i] = orig - opts.step;
        let minus = loss(&p);
        p[i] = orig;
        let numeric = (plus - minus) / (2.0 * opts.step);
        let abs = (analytic[i] - numeric).abs();
        let rel = relative_error(analytic[i], numeric, opts.floor);
        report.max_abs_error = report.max_abs_error.max(abs);
        if rel > report.max_rel_error || !rel.is_finite() {
            report.max_rel_error = rel;
            report.worst_index = Some(i);
        }
    }
    report.passed = report.max_rel_error.is_finite() && report.max_rel_error <= opts.tolerance;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::nn::{Mlp, OutputActivation};
    use crate::rng::Rng;

    #[test]
    fn affine_squared_error_is_tight() {
        let mut rng = Rng::new(8);
        let net = Mlp::init(&[3, 2], OutputActivation::Identity, &mut rng).unwrap();
        let x = Matrix::from_rows(&[[0.1, -0.4, 0.9], [1.2, 0.3, -0.7]]).unwrap();
        let target = Matrix::from_rows(&[[0.5, -0.5], [0.0, 1.0]]).unwrap();
        let loss = |p: &[f64]| {
            let n = Mlp::from_parts(net.sizes().to_vec(), OutputActivation::Identity, p.to_vec()).unwrap();
            let y = n.forward(&x).unwrap();
            y.as_slice().iter().zip(target.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
        };
        let y = net.forward(&x).unwrap();
        let mut up = y.clone();
        for (u, t) in up.as_mut_slice().iter_mut().zip(target.as_slice()) {
            *u = 2.0 * (*u - t);
        }
        let (grad, _) = net.backward(&x, &up).unwrap();
        let report = grad_check(net.params(), &grad, loss, GradCheckOptions { tolerance: 1e-7, ..Default::default() });
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn constant_loss_has_zero_discrepancy() {
        let params = vec![0.3, -1.0, 2.0];
        let report = grad_check(&params, &[0.0; 3], |_| 4.2, GradCheckOptions::default());
        assert_eq!(report.max_rel_error, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn wrong_gradient_fails() {
        let params = vec![1.0, 2.0];
        let report = grad_check(&params, &[2.0, 0.0], |p| p[0] * p[0] + p[1] * p[1], GradCheckOptions::default());
        assert!(!report.passed);
        assert_eq!(report.worst_index, Some(1));
    }
}
