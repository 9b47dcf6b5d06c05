use crate::dynsys::{mirror, NormalizationStats, State, TrajectoryDataset};
use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::{distance, Matrix};
use crate::model::CorrespondenceModel;

use super::path::{project, ProjectionPath, Space};

/// Sum of `values` independent of their order.
fn ordered_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Mean symmetric nearest-neighbour distance between two equally sized
/// sets, one per row:
///
/// ```text
/// (1/2n) (Σ_x min_y ‖x − y‖ + Σ_y min_x ‖x − y‖)
/// ```
///
/// Distances are plain (unsquared) Euclidean norms.
pub fn msnn_rows(original: &Matrix, reconstructed: &Matrix) -> Result<f64> {
    if original.rows() == 0 || reconstructed.rows() == 0 {
        return Err(L2cdsError::Empty("msnn state set"));
    }
    check_dim("msnn set size", original.rows(), reconstructed.rows())?;
    check_dim("msnn state width", original.cols(), reconstructed.cols())?;
    let n = original.rows();
    let mut min_o = vec![f64::INFINITY; n];
    let mut min_r = vec![f64::INFINITY; n];
    for (i, x) in original.iter_rows().enumerate() {
        for (j, y) in reconstructed.iter_rows().enumerate() {
            let d = distance(x, y);
            if d < min_o[i] {
                min_o[i] = d;
            }
            if d < min_r[j] {
                min_r[j] = d;
            }
        }
    }
    Ok((ordered_sum(min_o) + ordered_sum(min_r)) / (2 * n) as f64)
}

pub fn msnn(original: &[State], reconstructed: &[State]) -> Result<f64> {
    if original.is_empty() || reconstructed.is_empty() {
        return Err(L2cdsError::Empty("msnn state set"));
    }
    msnn_rows(&TrajectoryDataset::states_matrix(original)?, &TrajectoryDataset::states_matrix(reconstructed)?)
}

fn normalize_rows(norm: &NormalizationStats, x: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        norm.normalize_into(x.row(i), out.row_mut(i))?;
    }
    Ok(out)
}

/// MSNN of a path: the source system's test states are projected along
/// `path` and compared against the target system's test states, both in the
/// target system's normalised units.
pub fn path_msnn(model: &CorrespondenceModel, path: &ProjectionPath, test_a: &Matrix, test_b: &Matrix) -> Result<f64> {
    let pick = |s: Space| match s {
        Space::A => Ok((test_a, &model.norm_a)),
        Space::B => Ok((test_b, &model.norm_b)),
        Space::Latent => Err(L2cdsError::IllTypedPath(format!(
            "path {path} must start and end in a system for MSNN"
        ))),
    };
    let (src, target) = match (path.source(), path.target()) {
        (Some(s), Some(t)) => (pick(s)?.0, pick(t)?),
        _ => return Err(L2cdsError::IllTypedPath("MSNN needs a nonempty path".into())),
    };
    let projected = project(model, path, src)?;
    msnn_rows(&normalize_rows(target.1, target.0)?, &normalize_rows(target.1, &projected)?)
}

/// Mean distance between `map(s)` and the exact mirror of `s` over the
/// given states of the left wedge, in B's normalised units.
pub fn mirror_error_with(
    states_a: &[State],
    norm_b: &NormalizationStats,
    map: impl Fn(&Matrix) -> Result<Matrix>,
) -> Result<f64> {
    if states_a.is_empty() {
        return Err(L2cdsError::Empty("mirror test states"));
    }
    let x = TrajectoryDataset::states_matrix(states_a)?;
    let mapped = normalize_rows(norm_b, &map(&x)?)?;
    let truth: Vec<State> = states_a.iter().map(mirror).collect();
    let truth = normalize_rows(norm_b, &TrajectoryDataset::states_matrix(&truth)?)?;
    check_dim("mirror map output", truth.cols(), mapped.cols())?;
    let total: f64 = truth.iter_rows().zip(mapped.iter_rows()).map(|(a, b)| distance(a, b)).sum();
    Ok(total / states_a.len() as f64)
}

/// [`mirror_error_with`] for the model's `A → L → B` projection.
pub fn mirror_error(model: &CorrespondenceModel, states_a: &[State]) -> Result<f64> {
    let alb = ProjectionPath::parse("ALB")?;
    mirror_error_with(states_a, &model.norm_b, |x| project(model, &alb, x))
}
