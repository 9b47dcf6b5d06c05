use l2cds::dynsys::{collect_dataset, CollectOptions, NormalizationStats, State, SystemKind, SystemSpec};
use l2cds::eval::{
    autocorrelation, dominant_period, fit_linear, latent_rollout, mirror_error_with, msnn, msnn_rows, ols,
    path_msnn, project, Pca, ProjectionPath, Space,
};
use l2cds::linalg::Matrix;
use l2cds::model::{CorrespondenceModel, LatentState};
use l2cds::L2cdsError;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn states(v: &[&[f64]]) -> Vec<State> {
    v.iter().map(|s| State(s.to_vec())).collect()
}

fn unit_norm(dim: usize) -> NormalizationStats {
    NormalizationStats::new(vec![-1.0; dim], vec![1.0; dim]).unwrap()
}

fn model(da: usize, db: usize, k: usize, seed: u64) -> CorrespondenceModel {
    CorrespondenceModel::new(&[6], 2 * k, unit_norm(da), unit_norm(db), seed).unwrap()
}

#[test]
fn msnn_hand_examples() {
    let a = states(&[&[0.0, 0.0], &[1.0, 0.0]]);
    let b = states(&[&[0.0, 1.0], &[1.0, 1.0]]);
    assert_eq!(msnn(&a, &b).unwrap(), 1.0);
    assert_eq!(msnn(&a, &a).unwrap(), 0.0);
    // Each side's nearest neighbours: 0→0 (0), 3→0 (3); 0→0 (0), 0→0 (0).
    let x = states(&[&[0.0], &[3.0]]);
    let y = states(&[&[0.0], &[0.0]]);
    assert_eq!(msnn(&x, &y).unwrap(), 0.75);
}

#[test]
fn msnn_rejects_bad_sets() {
    let a = states(&[&[0.0, 0.0]]);
    assert!(matches!(msnn(&a, &[]), Err(L2cdsError::Empty(_))));
    assert!(msnn(&a, &states(&[&[0.0, 0.0], &[1.0, 1.0]])).is_err());
    assert!(msnn(&a, &states(&[&[0.0]])).is_err());
}

fn matrix_strategy() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..12, 1usize..5).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(-10.0f64..10.0, n * d),
            prop::collection::vec(-10.0f64..10.0, n * d),
        )
            .prop_map(move |(a, b)| (Matrix::from_vec(n, d, a).unwrap(), Matrix::from_vec(n, d, b).unwrap()))
    })
}

proptest! {
    #[test]
    fn msnn_is_symmetric_and_self_zero((a, b) in matrix_strategy()) {
        prop_assert_eq!(msnn_rows(&a, &b).unwrap(), msnn_rows(&b, &a).unwrap());
        prop_assert_eq!(msnn_rows(&a, &a).unwrap(), 0.0);
        prop_assert!(msnn_rows(&a, &b).unwrap() >= 0.0);
    }

    #[test]
    fn msnn_is_permutation_invariant((a, b) in matrix_strategy(), shift in 0usize..12) {
        let n = a.rows();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row((i + shift) % n).to_vec()).collect();
        let rev: Vec<Vec<f64>> = (0..n).rev().map(|i| b.row(i).to_vec()).collect();
        let pa = Matrix::from_rows(&rows).unwrap();
        let pb = Matrix::from_rows(&rev).unwrap();
        prop_assert_eq!(msnn_rows(&a, &b).unwrap(), msnn_rows(&pa, &pb).unwrap());
    }
}

#[test]
fn path_parse_and_display() {
    for p in ProjectionPath::TABLE {
        assert_eq!(ProjectionPath::parse(p).unwrap().to_string(), p);
    }
    let p = ProjectionPath::parse("ALLB").unwrap();
    assert_eq!(p.hops().len(), 3);
    assert_eq!((p.source(), p.target()), (Some(Space::A), Some(Space::B)));
    assert!(ProjectionPath::parse("AB").is_err());
    assert!(ProjectionPath::parse("AXB").is_err());
    assert!(ProjectionPath::parse("").unwrap().is_empty());
}

#[test]
fn path_composition_matches_sequential_projection() {
    let m = model(2, 3, 1, 4);
    let x = Matrix::from_rows(&[[0.1, -0.4], [0.7, 0.2], [-0.3, 0.0]]).unwrap();
    let al = ProjectionPath::parse("AL").unwrap();
    let lb = ProjectionPath::parse("LLB").unwrap();
    let whole = al.then(&lb).unwrap();
    assert_eq!(whole.to_string(), "ALLB");
    let stepwise = project(&m, &lb, &project(&m, &al, &x).unwrap()).unwrap();
    assert_eq!(project(&m, &whole, &x).unwrap(), stepwise);
    assert!(al.then(&ProjectionPath::parse("BL").unwrap()).is_err());
    assert_eq!(project(&m, &ProjectionPath::empty(), &x).unwrap(), x);
}

#[test]
fn ill_typed_inputs_are_rejected() {
    let m = model(2, 3, 1, 4);
    let x = Matrix::zeros(2, 3);
    assert!(matches!(
        project(&m, &ProjectionPath::parse("ALB").unwrap(), &x),
        Err(L2cdsError::IllTypedPath(_))
    ));
    let la = ProjectionPath::parse("LA").unwrap();
    assert!(path_msnn(&m, &la, &Matrix::zeros(2, 2), &Matrix::zeros(2, 3)).is_err());
}

#[test]
fn path_msnn_compares_in_target_units() {
    let m = model(2, 2, 1, 9);
    let a = Matrix::from_rows(&[[0.1, 0.2], [0.3, -0.5]]).unwrap();
    let b = project(&m, &ProjectionPath::parse("ALB").unwrap(), &a).unwrap();
    let v = path_msnn(&m, &ProjectionPath::parse("ALB").unwrap(), &a, &b).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn mirror_error_of_exact_mirror_is_zero() {
    let s = states(&[&[-0.5, 0.2], &[-0.1, 0.9]]);
    let norm = NormalizationStats::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let mirror = |x: &Matrix| {
        let mut y = x.clone();
        for i in 0..y.rows() {
            y.row_mut(i)[0] = -y.row(i)[0];
        }
        Ok(y)
    };
    assert_eq!(mirror_error_with(&s, &norm, mirror).unwrap(), 0.0);
    // Identity is off by 2|x| raw, doubled by the [0, 1] -> [-1, 1] scaling.
    let e = mirror_error_with(&s, &norm, |x| Ok(x.clone())).unwrap();
    assert!((e - 1.2).abs() < 1e-15);
}

#[test]
fn rollout_prefixes_agree() {
    let m = model(2, 3, 2, 1);
    let start = LatentState::new(vec![0.1, -0.2, 0.3, 0.0]).unwrap();
    let long = latent_rollout(&m, &start, 20).unwrap();
    let short = latent_rollout(&m, &start, 7).unwrap();
    assert_eq!(long.len(), 20);
    assert_eq!(&long.latent.as_slice()[..7 * 4], short.latent.as_slice());
    assert_eq!(&long.decoded_b.as_slice()[..7 * 3], short.decoded_b.as_slice());
    assert!(long.truncated_at.is_none());
    assert!(long.decoded_a_normalized.as_slice().iter().all(|v| v.abs() <= 1.0));
    assert!(latent_rollout(&m, &start, 0).is_err());
    assert!(latent_rollout(&m, &LatentState::new(vec![0.0, 0.0]).unwrap(), 3).is_err());
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = l2cds::rng::Rng::new(5);
    let (n, p) = (50, 3);
    let mut x = Matrix::zeros(n, p);
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        let r = x.row_mut(i);
        r[0] = 1.0;
        r[1] = rng.gaussian();
        r[2] = rng.uniform_range(-2.0, 2.0);
        *yi = 0.5 - 1.5 * r[1] + 0.25 * r[2] + 0.1 * rng.gaussian();
    }
    let fit = ols(&x, &y, &["c", "x1", "x2"]).unwrap();
    let xm = DMatrix::from_row_slice(n, p, x.as_slice());
    let xtx = xm.transpose() * &xm;
    let beta = xtx.clone().try_inverse().unwrap() * xm.transpose() * DVector::from_column_slice(&y);
    for j in 0..p {
        assert!((fit.coefficients[j] - beta[j]).abs() < 1e-10);
    }
    let inv = xtx.try_inverse().unwrap();
    for j in 0..p {
        let se = (fit.residual_variance * inv[(j, j)]).sqrt();
        assert!((fit.std_errors[j] - se).abs() < 1e-10);
    }
    assert_eq!(fit.dof, n - p);
    assert!(fit.p_value("x1").unwrap() < 1e-10);
}

#[test]
fn exact_linear_data_recovers_slope() {
    let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37 - 3.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let r = fit_linear(&x, &y).unwrap();
    assert!((r.slope_no_intercept() - 2.0).abs() < 1e-10);
    assert!((r.slope_with_intercept() - 2.0).abs() < 1e-10);
    assert!(r.with_intercept.coefficients[0].abs() < 1e-10);
    assert!(r.no_intercept.p_values[0] < 1e-10);
}

#[test]
fn degenerate_regressions_error() {
    assert!(matches!(fit_linear(&[1.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]), Err(L2cdsError::DegenerateDesign(_))));
    assert!(fit_linear(&[1.0, 2.0], &[1.0]).is_err());
    let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
    assert!(matches!(ols(&x, &[1.0, 2.0, 3.0], &["a", "b"]), Err(L2cdsError::DegenerateDesign(_))));
}

#[test]
fn pca_finds_dominant_axis() {
    let rows: Vec<[f64; 2]> = (0..40).map(|i| {
        let t = i as f64 / 4.0 - 5.0;
        [3.0 + t, 1.0 - t + 0.01 * (i % 3) as f64]
    }).collect();
    let data = Matrix::from_rows(&rows).unwrap();
    let pca = Pca::fit(&data, 2).unwrap();
    let c = &pca.components[0];
    assert!((c[0].abs() - c[1].abs()).abs() < 1e-2);
    assert!(c.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a }) > 0.0);
    assert!(pca.explained_variance[0] > 100.0 * pca.explained_variance[1]);
    let proj = pca.transform(&data).unwrap();
    let mean0: f64 = proj.iter_rows().map(|r| r[0]).sum::<f64>() / 40.0;
    assert!(mean0.abs() < 1e-12);
    assert!(Pca::fit(&data, 3).is_err());
}

#[test]
fn autocorrelation_recovers_sine_period() {
    let rows: Vec<[f64; 2]> = (0..400)
        .map(|t| {
            let ph = 2.0 * std::f64::consts::PI * t as f64 / 25.0;
            [ph.sin(), 0.5 * ph.cos()]
        })
        .collect();
    let acf = autocorrelation(&Matrix::from_rows(&rows).unwrap(), 100).unwrap();
    assert_eq!(acf[0], 1.0);
    assert_eq!(dominant_period(&acf), Some(25));
    assert_eq!(dominant_period(&[1.0, 0.9, 0.8]), None);
    assert!(autocorrelation(&Matrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap(), 2).is_err());
}

#[test]
fn collected_wedges_are_mirrors() {
    let opts = CollectOptions::new(5, 3, 2);
    let a = collect_dataset(&SystemSpec::new(SystemKind::WedgeLeft), opts).unwrap();
    let b = collect_dataset(&SystemSpec::new(SystemKind::WedgeRight), opts).unwrap();
    for (pa, pb) in a.pairs.iter().zip(&b.pairs) {
        assert_eq!(l2cds::dynsys::mirror(&pa.s_t), pb.s_t);
        assert_eq!(l2cds::dynsys::mirror(&pa.s_next), pb.s_next);
    }
}
