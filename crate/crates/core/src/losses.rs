//! The four training objectives and their weighted sum.
//!
//! Every loss returns its value together with gradients routed to the
//! networks that produced its inputs. The composite objective is
//!
//! ```text
//! L = λ_AE·L_AE + λ_NN·L_NN + λ_FD·L_FD + λ_PV·L_PV
//! ```
//!
//! where `L_AE`, `L_FD` and `L_PV` are each summed over both systems.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::model::{CorrespondenceModel, ModelGrads, Net};
use crate::nn::Mlp;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub ae: f64,
    pub nn: f64,
    pub fd: f64,
    pub pv: f64,
}

impl LossWeights {
    pub fn new(ae: f64, nn: f64, fd: f64, pv: f64) -> Self {
        LossWeights { ae, nn, fd, pv }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.ae, self.nn, self.fd, self.pv];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(L2cdsError::InvalidArgument(format!("loss weights must be finite and >= 0: {self:?}")));
        }
        if all.iter().all(|&w| w == 0.0) {
            return Err(L2cdsError::InvalidArgument("at least one loss weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub ae: f64,
    pub nn: f64,
    pub fd: f64,
    pub pv: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(weights: &LossWeights, ae: f64, nn: f64, fd: f64, pv: f64) -> Self {
        let mut b = LossBreakdown { ae, nn, fd, pv, total: 0.0 };
        b.total = b.recombine(weights);
        b
    }

    pub fn recombine(&self, w: &LossWeights) -> f64 {
        w.ae * self.ae + w.nn * self.nn + w.fd * self.fd + w.pv * self.pv
    }

    pub fn is_finite(&self) -> bool {
        [self.ae, self.nn, self.fd, self.pv, self.total].iter().all(|v| v.is_finite())
    }
}

/// Normalised consecutive states of one system, one transition per row.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionBatch {
    pub s_t: Matrix,
    pub s_next: Matrix,
}

impl TransitionBatch {
    pub fn new(s_t: Matrix, s_next: Matrix) -> Result<Self> {
        check_dim("transition batch rows", s_t.rows(), s_next.rows())?;
        check_dim("transition batch cols", s_t.cols(), s_next.cols())?;
        if s_t.rows() == 0 {
            return Err(L2cdsError::Empty("transition batch"));
        }
        Ok(TransitionBatch { s_t, s_next })
    }

    pub fn len(&self) -> usize {
        self.s_t.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.s_t.rows() == 0
    }
}

#[derive(Clone, Debug)]
pub struct LossOutput {
    pub breakdown: LossBreakdown,
    pub grads: ModelGrads,
}

#[derive(Clone, Debug)]
pub struct NnLoss {
    pub value: f64,
    pub grad_a: Matrix,
    pub grad_b: Matrix,
}

#[derive(Clone, Debug)]
pub struct FdLoss {
    pub value: f64,
    pub grad_encoder: Vec<f64>,
    pub grad_dynamics: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PvLoss {
    pub value: f64,
    pub grad_encoder: Vec<f64>,
}

/// Encoder pass over `[s_t; s_next]` stacked, keeping the tape.
struct Encoded {
    tape: crate::nn::Tape,
    z_t: Matrix,
    z_next: Matrix,
    dz_t: Matrix,
    dz_next: Matrix,
}

impl Encoded {
    fn new(encoder: &Mlp, batch: &TransitionBatch, with_next: bool) -> Result<Self> {
        let n = batch.len();
        let input = if with_next { batch.s_t.vstack(&batch.s_next)? } else { batch.s_t.clone() };
        let tape = encoder.forward_tape(&input)?;
        let out = tape.output();
        let l = out.cols();
        let z_t = out.slice_rows(0, n);
        let z_next = if with_next { out.slice_rows(n, 2 * n) } else { Matrix::zeros(0, l) };
        Ok(Encoded {
            dz_t: Matrix::zeros(n, l),
            dz_next: Matrix::zeros(z_next.rows(), l),
            tape,
            z_t,
            z_next,
        })
    }

    fn backward(self, encoder: &Mlp, grad: &mut [f64]) -> Result<()> {
        let upstream = if self.z_next.rows() > 0 { self.dz_t.vstack(&self.dz_next)? } else { self.dz_t };
        encoder.backward_tape(&self.tape, &upstream, grad)?;
        Ok(())
    }
}

fn noise_matrix(rows: usize, cols: usize, sigma: f64, rng: &mut Rng) -> Option<Matrix> {
    (sigma > 0.0).then(|| {
        let mut m = Matrix::zeros(rows, cols);
        rng.fill_gaussian(m.as_mut_slice(), sigma);
        m
    })
}

fn add_noise(z: &Matrix, noise: Option<&Matrix>) -> Result<Matrix> {
    let mut out = z.clone();
    if let Some(n) = noise {
        out.add_assign(n)?;
    }
    Ok(out)
}

/// `mean ‖D(z + ε) − s‖²`. Adds `weight·∂/∂θ_D` into `grad_dec` and
/// `weight·∂/∂z` into `dz`.
fn ae_term(
    dec: &Mlp,
    z: &Matrix,
    s: &Matrix,
    noise: Option<&Matrix>,
    weight: f64,
    grad_dec: &mut [f64],
    dz: &mut Matrix,
) -> Result<f64> {
    check_dim("decoder output width", s.cols(), dec.output_dim())?;
    let n = s.rows() as f64;
    let tape = dec.forward_tape(&add_noise(z, noise)?)?;
    let mut resid = tape.output().clone();
    for (r, t) in resid.as_mut_slice().iter_mut().zip(s.as_slice()) {
        *r -= t;
    }
    let value = resid.as_slice().iter().map(|r| r * r).sum::<f64>() / n;
    if weight != 0.0 {
        resid.scale(2.0 * weight / n);
        let dz_in = dec.backward_tape(&tape, &resid, grad_dec)?;
        dz.add_assign(&dz_in)?;
    }
    Ok(value)
}

/// `mean ‖(θ'_t + θ̇'_t) − θ'_{t+1}‖²`.
fn pv_term(z_t: &Matrix, z_next: &Matrix, weight: f64, dz_t: &mut Matrix, dz_next: &mut Matrix) -> Result<f64> {
    let l = z_t.cols();
    if l == 0 || !l.is_multiple_of(2) {
        return Err(L2cdsError::InvalidArgument(format!(
            "pose-velocity loss needs an even latent dimension, got {l}"
        )));
    }
    let k = l / 2;
    let n = z_t.rows() as f64;
    let c = 2.0 * weight / n;
    let mut value = 0.0;
    for i in 0..z_t.rows() {
        let (zt, zn) = (z_t.row(i), z_next.row(i));
        for j in 0..k {
            let r = zt[j] + zt[k + j] - zn[j];
            value += r * r;
            if weight != 0.0 {
                dz_t.row_mut(i)[j] += c * r;
                dz_t.row_mut(i)[k + j] += c * r;
                dz_next.row_mut(i)[j] -= c * r;
            }
        }
    }
    Ok(value / n)
}

/// `mean ‖(z̃_t + F(z̃_t)) − z_{t+1}‖²` with `z̃_t = z_t + ε`; the noise is
/// a constant, so `∂z̃_t/∂z_t = I`.
#[allow(clippy::too_many_arguments)]
fn fd_term(
    dynamics: &Mlp,
    z_t: &Matrix,
    z_next: &Matrix,
    noise: Option<&Matrix>,
    weight: f64,
    grad_f: &mut [f64],
    dz_t: &mut Matrix,
    dz_next: &mut Matrix,
) -> Result<f64> {
    check_dim("dynamics width", z_t.cols(), dynamics.input_dim())?;
    let n = z_t.rows() as f64;
    let z_in = add_noise(z_t, noise)?;
    let tape = dynamics.forward_tape(&z_in)?;
    let mut resid = tape.output().clone();
    for ((r, a), b) in resid.as_mut_slice().iter_mut().zip(z_in.as_slice()).zip(z_next.as_slice()) {
        *r += a - b;
    }
    let value = resid.as_slice().iter().map(|r| r * r).sum::<f64>() / n;
    if weight != 0.0 {
        resid.scale(2.0 * weight / n);
        let dz_in = dynamics.backward_tape(&tape, &resid, grad_f)?;
        dz_t.add_assign(&resid)?;
        dz_t.add_assign(&dz_in)?;
        for (d, r) in dz_next.as_mut_slice().iter_mut().zip(resid.as_slice()) {
            *d -= r;
        }
    }
    Ok(value)
}

/// Index of the nearest row of `set` to `x`, ties to the lowest index.
fn nearest(x: &[f64], set: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, y) in set.iter_rows().enumerate() {
        let d = squared_distance(x, y);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn nn_term(za: &Matrix, zb: &Matrix, weight: f64, dza: &mut Matrix, dzb: &mut Matrix) -> Result<f64> {
    if za.rows() == 0 || zb.rows() == 0 {
        return Err(L2cdsError::Empty("nearest-neighbour batch"));
    }
    check_dim("nearest-neighbour latent width", za.cols(), zb.cols())?;
    let one_side = |from: &Matrix, to: &Matrix, d_from: &mut Matrix, d_to: &mut Matrix| -> f64 {
        let n = from.rows() as f64;
        let c = 2.0 * weight / n;
        let mut sum = 0.0;
        for i in 0..from.rows() {
            let x = from.row(i);
            let (j, d) = nearest(x, to);
            sum += d;
            if weight != 0.0 {
                let y = to.row(j).to_vec();
                for (m, (&xv, &yv)) in x.iter().zip(&y).enumerate() {
                    let g = c * (xv - yv);
                    d_from.row_mut(i)[m] += g;
                    d_to.row_mut(j)[m] -= g;
                }
            }
        }
        sum / n
    };
    let ab = one_side(za, zb, dza, dzb);
    let ba = one_side(zb, za, dzb, dza);
    Ok(ab + ba)
}

/// Symmetric nearest-neighbour loss between two latent batches:
/// `mean_a min_b ‖a − b‖² + mean_b min_a ‖a − b‖²`.
///
/// The argmin is held fixed when differentiating, so each matched pair
/// receives gradient at both endpoints.
pub fn loss_nn(latent_a: &Matrix, latent_b: &Matrix) -> Result<NnLoss> {
    let mut grad_a = Matrix::zeros(latent_a.rows(), latent_a.cols());
    let mut grad_b = Matrix::zeros(latent_b.rows(), latent_b.cols());
    let value = nn_term(latent_a, latent_b, 1.0, &mut grad_a, &mut grad_b)?;
    Ok(NnLoss { value, grad_a, grad_b })
}

/// Reconstruction loss of both autoencoders on normalised state batches,
/// noise-free.
pub fn loss_ae(model: &CorrespondenceModel, batch_a: &Matrix, batch_b: &Matrix) -> Result<(f64, ModelGrads)> {
    let mut grads = ModelGrads::zeros(model);
    let mut value = 0.0;
    for (enc, dec, batch) in [
        (Net::EncoderA, Net::DecoderA, batch_a),
        (Net::EncoderB, Net::DecoderB, batch_b),
    ] {
        if batch.rows() == 0 {
            return Err(L2cdsError::Empty("autoencoder batch"));
        }
        let encoder = model.net(enc);
        let tape = encoder.forward_tape(batch)?;
        let mut dz = Matrix::zeros(batch.rows(), model.latent_dim);
        value += ae_term(model.net(dec), tape.output(), batch, None, 1.0, grads.get_mut(dec), &mut dz)?;
        encoder.backward_tape(&tape, &dz, grads.get_mut(enc))?;
    }
    Ok((value, grads))
}

/// Latent forward-dynamics loss of one system, noise-free.
pub fn loss_fd(encoder: &Mlp, dynamics: &Mlp, batch: &TransitionBatch) -> Result<FdLoss> {
    let mut enc = Encoded::new(encoder, batch, true)?;
    let mut grad_dynamics = vec![0.0; dynamics.num_params()];
    let value = fd_term(dynamics, &enc.z_t, &enc.z_next, None, 1.0, &mut grad_dynamics, &mut enc.dz_t, &mut enc.dz_next)?;
    let mut grad_encoder = vec![0.0; encoder.num_params()];
    enc.backward(encoder, &mut grad_encoder)?;
    Ok(FdLoss {
        value,
        grad_encoder,
        grad_dynamics,
    })
}

/// Pose-velocity consistency loss of one system.
pub fn loss_pv(encoder: &Mlp, batch: &TransitionBatch) -> Result<PvLoss> {
    let mut enc = Encoded::new(encoder, batch, true)?;
    let value = pv_term(&enc.z_t, &enc.z_next, 1.0, &mut enc.dz_t, &mut enc.dz_next)?;
    let mut grad_encoder = vec![0.0; encoder.num_params()];
    enc.backward(encoder, &mut grad_encoder)?;
    Ok(PvLoss { value, grad_encoder })
}

/// Weighted composite loss over one batch per system.
///
/// With `sigma > 0`, Gaussian noise `N(0, σ²)` is added to the latent inputs
/// of the decoders (inside `L_AE`) and of `F` (inside `L_FD`). For `L_FD` the
/// noisy latent also serves as the base of the residual step, so `F` learns
/// to map perturbed latents back onto the next encoded state. Noise samples
/// are constants for differentiation. System A's noise comes from `rng_a`
/// and B's from `rng_b`, each drawing the decoder noise first, then the
/// dynamics noise.
pub fn total_loss(
    model: &CorrespondenceModel,
    batch_a: &TransitionBatch,
    batch_b: &TransitionBatch,
    weights: &LossWeights,
    sigma: f64,
    rng_a: &mut Rng,
    rng_b: &mut Rng,
) -> Result<LossOutput> {
    weights.validate()?;
    if !(sigma >= 0.0) {
        return Err(L2cdsError::InvalidArgument(format!("noise scale must be >= 0, got {sigma}")));
    }
    let l = model.latent_dim;
    let mut grads = ModelGrads::zeros(model);
    let mut enc_a = Encoded::new(&model.encoder_a, batch_a, true)?;
    let mut enc_b = Encoded::new(&model.encoder_b, batch_b, true)?;

    let (mut ae, mut fd, mut pv) = (0.0, 0.0, 0.0);
    for (dec, batch, rng, e) in [
        (Net::DecoderA, batch_a, &mut *rng_a, &mut enc_a),
        (Net::DecoderB, batch_b, &mut *rng_b, &mut enc_b),
    ] {
        let n = batch.len();
        let ae_noise = noise_matrix(n, l, sigma, rng);
        let fd_noise = noise_matrix(n, l, sigma, rng);
        ae += ae_term(
            model.net(dec),
            &e.z_t,
            &batch.s_t,
            ae_noise.as_ref(),
            weights.ae,
            grads.get_mut(dec),
            &mut e.dz_t,
        )?;
        pv += pv_term(&e.z_t, &e.z_next, weights.pv, &mut e.dz_t, &mut e.dz_next)?;
        fd += fd_term(
            &model.dynamics,
            &e.z_t,
            &e.z_next,
            fd_noise.as_ref(),
            weights.fd,
            grads.get_mut(Net::Dynamics),
            &mut e.dz_t,
            &mut e.dz_next,
        )?;
    }
    let nn = nn_term(&enc_a.z_t, &enc_b.z_t, weights.nn, &mut enc_a.dz_t, &mut enc_b.dz_t)?;

    enc_a.backward(&model.encoder_a, grads.get_mut(Net::EncoderA))?;
    enc_b.backward(&model.encoder_b, grads.get_mut(Net::EncoderB))?;

    Ok(LossOutput {
        breakdown: LossBreakdown::new(weights, ae, nn, fd, pv),
        grads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::NormalizationStats;
    use crate::nn::{grad_check, GradCheckOptions, OutputActivation};

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn nn_hand_cases() {
        assert_eq!(loss_nn(&m(&[&[0.0, 0.0]]), &m(&[&[1.0, 0.0]])).unwrap().value, 2.0);
        let v = loss_nn(&m(&[&[0.0, 0.0], &[2.0, 0.0]]), &m(&[&[1.0, 0.0]])).unwrap().value;
        assert_eq!(v, 2.0);
        let x = m(&[&[0.3, -0.2], &[0.1, 0.9], &[-0.5, 0.5]]);
        assert_eq!(loss_nn(&x, &x).unwrap().value, 0.0);
    }

    #[test]
    fn nn_ties_go_to_lowest_index() {
        // (0,0) is equidistant to both B points; the gradient lands on B[0].
        let out = loss_nn(&m(&[&[0.0, 0.0]]), &m(&[&[1.0, 0.0], &[-1.0, 0.0]])).unwrap();
        assert!(out.grad_b.row(0)[0] != 0.0);
        // B[1]'s only gradient comes from its own nearest-neighbour term.
        assert_eq!(out.grad_b.row(1)[0], -1.0);
        assert_eq!(out.grad_b.row(0)[0], 3.0);
    }

    #[test]
    fn nn_rejects_empty() {
        assert!(loss_nn(&Matrix::zeros(0, 2), &m(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn pv_closed_forms() {
        let mut dz_t = Matrix::zeros(1, 2);
        let mut dz_n = Matrix::zeros(1, 2);
        let v = pv_term(&m(&[&[0.0, 1.0]]), &m(&[&[0.0, 5.0]]), 1.0, &mut dz_t, &mut dz_n).unwrap();
        assert_eq!(v, 1.0);
        let v = pv_term(&m(&[&[0.5, 0.25]]), &m(&[&[0.75, -3.0]]), 1.0, &mut dz_t, &mut dz_n).unwrap();
        assert_eq!(v, 0.0);
        assert!(pv_term(&m(&[&[0.0, 1.0, 2.0]]), &m(&[&[0.0, 1.0, 2.0]]), 1.0, &mut dz_t, &mut dz_n).is_err());
    }

    #[test]
    fn fd_closed_forms() {
        let zero_f = Mlp::zeros(&[2, 3, 2], OutputActivation::Identity).unwrap();
        let mut g = vec![0.0; zero_f.num_params()];
        let (mut a, mut b) = (Matrix::zeros(1, 2), Matrix::zeros(1, 2));
        let v = fd_term(&zero_f, &m(&[&[0.0, 0.0]]), &m(&[&[1.0, 0.0]]), None, 1.0, &mut g, &mut a, &mut b).unwrap();
        assert_eq!(v, 1.0);
        let v = fd_term(&zero_f, &m(&[&[0.4, 0.1]]), &m(&[&[0.4, 0.1]]), None, 1.0, &mut g, &mut a, &mut b).unwrap();
        assert_eq!(v, 0.0);
    }

    fn identity_stats(dim: usize) -> NormalizationStats {
        NormalizationStats::new(vec![-1.0; dim], vec![1.0; dim]).unwrap()
    }

    #[test]
    fn ae_constant_decoder_closed_form() {
        let mut model = CorrespondenceModel::new(&[4], 2, identity_stats(2), identity_stats(3), 0).unwrap();
        // Decoder with zero weights outputs tanh(bias).
        for net in [Net::DecoderA, Net::DecoderB] {
            let p = model.net_mut(net).params_mut();
            p.iter_mut().for_each(|v| *v = 0.0);
            let len = p.len();
            p[len - 1] = 0.5f64.atanh();
        }
        let sa = m(&[&[0.1, -0.2]]);
        let sb = m(&[&[0.0, 0.3, 0.9]]);
        let (v, _) = loss_ae(&model, &sa, &sb).unwrap();
        let expect_a = 0.1f64.powi(2) + (0.5f64 + 0.2).powi(2);
        let expect_b = 0.0 + 0.3f64.powi(2) + (0.5f64 - 0.9).powi(2);
        assert!((v - expect_a - expect_b).abs() < 1e-12);
    }

    fn tiny_model(seed: u64) -> CorrespondenceModel {
        CorrespondenceModel::new(&[6, 5], 2, identity_stats(3), identity_stats(2), seed).unwrap()
    }

    fn random_batch(rows: usize, cols: usize, rng: &mut Rng) -> TransitionBatch {
        let gen = |rng: &mut Rng| {
            Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.uniform_range(-0.9, 0.9)).collect()).unwrap()
        };
        let s_t = gen(rng);
        let s_next = gen(rng);
        TransitionBatch::new(s_t, s_next).unwrap()
    }

    #[test]
    fn breakdown_identity_and_single_weight() {
        let model = tiny_model(3);
        let mut rng = Rng::new(9);
        let a = random_batch(6, 3, &mut rng);
        let b = random_batch(5, 2, &mut rng);
        let w = LossWeights::new(1.0, 0.0, 0.0, 0.0);
        let out = total_loss(&model, &a, &b, &w, 0.1, &mut Rng::new(1), &mut Rng::new(2)).unwrap();
        assert_eq!(out.breakdown.total, out.breakdown.ae);

        let w = LossWeights::new(0.7, 1.3, 1e-3, 2.0);
        let out = total_loss(&model, &a, &b, &w, 0.1, &mut Rng::new(1), &mut Rng::new(2)).unwrap();
        assert!((out.breakdown.total - out.breakdown.recombine(&w)).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_deterministic() {
        let model = tiny_model(4);
        let mut rng = Rng::new(10);
        let a = random_batch(4, 3, &mut rng);
        let b = random_batch(4, 2, &mut rng);
        let w = LossWeights::new(1.0, 1.0, 1.0, 1.0);
        let x = total_loss(&model, &a, &b, &w, 0.0, &mut Rng::new(5), &mut Rng::new(6)).unwrap();
        let y = total_loss(&model, &a, &b, &w, 0.0, &mut Rng::new(7), &mut Rng::new(8)).unwrap();
        assert_eq!(x.breakdown, y.breakdown);
        assert_eq!(x.grads, y.grads);
    }

    #[test]
    fn weight_scaling_scales_gradient_contribution() {
        let model = tiny_model(6);
        let mut rng = Rng::new(11);
        let a = random_batch(5, 3, &mut rng);
        let b = random_batch(5, 2, &mut rng);
        let base = LossWeights::new(1.0, 0.5, 0.25, 2.0);
        let scaled = LossWeights { fd: 4.0 * base.fd, ..base };
        let only_fd = LossWeights::new(0.0, 0.0, base.fd, 0.0);
        let g = |w: &LossWeights| {
            total_loss(&model, &a, &b, w, 0.0, &mut Rng::new(0), &mut Rng::new(0)).unwrap()
        };
        let (x, y, f) = (g(&base), g(&scaled), g(&only_fd));
        let (gx, gy, gf) = (x.grads.flatten(), y.grads.flatten(), f.grads.flatten());
        for i in 0..gx.len() {
            assert!((gy[i] - (gx[i] + 3.0 * gf[i])).abs() < 1e-12);
        }
        assert!((y.breakdown.total - (x.breakdown.total + 3.0 * base.fd * x.breakdown.fd)).abs() < 1e-12);
    }

    #[test]
    fn composite_gradient_matches_finite_differences() {
        let model = tiny_model(12);
        let mut rng = Rng::new(13);
        let a = random_batch(4, 3, &mut rng);
        let b = random_batch(4, 2, &mut rng);
        let w = LossWeights::new(1.0, 1.0, 0.5, 0.5);
        let sigma = 0.1;
        let eval = |p: &[f64]| {
            let mut mm = model.clone();
            mm.set_flat_params(p).unwrap();
            total_loss(&mm, &a, &b, &w, sigma, &mut Rng::new(21), &mut Rng::new(22)).unwrap()
        };
        let analytic = eval(&model.flat_params()).grads.flatten();
        let report = grad_check(&model.flat_params(), &analytic, |p| eval(p).breakdown.total, GradCheckOptions::default());
        assert!(report.passed, "{report:?}");
    }
}
