use serde::{Deserialize, Serialize};

use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::{gemm, Matrix};
use crate::rng::Rng;

/// Activation applied after the last layer. Hidden layers always use ReLU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// `tanh`, keeping every output in `(-1, 1)`.
    Tanh,
    Identity,
}

/// A dense feed-forward network.
///
/// All parameters live in one flat buffer. Layer `l` (mapping `n_in -> n_out`)
/// contributes an `n_in x n_out` row-major weight block followed by `n_out`
/// biases, so a batch `X` (rows are samples) maps to `X·W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    output: OutputActivation,
    params: Vec<f64>,
}

/// Layer activations recorded by [`Mlp::forward_tape`]: `acts[0]` is the
/// input batch and `acts[l + 1]` the output of layer `l`.
#[derive(Clone, Debug)]
pub struct Tape {
    acts: Vec<Matrix>,
}

impl Tape {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("tape holds at least the input")
    }

    pub fn input(&self) -> &Matrix {
        &self.acts[0]
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Network with every parameter zero.
    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(L2cdsError::InvalidArgument(format!(
                "an MLP needs at least two positive layer sizes, got {sizes:?}"
            )));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            output,
            params: vec![0.0; param_count(sizes)],
        })
    }

    /// Random initialisation: biases are zero; a layer with fan-in `n` feeding
    /// a ReLU draws weights from `U(-√(6/n), √(6/n))`, the output layer from
    /// `U(-√(3/n), √(3/n))`.
    pub fn init(sizes: &[usize], output: OutputActivation, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(sizes, output)?;
        let last = net.num_layers() - 1;
        let mut offset = 0;
        for l in 0..net.num_layers() {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let bound = Self::init_bound(n_in, l == last);
            for w in &mut net.params[offset..offset + n_in * n_out] {
                *w = rng.uniform_range(-bound, bound);
            }
            offset += n_in * n_out + n_out;
        }
        Ok(net)
    }

    /// Weight bound used by [`Mlp::init`].
    pub fn init_bound(fan_in: usize, output_layer: bool) -> f64 {
        let gain = if output_layer { 3.0 } else { 6.0 };
        (gain / fan_in as f64).sqrt()
    }

    pub fn from_parts(sizes: Vec<usize>, output: OutputActivation, params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(&sizes, output)?;
        check_dim("mlp parameters", net.params.len(), params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(L2cdsError::InvalidArgument("MLP parameters must be finite".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.num_layers());
        let mut o = 0;
        for w in self.sizes.windows(2) {
            offsets.push(o);
            o += w[0] * w[1] + w[1];
        }
        offsets
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        check_dim("mlp input width", self.input_dim(), x.cols())?;
        let offsets = self.layer_offsets();
        let mut h = x.clone();
        for (l, &off) in offsets.iter().enumerate().take(self.num_layers()) {
            h = self.layer_forward(l, off, &h);
        }
        Ok(h)
    }

    /// Forward pass that keeps every layer activation for [`Mlp::backward_tape`].
    pub fn forward_tape(&self, x: &Matrix) -> Result<Tape> {
        check_dim("mlp input width", self.input_dim(), x.cols())?;
        let offsets = self.layer_offsets();
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.clone());
        for l in 0..self.num_layers() {
            let next = self.layer_forward(l, offsets[l], &acts[l]);
            acts.push(next);
        }
        Ok(Tape { acts })
    }

    fn layer_forward(&self, l: usize, offset: usize, h: &Matrix) -> Matrix {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[offset..offset + n_in * n_out];
        let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        let mut out = Matrix::zeros(h.rows(), n_out);
        for i in 0..h.rows() {
            out.row_mut(i).copy_from_slice(b);
        }
        gemm(1.0, h.as_slice(), (h.rows(), n_in), false, w, (n_in, n_out), false, 1.0, out.as_mut_slice());
        let last = l + 1 == self.num_layers();
        match (last, self.output) {
            (false, _) => out.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0)),
            (true, OutputActivation::Tanh) => out.as_mut_slice().iter_mut().for_each(|v| *v = v.tanh()),
            (true, OutputActivation::Identity) => {}
        }
        out
    }

    /// Reverse pass: accumulates the parameter gradient of `⟨upstream, output⟩`
    /// into `grad` and returns the gradient with respect to the input batch.
    ///
    /// The ReLU derivative at exactly zero is taken as zero.
    pub fn backward_tape(&self, tape: &Tape, upstream: &Matrix, grad: &mut [f64]) -> Result<Matrix> {
        check_dim("mlp gradient buffer", self.params.len(), grad.len())?;
        check_dim("mlp tape depth", self.sizes.len(), tape.acts.len())?;
        let out = tape.output();
        check_dim("upstream rows", out.rows(), upstream.rows())?;
        check_dim("upstream cols", out.cols(), upstream.cols())?;

        let offsets = self.layer_offsets();
        let n = upstream.rows();
        let mut delta = upstream.clone();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let act = &tape.acts[l + 1];
            let last = l + 1 == self.num_layers();
            match (last, self.output) {
                (false, _) => {
                    for (d, &a) in delta.as_mut_slice().iter_mut().zip(act.as_slice()) {
                        if a <= 0.0 {
                            *d = 0.0;
                        }
                    }
                }
                (true, OutputActivation::Tanh) => {
                    for (d, &a) in delta.as_mut_slice().iter_mut().zip(act.as_slice()) {
                        *d *= 1.0 - a * a;
                    }
                }
                (true, OutputActivation::Identity) => {}
            }

            let input = &tape.acts[l];
            let offset = offsets[l];
            let (gw, rest) = grad[offset..offset + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            gemm(1.0, input.as_slice(), (n, n_in), true, delta.as_slice(), (n, n_out), false, 1.0, gw);
            for row in delta.iter_rows() {
                for (gb, d) in rest.iter_mut().zip(row) {
                    *gb += d;
                }
            }

            let w = &self.params[offset..offset + n_in * n_out];
            let mut prev = Matrix::zeros(n, n_in);
            gemm(1.0, delta.as_slice(), (n, n_out), false, w, (n_in, n_out), true, 0.0, prev.as_mut_slice());
            delta = prev;
        }
        Ok(delta)
    }

    /// Parameter and input gradients of `⟨upstream, net(x)⟩`.
    pub fn backward(&self, x: &Matrix, upstream: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        let tape = self.forward_tape(x)?;
        let mut grad = vec![0.0; self.params.len()];
        let dx = self.backward_tape(&tape, upstream, &mut grad)?;
        Ok((grad, dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn parameter_count() {
        let net = Mlp::init(&[2, 4, 3], OutputActivation::Identity, &mut Rng::new(0)).unwrap();
        assert_eq!(net.num_params(), 27);
    }

    #[test]
    fn init_is_deterministic() {
        let a = Mlp::init(&[3, 8, 8, 2], OutputActivation::Tanh, &mut Rng::new(4)).unwrap();
        let b = Mlp::init(&[3, 8, 8, 2], OutputActivation::Tanh, &mut Rng::new(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_sizes() {
        assert!(Mlp::zeros(&[3], OutputActivation::Tanh).is_err());
        assert!(Mlp::zeros(&[3, 0, 2], OutputActivation::Tanh).is_err());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 5, 2], OutputActivation::Identity).unwrap();
        let y = net.forward(&random_matrix(4, 3, &mut Rng::new(1))).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tanh_output_stays_in_open_interval() {
        let mut net = Mlp::zeros(&[1, 2], OutputActivation::Tanh).unwrap();
        net.params_mut()[0] = 1e3;
        net.params_mut()[1] = -1e3;
        let y = net.forward(&Matrix::from_rows(&[[1.0], [-1.0]]).unwrap()).unwrap();
        assert!(y.as_slice().iter().all(|v| v.abs() <= 1.0 && v.is_finite()));
        assert!(y.as_slice().iter().all(|v| v.abs() > 0.999));
    }

    #[test]
    fn single_affine_layer_matches_hand_multiply() {
        // W = [[1, 2], [3, 4]] (in x out), b = [0.5, -1]
        let net = Mlp::from_parts(vec![2, 2], OutputActivation::Identity, vec![1.0, 2.0, 3.0, 4.0, 0.5, -1.0])
            .unwrap();
        let y = net.forward(&Matrix::from_rows(&[[1.0, -1.0], [2.0, 0.5]]).unwrap()).unwrap();
        // [1, -1]·W + b = [1 - 3, 2 - 4] + b = [-1.5, -3]
        // [2, 0.5]·W + b = [2 + 1.5, 4 + 2] + b = [4, 5]
        assert_eq!(y.to_rows(), vec![vec![-1.5, -3.0], vec![4.0, 5.0]]);

        let up = Matrix::from_rows(&[[1.0, 0.0], [0.5, -2.0]]).unwrap();
        let (grad, dx) = net.backward(&Matrix::from_rows(&[[1.0, -1.0], [2.0, 0.5]]).unwrap(), &up).unwrap();
        // dx = up · Wᵀ
        assert_eq!(dx.to_rows(), vec![vec![1.0, 3.0], vec![0.5 - 4.0, 1.5 - 8.0]]);
        // db = column sums of upstream
        assert_eq!(&grad[4..], &[1.5, -2.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = Rng::new(2);
        let net = Mlp::init(&[3, 6, 6, 2], OutputActivation::Tanh, &mut rng).unwrap();
        let x = random_matrix(5, 3, &mut rng);
        let (g, dx) = net.backward(&x, &Matrix::zeros(5, 2)).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert!(dx.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = Rng::new(5);
        for output in [OutputActivation::Tanh, OutputActivation::Identity] {
            let net = Mlp::init(&[3, 7, 5, 2], output, &mut rng).unwrap();
            let x = random_matrix(4, 3, &mut rng);
            let up = random_matrix(4, 2, &mut rng);
            let objective = |n: &Mlp, x: &Matrix| -> f64 {
                let y = n.forward(x).unwrap();
                y.as_slice().iter().zip(up.as_slice()).map(|(a, b)| a * b).sum()
            };
            let (grad, dx) = net.backward(&x, &up).unwrap();
            let h = 1e-5;
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
            for (i, &g) in grad.iter().enumerate() {
                let (mut plus, mut minus) = (net.clone(), net.clone());
                plus.params_mut()[i] += h;
                minus.params_mut()[i] -= h;
                let fd = (objective(&plus, &x) - objective(&minus, &x)) / (2.0 * h);
                assert!(rel(g, fd) < 1e-4, "param {i}: {g} vs {fd}");
            }
            for i in 0..x.as_slice().len() {
                let (mut plus, mut minus) = (x.clone(), x.clone());
                plus.as_mut_slice()[i] += h;
                minus.as_mut_slice()[i] -= h;
                let fd = (objective(&net, &plus) - objective(&net, &minus)) / (2.0 * h);
                assert!(rel(dx.as_slice()[i], fd) < 1e-4);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn backward_is_linear_in_upstream(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = Rng::new(seed);
            let net = Mlp::init(&[3, 6, 4, 2], OutputActivation::Tanh, &mut rng).unwrap();
            let x = random_matrix(5, 3, &mut rng);
            let u1 = random_matrix(5, 2, &mut rng);
            let u2 = random_matrix(5, 2, &mut rng);
            let mut combo = u1.clone();
            combo.scale(a);
            let mut scaled = u2.clone();
            scaled.scale(b);
            combo.add_assign(&scaled).unwrap();

            let (g1, d1) = net.backward(&x, &u1).unwrap();
            let (g2, d2) = net.backward(&x, &u2).unwrap();
            let (gc, dc) = net.backward(&x, &combo).unwrap();
            for i in 0..gc.len() {
                prop_assert!((gc[i] - (a * g1[i] + b * g2[i])).abs() < 1e-10);
            }
            for i in 0..dc.as_slice().len() {
                let expect = a * d1.as_slice()[i] + b * d2.as_slice()[i];
                prop_assert!((dc.as_slice()[i] - expect).abs() < 1e-10);
            }
        }

        #[test]
        fn directional_derivative_matches(seed in 0u64..10_000) {
            let mut rng = Rng::new(seed);
            let net = Mlp::init(&[4, 8, 8, 3], OutputActivation::Tanh, &mut rng).unwrap();
            let x = random_matrix(3, 4, &mut rng);
            let dir = random_matrix(3, 4, &mut rng);
            let up = random_matrix(3, 3, &mut rng);
            let f = |x: &Matrix| -> f64 {
                net.forward(x).unwrap().as_slice().iter().zip(up.as_slice()).map(|(a, b)| a * b).sum()
            };
            let (_, dx) = net.backward(&x, &up).unwrap();
            let analytic: f64 = dx.as_slice().iter().zip(dir.as_slice()).map(|(a, b)| a * b).sum();
            let h = 1e-5;
            let shift = |s: f64| {
                let mut m = x.clone();
                for (v, d) in m.as_mut_slice().iter_mut().zip(dir.as_slice()) {
                    *v += s * d;
                }
                m
            };
            let fd = (f(&shift(h)) - f(&shift(-h))) / (2.0 * h);
            prop_assert!((analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6) < 1e-4);
        }

        #[test]
        fn init_respects_documented_bound(seed in 0u64..10_000, hidden in 1usize..40, input in 1usize..10) {
            let net = Mlp::init(&[input, hidden, 3], OutputActivation::Tanh, &mut Rng::new(seed)).unwrap();
            let p = net.params();
            let b0 = Mlp::init_bound(input, false);
            prop_assert!(p[..input * hidden].iter().all(|w| w.abs() <= b0));
            prop_assert!(p[input * hidden..input * hidden + hidden].iter().all(|&b| b == 0.0));
            let off = input * hidden + hidden;
            let b1 = Mlp::init_bound(hidden, true);
            prop_assert!(p[off..off + hidden * 3].iter().all(|w| w.abs() <= b1));
        }
    }
}
