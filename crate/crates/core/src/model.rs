//! The five learned networks that make up a correspondence model.

use serde::{Deserialize, Serialize};

use crate::dynsys::NormalizationStats;
use crate::error::{check_dim, L2cdsError, Result};
use crate::nn::{Mlp, OutputActivation};
use crate::rng::{streams, Rng};

/// Identifies one of the five networks; also the fixed order used whenever
/// the model's parameters are treated as one concatenated vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Net {
    EncoderA,
    DecoderA,
    EncoderB,
    DecoderB,
    Dynamics,
}

impl Net {
    pub const ALL: [Net; 5] = [Net::EncoderA, Net::DecoderA, Net::EncoderB, Net::DecoderB, Net::Dynamics];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Net::EncoderA => "encoder_a",
            Net::DecoderA => "decoder_a",
            Net::EncoderB => "encoder_b",
            Net::DecoderB => "decoder_b",
            Net::Dynamics => "dynamics",
        }
    }

    fn init_stream(self) -> u64 {
        match self {
            Net::EncoderA => streams::INIT_ENCODER_A,
            Net::DecoderA => streams::INIT_DECODER_A,
            Net::EncoderB => streams::INIT_ENCODER_B,
            Net::DecoderB => streams::INIT_DECODER_B,
            Net::Dynamics => streams::INIT_DYNAMICS,
        }
    }
}

/// A latent state `s' = (θ', θ̇')`, pose followed by velocity, each of length k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentState(pub Vec<f64>);

impl LatentState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(L2cdsError::InvalidArgument(format!(
                "latent dimension must be even and positive, got {}",
                values.len()
            )));
        }
        Ok(LatentState(values))
    }

    pub fn k(&self) -> usize {
        self.0.len() / 2
    }

    pub fn pose(&self) -> &[f64] {
        &self.0[..self.k()]
    }

    pub fn velocity(&self) -> &[f64] {
        &self.0[self.k()..]
    }
}

/// Encoders and decoders for systems A and B plus the shared latent
/// dynamics `F`, with the normalisation bounds each system was trained with.
///
/// Encoders and decoders end in `tanh`; `F` has an identity output because it
/// predicts a displacement `s'_{t+1} - s'_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceModel {
    pub encoder_a: Mlp,
    pub decoder_a: Mlp,
    pub encoder_b: Mlp,
    pub decoder_b: Mlp,
    pub dynamics: Mlp,
    pub latent_dim: usize,
    pub norm_a: NormalizationStats,
    pub norm_b: NormalizationStats,
}

/// One gradient buffer per network, laid out like [`Mlp::params`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGrads {
    pub nets: [Vec<f64>; 5],
}

impl ModelGrads {
    pub fn zeros(model: &CorrespondenceModel) -> Self {
        ModelGrads {
            nets: Net::ALL.map(|n| vec![0.0; model.net(n).num_params()]),
        }
    }

    pub fn get(&self, net: Net) -> &[f64] {
        &self.nets[net.index()]
    }

    pub fn get_mut(&mut self, net: Net) -> &mut [f64] {
        &mut self.nets[net.index()]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.nets.concat()
    }

    pub fn scale(&mut self, factor: f64) {
        self.nets.iter_mut().flatten().for_each(|g| *g *= factor);
    }

    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (a, b) in self.nets.iter_mut().zip(&other.nets) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

impl CorrespondenceModel {
    /// Randomly initialised model. Each network draws from its own stream of
    /// `seed`, so e.g. changing B's state dimension leaves A's networks as is.
    pub fn new(
        hidden: &[usize],
        latent_dim: usize,
        norm_a: NormalizationStats,
        norm_b: NormalizationStats,
        seed: u64,
    ) -> Result<Self> {
        if latent_dim == 0 || !latent_dim.is_multiple_of(2) {
            return Err(L2cdsError::InvalidArgument(format!(
                "latent dimension must be even and positive, got {latent_dim}"
            )));
        }
        if hidden.is_empty() {
            return Err(L2cdsError::InvalidArgument("at least one hidden layer is required".into()));
        }
        let (da, db) = (norm_a.dim(), norm_b.dim());
        let sizes = |input: usize, output: usize| -> Vec<usize> {
            let mut s = vec![input];
            s.extend_from_slice(hidden);
            s.push(output);
            s
        };
        let make = |net: Net, input: usize, output: usize, act: OutputActivation| {
            Mlp::init(&sizes(input, output), act, &mut Rng::with_stream(seed, net.init_stream()))
        };
        Ok(CorrespondenceModel {
            encoder_a: make(Net::EncoderA, da, latent_dim, OutputActivation::Tanh)?,
            decoder_a: make(Net::DecoderA, latent_dim, da, OutputActivation::Tanh)?,
            encoder_b: make(Net::EncoderB, db, latent_dim, OutputActivation::Tanh)?,
            decoder_b: make(Net::DecoderB, latent_dim, db, OutputActivation::Tanh)?,
            dynamics: make(Net::Dynamics, latent_dim, latent_dim, OutputActivation::Identity)?,
            latent_dim,
            norm_a,
            norm_b,
        })
    }

    pub fn k(&self) -> usize {
        self.latent_dim / 2
    }

    pub fn dim_a(&self) -> usize {
        self.norm_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.norm_b.dim()
    }

    pub fn net(&self, net: Net) -> &Mlp {
        match net {
            Net::EncoderA => &self.encoder_a,
            Net::DecoderA => &self.decoder_a,
            Net::EncoderB => &self.encoder_b,
            Net::DecoderB => &self.decoder_b,
            Net::Dynamics => &self.dynamics,
        }
    }

    pub fn net_mut(&mut self, net: Net) -> &mut Mlp {
        match net {
            Net::EncoderA => &mut self.encoder_a,
            Net::DecoderA => &mut self.decoder_a,
            Net::EncoderB => &mut self.encoder_b,
            Net::DecoderB => &mut self.decoder_b,
            Net::Dynamics => &mut self.dynamics,
        }
    }

    pub fn num_params(&self) -> usize {
        Net::ALL.iter().map(|&n| self.net(n).num_params()).sum()
    }

    /// All parameters concatenated in [`Net::ALL`] order.
    pub fn flat_params(&self) -> Vec<f64> {
        Net::ALL.iter().flat_map(|&n| self.net(n).params().iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        check_dim("model parameters", self.num_params(), flat.len())?;
        let mut offset = 0;
        for n in Net::ALL {
            let p = self.net_mut(n).params_mut();
            let len = p.len();
            p.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// Checks the width contracts between the networks.
    pub fn validate(&self) -> Result<()> {
        let l = self.latent_dim;
        if l == 0 || !l.is_multiple_of(2) {
            return Err(L2cdsError::InvalidArgument(format!("odd latent dimension {l}")));
        }
        check_dim("encoder A input", self.dim_a(), self.encoder_a.input_dim())?;
        check_dim("encoder A output", l, self.encoder_a.output_dim())?;
        check_dim("decoder A input", l, self.decoder_a.input_dim())?;
        check_dim("decoder A output", self.dim_a(), self.decoder_a.output_dim())?;
        check_dim("encoder B input", self.dim_b(), self.encoder_b.input_dim())?;
        check_dim("encoder B output", l, self.encoder_b.output_dim())?;
        check_dim("decoder B input", l, self.decoder_b.input_dim())?;
        check_dim("decoder B output", self.dim_b(), self.decoder_b.output_dim())?;
        check_dim("dynamics input", l, self.dynamics.input_dim())?;
        check_dim("dynamics output", l, self.dynamics.output_dim())?;
        for n in [Net::EncoderA, Net::DecoderA, Net::EncoderB, Net::DecoderB] {
            if self.net(n).output_activation() != OutputActivation::Tanh {
                return Err(L2cdsError::InvalidArgument(format!("{} must have a tanh output", n.name())));
            }
        }
        if self.dynamics.output_activation() != OutputActivation::Identity {
            return Err(L2cdsError::InvalidArgument("dynamics must have an identity output".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(dim: usize) -> NormalizationStats {
        NormalizationStats::new(vec![-1.0; dim], vec![1.0; dim]).unwrap()
    }

    #[test]
    fn widths_follow_systems_and_latent() {
        let m = CorrespondenceModel::new(&[8, 8], 4, stats(3), stats(5), 1).unwrap();
        m.validate().unwrap();
        assert_eq!(m.encoder_a.sizes(), &[3, 8, 8, 4]);
        assert_eq!(m.decoder_b.sizes(), &[4, 8, 8, 5]);
        assert_eq!(m.dynamics.sizes(), &[4, 8, 8, 4]);
    }

    #[test]
    fn odd_latent_is_rejected() {
        assert!(CorrespondenceModel::new(&[8], 3, stats(2), stats(2), 0).is_err());
        assert!(LatentState::new(vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn flat_params_round_trip() {
        let mut m = CorrespondenceModel::new(&[4], 2, stats(2), stats(3), 5).unwrap();
        let mut flat = m.flat_params();
        flat.iter_mut().for_each(|p| *p += 1.0);
        m.set_flat_params(&flat).unwrap();
        assert_eq!(m.flat_params(), flat);
    }

    #[test]
    fn latent_split() {
        let s = LatentState::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.pose(), &[1.0, 2.0]);
        assert_eq!(s.velocity(), &[3.0, 4.0]);
    }
}
