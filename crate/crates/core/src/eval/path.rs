use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::Matrix;
use crate::model::CorrespondenceModel;

/// A space a batch of vectors can live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    A,
    B,
    Latent,
}

impl Space {
    pub fn letter(self) -> char {
        match self {
            Space::A => 'A',
            Space::B => 'B',
            Space::Latent => 'L',
        }
    }

    fn from_letter(c: char) -> Option<Space> {
        match c {
            'A' | 'a' => Some(Space::A),
            'B' | 'b' => Some(Space::B),
            'L' | 'l' => Some(Space::Latent),
            _ => None,
        }
    }

    pub fn dim(self, model: &CorrespondenceModel) -> usize {
        match self {
            Space::A => model.dim_a(),
            Space::B => model.dim_b(),
            Space::Latent => model.latent_dim,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hop {
    EncodeA,
    EncodeB,
    DecodeA,
    DecodeB,
    /// `z ↦ z + F(z)`.
    LatentStep,
}

impl Hop {
    pub fn from_space(self) -> Space {
        match self {
            Hop::EncodeA => Space::A,
            Hop::EncodeB => Space::B,
            Hop::DecodeA | Hop::DecodeB | Hop::LatentStep => Space::Latent,
        }
    }

    pub fn to_space(self) -> Space {
        match self {
            Hop::DecodeA => Space::A,
            Hop::DecodeB => Space::B,
            Hop::EncodeA | Hop::EncodeB | Hop::LatentStep => Space::Latent,
        }
    }

    fn between(from: Space, to: Space) -> Option<Hop> {
        match (from, to) {
            (Space::A, Space::Latent) => Some(Hop::EncodeA),
            (Space::B, Space::Latent) => Some(Hop::EncodeB),
            (Space::Latent, Space::A) => Some(Hop::DecodeA),
            (Space::Latent, Space::B) => Some(Hop::DecodeB),
            (Space::Latent, Space::Latent) => Some(Hop::LatentStep),
            _ => None,
        }
    }

    /// Applies the hop to a batch. System-space batches are raw
    /// (unnormalised) states; encoders normalise on the way in and decoders
    /// denormalise on the way out.
    pub fn apply(self, model: &CorrespondenceModel, x: &Matrix) -> Result<Matrix> {
        check_dim("projection input width", self.from_space().dim(model), x.cols())?;
        let encode = |norm: &crate::dynsys::NormalizationStats, enc: &crate::nn::Mlp| -> Result<Matrix> {
            let mut n = Matrix::zeros(x.rows(), x.cols());
            for i in 0..x.rows() {
                norm.normalize_into(x.row(i), n.row_mut(i))?;
            }
            enc.forward(&n)
        };
        let decode = |norm: &crate::dynsys::NormalizationStats, dec: &crate::nn::Mlp| -> Result<Matrix> {
            let n = dec.forward(x)?;
            let mut out = Matrix::zeros(n.rows(), n.cols());
            for i in 0..n.rows() {
                norm.denormalize_into(n.row(i), out.row_mut(i))?;
            }
            Ok(out)
        };
        match self {
            Hop::EncodeA => encode(&model.norm_a, &model.encoder_a),
            Hop::EncodeB => encode(&model.norm_b, &model.encoder_b),
            Hop::DecodeA => decode(&model.norm_a, &model.decoder_a),
            Hop::DecodeB => decode(&model.norm_b, &model.decoder_b),
            Hop::LatentStep => {
                let mut next = model.dynamics.forward(x)?;
                next.add_assign(x)?;
                Ok(next)
            }
        }
    }
}

/// A type-checked sequence of hops, written as the sequence of spaces it
/// visits: `ALB` encodes A states and decodes them as B states, `ALLA`
/// takes one latent step in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionPath {
    start: Option<Space>,
    hops: Vec<Hop>,
}

impl ProjectionPath {
    /// The six paths of the ablation table, in column order.
    pub const TABLE: [&'static str; 6] = ["ALA", "BLB", "ALB", "BLA", "ALBLA", "BLALB"];

    pub fn empty() -> Self {
        ProjectionPath { start: None, hops: Vec::new() }
    }

    pub fn new(hops: Vec<Hop>) -> Result<Self> {
        for w in hops.windows(2) {
            if w[0].to_space() != w[1].from_space() {
                return Err(L2cdsError::IllTypedPath(format!(
                    "{:?} produces {:?} but {:?} expects {:?}",
                    w[0],
                    w[0].to_space(),
                    w[1],
                    w[1].from_space()
                )));
            }
        }
        Ok(ProjectionPath {
            start: hops.first().map(|h| h.from_space()),
            hops,
        })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let spaces = s
            .chars()
            .map(|c| Space::from_letter(c).ok_or_else(|| L2cdsError::IllTypedPath(format!("'{s}': unknown space '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        let mut hops = Vec::with_capacity(spaces.len().saturating_sub(1));
        for w in spaces.windows(2) {
            hops.push(Hop::between(w[0], w[1]).ok_or_else(|| {
                L2cdsError::IllTypedPath(format!(
                    "'{s}': no hop from {} to {}",
                    w[0].letter(),
                    w[1].letter()
                ))
            })?);
        }
        Ok(ProjectionPath {
            start: spaces.first().copied(),
            hops,
        })
    }

    pub fn table() -> Vec<ProjectionPath> {
        Self::TABLE.iter().map(|p| Self::parse(p).expect("table paths are well typed")).collect()
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn source(&self) -> Option<Space> {
        self.start
    }

    pub fn target(&self) -> Option<Space> {
        self.hops.last().map(|h| h.to_space()).or(self.start)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ProjectionPath) -> Result<Self> {
        if let (Some(end), Some(begin)) = (self.target(), next.source()) {
            if end != begin {
                return Err(L2cdsError::IllTypedPath(format!("cannot append {next} to {self}")));
            }
        }
        let mut hops = self.hops.clone();
        hops.extend_from_slice(&next.hops);
        Ok(ProjectionPath {
            start: self.start.or(next.start),
            hops,
        })
    }
}

impl fmt::Display for ProjectionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.start {
            write!(f, "{}", s.letter())?;
        }
        for h in &self.hops {
            write!(f, "{}", h.to_space().letter())?;
        }
        Ok(())
    }
}

impl FromStr for ProjectionPath {
    type Err = L2cdsError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Applies `path` to a batch, noise-free. An empty path is the identity.
pub fn project(model: &CorrespondenceModel, path: &ProjectionPath, states: &Matrix) -> Result<Matrix> {
    if let Some(src) = path.source() {
        if src.dim(model) != states.cols() {
            return Err(L2cdsError::IllTypedPath(format!(
                "path {path} starts in {} (width {}) but input has width {}",
                src.letter(),
                src.dim(model),
                states.cols()
            )));
        }
    }
    let mut x = states.clone();
    for hop in path.hops() {
        x = hop.apply(model, &x)?;
    }
    Ok(x)
}
