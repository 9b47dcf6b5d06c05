use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NormalizationStats, State, SystemSpec};
use crate::error::{check_dim, L2cdsError, Result};
use crate::linalg::Matrix;
use crate::rng::{streams, Rng};

pub const DATASET_FORMAT: &str = "l2cds-dataset";
pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionPair {
    pub s_t: State,
    pub s_next: State,
}

/// Transition tuples of one system, stored unnormalised, with the
/// normalisation bounds of every visited state.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDataset {
    pub system: SystemSpec,
    pub horizon: usize,
    pub resets: usize,
    pub seed: u64,
    pub reset_noise: f64,
    pub action_noise: f64,
    pub pairs: Vec<TransitionPair>,
    pub norm: NormalizationStats,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectOptions {
    pub horizon: usize,
    pub resets: usize,
    pub reset_noise: f64,
    pub action_noise: f64,
    pub seed: u64,
}

impl CollectOptions {
    pub const DEFAULT_RESET_NOISE: f64 = 0.1;
    pub const DEFAULT_ACTION_NOISE: f64 = 0.5;

    pub fn new(horizon: usize, resets: usize, seed: u64) -> Self {
        CollectOptions {
            horizon,
            resets,
            reset_noise: Self::DEFAULT_RESET_NOISE,
            action_noise: Self::DEFAULT_ACTION_NOISE,
            seed,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.reset_noise = 0.0;
        self.action_noise = 0.0;
        self
    }
}

/// Simulates `resets` trajectories of `horizon` transitions each.
///
/// Trajectory `r` draws all of its randomness (reset perturbation, then one
/// Gaussian torque sample per actuated joint per step) from its own stream
/// `(seed, TRAJECTORY_BASE + r)`, so the result is independent of the order
/// trajectories are simulated in.
pub fn collect_dataset(system: &SystemSpec, opts: CollectOptions) -> Result<TrajectoryDataset> {
    system.validate()?;
    if opts.horizon == 0 || opts.resets == 0 {
        return Err(L2cdsError::InvalidArgument("horizon and resets must be at least 1".into()));
    }
    if !(opts.reset_noise >= 0.0 && opts.action_noise >= 0.0) {
        return Err(L2cdsError::InvalidArgument("noise scales must be non-negative".into()));
    }

    let action_dim = system.kind.action_dim();
    let mut torque = vec![0.0; action_dim];
    let mut pairs = Vec::with_capacity(opts.horizon * opts.resets);
    for r in 0..opts.resets {
        let mut rng = Rng::with_stream(opts.seed, streams::TRAJECTORY_BASE + r as u64);
        let mut s = system.sample_reset(opts.reset_noise, &mut rng);
        for t in 0..opts.horizon {
            rng.fill_gaussian(&mut torque, opts.action_noise);
            let next = system.step_with_torque_noise(&s, &torque).map_err(|e| match e {
                L2cdsError::NumericalBlowup(msg) => L2cdsError::NumericalBlowup(format!(
                    "trajectory {r}, step {t}: {msg}"
                )),
                other => other,
            })?;
            pairs.push(TransitionPair {
                s_t: s,
                s_next: next.clone(),
            });
            s = next;
        }
    }

    let norm = NormalizationStats::from_states(
        pairs
            .iter()
            .map(|p| p.s_t.as_slice())
            .chain(pairs.iter().map(|p| p.s_next.as_slice())),
    )?;
    Ok(TrajectoryDataset {
        system: system.clone(),
        horizon: opts.horizon,
        resets: opts.resets,
        seed: opts.seed,
        reset_noise: opts.reset_noise,
        action_noise: opts.action_noise,
        pairs,
        norm,
    })
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    format_version: u32,
    system: SystemSpec,
    horizon: usize,
    resets: usize,
    seed: u64,
    reset_noise: f64,
    action_noise: f64,
    norm: NormalizationStats,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    trajectory: usize,
    t: usize,
    s: State,
    s_next: State,
}

impl TrajectoryDataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.system.state_dim()
    }

    /// Pairs of trajectory `r`.
    pub fn trajectory(&self, r: usize) -> &[TransitionPair] {
        &self.pairs[r * self.horizon..(r + 1) * self.horizon]
    }

    /// Checks the count and chaining invariants.
    pub fn validate(&self) -> Result<()> {
        if self.pairs.len() != self.horizon * self.resets {
            return Err(L2cdsError::malformed(
                "dataset",
                format!("{} pairs but horizon {} x resets {}", self.pairs.len(), self.horizon, self.resets),
            ));
        }
        let dim = self.state_dim();
        check_dim("dataset normalization", dim, self.norm.dim())?;
        for p in &self.pairs {
            check_dim("dataset state", dim, p.s_t.dim())?;
            check_dim("dataset state", dim, p.s_next.dim())?;
        }
        for r in 0..self.resets {
            for w in self.trajectory(r).windows(2) {
                if w[0].s_next != w[1].s_t {
                    return Err(L2cdsError::malformed("dataset", format!("trajectory {r} is not chained")));
                }
            }
        }
        Ok(())
    }

    pub fn normalized_pair(&self, i: usize, s_t: &mut [f64], s_next: &mut [f64]) -> Result<()> {
        let p = &self.pairs[i];
        self.norm.normalize_into(&p.s_t.0, s_t)?;
        self.norm.normalize_into(&p.s_next.0, s_next)
    }

    /// Deterministic subsample of `n` distinct `s_t` states (all of them if
    /// the dataset is smaller), chosen by a partial Fisher–Yates shuffle.
    pub fn sample_states(&self, n: usize, seed: u64) -> Vec<State> {
        let mut idx: Vec<usize> = (0..self.pairs.len()).collect();
        let n = n.min(idx.len());
        let mut rng = Rng::with_stream(seed, streams::EVAL);
        for i in 0..n {
            let j = i + rng.index(idx.len() - i);
            idx.swap(i, j);
        }
        idx[..n].iter().map(|&i| self.pairs[i].s_t.clone()).collect()
    }

    /// Raw states as matrix rows.
    pub fn states_matrix(states: &[State]) -> Result<Matrix> {
        Matrix::from_rows(&states.iter().map(State::as_slice).collect::<Vec<_>>())
    }

    pub fn write_jsonl(&self, w: &mut impl Write) -> Result<()> {
        let header = Header {
            format: DATASET_FORMAT.to_string(),
            format_version: DATASET_FORMAT_VERSION,
            system: self.system.clone(),
            horizon: self.horizon,
            resets: self.resets,
            seed: self.seed,
            reset_noise: self.reset_noise,
            action_noise: self.action_noise,
            norm: self.norm.clone(),
        };
        let io = |e| L2cdsError::malformed("dataset output", e);
        serde_json::to_writer(&mut *w, &header).map_err(io)?;
        w.write_all(b"\n").map_err(|e| L2cdsError::malformed("dataset output", e))?;
        for (i, p) in self.pairs.iter().enumerate() {
            let rec = PairRecord {
                trajectory: i / self.horizon,
                t: i % self.horizon,
                s: p.s_t.clone(),
                s_next: p.s_next.clone(),
            };
            serde_json::to_writer(&mut *w, &rec).map_err(io)?;
            w.write_all(b"\n").map_err(|e| L2cdsError::malformed("dataset output", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| L2cdsError::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| L2cdsError::io(path, e))
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| L2cdsError::malformed("dataset", "missing header line"))?
            .map_err(|e| L2cdsError::malformed("dataset", e))?;
        let header: Header =
            serde_json::from_str(&header_line).map_err(|e| L2cdsError::malformed("dataset header", e))?;
        if header.format != DATASET_FORMAT {
            return Err(L2cdsError::malformed("dataset header", format!("unknown format '{}'", header.format)));
        }
        if header.format_version != DATASET_FORMAT_VERSION {
            return Err(L2cdsError::VersionMismatch {
                what: "dataset",
                expected: DATASET_FORMAT_VERSION,
                found: header.format_version,
            });
        }
        let mut pairs = Vec::with_capacity(header.horizon.saturating_mul(header.resets).min(1 << 24));
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| L2cdsError::malformed("dataset", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: PairRecord = serde_json::from_str(&line)
                .map_err(|e| L2cdsError::malformed("dataset record", format!("line {}: {e}", n + 2)))?;
            pairs.push(TransitionPair {
                s_t: rec.s,
                s_next: rec.s_next,
            });
        }
        let ds = TrajectoryDataset {
            system: header.system,
            horizon: header.horizon,
            resets: header.resets,
            seed: header.seed,
            reset_noise: header.reset_noise,
            action_noise: header.action_noise,
            pairs,
            norm: header.norm,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| L2cdsError::io(path, e))?;
        Self::read_jsonl(BufReader::new(file))
    }
}
