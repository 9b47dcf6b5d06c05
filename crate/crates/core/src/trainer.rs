//! Training loop, configuration, batch sampling and checkpoints.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::dynsys::{NormalizationStats, TrajectoryDataset};
use crate::error::{check_dim, L2cdsError, Result};
use crate::eval::msnn_rows;
use crate::linalg::Matrix;
use crate::losses::{total_loss, LossBreakdown, LossWeights, TransitionBatch};
use crate::model::{CorrespondenceModel, Net};
use crate::nn::{Mlp, OptimizerState, RAdamConfig};
use crate::rng::{streams, Rng};

pub const CONFIG_FORMAT_VERSION: u32 = 1;
pub const CHECKPOINT_FORMAT: &str = "l2cds-checkpoint";
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// Training hyperparameters. Serialised as a flat TOML table:
///
/// ```toml
/// format_version = 1
/// lambda_ae = 1.0
/// lambda_nn = 1.0
/// lambda_fd = 1.0
/// lambda_pv = 1.0
/// sigma = 0.01
/// batch_size = 256
/// steps = 20000
/// learning_rate = 3e-4
/// hidden = [64, 64]
/// latent_k = 1
/// seed = 0
/// eval_every = 500
/// monitor_states = 256
/// ```
///
/// Every key is optional and falls back to [`TrainConfig::default`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub format_version: u32,
    pub lambda_ae: f64,
    pub lambda_nn: f64,
    pub lambda_fd: f64,
    pub lambda_pv: f64,
    /// Standard deviation of the latent noise fed to decoders and `F`.
    pub sigma: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    /// Latent dimension is `2 * latent_k`.
    pub latent_k: usize,
    pub seed: u64,
    /// Log interval in steps.
    pub eval_every: usize,
    /// States per system used for the MSNN snapshot in the log; 0 disables it.
    pub monitor_states: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            format_version: CONFIG_FORMAT_VERSION,
            lambda_ae: 1.0,
            lambda_nn: 1.0,
            lambda_fd: 1.0,
            lambda_pv: 1.0,
            sigma: 0.01,
            batch_size: 256,
            steps: 20_000,
            learning_rate: 3e-4,
            hidden: vec![64, 64],
            latent_k: 1,
            seed: 0,
            eval_every: 500,
            monitor_states: 256,
        }
    }
}

/// Named configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Mirrored wedge pair.
    Wedge,
    /// Pendulum and two-link arm sharing a drive period.
    Periodic,
    /// Weights of the walker/pendulum experiment.
    WalkerPendulum,
    /// Weights of the walker/ostrich experiment.
    WalkerOstrich,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Wedge, Preset::Periodic, Preset::WalkerPendulum, Preset::WalkerOstrich];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Wedge => "wedge",
            Preset::Periodic => "periodic",
            Preset::WalkerPendulum => "walker-pendulum",
            Preset::WalkerOstrich => "walker-ostrich",
        }
    }

    pub fn config(self) -> TrainConfig {
        let base = TrainConfig::default();
        match self {
            Preset::Wedge => TrainConfig {
                lambda_ae: 1.0,
                lambda_nn: 1.0,
                lambda_fd: 10.0,
                lambda_pv: 1.0,
                sigma: 0.04,
                batch_size: 128,
                steps: 6_000,
                learning_rate: 3e-3,
                hidden: vec![32, 32],
                latent_k: 1,
                eval_every: 500,
                ..base
            },
            Preset::Periodic => TrainConfig {
                lambda_ae: 1.0,
                lambda_nn: 1.0,
                lambda_fd: 1.0,
                lambda_pv: 1.0,
                sigma: 0.02,
                batch_size: 256,
                steps: 6_000,
                learning_rate: 1e-3,
                hidden: vec![64, 64],
                latent_k: 1,
                eval_every: 500,
                ..base
            },
            Preset::WalkerPendulum => TrainConfig {
                lambda_ae: 1.0,
                lambda_nn: 1.0,
                lambda_fd: 1e-3,
                lambda_pv: 1e-3,
                sigma: 1e-1,
                latent_k: 1,
                ..base
            },
            Preset::WalkerOstrich => TrainConfig {
                lambda_ae: 1.0,
                lambda_nn: 1.0,
                lambda_fd: 1e3,
                lambda_pv: 1e3,
                sigma: 5e-3,
                latent_k: 4,
                ..base
            },
        }
    }
}

impl FromStr for Preset {
    type Err = L2cdsError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                L2cdsError::InvalidArgument(format!("unknown preset '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

impl TrainConfig {
    pub fn weights(&self) -> LossWeights {
        LossWeights::new(self.lambda_ae, self.lambda_nn, self.lambda_fd, self.lambda_pv)
    }

    pub fn set_weights(&mut self, w: LossWeights) {
        self.lambda_ae = w.ae;
        self.lambda_nn = w.nn;
        self.lambda_fd = w.fd;
        self.lambda_pv = w.pv;
    }

    pub fn latent_dim(&self) -> usize {
        2 * self.latent_k
    }

    pub fn optimizer(&self) -> RAdamConfig {
        RAdamConfig {
            learning_rate: self.learning_rate,
            ..RAdamConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(L2cdsError::InvalidArgument(msg));
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(L2cdsError::VersionMismatch {
                what: "train config",
                expected: CONFIG_FORMAT_VERSION,
                found: self.format_version,
            });
        }
        self.weights().validate()?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if self.batch_size < 2 {
            return bad(format!("batch size must be >= 2, got {}", self.batch_size));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!("hidden widths must be nonempty and positive, got {:?}", self.hidden));
        }
        if self.latent_k == 0 {
            return bad("latent_k must be >= 1".into());
        }
        if self.eval_every == 0 {
            return bad("eval_every must be >= 1".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| L2cdsError::malformed("train config", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| L2cdsError::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Uniform sample with replacement of `batch_size` transitions, normalised
/// with the dataset's own statistics.
pub fn sample_batch(dataset: &TrajectoryDataset, batch_size: usize, rng: &mut Rng) -> Result<TransitionBatch> {
    if dataset.is_empty() {
        return Err(L2cdsError::Empty("dataset"));
    }
    if batch_size == 0 {
        return Err(L2cdsError::InvalidArgument("batch size must be positive".into()));
    }
    let d = dataset.state_dim();
    let mut s_t = Matrix::zeros(batch_size, d);
    let mut s_next = Matrix::zeros(batch_size, d);
    for i in 0..batch_size {
        let j = rng.index(dataset.len());
        let p = &dataset.pairs[j];
        dataset.norm.normalize_into(&p.s_t.0, s_t.row_mut(i))?;
        dataset.norm.normalize_into(&p.s_next.0, s_next.row_mut(i))?;
    }
    TransitionBatch::new(s_t, s_next)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// Optimizer steps completed when the batch was evaluated.
    pub step: usize,
    pub loss: LossBreakdown,
    /// MSNN between `A → L → B` projections of the monitor states and B's
    /// monitor states, in B's normalised units.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub msnn_alb: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<LogRecord>,
}

impl TrainLog {
    pub fn first(&self) -> Option<&LogRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("log records serialise"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub model: CorrespondenceModel,
    pub log: TrainLog,
    pub optimizer: OptimizerState,
}

/// Fresh model for the two datasets, initialised from `config.seed`.
pub fn init_model(dataset_a: &TrajectoryDataset, dataset_b: &TrajectoryDataset, config: &TrainConfig) -> Result<CorrespondenceModel> {
    config.validate()?;
    CorrespondenceModel::new(
        &config.hidden,
        config.latent_dim(),
        dataset_a.norm.clone(),
        dataset_b.norm.clone(),
        config.seed,
    )
}

struct Monitor {
    a: Matrix,
    b: Matrix,
}

impl Monitor {
    fn new(dataset_a: &TrajectoryDataset, dataset_b: &TrajectoryDataset, n: usize, seed: u64) -> Result<Option<Self>> {
        if n == 0 {
            return Ok(None);
        }
        let n = n.min(dataset_a.len()).min(dataset_b.len());
        let pick = |ds: &TrajectoryDataset, stream: u64| -> Result<Matrix> {
            let mut rng = Rng::with_stream(seed, stream);
            let mut m = Matrix::zeros(n, ds.state_dim());
            for i in 0..n {
                let j = rng.index(ds.len());
                ds.norm.normalize_into(&ds.pairs[j].s_t.0, m.row_mut(i))?;
            }
            Ok(m)
        };
        Ok(Some(Monitor {
            a: pick(dataset_a, streams::MONITOR)?,
            b: pick(dataset_b, streams::MONITOR + 1)?,
        }))
    }

    fn msnn(&self, model: &CorrespondenceModel) -> Result<f64> {
        let z = model.encoder_a.forward(&self.a)?;
        let b_hat = model.decoder_b.forward(&z)?;
        msnn_rows(&b_hat, &self.b)
    }
}

/// Trains all five networks jointly with one RAdam instance.
///
/// Each step draws one batch per system (streams `BATCH_A`/`BATCH_B` of
/// `config.seed`), evaluates [`total_loss`] with noise drawn from
/// `NOISE_A`/`NOISE_B`, and applies one optimizer step. The batch loss is
/// logged before the update every `eval_every` steps and at the last step.
pub fn train(dataset_a: &TrajectoryDataset, dataset_b: &TrajectoryDataset, config: &TrainConfig) -> Result<TrainOutput> {
    let model = init_model(dataset_a, dataset_b, config)?;
    train_from(model, dataset_a, dataset_b, config)
}

/// As [`train`], starting from a given model.
pub fn train_from(
    mut model: CorrespondenceModel,
    dataset_a: &TrajectoryDataset,
    dataset_b: &TrajectoryDataset,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    model.validate()?;
    if dataset_a.is_empty() || dataset_b.is_empty() {
        return Err(L2cdsError::Empty("training dataset"));
    }
    check_dim("system A state width", model.dim_a(), dataset_a.state_dim())?;
    check_dim("system B state width", model.dim_b(), dataset_b.state_dim())?;
    check_dim("latent width", config.latent_dim(), model.latent_dim)?;

    let weights = config.weights();
    let seed = config.seed;
    let mut batch_rng_a = Rng::with_stream(seed, streams::BATCH_A);
    let mut batch_rng_b = Rng::with_stream(seed, streams::BATCH_B);
    let mut noise_rng_a = Rng::with_stream(seed, streams::NOISE_A);
    let mut noise_rng_b = Rng::with_stream(seed, streams::NOISE_B);
    let monitor = Monitor::new(dataset_a, dataset_b, config.monitor_states, seed)?;
    let mut optimizer = OptimizerState::new(model.num_params(), config.optimizer());
    let mut log = TrainLog::default();

    for step in 0..config.steps {
        let batch_a = sample_batch(dataset_a, config.batch_size, &mut batch_rng_a)?;
        let batch_b = sample_batch(dataset_b, config.batch_size, &mut batch_rng_b)?;
        let out = total_loss(&model, &batch_a, &batch_b, &weights, config.sigma, &mut noise_rng_a, &mut noise_rng_b)?;
        if !out.breakdown.is_finite() {
            return Err(L2cdsError::NonFiniteLoss { step });
        }
        if step % config.eval_every == 0 || step + 1 == config.steps {
            let msnn_alb = monitor.as_ref().map(|m| m.msnn(&model)).transpose()?;
            let b = &out.breakdown;
            info!(
                "step {step}: total {:.6e} (ae {:.4e}, nn {:.4e}, fd {:.4e}, pv {:.4e}){}",
                b.total,
                b.ae,
                b.nn,
                b.fd,
                b.pv,
                msnn_alb.map(|v| format!(", msnn ALB {v:.4}")).unwrap_or_default()
            );
            log.records.push(LogRecord {
                step,
                loss: out.breakdown,
                msnn_alb,
            });
        }
        let [ga, gda, gb, gdb, gf] = &out.grads.nets;
        let CorrespondenceModel {
            encoder_a,
            decoder_a,
            encoder_b,
            decoder_b,
            dynamics,
            ..
        } = &mut model;
        optimizer
            .step_blocks(&mut [
                (encoder_a.params_mut(), ga),
                (decoder_a.params_mut(), gda),
                (encoder_b.params_mut(), gb),
                (decoder_b.params_mut(), gdb),
                (dynamics.params_mut(), gf),
            ])
            .map_err(|e| match e {
                L2cdsError::NonFiniteGradient { index } => {
                    debug!("non-finite gradient at flat index {index}");
                    L2cdsError::NonFiniteLoss { step }
                }
                other => other,
            })?;
    }
    Ok(TrainOutput { model, log, optimizer })
}

#[derive(Serialize, Deserialize)]
struct Networks {
    encoder_a: Mlp,
    decoder_a: Mlp,
    encoder_b: Mlp,
    decoder_b: Mlp,
    dynamics: Mlp,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    format_version: u32,
    latent_dim: usize,
    norm_a: NormalizationStats,
    norm_b: NormalizationStats,
    networks: Networks,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    optimizer: Option<OptimizerState>,
}

/// A saved model, optionally with the optimizer state it was trained with.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: CorrespondenceModel,
    pub optimizer: Option<OptimizerState>,
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        let m = &self.model;
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.into(),
            format_version: CHECKPOINT_FORMAT_VERSION,
            latent_dim: m.latent_dim,
            norm_a: m.norm_a.clone(),
            norm_b: m.norm_b.clone(),
            networks: Networks {
                encoder_a: m.encoder_a.clone(),
                decoder_a: m.decoder_a.clone(),
                encoder_b: m.encoder_b.clone(),
                decoder_b: m.decoder_b.clone(),
                dynamics: m.dynamics.clone(),
            },
            optimizer: self.optimizer.clone(),
        };
        let mut s = serde_json::to_string(&file).expect("checkpoint serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            format: String,
            format_version: u32,
        }
        let probe: Probe = serde_json::from_str(text).map_err(|e| L2cdsError::malformed("checkpoint", e))?;
        if probe.format != CHECKPOINT_FORMAT {
            return Err(L2cdsError::malformed("checkpoint", format!("unknown format '{}'", probe.format)));
        }
        if probe.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(L2cdsError::VersionMismatch {
                what: "checkpoint",
                expected: CHECKPOINT_FORMAT_VERSION,
                found: probe.format_version,
            });
        }
        let file: CheckpointFile = serde_json::from_str(text).map_err(|e| L2cdsError::malformed("checkpoint", e))?;
        let n = file.networks;
        let model = CorrespondenceModel {
            encoder_a: n.encoder_a,
            decoder_a: n.decoder_a,
            encoder_b: n.encoder_b,
            decoder_b: n.decoder_b,
            dynamics: n.dynamics,
            latent_dim: file.latent_dim,
            norm_a: file.norm_a,
            norm_b: file.norm_b,
        };
        model.validate()?;
        for net in Net::ALL {
            if model.net(net).params().iter().any(|p| !p.is_finite()) {
                return Err(L2cdsError::malformed("checkpoint", format!("non-finite parameter in {}", net.name())));
            }
        }
        if let Some(opt) = &file.optimizer {
            check_dim("checkpoint optimizer state", model.num_params(), opt.num_params())?;
            check_dim("checkpoint optimizer state", model.num_params(), opt.second_moment.len())?;
        }
        Ok(Checkpoint {
            model,
            optimizer: file.optimizer,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| L2cdsError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| L2cdsError::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn save_model(model: &CorrespondenceModel, path: impl AsRef<Path>) -> Result<()> {
    Checkpoint {
        model: model.clone(),
        optimizer: None,
    }
    .save(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CorrespondenceModel> {
    Ok(Checkpoint::load(path)?.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{collect_dataset, CollectOptions, SystemKind, SystemSpec};

    fn wedges() -> (TrajectoryDataset, TrajectoryDataset) {
        let opts = CollectOptions::new(10, 8, 3);
        (
            collect_dataset(&SystemSpec::new(SystemKind::WedgeLeft), opts).unwrap(),
            collect_dataset(&SystemSpec::new(SystemKind::WedgeRight), opts).unwrap(),
        )
    }

    fn small_config(steps: usize) -> TrainConfig {
        TrainConfig {
            steps,
            batch_size: 16,
            hidden: vec![6],
            eval_every: 5,
            monitor_states: 8,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn config_toml_round_trip_and_defaults() {
        let c = Preset::Wedge.config();
        assert_eq!(TrainConfig::from_toml(&c.to_toml()).unwrap(), c);
        let partial = TrainConfig::from_toml("steps = 7\n").unwrap();
        assert_eq!(partial.steps, 7);
        assert_eq!(partial.batch_size, TrainConfig::default().batch_size);
        assert!(TrainConfig::from_toml("stepz = 7\n").is_err());
        assert!(TrainConfig::from_toml("format_version = 2\n").is_err());
    }

    #[test]
    fn presets_parse_by_name() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            p.config().validate().unwrap();
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            TrainConfig { batch_size: 1, ..small_config(1) },
            TrainConfig { sigma: -0.1, ..small_config(1) },
            TrainConfig { latent_k: 0, ..small_config(1) },
            TrainConfig { eval_every: 0, ..small_config(1) },
            TrainConfig { lambda_nn: f64::NAN, ..small_config(1) },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn sample_batch_is_roughly_uniform() {
        let (a, _) = wedges();
        let mut rng = Rng::new(11);
        let mut counts = vec![0usize; a.len()];
        let draws = 200 * a.len();
        let batch = sample_batch(&a, draws, &mut rng).unwrap();
        for i in 0..draws {
            let row = batch.s_t.row(i);
            let j = a
                .pairs
                .iter()
                .position(|p| a.norm.normalize(&p.s_t).unwrap().0 == row)
                .unwrap();
            counts[j] += 1;
        }
        // Binomial(draws, 1/n): mean 200, sd ~14.
        assert!(counts.iter().all(|&c| (120..=280).contains(&c)), "{counts:?}");
    }

    #[test]
    fn zero_steps_returns_initial_model() {
        let (a, b) = wedges();
        let c = small_config(0);
        let out = train(&a, &b, &c).unwrap();
        assert_eq!(out.model, init_model(&a, &b, &c).unwrap());
        assert!(out.log.records.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_logs_on_schedule() {
        let (a, b) = wedges();
        let c = small_config(12);
        let x = train(&a, &b, &c).unwrap();
        let y = train(&a, &b, &c).unwrap();
        assert_eq!(x.model.flat_params(), y.model.flat_params());
        let steps: Vec<usize> = x.log.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 5, 10, 11]);
        assert!(x.log.records.iter().all(|r| r.msnn_alb.is_some()));
        let other = train(&a, &b, &TrainConfig { seed: 1, ..c }).unwrap();
        assert_ne!(x.model.flat_params(), other.model.flat_params());
    }

    #[test]
    fn uncoupled_training_leaves_b_independent_of_a() {
        // Without the NN and FD terms nothing couples the two systems, so
        // B's networks must not depend on A's data.
        let (a, b) = wedges();
        let a2 = collect_dataset(&SystemSpec::new(SystemKind::WedgeLeft), CollectOptions::new(10, 8, 99)).unwrap();
        let c = TrainConfig {
            lambda_nn: 0.0,
            lambda_fd: 0.0,
            monitor_states: 0,
            ..small_config(10)
        };
        let x = train(&a, &b, &c).unwrap().model;
        let m0 = init_model(&a2, &b, &c).unwrap();
        let y = train_from(m0, &a2, &b, &c).unwrap().model;
        assert_eq!(x.encoder_b, y.encoder_b);
        assert_eq!(x.decoder_b, y.decoder_b);
        assert_ne!(x.encoder_a, y.encoder_a);
    }

    #[test]
    fn mismatched_widths_are_rejected() {
        let (a, b) = wedges();
        let pend = collect_dataset(&SystemSpec::new(SystemKind::PendulumPd), CollectOptions::new(5, 2, 0)).unwrap();
        let model = init_model(&a, &b, &small_config(1)).unwrap();
        assert!(train_from(model, &pend, &b, &small_config(1)).is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_byte_stable() {
        let (a, b) = wedges();
        let out = train(&a, &b, &small_config(3)).unwrap();
        let ck = Checkpoint {
            model: out.model,
            optimizer: Some(out.optimizer),
        };
        let text = ck.to_json();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn corrupted_checkpoints_are_rejected() {
        let (a, b) = wedges();
        let model = init_model(&a, &b, &small_config(1)).unwrap();
        let text = Checkpoint { model, optimizer: None }.to_json();
        assert!(Checkpoint::from_json(&text[..text.len() / 2]).is_err());
        assert!(Checkpoint::from_json(&text.replace("l2cds-checkpoint", "other")).is_err());
        assert!(matches!(
            Checkpoint::from_json(&text.replace("\"format_version\":1", "\"format_version\":9")),
            Err(L2cdsError::VersionMismatch { .. })
        ));
        assert!(Checkpoint::from_json(&text.replace("\"latent_dim\":2", "\"latent_dim\":4")).is_err());
    }
}
