//! The `l2cds` command-line front end.
//!
//! Every command writes its data files first and a `*.manifest.json`
//! describing the run last. Data files are written to a temporary name and
//! renamed into place; if a command fails, files it already produced are
//! removed again.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::dynsys::{collect_dataset, CollectOptions, SystemKind, SystemSpec, TrajectoryDataset};
use crate::error::L2cdsError;
use crate::eval::{
    ablate, latent_rollout, mirror_error, path_msnn, perturb_regress, to_jsonl, aligned_table, autocorrelation,
    dominant_period, Pca, PerturbOptions, ProjectionPath,
};
use crate::model::{CorrespondenceModel, LatentState};
use crate::trainer::{train, Checkpoint, Preset, TrainConfig};

/// Environment variable holding the log filter (e.g. `info`, `debug`).
pub const LOG_ENV: &str = "L2CDS_LOG";

/// Seed offset used to regenerate held-out test datasets from a training
/// dataset's header when none are given.
pub const TEST_SEED_OFFSET: u64 = 1_000_003;

#[derive(Debug, Parser)]
#[command(name = "l2cds", version, about = "Learn state correspondences between two dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a system and write a transition dataset.
    Collect(CollectArgs),
    /// Train a correspondence model on two datasets.
    Train(TrainArgs),
    /// MSNN of projection paths on held-out datasets.
    Eval(EvalArgs),
    /// Train and evaluate the ablation grid over several seeds.
    Ablate(AblateArgs),
    /// Simulate the latent dynamics and decode into both systems.
    Rollout(RolloutArgs),
    /// Perturbation regression through the A → B correspondence.
    Regress(RegressArgs),
}

fn parse_system(s: &str) -> Result<SystemKind, String> {
    s.parse::<SystemKind>().map_err(|e| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in '{s}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_path(s: &str) -> Result<ProjectionPath, String> {
    s.parse::<ProjectionPath>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// pendulum, two-link, wedge-left or wedge-right.
    #[arg(long, value_parser = parse_system)]
    pub system: SystemKind,
    /// Transitions per trajectory.
    #[arg(long)]
    pub horizon: usize,
    /// Number of trajectories.
    #[arg(long)]
    pub resets: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = CollectOptions::DEFAULT_RESET_NOISE)]
    pub reset_noise: f64,
    #[arg(long, default_value_t = CollectOptions::DEFAULT_ACTION_NOISE)]
    pub action_noise: f64,
    /// Override a system parameter, e.g. `--param kp=45`.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// wedge, periodic, walker-pendulum or walker-ostrich.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Flat TOML training config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the number of training steps.
    #[arg(long)]
    pub steps: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self, inputs: &mut Vec<PathBuf>) -> Result<TrainConfig, CliError> {
        let cfg = match (&self.config, self.preset) {
            (Some(path), _) => {
                require_input(path)?;
                inputs.push(path.clone());
                TrainConfig::load(path)?
            }
            (None, Some(p)) => p.config(),
            (None, None) => return Err(CliError::usage("one of --preset or --config is required")),
        };
        let mut cfg = cfg;
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("cfg").required(true).args(["preset", "config"])))]
pub struct TrainArgs {
    /// Dataset of system A.
    #[arg(long)]
    pub a: PathBuf,
    /// Dataset of system B.
    #[arg(long)]
    pub b: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint path; the log goes to `<out>.log.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Held-out dataset of system A.
    #[arg(long)]
    pub a: PathBuf,
    /// Held-out dataset of system B.
    #[arg(long)]
    pub b: PathBuf,
    /// Projection path such as ALB; repeatable. Defaults to the six table paths.
    #[arg(long = "path", value_parser = parse_path)]
    pub paths: Vec<ProjectionPath>,
    /// Test states drawn from each dataset.
    #[arg(long, default_value_t = 1000)]
    pub states: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix: `<out>.jsonl`, `<out>.txt`.
    #[arg(long, default_value = "eval")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("cfg").required(true).args(["preset", "config"])))]
pub struct AblateArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Held-out dataset of A; regenerated from `--a`'s header with another
    /// seed if omitted.
    #[arg(long)]
    pub test_a: Option<PathBuf>,
    #[arg(long)]
    pub test_b: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Number of training seeds per configuration.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// First training seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub states: usize,
    #[arg(long, default_value = "ablation")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset of system A supplying the start state.
    #[arg(long)]
    pub a: PathBuf,
    /// Index of the transition whose `s_t` is encoded as the start state.
    #[arg(long, default_value_t = 0)]
    pub start_index: usize,
    #[arg(long)]
    pub steps: usize,
    /// Output prefix: `<out>.csv`, `<out>.jsonl`, `<out>.txt`.
    #[arg(long, default_value = "rollout")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset of system A to sample and perturb states from.
    #[arg(long)]
    pub a: PathBuf,
    /// Dataset of system B, used only to pick the default target index.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Perturbed coordinate of A (default: the system's velocity coordinate).
    #[arg(long)]
    pub source_index: Option<usize>,
    /// Response coordinate of B (default: B's velocity coordinate).
    #[arg(long)]
    pub target_index: Option<usize>,
    /// Uniform noise half-width as a fraction of the coordinate's std.
    #[arg(long, default_value_t = 0.5)]
    pub noise_scale: f64,
    #[arg(long, default_value_t = 10)]
    pub copies: usize,
    #[arg(long, default_value_t = 1000)]
    pub states: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "regress")]
    pub out: PathBuf,
}

/// A failed command: message plus process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
}

impl From<L2cdsError> for CliError {
    fn from(e: L2cdsError) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn require_input(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!("input file not found: {}", path.display())))
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Files produced by one command.
#[derive(Default)]
struct Outputs {
    written: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), CliError> {
        let tmp = with_suffix(path, ".tmp");
        let io = |e: std::io::Error| CliError::from(L2cdsError::io(path, e));
        fs::write(&tmp, contents).map_err(io)?;
        if let Err(e) = fs::rename(&tmp, path) {
            let _ = fs::remove_file(&tmp);
            return Err(io(e));
        }
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    args: Vec<String>,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    tool_version: &'static str,
    started_unix_secs: u64,
    duration_secs: f64,
}

struct Run {
    command: &'static str,
    started: Instant,
    started_unix: u64,
    inputs: Vec<PathBuf>,
    seeds: Vec<u64>,
    config: serde_json::Value,
    outputs: Outputs,
}

impl Run {
    fn new(command: &'static str) -> Self {
        Run {
            command,
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            inputs: Vec::new(),
            seeds: Vec::new(),
            config: serde_json::Value::Null,
            outputs: Outputs::default(),
        }
    }

    fn input(&mut self, path: &Path) -> Result<(), CliError> {
        require_input(path)?;
        self.inputs.push(path.to_path_buf());
        Ok(())
    }

    fn finish(mut self, manifest_for: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            args: std::env::args().collect(),
            config: self.config.clone(),
            seeds: self.seeds.clone(),
            inputs: self.inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: self.outputs.written.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix_secs: self.started_unix,
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
        let path = with_suffix(manifest_for, ".manifest.json");
        match self.outputs.write(&path, text.as_bytes()) {
            Ok(()) => Ok(()),
            Err(e) => {
                self.outputs.discard();
                Err(e)
            }
        }
    }
}

/// Runs one command, removing its partial outputs on failure.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let name = match &cli.command {
        Command::Collect(_) => "collect",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Ablate(_) => "ablate",
        Command::Rollout(_) => "rollout",
        Command::Regress(_) => "regress",
    };
    let mut run = Run::new(name);
    let result = match &cli.command {
        Command::Collect(a) => cmd_collect(a, &mut run),
        Command::Train(a) => cmd_train(a, &mut run),
        Command::Eval(a) => cmd_eval(a, &mut run),
        Command::Ablate(a) => cmd_ablate(a, &mut run),
        Command::Rollout(a) => cmd_rollout(a, &mut run),
        Command::Regress(a) => cmd_regress(a, &mut run),
    };
    match result {
        Ok(manifest_for) => run.finish(&manifest_for),
        Err(e) => {
            run.outputs.discard();
            Err(e)
        }
    }
}

fn load_dataset(run: &mut Run, path: &Path) -> Result<TrajectoryDataset, CliError> {
    run.input(path)?;
    Ok(TrajectoryDataset::load(path)?)
}

fn load_checkpoint(run: &mut Run, path: &Path) -> Result<CorrespondenceModel, CliError> {
    run.input(path)?;
    Ok(Checkpoint::load(path)?.model)
}

fn check_model_fits(model: &CorrespondenceModel, a: &TrajectoryDataset, b: Option<&TrajectoryDataset>) -> Result<(), CliError> {
    crate::error::check_dim("model A width vs dataset", model.dim_a(), a.state_dim())?;
    if let Some(b) = b {
        crate::error::check_dim("model B width vs dataset", model.dim_b(), b.state_dim())?;
    }
    Ok(())
}

fn cmd_collect(args: &CollectArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let mut spec = SystemSpec::new(args.system);
    for (k, v) in &args.params {
        if !spec.params.contains_key(k) {
            return Err(CliError::usage(format!("system {} has no parameter '{k}'", args.system)));
        }
        spec = spec.with_param(k, *v);
    }
    let opts = CollectOptions {
        horizon: args.horizon,
        resets: args.resets,
        reset_noise: args.reset_noise,
        action_noise: args.action_noise,
        seed: args.seed,
    };
    run.seeds = vec![args.seed];
    run.config = serde_json::json!({
        "system": spec,
        "horizon": args.horizon,
        "resets": args.resets,
        "reset_noise": args.reset_noise,
        "action_noise": args.action_noise,
    });
    let ds = collect_dataset(&spec, opts)?;
    let mut buf = Vec::new();
    ds.write_jsonl(&mut buf)?;
    run.outputs.write(&args.out, &buf)?;
    info!("wrote {} pairs to {}", ds.len(), args.out.display());
    Ok(args.out.clone())
}

fn cmd_train(args: &TrainArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let a = load_dataset(run, &args.a)?;
    let b = load_dataset(run, &args.b)?;
    let mut cfg = args.config.resolve(&mut run.inputs)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    run.seeds = vec![cfg.seed];
    run.config = serde_json::to_value(&cfg).expect("config serialises");
    let out = train(&a, &b, &cfg)?;
    let ckpt = Checkpoint {
        model: out.model,
        optimizer: Some(out.optimizer),
    };
    run.outputs.write(&args.out, ckpt.to_json().as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".log.jsonl"), out.log.to_jsonl().as_bytes())?;
    if let Some(last) = out.log.last() {
        println!("final loss {} at step {}", last.loss.total, last.step);
    }
    Ok(args.out.clone())
}

#[derive(Serialize)]
struct EvalRecord {
    metric: &'static str,
    path: Option<String>,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    untrained_baseline: Option<f64>,
    states: usize,
}

/// A fresh model with the same architecture and normalisation as `model`.
fn untrained_like(model: &CorrespondenceModel, seed: u64) -> Result<CorrespondenceModel, CliError> {
    let sizes = model.encoder_a.sizes();
    let hidden = &sizes[1..sizes.len() - 1];
    Ok(CorrespondenceModel::new(
        hidden,
        model.latent_dim,
        model.norm_a.clone(),
        model.norm_b.clone(),
        seed,
    )?)
}

fn cmd_eval(args: &EvalArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let model = load_checkpoint(run, &args.model)?;
    let a = load_dataset(run, &args.a)?;
    let b = load_dataset(run, &args.b)?;
    check_model_fits(&model, &a, Some(&b))?;
    let paths = if args.paths.is_empty() {
        ProjectionPath::table()
    } else {
        args.paths.clone()
    };
    let n = args.states.min(a.len()).min(b.len());
    run.seeds = vec![args.seed];
    run.config = serde_json::json!({
        "paths": paths.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "states": n,
    });
    let states_a = a.sample_states(n, args.seed);
    let xa = TrajectoryDataset::states_matrix(&states_a)?;
    let xb = TrajectoryDataset::states_matrix(&b.sample_states(n, args.seed))?;
    let mut records = Vec::new();
    for p in &paths {
        records.push(EvalRecord {
            metric: "msnn",
            path: Some(p.to_string()),
            value: path_msnn(&model, p, &xa, &xb)?,
            untrained_baseline: None,
            states: n,
        });
    }
    if a.system.kind == SystemKind::WedgeLeft && b.system.kind == SystemKind::WedgeRight {
        records.push(EvalRecord {
            metric: "mirror_error",
            path: Some("ALB".into()),
            value: mirror_error(&model, &states_a)?,
            untrained_baseline: Some(mirror_error(&untrained_like(&model, args.seed)?, &states_a)?),
            states: n,
        });
    }
    let header: Vec<String> = ["Metric", "Path", "Value", "Untrained"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.metric.to_string(),
                r.path.clone().unwrap_or_default(),
                format!("{:.6}", r.value),
                r.untrained_baseline.map(|v| format!("{v:.6}")).unwrap_or_default(),
            ]
        })
        .collect();
    let table = aligned_table(&header, &rows);
    run.outputs.write(&with_suffix(&args.out, ".jsonl"), to_jsonl(&records).as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".txt"), table.as_bytes())?;
    if records.len() == 1 {
        println!("{}", records[0].value);
    } else {
        print!("{table}");
    }
    Ok(args.out.clone())
}

/// Same collection procedure as `ds` with a different seed.
pub fn held_out(ds: &TrajectoryDataset) -> crate::Result<TrajectoryDataset> {
    collect_dataset(
        &ds.system,
        CollectOptions {
            horizon: ds.horizon,
            resets: ds.resets,
            reset_noise: ds.reset_noise,
            action_noise: ds.action_noise,
            seed: ds.seed.wrapping_add(TEST_SEED_OFFSET),
        },
    )
}

fn cmd_ablate(args: &AblateArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let a = load_dataset(run, &args.a)?;
    let b = load_dataset(run, &args.b)?;
    let test_a = match &args.test_a {
        Some(p) => load_dataset(run, p)?,
        None => held_out(&a)?,
    };
    let test_b = match &args.test_b {
        Some(p) => load_dataset(run, p)?,
        None => held_out(&b)?,
    };
    let cfg = args.config.resolve(&mut run.inputs)?;
    cfg.validate()?;
    if args.seeds == 0 {
        return Err(CliError::usage("--seeds must be at least 1"));
    }
    let seeds: Vec<u64> = (0..args.seeds).map(|i| args.seed + i).collect();
    run.seeds = seeds.clone();
    run.config = serde_json::to_value(&cfg).expect("config serialises");
    let report = ablate(&a, &b, &test_a, &test_b, &cfg, &seeds, &ProjectionPath::table(), args.states)?;
    let table = report.to_table();
    run.outputs.write(&with_suffix(&args.out, ".jsonl"), to_jsonl(&report.cells).as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".txt"), table.as_bytes())?;
    print!("{table}");
    Ok(args.out.clone())
}

#[derive(Serialize)]
struct RolloutRecord<'a> {
    step: usize,
    latent: &'a [f64],
    pc: &'a [f64],
    decoded_a: &'a [f64],
    decoded_b: &'a [f64],
}

fn cmd_rollout(args: &RolloutArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let model = load_checkpoint(run, &args.model)?;
    let a = load_dataset(run, &args.a)?;
    check_model_fits(&model, &a, None)?;
    if args.start_index >= a.len() {
        return Err(CliError::usage(format!(
            "--start-index {} out of range for {} transitions",
            args.start_index,
            a.len()
        )));
    }
    run.config = serde_json::json!({ "steps": args.steps, "start_index": args.start_index });
    let mut s = vec![0.0; a.state_dim()];
    a.norm.normalize_into(&a.pairs[args.start_index].s_t.0, &mut s)?;
    let z0 = model.encoder_a.forward(&crate::linalg::Matrix::from_vec(1, s.len(), s)?)?;
    let start = LatentState::new(z0.into_vec())?;
    let ro = latent_rollout(&model, &start, args.steps)?;
    if ro.is_empty() {
        return Err(CliError::from(L2cdsError::NumericalBlowup("rollout diverged at its first step".into())));
    }
    let pcs = Pca::fit(&ro.latent, 2.min(model.latent_dim))?;
    let pc = pcs.transform(&ro.latent)?;

    let l = model.latent_dim;
    let mut csv = String::from("step");
    for i in 0..l {
        write!(csv, ",z{i}").unwrap();
    }
    for i in 0..pc.cols() {
        write!(csv, ",pc{}", i + 1).unwrap();
    }
    for i in 0..model.dim_a() {
        write!(csv, ",a{i}").unwrap();
    }
    for i in 0..model.dim_b() {
        write!(csv, ",b{i}").unwrap();
    }
    csv.push('\n');
    let mut records = Vec::with_capacity(ro.len());
    for t in 0..ro.len() {
        write!(csv, "{}", t + 1).unwrap();
        for row in [ro.latent.row(t), pc.row(t), ro.decoded_a.row(t), ro.decoded_b.row(t)] {
            for v in row {
                write!(csv, ",{v}").unwrap();
            }
        }
        csv.push('\n');
        records.push(RolloutRecord {
            step: t + 1,
            latent: ro.latent.row(t),
            pc: pc.row(t),
            decoded_a: ro.decoded_a.row(t),
            decoded_b: ro.decoded_b.row(t),
        });
    }

    let period = |m: &crate::linalg::Matrix| -> Option<usize> {
        autocorrelation(m, m.rows().saturating_sub(1)).ok().as_deref().and_then(dominant_period)
    };
    let fmt_period = |p: Option<usize>| p.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
    let header: Vec<String> = ["Series", "Dominant period (steps)"].iter().map(|s| s.to_string()).collect();
    let rows = vec![
        vec!["latent".to_string(), fmt_period(period(&ro.latent))],
        vec!["decoded A".to_string(), fmt_period(period(&ro.decoded_a_normalized))],
        vec!["decoded B".to_string(), fmt_period(period(&ro.decoded_b_normalized))],
    ];
    let mut summary = aligned_table(&header, &rows);
    writeln!(summary, "steps: {} of {}", ro.len(), args.steps).unwrap();
    if let Some(t) = ro.truncated_at {
        writeln!(summary, "truncated: non-finite latent state at step {t}").unwrap();
    }

    run.outputs.write(&with_suffix(&args.out, ".csv"), csv.as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".jsonl"), to_jsonl(&records).as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(args.out.clone())
}

fn cmd_regress(args: &RegressArgs, run: &mut Run) -> Result<PathBuf, CliError> {
    let model = load_checkpoint(run, &args.model)?;
    let a = load_dataset(run, &args.a)?;
    let b = match &args.b {
        Some(p) => Some(load_dataset(run, p)?),
        None => None,
    };
    check_model_fits(&model, &a, b.as_ref())?;
    let source_index = args.source_index.unwrap_or_else(|| a.system.kind.velocity_index());
    let target_index = match (args.target_index, &b) {
        (Some(i), _) => i,
        (None, Some(b)) => b.system.kind.velocity_index(),
        (None, None) if model.dim_b() == model.dim_a() => source_index,
        (None, None) => return Err(CliError::usage("--target-index or --b is required when the systems differ in width")),
    };
    let opts = PerturbOptions {
        source_index,
        target_index,
        noise_scale: args.noise_scale,
        copies: args.copies,
        states: args.states,
        seed: args.seed,
    };
    run.seeds = vec![args.seed];
    run.config = serde_json::to_value(&opts).expect("options serialise");
    let result = perturb_regress(&model, &a, &opts)?;
    let table = result.to_table();
    run.outputs.write(&with_suffix(&args.out, ".jsonl"), to_jsonl(std::slice::from_ref(&result)).as_bytes())?;
    run.outputs.write(&with_suffix(&args.out, ".txt"), table.as_bytes())?;
    print!("{table}");
    Ok(args.out.clone())
}
