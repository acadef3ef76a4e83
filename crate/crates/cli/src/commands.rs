use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hvacrl_core::occupancy::OccupancySchedule;
use hvacrl_core::sim::weather;
use hvacrl_core::training::{
    evaluate as evaluate_policy, AgentPool, ControlPlan, Environment, EpisodeMetrics,
    EvaluationResult, Phase, Trainer, TrainingConfig, TrainingObserver,
};

use crate::manifest::{create_run_dir, RunKind, RunManifest, RunStatus, MANIFEST_FILE};
use crate::{
    BaselineArgs, ConfigArgs, EvaluateArgs, GenScheduleArgs, GenWeatherArgs, TrainArgs,
};

pub const EVALUATION_FILE: &str = "evaluation.csv";
pub const BASELINE_FILE: &str = "baseline.csv";
const TRAIN_OUTPUTS: &[&str] = &[
    "config.toml",
    "summary.csv",
    "timing.csv",
    "steps.jsonl",
    "checkpoints",
    EVALUATION_FILE,
    "evaluation_zones.csv",
];
const FINAL_CHECKPOINTS: &str = "checkpoints/individual";

pub fn load_config(args: &ConfigArgs) -> Result<TrainingConfig> {
    let mut config = match &args.config {
        Some(path) if path.file_name().is_some_and(|n| n == MANIFEST_FILE) => {
            let dir = path.parent().unwrap_or(Path::new("."));
            RunManifest::read(dir)?.config
        }
        Some(path) => TrainingConfig::load(path)?,
        None => TrainingConfig::preset(&args.preset)?,
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

struct Progress {
    every: usize,
    total: usize,
}

impl TrainingObserver for Progress {
    fn on_episode(&mut self, m: &EpisodeMetrics, _pool: &mut AgentPool) {
        if self.every > 0 && (m.episode % self.every == 0 || m.episode == self.total) {
            eprintln!(
                "[{}/{}] {:<11} E_total={:.1} M_total={:.2} eps={:.3} lr={:.2e}",
                m.episode,
                self.total,
                m.phase.as_str(),
                m.e_total,
                m.m_total,
                m.epsilon,
                m.lr
            );
        }
    }

    fn on_phase_end(&mut self, phase: Phase, _pool: &mut AgentPool) {
        if self.every > 0 {
            eprintln!("finished {} phase", phase.as_str());
        }
    }
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut config = load_config(&args.common)?;
    if let Some(mode) = args.pretraining {
        config.pretraining = mode.into();
    }
    if let Some(scale) = args.episodes_scale {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(hvacrl_core::Error::Config(format!(
                "--episodes-scale must be positive, got {scale}"
            ))
            .into());
        }
        config.scale_episodes(scale);
    }
    // Building the trainer loads every input, so bad configs fail before a
    // run directory exists.
    let trainer = Trainer::new(config.clone())?;

    let dir = create_run_dir(&args.common.out, &format!("train-s{}", config.seed))?;
    let mut manifest = RunManifest::new(RunKind::Train, &config);
    manifest.write(&dir)?;
    std::fs::write(dir.join("config.toml"), config.to_toml()?)?;
    eprintln!("run directory: {}", dir.display());

    let mut trainer = trainer.with_output(&dir)?;
    let mut progress = Progress {
        every: args.progress,
        total: config.total_episodes(),
    };
    let outcome = match trainer.train(&mut progress) {
        Ok(o) => o,
        Err(e) => {
            let status = if matches!(e, hvacrl_core::Error::Divergence { .. }) {
                RunStatus::Diverged
            } else {
                RunStatus::Failed
            };
            manifest.finish(status, &dir, TRAIN_OUTPUTS);
            manifest.write(&dir)?;
            return Err(e.into());
        }
    };

    let mut env = Environment::from_config(&config)?;
    let days = config.environment.eval_days;
    let result = evaluate_policy(&mut env, &ControlPlan::Agents, Some(&outcome.pool), days)?;
    write_totals(&dir.join(EVALUATION_FILE), &result)?;
    write_zone_totals(&dir.join("evaluation_zones.csv"), &result)?;
    println!("E_total,M_total");
    println!("{},{}", result.e_total, result.m_total);

    manifest.finish(RunStatus::Completed, &dir, TRAIN_OUTPUTS);
    manifest.write(&dir)?;
    Ok(())
}

pub fn baseline(args: BaselineArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    config.validate()?;
    let mut env = Environment::from_config(&config)?;
    let result = evaluate_policy(
        &mut env,
        &ControlPlan::Baseline,
        None,
        config.environment.eval_days,
    )?;

    let dir = create_run_dir(&args.common.out, "baseline")?;
    let mut manifest = RunManifest::new(RunKind::Baseline, &config);
    manifest.write(&dir)?;
    write_totals(&dir.join(BASELINE_FILE), &result)?;
    write_zone_totals(&dir.join("baseline_zones.csv"), &result)?;
    manifest.finish(RunStatus::Completed, &dir, &[BASELINE_FILE, "baseline_zones.csv"]);
    manifest.write(&dir)?;
    eprintln!("run directory: {}", dir.display());
    println!("E_total,M_total");
    println!("{},{}", result.e_total, result.m_total);
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let manifest = RunManifest::read(&args.run)?;
    if manifest.kind != RunKind::Train {
        bail!("{} is not a training run", args.run.display());
    }
    let checkpoints = args.run.join(FINAL_CHECKPOINTS);
    if !checkpoints.is_dir() {
        bail!(
            "{} has no final checkpoints (was the run completed with checkpoints enabled?)",
            args.run.display()
        );
    }
    let config = manifest.config;
    let pool = AgentPool::load_checkpoints(&checkpoints, config.buffer_capacity)?;
    let mut env = Environment::from_config(&config)?;
    let days = args.days.unwrap_or(config.environment.eval_days);
    let result = evaluate_policy(&mut env, &ControlPlan::Agents, Some(&pool), days)?;
    if let Some(path) = &args.trace {
        write_trace(path, &result)?;
    }
    println!("E_total,M_total");
    println!("{},{}", result.e_total, result.m_total);
    Ok(())
}

pub fn gen_schedule(args: GenScheduleArgs) -> Result<()> {
    let schedule = OccupancySchedule::generate(args.seed);
    let file = File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    schedule.write_csv(BufWriter::new(file))?;
    Ok(())
}

pub fn gen_weather(args: GenWeatherArgs) -> Result<()> {
    let records = weather::synthetic(args.seed, args.days);
    let file = File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    weather::write_csv(BufWriter::new(file), &records)?;
    Ok(())
}

#[derive(serde::Serialize, serde::Deserialize)]
pub struct Totals {
    #[serde(rename = "E_total")]
    pub e_total: f64,
    #[serde(rename = "M_total")]
    pub m_total: f64,
}

fn write_totals(path: &Path, r: &EvaluationResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(Totals {
        e_total: r.e_total,
        m_total: r.m_total,
    })?;
    w.flush()?;
    Ok(())
}

fn write_zone_totals(path: &Path, r: &EvaluationResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["zone", "energy", "complaints"])?;
    for (z, (e, m)) in r.zone_energy.iter().zip(&r.zone_complaints).enumerate() {
        w.write_record([z.to_string(), e.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(path: &Path, r: &EvaluationResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = r.zone_energy.len();
    let mut header = vec!["hour".to_string(), "e_all".into(), "e_flat".into(), "reward".into()];
    for kind in ["setpoint", "temperature", "complaint"] {
        header.extend((0..n).map(|z| format!("{kind}_{z}")));
    }
    w.write_record(&header)?;
    for s in &r.trace {
        let mut row = vec![
            s.hour.to_string(),
            s.e_all.to_string(),
            s.e_flat.to_string(),
            s.reward.to_string(),
        ];
        row.extend(s.setpoints.iter().map(f64::to_string));
        row.extend(s.temperatures.iter().map(f64::to_string));
        row.extend(s.complaints.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_totals(path: &Path) -> Result<Totals> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = r.deserialize::<Totals>();
    let first = rows
        .next()
        .with_context(|| format!("{}: no data row", path.display()))?
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(first)
}
