use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{LinearSchedule, StepSchedule, Variant};
use crate::error::{Error, Result};
use crate::neural::Architecture;
use crate::occupancy::{OccupancySchedule, DEFAULT_CAPACITIES};
use crate::reward::RewardConfig;
use crate::sim::{BuildingConfig, WeatherSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PretrainingMode {
    None,
    #[default]
    Broadcast,
    PartialRuleBased,
}

impl PretrainingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PretrainingMode::None => "none",
            PretrainingMode::Broadcast => "broadcast",
            PretrainingMode::PartialRuleBased => "partial_rule_based",
        }
    }
}

impl std::str::FromStr for PretrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PretrainingMode::None),
            "broadcast" => Ok(PretrainingMode::Broadcast),
            "partial" | "partial_rule_based" => Ok(PretrainingMode::PartialRuleBased),
            other => Err(Error::Config(format!("unknown pretraining mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuildingSource {
    Preset { name: String },
    File { path: String },
}

impl Default for BuildingSource {
    fn default() -> Self {
        BuildingSource::Preset {
            name: "building_5zone".into(),
        }
    }
}

impl BuildingSource {
    pub fn load(&self) -> Result<BuildingConfig> {
        let cfg = match self {
            BuildingSource::Preset { name } => BuildingConfig::preset(name)?,
            BuildingSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_document(&text, Path::new(path))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSource {
    Generate { seed: u64 },
    Csv { path: String },
}

impl Default for ScheduleSource {
    fn default() -> Self {
        ScheduleSource::Generate { seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentConfig {
    pub building: BuildingSource,
    pub weather: WeatherSource,
    pub schedule: ScheduleSource,
    /// Maximum headcount per zone, used when the schedule comes from CSV.
    pub capacities: Vec<u32>,
    pub holidays: BTreeSet<usize>,
    /// Weekday of the first episode hour, 0 = Monday.
    pub start_weekday: usize,
    /// Episode length in days (31 → 744 hourly steps).
    pub episode_days: usize,
    /// Evaluation window from the episode start, in days.
    pub eval_days: usize,
    /// Zone temperature at every reset, °C.
    pub initial_temp: f64,
    /// Zones driven by learning agents; the rest follow the baseline rule.
    /// `None` means every zone.
    pub controlled_zones: Option<Vec<usize>>,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig {
            building: BuildingSource::default(),
            weather: WeatherSource::default(),
            schedule: ScheduleSource::default(),
            capacities: DEFAULT_CAPACITIES.to_vec(),
            holidays: BTreeSet::new(),
            start_weekday: 0,
            episode_days: 31,
            eval_days: 7,
            initial_temp: 15.0,
            controlled_zones: None,
        }
    }
}

impl EnvironmentConfig {
    pub fn load_schedule(&self) -> Result<OccupancySchedule> {
        let mut schedule = match &self.schedule {
            ScheduleSource::Generate { seed } => OccupancySchedule::generate(*seed),
            ScheduleSource::Csv { path } => OccupancySchedule::load(path, &self.capacities)?,
        };
        schedule.holiday_days = self.holidays.clone();
        schedule.start_weekday = self.start_weekday;
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn controlled(&self, n_zones: usize) -> Vec<usize> {
        self.controlled_zones
            .clone()
            .unwrap_or_else(|| (0..n_zones).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    /// Write per-step JSONL for every n-th training episode (0 = never).
    pub step_log_every: usize,
    /// Record wall-clock seconds in the episode summary. Off by default so
    /// summaries are byte-reproducible; timings always go to `timing.csv`.
    pub wall_clock: bool,
    /// Write per-agent checkpoints at phase boundaries.
    pub checkpoints: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            step_log_every: 0,
            wall_clock: false,
            checkpoints: true,
        }
    }
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub seed: u64,
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Transitions a buffer must hold before learning starts.
    pub learn_start: usize,
    pub variant: Variant,
    pub network: Architecture,
    pub pretraining: PretrainingMode,
    pub pretraining_episodes: usize,
    /// Main-training length when pretraining is used; doubled without it.
    pub main_episodes: usize,
    pub individual_episodes: usize,
    /// Target networks are refreshed every this many episodes.
    pub target_update_episodes: usize,
    pub epsilon: LinearSchedule,
    pub learning_rate: StepSchedule,
    pub reward: RewardConfig,
    pub environment: EnvironmentConfig,
    pub metrics: MetricsConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl TrainingConfig {
    /// Full-length protocol with the published hyperparameters.
    pub fn full() -> Self {
        TrainingConfig {
            seed: 0,
            gamma: 0.9,
            batch_size: 256,
            buffer_capacity: 576,
            learn_start: 256,
            variant: Variant::Ddqn,
            network: Architecture::default(),
            pretraining: PretrainingMode::Broadcast,
            pretraining_episodes: 12_500,
            main_episodes: 12_500,
            individual_episodes: 250,
            target_update_episodes: 2,
            epsilon: LinearSchedule::default(),
            learning_rate: StepSchedule::default(),
            reward: RewardConfig::default(),
            environment: EnvironmentConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }

    /// Desk-scale preset: episode counts divided by 25, 32/32 hidden layers
    /// and an Adam step profile that stays stable at this scale.
    pub fn desk() -> Self {
        TrainingConfig {
            network: Architecture {
                hidden_dims: vec![32, 32],
                ..Architecture::default()
            },
            pretraining_episodes: 500,
            main_episodes: 500,
            individual_episodes: 50,
            learning_rate: StepSchedule {
                values: vec![1e-3, 5e-4, 2.5e-4, 1e-4],
                milestones: vec![0.25, 0.5, 0.75],
            },
            ..Self::full()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(Self::full()),
            "desk" => Ok(Self::desk()),
            other => Err(Error::Config(format!("unknown training preset `{other}`"))),
        }
    }

    /// Multiplies every phase length by `factor` (rounded, at least 1 for
    /// non-empty phases).
    pub fn scale_episodes(&mut self, factor: f64) {
        let scale = |n: usize| {
            if n == 0 {
                0
            } else {
                ((n as f64 * factor).round() as usize).max(1)
            }
        };
        self.pretraining_episodes = scale(self.pretraining_episodes);
        self.main_episodes = scale(self.main_episodes);
        self.individual_episodes = scale(self.individual_episodes);
    }

    pub fn effective_pretraining_episodes(&self) -> usize {
        match self.pretraining {
            PretrainingMode::None => 0,
            _ => self.pretraining_episodes,
        }
    }

    pub fn effective_main_episodes(&self) -> usize {
        match self.pretraining {
            PretrainingMode::None => 2 * self.main_episodes,
            _ => self.main_episodes,
        }
    }

    pub fn total_episodes(&self) -> usize {
        self.effective_pretraining_episodes()
            + self.effective_main_episodes()
            + self.individual_episodes
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch_size and buffer_capacity must be positive");
        }
        if self.target_update_episodes == 0 {
            return bad("target_update_episodes must be positive");
        }
        if self.environment.episode_days == 0 || self.environment.eval_days == 0 {
            return bad("episode_days and eval_days must be positive");
        }
        if self.environment.eval_days > self.environment.episode_days {
            return bad("eval_days cannot exceed episode_days");
        }
        if let Some(zones) = &self.environment.controlled_zones {
            if zones.is_empty() {
                return bad("controlled_zones must not be empty");
            }
        }
        self.network.validate()?;
        self.epsilon.validate()?;
        self.learning_rate.validate()?;
        self.reward.validate()?;
        Ok(())
    }

    /// Reads a TOML or JSON run config; the extension picks the format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: TrainingConfig = parse_document(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

fn parse_document<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
