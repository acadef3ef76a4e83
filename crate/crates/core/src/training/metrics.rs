//! Per-step and per-episode measurements and their file sinks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str = "episode,E_total,M_total,mean_reward,epsilon,lr,seconds";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub hour: usize,
    pub e_all: f64,
    pub e_flat: f64,
    pub complaints: Vec<f64>,
    pub reward: f64,
    /// Action index per zone; `None` for rule-controlled zones.
    pub actions: Vec<Option<usize>>,
    pub setpoints: Vec<f64>,
    pub temperatures: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pretraining,
    Main,
    Individual,
    Evaluation,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Pretraining => "pretraining",
            Phase::Main => "main",
            Phase::Individual => "individual",
            Phase::Evaluation => "evaluation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub phase: Phase,
    /// 1-based across the whole run.
    pub episode: usize,
    pub steps: usize,
    pub e_total: f64,
    pub m_total: f64,
    pub mean_reward: f64,
    pub zone_energy: Vec<f64>,
    pub zone_complaints: Vec<f64>,
    pub epsilon: f64,
    pub lr: f64,
    pub learn_steps: usize,
    pub target_updated: bool,
    pub seconds: f64,
    #[serde(skip)]
    pub trace: Vec<StepRecord>,
}

impl EpisodeMetrics {
    pub(crate) fn new(phase: Phase, episode: usize, n_zones: usize) -> Self {
        EpisodeMetrics {
            phase,
            episode,
            steps: 0,
            e_total: 0.0,
            m_total: 0.0,
            mean_reward: 0.0,
            zone_energy: vec![0.0; n_zones],
            zone_complaints: vec![0.0; n_zones],
            epsilon: 0.0,
            lr: 0.0,
            learn_steps: 0,
            target_updated: false,
            seconds: 0.0,
            trace: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, step: &StepRecord, zone_energy: &[f64], keep_trace: bool) {
        self.steps += 1;
        self.e_total += step.e_all;
        self.m_total += step.complaints.iter().sum::<f64>();
        // running sum; divided in `finish`
        self.mean_reward += step.reward;
        for (acc, e) in self.zone_energy.iter_mut().zip(zone_energy) {
            *acc += e;
        }
        for (acc, c) in self.zone_complaints.iter_mut().zip(&step.complaints) {
            *acc += c;
        }
        if keep_trace {
            self.trace.push(step.clone());
        }
    }

    pub(crate) fn finish(&mut self) {
        if self.steps > 0 {
            self.mean_reward /= self.steps as f64;
        }
    }

    pub fn summary_row(&self, wall_clock: bool) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.episode,
            self.e_total,
            self.m_total,
            self.mean_reward,
            self.epsilon,
            self.lr,
            if wall_clock { self.seconds } else { 0.0 }
        )
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(file))
}

/// Appends one CSV row per episode.
pub struct SummaryWriter {
    path: PathBuf,
    out: BufWriter<File>,
    wall_clock: bool,
}

impl SummaryWriter {
    pub fn create(path: impl Into<PathBuf>, wall_clock: bool) -> Result<Self> {
        let path = path.into();
        let mut out = create(&path)?;
        writeln!(out, "{SUMMARY_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(SummaryWriter {
            path,
            out,
            wall_clock,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&mut self, m: &EpisodeMetrics) -> Result<()> {
        writeln!(self.out, "{}", m.summary_row(self.wall_clock)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Per-episode wall-clock seconds, kept apart from the reproducible summary.
pub struct TimingWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TimingWriter {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut out = create(&path)?;
        writeln!(out, "episode,phase,seconds").map_err(|e| Error::io(&path, e))?;
        Ok(TimingWriter { path, out })
    }

    pub fn write(&mut self, m: &EpisodeMetrics) -> Result<()> {
        writeln!(self.out, "{},{},{}", m.episode, m.phase.as_str(), m.seconds)
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Serialize)]
struct StepLine<'a> {
    phase: &'a str,
    episode: usize,
    #[serde(flatten)]
    step: &'a StepRecord,
}

/// One JSON object per simulated hour.
pub struct StepLogWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl StepLogWriter {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let out = create(&path)?;
        Ok(StepLogWriter { path, out })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_episode(&mut self, m: &EpisodeMetrics) -> Result<()> {
        for step in &m.trace {
            let line = StepLine {
                phase: m.phase.as_str(),
                episode: m.episode,
                step,
            };
            serde_json::to_writer(&mut self.out, &line).map_err(|e| Error::Format(e.to_string()))?;
            self.out.write_all(b"\n").map_err(|e| Error::io(&self.path, e))?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
