use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Utc;
use hvacrl_core::training::TrainingConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "hvacrl-run/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Train,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Diverged,
    Failed,
}

/// Describes one run directory. Written before any work starts and
/// rewritten when the run ends; `config` alone reproduces the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub kind: RunKind,
    pub version: String,
    pub seed: u64,
    pub pretraining: String,
    pub ratio_lambda: f64,
    pub total_episodes: usize,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub status: RunStatus,
    /// Paths relative to the run directory.
    pub outputs: Vec<String>,
    pub config: TrainingConfig,
}

impl RunManifest {
    pub fn new(kind: RunKind, config: &TrainingConfig) -> Self {
        let total_episodes = match kind {
            RunKind::Train => config.total_episodes(),
            RunKind::Baseline => 0,
        };
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            kind,
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            pretraining: config.pretraining.as_str().into(),
            ratio_lambda: config.reward.ratio(),
            total_episodes,
            started_at: now(),
            finished_at: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn finish(&mut self, status: RunStatus, dir: &Path, outputs: &[&str]) {
        self.finished_at = Some(now());
        self.status = status;
        self.outputs = outputs
            .iter()
            .filter(|o| dir.join(o).exists())
            .map(|o| o.to_string())
            .collect();
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        anyhow::ensure!(
            manifest.format == MANIFEST_FORMAT,
            "{}: unsupported manifest format `{}`",
            path.display(),
            manifest.format
        );
        Ok(manifest)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Creates a fresh directory `<root>/<prefix>-<UTC timestamp>`, adding a
/// counter when the name is taken. Existing directories are never reused.
pub fn create_run_dir(root: &Path, prefix: &str) -> Result<PathBuf> {
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let stamp = Utc::now().format("%Y%m%dT%H%M%SZ");
    for n in 0.. {
        let name = if n == 0 {
            format!("{prefix}-{stamp}")
        } else {
            format!("{prefix}-{stamp}-{n}")
        };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    unreachable!()
}
