use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linearly annealed exploration rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearSchedule {
    pub start: f64,
    pub end: f64,
    /// Portion of the phase over which the value anneals, in (0, 1].
    #[serde(default = "one")]
    pub decay_fraction: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for LinearSchedule {
    fn default() -> Self {
        LinearSchedule {
            start: 1.0,
            end: 0.05,
            decay_fraction: 1.0,
        }
    }
}

impl LinearSchedule {
    /// Value at `progress` ∈ [0, 1] through the phase.
    pub fn value(&self, progress: f64) -> f64 {
        let f = (progress / self.decay_fraction).clamp(0.0, 1.0);
        (1.0 - f) * self.start + f * self.end
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.start)
            && (0.0..=1.0).contains(&self.end)
            && self.decay_fraction > 0.0
            && self.decay_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("invalid epsilon schedule".into()))
        }
    }
}

/// Piecewise-constant learning rate: `values[k]` applies from
/// `milestones[k - 1]` (fraction of the phase) until `milestones[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepSchedule {
    pub values: Vec<f64>,
    pub milestones: Vec<f64>,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            values: vec![0.8, 0.2, 0.05, 0.01],
            milestones: vec![0.25, 0.5, 0.75],
        }
    }
}

impl StepSchedule {
    pub fn value(&self, progress: f64) -> f64 {
        let k = self.milestones.iter().filter(|&&m| progress >= m).count();
        self.values[k]
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        let sorted = self.milestones.windows(2).all(|w| w[0] < w[1]);
        if self.values.len() != self.milestones.len() + 1
            || !sorted
            || self.values.iter().any(|&v| !(v > 0.0))
        {
            return Err(Error::Config(
                "learning-rate schedule needs n+1 positive values for n increasing milestones"
                    .into(),
            ));
        }
        Ok(())
    }
}
