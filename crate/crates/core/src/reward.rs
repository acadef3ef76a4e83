//! Building-level reward: weighted energy use plus occupant complaints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slope applied to energy above the clip level.
pub const FLATTEN_SLOPE: f64 = 0.1;
/// Half-width of the comfort band, K.
pub const COMFORT_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// kWh⁻¹
    pub lambda_e: f64,
    /// K⁻¹
    pub lambda_m: f64,
    /// kWh
    pub clip_level: f64,
    pub flatten_enabled: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            lambda_e: 0.004,
            lambda_m: 0.12,
            clip_level: 150.0,
            flatten_enabled: true,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_e > 0.0 && self.lambda_m > 0.0 && self.clip_level > 0.0) {
            return Err(Error::Config(
                "lambda_e, lambda_m and clip_level must all be > 0".into(),
            ));
        }
        Ok(())
    }

    /// λ_m / λ_e, the complaint-versus-energy weighting.
    pub fn ratio(&self) -> f64 {
        self.lambda_m / self.lambda_e
    }
}

/// |T − S| for an occupied zone, 0 when nobody is there.
pub fn temp_deviation(zone_temp: f64, comfort_temp: Option<f64>) -> f64 {
    match comfort_temp {
        Some(s) => (zone_temp - s).abs(),
        None => 0.0,
    }
}

/// Complaint magnitude: nothing inside the band, the full deviation outside.
pub fn complaint_magnitude(deviation: f64) -> f64 {
    if deviation <= COMFORT_BAND {
        0.0
    } else {
        deviation
    }
}

pub fn flatten_energy(e_all: f64, config: &RewardConfig) -> f64 {
    if !config.flatten_enabled || e_all <= config.clip_level {
        e_all
    } else {
        (e_all - config.clip_level) * FLATTEN_SLOPE + config.clip_level
    }
}

pub fn compute_reward(e_all: f64, complaints: &[f64], config: &RewardConfig) -> f64 {
    let complaint_sum: f64 = complaints.iter().sum();
    -(config.lambda_e * flatten_energy(e_all, config) + config.lambda_m * complaint_sum)
}
