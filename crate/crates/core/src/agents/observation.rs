//! Global state vector and per-agent observation slices.
//!
//! Global layout: day of week, minute of day, calendar week, outdoor
//! temperature, direct solar, diffuse solar, then per zone: temperature,
//! relative headcount now, in one hour, in two hours.

use crate::calendar::CalendarTime;
use crate::error::{Error, Result};

pub const GLOBAL_FEATURES: usize = 6;
pub const ZONE_FEATURES: usize = 4;
pub const OBSERVATION_DIM: usize = GLOBAL_FEATURES + ZONE_FEATURES;

/// Min/max used for min-max scaling of each general variable.
pub const GLOBAL_BOUNDS: [(f64, f64); GLOBAL_FEATURES] = [
    (0.0, 6.0),
    (0.0, 1439.0),
    (1.0, 53.0),
    (-20.0, 40.0),
    (0.0, 350.0),
    (0.0, 1000.0),
];

/// Min/max for each per-zone variable.
pub const ZONE_BOUNDS: [(f64, f64); ZONE_FEATURES] =
    [(10.0, 34.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)];

pub const fn global_state_len(n_zones: usize) -> usize {
    GLOBAL_FEATURES + ZONE_FEATURES * n_zones
}

/// Raw (unscaled) building state at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalState(Vec<f64>);

/// Per-zone inputs to [`GlobalState::assemble`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneReading {
    pub temperature: f64,
    pub relative_count: f64,
    pub relative_count_1h: f64,
    pub relative_count_2h: f64,
}

impl GlobalState {
    pub fn assemble(
        time: &CalendarTime,
        outdoor_temp: f64,
        direct_solar: f64,
        diffuse_solar: f64,
        zones: &[ZoneReading],
    ) -> Self {
        let mut v = Vec::with_capacity(global_state_len(zones.len()));
        v.extend([
            time.day_of_week as f64,
            time.minute_of_day as f64,
            time.calendar_week as f64,
            outdoor_temp,
            direct_solar,
            diffuse_solar,
        ]);
        for z in zones {
            v.extend([
                z.temperature,
                z.relative_count,
                z.relative_count_1h,
                z.relative_count_2h,
            ]);
        }
        GlobalState(v)
    }

    pub fn from_raw(values: Vec<f64>) -> Result<Self> {
        if values.len() < GLOBAL_FEATURES || (values.len() - GLOBAL_FEATURES) % ZONE_FEATURES != 0 {
            return Err(Error::Input(format!(
                "global state length {} is not 6 + 4·n",
                values.len()
            )));
        }
        Ok(GlobalState(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn n_zones(&self) -> usize {
        (self.0.len() - GLOBAL_FEATURES) / ZONE_FEATURES
    }
}

fn scale(value: f64, (lo, hi): (f64, f64)) -> f64 {
    (value.clamp(lo, hi) - lo) / (hi - lo)
}

/// The general variables plus the selected zone's block, each clamped to
/// its bounds and scaled to [0, 1].
pub fn build_observation(state: &GlobalState, zone: usize) -> Result<[f64; OBSERVATION_DIM]> {
    if zone >= state.n_zones() {
        return Err(Error::Input(format!(
            "zone {zone} out of range for {} zones",
            state.n_zones()
        )));
    }
    let v = state.values();
    let mut obs = [0.0; OBSERVATION_DIM];
    for (k, bounds) in GLOBAL_BOUNDS.iter().enumerate() {
        obs[k] = scale(v[k], *bounds);
    }
    let base = GLOBAL_FEATURES + zone * ZONE_FEATURES;
    for (k, bounds) in ZONE_BOUNDS.iter().enumerate() {
        obs[GLOBAL_FEATURES + k] = scale(v[base + k], *bounds);
    }
    Ok(obs)
}
