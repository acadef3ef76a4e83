//! The simulated world: building, occupancy, weather and reward.

use std::sync::Arc;

use crate::agents::observation::{GlobalState, ZoneReading};
use crate::calendar::{CalendarTime, HOURS_PER_DAY};
use crate::error::{Error, Result};
use crate::occupancy::OccupancySchedule;
use crate::reward::{complaint_magnitude, compute_reward, flatten_energy, temp_deviation, RewardConfig};
use crate::sim::{load_weather, Building, BuildingConfig, WeatherRecord};

use super::config::TrainingConfig;

/// What one hourly step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFeedback {
    pub e_all: f64,
    pub e_flat: f64,
    /// Per-zone complaint magnitudes at the new time step.
    pub complaints: Vec<f64>,
    pub reward: f64,
    /// Per-zone energy over the step, kWh.
    pub zone_energy: Vec<f64>,
    /// Zone temperatures at the new time step (unclamped).
    pub temperatures: Vec<f64>,
}

/// Building simulator plus the exogenous inputs that drive it. Weather and
/// schedule are shared read-only between worlds.
#[derive(Debug, Clone)]
pub struct Environment {
    building: Building,
    schedule: Arc<OccupancySchedule>,
    weather: Arc<Vec<WeatherRecord>>,
    reward: RewardConfig,
    initial_temp: f64,
    hour: usize,
}

impl Environment {
    pub fn new(
        building: BuildingConfig,
        schedule: Arc<OccupancySchedule>,
        weather: Arc<Vec<WeatherRecord>>,
        reward: RewardConfig,
        initial_temp: f64,
    ) -> Result<Self> {
        if schedule.n_zones() != building.n_zones() {
            return Err(Error::Config(format!(
                "schedule has {} zones, building has {}",
                schedule.n_zones(),
                building.n_zones()
            )));
        }
        if weather.is_empty() {
            return Err(Error::Config("empty weather series".into()));
        }
        Ok(Environment {
            building: Building::new(building, initial_temp)?,
            schedule,
            weather,
            reward,
            initial_temp,
            hour: 0,
        })
    }

    /// Builds the world described by a run config.
    pub fn from_config(config: &TrainingConfig) -> Result<Self> {
        let env = &config.environment;
        let building = env.building.load()?;
        let schedule = env.load_schedule()?;
        let weather = load_weather(&env.weather, env.episode_days)?;
        for &z in env.controlled_zones.iter().flatten() {
            if z >= building.n_zones() {
                return Err(Error::Config(format!("controlled zone {z} does not exist")));
            }
        }
        Self::new(
            building,
            Arc::new(schedule),
            Arc::new(weather),
            config.reward,
            env.initial_temp,
        )
    }

    pub fn n_zones(&self) -> usize {
        self.building.n_zones()
    }

    pub fn hour(&self) -> usize {
        self.hour
    }

    /// Hours of weather available, i.e. the longest possible episode.
    pub fn horizon(&self) -> usize {
        self.weather.len()
    }

    pub fn days_available(&self) -> usize {
        self.weather.len() / HOURS_PER_DAY
    }

    pub fn schedule(&self) -> &OccupancySchedule {
        &self.schedule
    }

    pub fn building(&self) -> &Building {
        &self.building
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn time(&self) -> CalendarTime {
        CalendarTime::from_hour(self.hour, self.schedule.start_weekday)
    }

    pub fn reset(&mut self) {
        self.building.reset(self.initial_temp);
        self.hour = 0;
    }

    fn weather_at(&self, hour: usize) -> Result<&WeatherRecord> {
        self.weather
            .get(hour)
            .ok_or_else(|| Error::Config(format!("no weather for hour {hour}")))
    }

    /// Raw global state at the current hour. Past the end of the weather
    /// series (the successor of an episode's terminal step) the last record
    /// is repeated.
    pub fn global_state(&self) -> Result<GlobalState> {
        let w = if self.hour == self.weather.len() {
            &self.weather[self.hour - 1]
        } else {
            self.weather_at(self.hour)?
        };
        let now = self.schedule.occupancy_at(self.hour);
        let in1 = self.schedule.forecast(self.hour, 1)?;
        let in2 = self.schedule.forecast(self.hour, 2)?;
        let zones: Vec<ZoneReading> = self
            .building
            .states()
            .iter()
            .enumerate()
            .map(|(z, s)| ZoneReading {
                temperature: s.temperature,
                relative_count: now[z].relative_count,
                relative_count_1h: in1[z],
                relative_count_2h: in2[z],
            })
            .collect();
        Ok(GlobalState::assemble(
            &self.time(),
            w.outdoor_temp,
            w.direct_solar,
            w.diffuse_solar,
            &zones,
        ))
    }

    /// Simulates the current hour with the given setpoints and advances the
    /// clock. Complaints compare the resulting temperatures with the comfort
    /// wishes of whoever is present at the new time step.
    pub fn step(&mut self, setpoints: &[f64]) -> Result<StepFeedback> {
        let weather = *self.weather_at(self.hour)?;
        let people: Vec<f64> = self
            .schedule
            .occupancy_at(self.hour)
            .iter()
            .map(|o| o.headcount as f64)
            .collect();
        let outcome = self.building.step(setpoints, &weather, &people)?;
        self.hour += 1;

        let present = self.schedule.occupancy_at(self.hour);
        let complaints: Vec<f64> = outcome
            .zones
            .iter()
            .zip(&present)
            .map(|(z, o)| complaint_magnitude(temp_deviation(z.temperature, o.comfort_temp)))
            .collect();
        Ok(StepFeedback {
            e_all: outcome.e_all,
            e_flat: flatten_energy(outcome.e_all, &self.reward),
            reward: compute_reward(outcome.e_all, &complaints, &self.reward),
            complaints,
            zone_energy: outcome.zones.iter().map(|z| z.energy_consumed).collect(),
            temperatures: outcome.zones.iter().map(|z| z.temperature).collect(),
        })
    }
}
