//! Lumped-parameter (RC) thermal model: one air-plus-mass node per zone,
//! explicit Euler integration, ideal heating-only thermostats.

use serde::{Deserialize, Serialize};

use super::weather::WeatherRecord;
use crate::error::{Error, Result};

pub const SECONDS_PER_STEP: f64 = 3600.0;
pub const MIN_SETPOINT: f64 = 15.0;
pub const MAX_SETPOINT: f64 = 25.0;
/// Temperature bounds applied when a zone temperature is observed.
pub const OBSERVED_TEMP_MIN: f64 = 10.0;
pub const OBSERVED_TEMP_MAX: f64 = 34.0;

/// Volumetric heat capacity of air, J/(m³·K).
const AIR_HEAT_CAPACITY: f64 = 1.2 * 1005.0;
/// Furniture, walls and slabs relative to the air volume.
const THERMAL_MASS_MULTIPLIER: f64 = 40.0;
/// Unheated cooling rate the exterior envelope is sized for: 1 K/h at 35 K.
const DESIGN_DELTA_T: f64 = 35.0;
const DESIGN_COOLING_RATE: f64 = 1.0 / 3600.0;
const INTERIOR_WALL_U: f64 = 1.5;
const HEATER_POWER_DENSITY: f64 = 150.0;
const STOREY_HEIGHT: f64 = 3.05;
/// Heat below this amount over a step does not count as an active heater.
const ACTIVE_THRESHOLD_WH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborLink {
    pub zone: usize,
    /// K/W
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub name: String,
    /// m²
    pub floor_area: f64,
    /// J/K
    pub thermal_capacitance: f64,
    /// K/W; 0 means the zone has no exterior envelope.
    pub resistance_to_outdoor: f64,
    #[serde(default)]
    pub resistance_to_neighbors: Vec<NeighborLink>,
    /// Effective aperture × transmittance, m².
    pub window_solar_gain_factor: f64,
    /// W
    pub heater_max_power: f64,
    /// W
    pub internal_gain_per_person: f64,
}

impl ZoneConfig {
    pub fn has_exterior(&self) -> bool {
        self.resistance_to_outdoor > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingConfig {
    pub zones: Vec<ZoneConfig>,
    #[serde(default = "defaults::heater_efficiency")]
    pub heater_efficiency: f64,
    /// Central plant consumption while any zone heater is active, kWh per step.
    #[serde(default = "defaults::base_load_active")]
    pub base_load_active_kwh: f64,
    /// Central plant consumption otherwise, kWh per step.
    #[serde(default = "defaults::base_load_idle")]
    pub base_load_idle_kwh: f64,
    /// Euler sub-steps per one-hour step.
    #[serde(default = "defaults::substeps")]
    pub substeps: usize,
}

mod defaults {
    pub fn heater_efficiency() -> f64 {
        0.9
    }
    pub fn base_load_active() -> f64 {
        2.0
    }
    pub fn base_load_idle() -> f64 {
        0.5
    }
    pub fn substeps() -> usize {
        60
    }
}

impl BuildingConfig {
    /// The `building_5zone` preset: a 30.5 m × 15.2 m single-storey office
    /// with four 3.7 m deep perimeter rooms (Space 1 south, 2 east, 3 north,
    /// 4 west) around an interior core (Space 5).
    pub fn five_zone() -> Self {
        const LENGTH: f64 = 30.5;
        const WIDTH: f64 = 15.2;
        const DEPTH: f64 = 3.7;
        let core_len = LENGTH - 2.0 * DEPTH;
        let core_wid = WIDTH - 2.0 * DEPTH;
        let long_area = (LENGTH + core_len) / 2.0 * DEPTH;
        let short_area = (WIDTH + core_wid) / 2.0 * DEPTH;
        let areas = [long_area, short_area, long_area, short_area, core_len * core_wid];
        let windows = [12.0, 5.0, 4.0, 5.0, 0.0];

        let wall = |length: f64| 1.0 / (INTERIOR_WALL_U * length * STOREY_HEIGHT);
        let diagonal = (2.0 * DEPTH * DEPTH).sqrt();
        // (a, b, wall length)
        let links = [
            (0, 4, core_len),
            (2, 4, core_len),
            (1, 4, core_wid),
            (3, 4, core_wid),
            (0, 1, diagonal),
            (1, 2, diagonal),
            (2, 3, diagonal),
            (3, 0, diagonal),
        ];

        let mut zones: Vec<ZoneConfig> = (0..5)
            .map(|i| {
                let capacitance =
                    areas[i] * STOREY_HEIGHT * AIR_HEAT_CAPACITY * THERMAL_MASS_MULTIPLIER;
                let exterior = i != 4;
                ZoneConfig {
                    name: format!("Space {}", i + 1),
                    floor_area: areas[i],
                    thermal_capacitance: capacitance,
                    resistance_to_outdoor: if exterior {
                        DESIGN_DELTA_T / (capacitance * DESIGN_COOLING_RATE)
                    } else {
                        0.0
                    },
                    resistance_to_neighbors: Vec::new(),
                    window_solar_gain_factor: windows[i],
                    heater_max_power: HEATER_POWER_DENSITY * areas[i],
                    internal_gain_per_person: 100.0,
                }
            })
            .collect();
        for (a, b, length) in links {
            let resistance = wall(length);
            zones[a]
                .resistance_to_neighbors
                .push(NeighborLink { zone: b, resistance });
            zones[b]
                .resistance_to_neighbors
                .push(NeighborLink { zone: a, resistance });
        }

        BuildingConfig {
            zones,
            heater_efficiency: defaults::heater_efficiency(),
            base_load_active_kwh: defaults::base_load_active(),
            base_load_idle_kwh: defaults::base_load_idle(),
            substeps: defaults::substeps(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "building_5zone" => Ok(Self::five_zone()),
            other => Err(Error::Config(format!("unknown building preset `{other}`"))),
        }
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.zones.is_empty() {
            return bad("building has no zones".into());
        }
        if !(self.heater_efficiency > 0.0 && self.heater_efficiency <= 1.0) {
            return bad(format!("heater efficiency {} not in (0, 1]", self.heater_efficiency));
        }
        if !(self.base_load_idle_kwh >= 0.0 && self.base_load_active_kwh >= 0.0) {
            return bad("base loads must be non-negative".into());
        }
        if self.substeps == 0 {
            return bad("substeps must be positive".into());
        }
        for (i, z) in self.zones.iter().enumerate() {
            if !(z.thermal_capacitance > 0.0) {
                return bad(format!("{}: thermal_capacitance must be > 0", z.name));
            }
            if !(z.resistance_to_outdoor >= 0.0) {
                return bad(format!("{}: resistance_to_outdoor must be >= 0", z.name));
            }
            if !(z.heater_max_power > 0.0) {
                return bad(format!("{}: heater_max_power must be > 0", z.name));
            }
            if !(z.window_solar_gain_factor >= 0.0 && z.internal_gain_per_person >= 0.0) {
                return bad(format!("{}: gains must be non-negative", z.name));
            }
            for link in &z.resistance_to_neighbors {
                if link.zone >= self.zones.len() || link.zone == i {
                    return bad(format!("{}: invalid neighbor index {}", z.name, link.zone));
                }
                if !(link.resistance > 0.0) {
                    return bad(format!("{}: neighbor resistance must be > 0", z.name));
                }
                let mirrored = self.zones[link.zone]
                    .resistance_to_neighbors
                    .iter()
                    .any(|back| back.zone == i && back.resistance == link.resistance);
                if !mirrored {
                    return bad(format!(
                        "{}: link to zone {} is not mirrored with the same resistance",
                        z.name, link.zone
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneThermalState {
    /// °C, unclamped physics state.
    pub temperature: f64,
    /// Wh delivered by the zone heater over the last step.
    pub heat_delivered: f64,
    /// kWh: heater input energy plus this zone's share of the central load.
    pub energy_consumed: f64,
}

impl ZoneThermalState {
    pub fn at(temperature: f64) -> Self {
        ZoneThermalState {
            temperature,
            heat_delivered: 0.0,
            energy_consumed: 0.0,
        }
    }

    /// Temperature as seen by sensors, clamped to the observation range.
    pub fn observed_temperature(&self) -> f64 {
        self.temperature.clamp(OBSERVED_TEMP_MIN, OBSERVED_TEMP_MAX)
    }
}

/// Net heat transferred across one interior wall during a step, Wh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkExchange {
    pub a: usize,
    pub b: usize,
    pub into_a: f64,
    pub into_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub zones: Vec<ZoneThermalState>,
    /// kWh consumed by the whole plant over the step.
    pub e_all: f64,
    pub links: Vec<LinkExchange>,
}

/// Advances every zone by one hour.
///
/// `occupancy` holds person counts per zone. With `heating` false the
/// heaters stay off regardless of setpoint.
pub fn step_building(
    config: &BuildingConfig,
    states: &[ZoneThermalState],
    setpoints: &[f64],
    weather: &WeatherRecord,
    occupancy: &[f64],
    heating: bool,
) -> Result<StepOutcome> {
    let n = config.n_zones();
    if states.len() != n || setpoints.len() != n || occupancy.len() != n {
        return Err(Error::Config(format!(
            "building has {n} zones but got {} states, {} setpoints, {} occupancy counts",
            states.len(),
            setpoints.len(),
            occupancy.len()
        )));
    }
    weather.validate().map_err(Error::Input)?;
    for &sp in setpoints {
        if !(MIN_SETPOINT..=MAX_SETPOINT).contains(&sp) {
            return Err(Error::Input(format!(
                "setpoint {sp} outside [{MIN_SETPOINT}, {MAX_SETPOINT}]"
            )));
        }
    }
    if occupancy.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
        return Err(Error::Input("occupancy counts must be finite and >= 0".into()));
    }

    let dt = SECONDS_PER_STEP / config.substeps as f64;
    let mut temps: Vec<f64> = states.iter().map(|s| s.temperature).collect();
    let mut next = temps.clone();
    let mut heat_j = vec![0.0; n];

    let links: Vec<(usize, usize, f64)> = config
        .zones
        .iter()
        .enumerate()
        .flat_map(|(a, z)| {
            z.resistance_to_neighbors
                .iter()
                .filter(move |l| l.zone > a)
                .map(move |l| (a, l.zone, l.resistance))
        })
        .collect();
    let mut link_j = vec![0.0; links.len()];

    let fixed_gain: Vec<f64> = config
        .zones
        .iter()
        .zip(occupancy)
        .map(|(z, &people)| {
            let solar = if z.has_exterior() {
                z.window_solar_gain_factor * (weather.direct_solar + weather.diffuse_solar)
            } else {
                0.0
            };
            solar + people * z.internal_gain_per_person
        })
        .collect();

    let mut flux = vec![0.0; n];
    for _ in 0..config.substeps {
        for (i, z) in config.zones.iter().enumerate() {
            flux[i] = fixed_gain[i];
            if z.has_exterior() {
                flux[i] += (weather.outdoor_temp - temps[i]) / z.resistance_to_outdoor;
            }
        }
        for (k, &(a, b, r)) in links.iter().enumerate() {
            let q = (temps[b] - temps[a]) / r;
            flux[a] += q;
            flux[b] -= q;
            link_j[k] += q * dt;
        }
        for (i, z) in config.zones.iter().enumerate() {
            let c = z.thermal_capacitance;
            let power = if heating {
                (c * (setpoints[i] - temps[i]) / dt - flux[i]).clamp(0.0, z.heater_max_power)
            } else {
                0.0
            };
            heat_j[i] += power * dt;
            next[i] = temps[i] + dt / c * (flux[i] + power);
        }
        std::mem::swap(&mut temps, &mut next);
    }

    let heat_wh: Vec<f64> = heat_j.iter().map(|j| j / 3600.0).collect();
    let total_heat: f64 = heat_wh.iter().sum();
    let any_active = heat_wh.iter().any(|&h| h > ACTIVE_THRESHOLD_WH);
    let base_load = if any_active {
        config.base_load_active_kwh
    } else {
        config.base_load_idle_kwh
    };

    let zones: Vec<ZoneThermalState> = (0..n)
        .map(|i| {
            let share = if total_heat > 0.0 && any_active {
                heat_wh[i] / total_heat
            } else {
                1.0 / n as f64
            };
            ZoneThermalState {
                temperature: temps[i],
                heat_delivered: heat_wh[i],
                energy_consumed: heat_wh[i] / config.heater_efficiency / 1000.0
                    + share * base_load,
            }
        })
        .collect();
    let e_all = zones.iter().map(|z| z.energy_consumed).sum();
    let links = links
        .iter()
        .zip(&link_j)
        .map(|(&(a, b, _), &j)| LinkExchange {
            a,
            b,
            into_a: j / 3600.0,
            into_b: -j / 3600.0,
        })
        .collect();

    Ok(StepOutcome { zones, e_all, links })
}

/// A building instance owning its zone state.
#[derive(Debug, Clone)]
pub struct Building {
    config: BuildingConfig,
    states: Vec<ZoneThermalState>,
    heating: bool,
}

impl Building {
    pub fn new(config: BuildingConfig, initial_temp: f64) -> Result<Self> {
        config.validate()?;
        let states = vec![ZoneThermalState::at(initial_temp); config.n_zones()];
        Ok(Building {
            config,
            states,
            heating: true,
        })
    }

    pub fn config(&self) -> &BuildingConfig {
        &self.config
    }

    pub fn n_zones(&self) -> usize {
        self.config.n_zones()
    }

    pub fn states(&self) -> &[ZoneThermalState] {
        &self.states
    }

    pub fn reset(&mut self, temperature: f64) {
        for s in &mut self.states {
            *s = ZoneThermalState::at(temperature);
        }
    }

    pub fn set_temperatures(&mut self, temps: &[f64]) {
        for (s, &t) in self.states.iter_mut().zip(temps) {
            s.temperature = t;
        }
    }

    pub fn set_heating(&mut self, enabled: bool) {
        self.heating = enabled;
    }

    pub fn step(
        &mut self,
        setpoints: &[f64],
        weather: &WeatherRecord,
        occupancy: &[f64],
    ) -> Result<StepOutcome> {
        let outcome = step_building(
            &self.config,
            &self.states,
            setpoints,
            weather,
            occupancy,
            self.heating,
        )?;
        self.states.clone_from(&outcome.zones);
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calm(outdoor: f64) -> WeatherRecord {
        WeatherRecord {
            hour: 0,
            outdoor_temp: outdoor,
            direct_solar: 0.0,
            diffuse_solar: 0.0,
        }
    }

    #[test]
    fn preset_is_valid_and_symmetric() {
        let cfg = BuildingConfig::five_zone();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_zones(), 5);
        assert!(!cfg.zones[4].has_exterior());
        assert_eq!(cfg.zones[4].window_solar_gain_factor, 0.0);
        // 1 K/h at 35 K for an isolated exterior zone.
        let z = &cfg.zones[0];
        let rate = 35.0 / z.resistance_to_outdoor / z.thermal_capacitance * 3600.0;
        assert!((rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_links_rejected() {
        let mut cfg = BuildingConfig::five_zone();
        cfg.zones[0].resistance_to_neighbors[0].resistance *= 2.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn equilibrium_stays_put() {
        let cfg = BuildingConfig::five_zone();
        let states = vec![ZoneThermalState::at(15.0); 5];
        let out = step_building(&cfg, &states, &[15.0; 5], &calm(15.0), &[0.0; 5], true).unwrap();
        for z in &out.zones {
            assert_eq!(z.temperature, 15.0);
            assert_eq!(z.heat_delivered, 0.0);
        }
        assert!((out.e_all - cfg.base_load_idle_kwh).abs() < 1e-12);
    }

    #[test]
    fn heat_flows_toward_cold() {
        let cfg = BuildingConfig::five_zone();
        let states = vec![ZoneThermalState::at(21.0); 5];
        let out = step_building(&cfg, &states, &[15.0; 5], &calm(-20.0), &[0.0; 5], true).unwrap();
        for z in &out.zones[..4] {
            assert!(z.temperature < 21.0);
            assert_eq!(z.heat_delivered, 0.0);
        }
    }

    /// Single isolated zone: hand evaluation of one Euler step.
    #[test]
    fn single_zone_hand_evaluated() {
        let zone = ZoneConfig {
            name: "z".into(),
            floor_area: 10.0,
            thermal_capacitance: 1.0e6,
            resistance_to_outdoor: 0.01,
            resistance_to_neighbors: vec![],
            window_solar_gain_factor: 0.0,
            heater_max_power: 5000.0,
            internal_gain_per_person: 100.0,
        };
        let cfg = BuildingConfig {
            zones: vec![zone],
            heater_efficiency: 0.9,
            base_load_active_kwh: 2.0,
            base_load_idle_kwh: 0.5,
            substeps: 1,
        };
        // Loss (-20 - 18) / 0.01 = -3800 W; required power to hit 21 °C in
        // one hour: 1e6 * 3 / 3600 + 3800 = 4633.33 W (below the 5 kW cap).
        let out = step_building(
            &cfg,
            &[ZoneThermalState::at(18.0)],
            &[21.0],
            &calm(-20.0),
            &[0.0],
            true,
        )
        .unwrap();
        let z = out.zones[0];
        assert!((z.heat_delivered - 4633.333_333_333_333).abs() < 1e-9);
        assert!((z.temperature - 21.0).abs() < 1e-12);
        // 4.633 kWh / 0.9 + 2.0 base load.
        assert!((out.e_all - (4.633_333_333_333_333 / 0.9 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn saturated_heater_undershoots() {
        let cfg = BuildingConfig::five_zone();
        let states = vec![ZoneThermalState::at(10.0); 5];
        let out = step_building(&cfg, &states, &[25.0; 5], &calm(-30.0), &[0.0; 5], true).unwrap();
        for (z, zc) in out.zones.iter().zip(&cfg.zones) {
            assert!(z.heat_delivered <= zc.heater_max_power + 1e-9);
            assert!((z.heat_delivered - zc.heater_max_power).abs() < 1e-6);
            assert!(z.temperature < 25.0);
        }
    }

    #[test]
    fn mismatched_lengths_and_bad_weather() {
        let cfg = BuildingConfig::five_zone();
        let states = vec![ZoneThermalState::at(15.0); 5];
        assert!(matches!(
            step_building(&cfg, &states, &[15.0; 4], &calm(0.0), &[0.0; 5], true),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            step_building(&cfg, &states, &[15.0; 5], &calm(f64::NAN), &[0.0; 5], true),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn observed_temperature_clamps() {
        assert_eq!(ZoneThermalState::at(5.0).observed_temperature(), 10.0);
        assert_eq!(ZoneThermalState::at(40.0).observed_temperature(), 34.0);
        assert_eq!(ZoneThermalState::at(22.0).observed_temperature(), 22.0);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = BuildingConfig::five_zone();
        let text = toml::to_string(&cfg).unwrap();
        let back: BuildingConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
