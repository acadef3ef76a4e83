//! Building thermal simulation and weather input.

mod building;
pub mod weather;

pub use building::{
    step_building, Building, BuildingConfig, LinkExchange, NeighborLink, StepOutcome,
    ZoneConfig, ZoneThermalState, MAX_SETPOINT, MIN_SETPOINT, OBSERVED_TEMP_MAX,
    OBSERVED_TEMP_MIN, SECONDS_PER_STEP,
};
pub use weather::{load_weather, WeatherRecord, WeatherSource};
