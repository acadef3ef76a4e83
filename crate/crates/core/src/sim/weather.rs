//! Hourly weather series: CSV ingestion and a seeded cold-climate generator.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::HOURS_PER_DAY;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["hour", "outdoor_temp", "direct_solar", "diffuse_solar"];

/// Synthetic profile parameters.
pub const SYNTH_MEAN_TEMP: f64 = -15.0;
pub const SYNTH_DAILY_AMPLITUDE: f64 = 8.0;
/// First and last hour of the solar bell (exclusive end).
pub const SOLAR_START_HOUR: usize = 10;
pub const SOLAR_END_HOUR: usize = 16;
const PEAK_DIRECT: f64 = 350.0;
const PEAK_DIFFUSE: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub hour: usize,
    pub outdoor_temp: f64,
    pub direct_solar: f64,
    pub diffuse_solar: f64,
}

impl WeatherRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.outdoor_temp.is_finite()
            && self.direct_solar.is_finite()
            && self.diffuse_solar.is_finite())
        {
            return Err("non-finite weather value".into());
        }
        if !(-60.0..=60.0).contains(&self.outdoor_temp) {
            return Err(format!(
                "outdoor_temp {} outside [-60, 60]",
                self.outdoor_temp
            ));
        }
        if self.direct_solar < 0.0 || self.diffuse_solar < 0.0 {
            return Err("negative solar radiation".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeatherSource {
    Synthetic { seed: u64 },
    Csv { path: String },
}

impl Default for WeatherSource {
    fn default() -> Self {
        WeatherSource::Synthetic { seed: 0 }
    }
}

/// Loads `days` worth of hourly records from the given source.
///
/// A CSV file must cover at least the requested span; extra rows are dropped.
pub fn load_weather(source: &WeatherSource, days: usize) -> Result<Vec<WeatherRecord>> {
    let records = match source {
        WeatherSource::Synthetic { seed } => synthetic(*seed, days),
        WeatherSource::Csv { path } => {
            let mut records = read_csv_file(path)?;
            let hours = days * HOURS_PER_DAY;
            if records.len() < hours {
                return Err(Error::Config(format!(
                    "{path}: weather covers {} hours, episode needs {hours}",
                    records.len()
                )));
            }
            records.truncate(hours);
            records
        }
    };
    Ok(records)
}

/// Seeded January-like profile: sinusoidal daily cycle around -15 °C with a
/// slowly wandering day offset, and a solar bell between 10:00 and 16:00.
pub fn synthetic(seed: u64, days: usize) -> Vec<WeatherRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offset = 0.0_f64;
    let mut records = Vec::with_capacity(days * HOURS_PER_DAY);
    for day in 0..days {
        offset = 0.7 * offset + rng.random_range(-2.0..2.0);
        let clearness: f64 = rng.random_range(0.2..1.0);
        for hour_of_day in 0..HOURS_PER_DAY {
            let hour = day * HOURS_PER_DAY + hour_of_day;
            // Minimum at 03:00, maximum at 15:00.
            let phase = 2.0 * PI * (hour_of_day as f64 - 15.0) / HOURS_PER_DAY as f64;
            let outdoor_temp = SYNTH_MEAN_TEMP + offset + SYNTH_DAILY_AMPLITUDE * phase.cos();
            let bell = solar_bell(hour_of_day);
            records.push(WeatherRecord {
                hour,
                outdoor_temp,
                direct_solar: PEAK_DIRECT * clearness * bell,
                diffuse_solar: PEAK_DIFFUSE * (1.2 - clearness) * bell,
            });
        }
    }
    records
}

/// Relative solar intensity in [0, 1] for the hour starting at `hour_of_day`.
fn solar_bell(hour_of_day: usize) -> f64 {
    if !(SOLAR_START_HOUR..SOLAR_END_HOUR).contains(&hour_of_day) {
        return 0.0;
    }
    let span = (SOLAR_END_HOUR - SOLAR_START_HOUR) as f64;
    let x = (hour_of_day as f64 + 0.5 - SOLAR_START_HOUR as f64) / span;
    (PI * x).sin()
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Vec<WeatherRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string())
}

/// Parses weather CSV. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<Vec<WeatherRecord>> {
    let parse_err = |row: usize, message: String| Error::Parse {
        path: origin.to_string(),
        row,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(0, e.to_string()))?
        .clone();
    let mut columns = [0usize; 4];
    for (slot, name) in columns.iter_mut().zip(CSV_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(0, format!("missing column `{name}`")))?;
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| parse_err(row_no, e.to_string()))?;
        let field = |col: usize| -> Result<&str> {
            row.get(columns[col])
                .ok_or_else(|| parse_err(row_no, format!("missing `{}`", CSV_HEADER[col])))
        };
        let hour: usize = field(0)?
            .parse()
            .map_err(|e| parse_err(row_no, format!("bad hour: {e}")))?;
        let mut values = [0.0; 3];
        for (k, v) in values.iter_mut().enumerate() {
            *v = field(k + 1)?
                .parse()
                .map_err(|e| parse_err(row_no, format!("bad {}: {e}", CSV_HEADER[k + 1])))?;
        }
        if hour != records.len() {
            return Err(parse_err(
                row_no,
                format!("expected hour {}, found {hour}", records.len()),
            ));
        }
        let record = WeatherRecord {
            hour,
            outdoor_temp: values[0],
            direct_solar: values[1],
            diffuse_solar: values[2],
        };
        record.validate().map_err(|m| parse_err(row_no, m))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(parse_err(0, "no weather rows".into()));
    }
    Ok(records)
}

pub fn write_csv<W: Write>(writer: W, records: &[WeatherRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Format(e.to_string());
    wtr.write_record(CSV_HEADER).map_err(to_err)?;
    for r in records {
        wtr.write_record(&[
            r.hour.to_string(),
            r.outdoor_temp.to_string(),
            r.direct_solar.to_string(),
            r.diffuse_solar.to_string(),
        ])
        .map_err(to_err)?;
    }
    wtr.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
