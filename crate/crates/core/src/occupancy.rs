//! Weekly occupancy schedules with per-hour headcounts and the occupants'
//! agreed comfort temperature.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::{CalendarTime, HOURS_PER_DAY, HOURS_PER_WEEK};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["zone", "day", "hour", "headcount", "comfort_temp"];
pub const MIN_COMFORT: f64 = 18.0;
pub const MAX_COMFORT: f64 = 24.0;

/// Capacities of Space 1..5 in the five-zone preset.
pub const DEFAULT_CAPACITIES: [u32; 5] = [12, 6, 6, 6, 10];
/// Office zones (0-based) occupied on weekdays from 08:00 to 16:00.
pub const OFFICE_ZONES: [usize; 2] = [2, 4];
const OFFICE_HEADCOUNT: [u32; 5] = [0, 0, 4, 0, 8];
pub const OFFICE_START_HOUR: usize = 8;
pub const OFFICE_END_HOUR: usize = 16;
pub const OFFICE_COMFORT: f64 = 21.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourEntry {
    pub headcount: u32,
    /// Mean comfort temperature of the people present; `None` iff empty.
    pub comfort_temp: Option<f64>,
}

impl HourEntry {
    pub const EMPTY: HourEntry = HourEntry {
        headcount: 0,
        comfort_temp: None,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSchedule {
    pub max_capacity: u32,
    /// 168 entries, index = day_of_week * 24 + hour (Monday 00:00 first).
    pub week: Vec<HourEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneOccupancy {
    pub headcount: u32,
    pub relative_count: f64,
    pub comfort_temp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancySchedule {
    pub zones: Vec<ZoneSchedule>,
    /// Day indices (from episode start) with nobody present.
    pub holiday_days: BTreeSet<usize>,
    /// Weekday of hour 0, 0 = Monday.
    pub start_weekday: usize,
}

impl OccupancySchedule {
    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (z, zone) in self.zones.iter().enumerate() {
            if zone.max_capacity == 0 {
                return Err(Error::Config(format!("zone {z}: capacity must be > 0")));
            }
            if zone.week.len() != HOURS_PER_WEEK {
                return Err(Error::Config(format!(
                    "zone {z}: week profile has {} entries, expected {HOURS_PER_WEEK}",
                    zone.week.len()
                )));
            }
            for (h, e) in zone.week.iter().enumerate() {
                if e.headcount > zone.max_capacity {
                    return Err(Error::Config(format!(
                        "zone {z}, hour-of-week {h}: headcount {} exceeds capacity {}",
                        e.headcount, zone.max_capacity
                    )));
                }
                match (e.headcount > 0, e.comfort_temp) {
                    (true, Some(c)) if (MIN_COMFORT..=MAX_COMFORT).contains(&c) => {}
                    (false, None) => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "zone {z}, hour-of-week {h}: comfort temperature must be in \
                             [{MIN_COMFORT}, {MAX_COMFORT}] exactly when occupied"
                        )))
                    }
                }
            }
        }
        if self.start_weekday > 6 {
            return Err(Error::Config("start_weekday must be in 0..=6".into()));
        }
        Ok(())
    }

    fn entry(&self, zone: usize, hour: usize) -> HourEntry {
        let t = CalendarTime::from_hour(hour, self.start_weekday);
        if self.holiday_days.contains(&t.day) {
            return HourEntry::EMPTY;
        }
        self.zones[zone].week[t.day_of_week * HOURS_PER_DAY + t.hour_of_day()]
    }

    /// Occupancy of every zone during the hour starting at `hour`.
    pub fn occupancy_at(&self, hour: usize) -> Vec<ZoneOccupancy> {
        (0..self.n_zones())
            .map(|z| {
                let e = self.entry(z, hour);
                ZoneOccupancy {
                    headcount: e.headcount,
                    relative_count: e.headcount as f64 / self.zones[z].max_capacity as f64,
                    comfort_temp: e.comfort_temp,
                }
            })
            .collect()
    }

    /// Perfect-foresight relative counts `horizon` hours ahead.
    pub fn forecast(&self, hour: usize, horizon: usize) -> Result<Vec<f64>> {
        if !(1..=2).contains(&horizon) {
            return Err(Error::Input(format!("forecast horizon {horizon} not in {{1, 2}}")));
        }
        Ok(self
            .occupancy_at(hour + horizon)
            .into_iter()
            .map(|o| o.relative_count)
            .collect())
    }

    /// Seeded schedule for the five-zone preset: Space 3 and Space 5 are
    /// offices, the others conference rooms booked in random blocks.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zones = DEFAULT_CAPACITIES
            .iter()
            .enumerate()
            .map(|(z, &capacity)| {
                let mut week = vec![HourEntry::EMPTY; HOURS_PER_WEEK];
                for day in 0..5 {
                    let base = day * HOURS_PER_DAY;
                    if OFFICE_ZONES.contains(&z) {
                        for h in OFFICE_START_HOUR..OFFICE_END_HOUR {
                            week[base + h] = HourEntry {
                                headcount: OFFICE_HEADCOUNT[z],
                                comfort_temp: Some(OFFICE_COMFORT),
                            };
                        }
                        continue;
                    }
                    let blocks = rng.random_range(0..=2);
                    for _ in 0..blocks {
                        let start = rng.random_range(8..=15);
                        let len = rng.random_range(1..=3usize).min(17 - start);
                        let headcount = rng.random_range(2..=capacity);
                        // 19.0 ..= 23.0 in half-degree steps.
                        let comfort = 19.0 + 0.5 * rng.random_range(0..=8) as f64;
                        for h in start..start + len {
                            week[base + h] = HourEntry {
                                headcount,
                                comfort_temp: Some(comfort),
                            };
                        }
                    }
                }
                ZoneSchedule {
                    max_capacity: capacity,
                    week,
                }
            })
            .collect();
        OccupancySchedule {
            zones,
            holiday_days: BTreeSet::new(),
            start_weekday: 0,
        }
    }

    pub fn load(path: impl AsRef<Path>, capacities: &[u32]) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, capacities, &path.display().to_string())
    }

    /// Reads the `zone,day,hour,headcount,comfort_temp` format. Hours not
    /// listed are empty. Row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(reader: R, capacities: &[u32], origin: &str) -> Result<Self> {
        let parse_err = |row: usize, message: String| Error::Parse {
            path: origin.to_string(),
            row,
            message,
        };
        let mut zones: Vec<ZoneSchedule> = capacities
            .iter()
            .map(|&max_capacity| ZoneSchedule {
                max_capacity,
                week: vec![HourEntry::EMPTY; HOURS_PER_WEEK],
            })
            .collect();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_err(0, e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(parse_err(
                0,
                format!("expected header `{}`", CSV_HEADER.join(",")),
            ));
        }
        for (i, row) in rdr.records().enumerate() {
            let row_no = i + 1;
            let row = row.map_err(|e| parse_err(row_no, e.to_string()))?;
            let int = |col: usize| -> Result<usize> {
                row.get(col)
                    .unwrap_or("")
                    .parse()
                    .map_err(|e| parse_err(row_no, format!("bad {}: {e}", CSV_HEADER[col])))
            };
            let (zone, day, hour, headcount) = (int(0)?, int(1)?, int(2)?, int(3)?);
            if zone >= zones.len() {
                return Err(parse_err(row_no, format!("zone {zone} out of range")));
            }
            if day > 6 || hour > 23 {
                return Err(parse_err(row_no, format!("invalid day/hour {day}/{hour}")));
            }
            let comfort = row.get(4).unwrap_or("");
            let comfort_temp = if comfort.is_empty() {
                None
            } else {
                Some(
                    comfort
                        .parse::<f64>()
                        .map_err(|e| parse_err(row_no, format!("bad comfort_temp: {e}")))?,
                )
            };
            zones[zone].week[day * HOURS_PER_DAY + hour] = HourEntry {
                headcount: headcount as u32,
                comfort_temp,
            };
        }
        let schedule = OccupancySchedule {
            zones,
            holiday_days: BTreeSet::new(),
            start_weekday: 0,
        };
        schedule
            .validate()
            .map_err(|e| parse_err(0, e.to_string()))?;
        Ok(schedule)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::Format(e.to_string());
        wtr.write_record(CSV_HEADER).map_err(to_err)?;
        for (z, zone) in self.zones.iter().enumerate() {
            for (h, e) in zone.week.iter().enumerate() {
                wtr.write_record(&[
                    z.to_string(),
                    (h / HOURS_PER_DAY).to_string(),
                    (h % HOURS_PER_DAY).to_string(),
                    e.headcount.to_string(),
                    e.comfort_temp.map(|c| c.to_string()).unwrap_or_default(),
                ])
                .map_err(to_err)?;
            }
        }
        wtr.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tuesday(hour: usize) -> usize {
        HOURS_PER_DAY + hour
    }

    #[test]
    fn generated_schedule_is_valid_and_deterministic() {
        let a = OccupancySchedule::generate(42);
        a.validate().unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        a.write_csv(&mut x).unwrap();
        OccupancySchedule::generate(42).write_csv(&mut y).unwrap();
        assert_eq!(x, y);
        assert_ne!(a, OccupancySchedule::generate(43));
    }

    #[test]
    fn office_relative_count() {
        let s = OccupancySchedule::generate(0);
        let occ = s.occupancy_at(tuesday(10));
        assert!((occ[4].relative_count - 0.8).abs() < 1e-15);
        assert_eq!(occ[4].comfort_temp, Some(21.0));
        assert_eq!(s.occupancy_at(tuesday(3))[2].relative_count, 0.0);
        // Saturday
        assert_eq!(s.occupancy_at(5 * 24 + 11)[2].headcount, 0);
    }

    #[test]
    fn office_comfort_mean_is_21() {
        let s = OccupancySchedule::generate(9);
        let temps: Vec<f64> = OFFICE_ZONES
            .iter()
            .flat_map(|&z| s.zones[z].week.iter().filter_map(|e| e.comfort_temp))
            .collect();
        assert!(!temps.is_empty());
        let mean = temps.iter().sum::<f64>() / temps.len() as f64;
        assert_eq!(mean, 21.0);
    }

    #[test]
    fn conference_wishes_in_range() {
        for seed in 0..20 {
            let s = OccupancySchedule::generate(seed);
            for z in [0, 1, 3] {
                for e in &s.zones[z].week {
                    if let Some(c) = e.comfort_temp {
                        assert!((19.0..=23.0).contains(&c));
                    }
                }
            }
        }
    }

    #[test]
    fn holidays_are_empty() {
        let mut s = OccupancySchedule::generate(0);
        s.holiday_days.insert(1);
        for o in s.occupancy_at(tuesday(10)) {
            assert_eq!(o.relative_count, 0.0);
            assert_eq!(o.comfort_temp, None);
        }
        // Monday 22:00 + 2 h lands on the holiday.
        assert!(s.forecast(22, 2).unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn forecast_looks_ahead() {
        let s = OccupancySchedule::generate(0);
        let f = s.forecast(7, 1).unwrap();
        assert!(f[4] > 0.0);
        assert_eq!(f[4], s.occupancy_at(8)[4].relative_count);
        assert!(s.forecast(7, 3).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = OccupancySchedule::generate(5);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = OccupancySchedule::read_csv(buf.as_slice(), &DEFAULT_CAPACITIES, "mem").unwrap();
        assert_eq!(back, s);

        let bad = "zone,day,hour,headcount,comfort_temp\n0,1,10,3,21\n0,1,11,x,21\n";
        match OccupancySchedule::read_csv(bad.as_bytes(), &DEFAULT_CAPACITIES, "s.csv") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
        let over = "zone,day,hour,headcount,comfort_temp\n1,1,10,30,21\n";
        assert!(OccupancySchedule::read_csv(over.as_bytes(), &DEFAULT_CAPACITIES, "s.csv").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn forecast_matches_direct_lookup(t in 0usize..2000, h in 1usize..=2, seed in 0u64..50) {
            let s = OccupancySchedule::generate(seed);
            let direct: Vec<f64> = s.occupancy_at(t + h).iter().map(|o| o.relative_count).collect();
            prop_assert_eq!(s.forecast(t, h).unwrap(), direct);
        }

        #[test]
        fn weekly_period_and_bounds(t in 0usize..2000, seed in 0u64..50) {
            let s = OccupancySchedule::generate(seed);
            let now = s.occupancy_at(t);
            prop_assert_eq!(&now, &s.occupancy_at(t + HOURS_PER_WEEK));
            for o in now {
                prop_assert!((0.0..=1.0).contains(&o.relative_count));
            }
        }
    }
}
