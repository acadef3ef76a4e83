use serde::{Deserialize, Serialize};

use crate::calendar::CalendarTime;

/// Weekday daytime heating at a fixed setpoint, night/weekend setback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleBasedAgent {
    pub occupied_setpoint: f64,
    pub setback_setpoint: f64,
    /// First heated hour (inclusive).
    pub start_hour: usize,
    /// End of heating (exclusive).
    pub end_hour: usize,
}

impl Default for RuleBasedAgent {
    fn default() -> Self {
        RuleBasedAgent {
            occupied_setpoint: 21.0,
            setback_setpoint: 15.0,
            start_hour: 7,
            end_hour: 18,
        }
    }
}

impl RuleBasedAgent {
    pub fn setpoint(&self, time: &CalendarTime) -> f64 {
        let minute = time.minute_of_day;
        let heated = time.is_weekday()
            && minute >= self.start_hour * 60
            && minute < self.end_hour * 60;
        if heated {
            self.occupied_setpoint
        } else {
            self.setback_setpoint
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(day_of_week: usize, minute_of_day: usize) -> CalendarTime {
        CalendarTime {
            day_of_week,
            minute_of_day,
            calendar_week: 1,
            day: day_of_week,
        }
    }

    #[test]
    fn window_edges() {
        let b = RuleBasedAgent::default();
        assert_eq!(b.setpoint(&at(1, 10 * 60)), 21.0);
        assert_eq!(b.setpoint(&at(5, 12 * 60)), 15.0);
        assert_eq!(b.setpoint(&at(0, 6 * 60 + 59)), 15.0);
        assert_eq!(b.setpoint(&at(0, 7 * 60)), 21.0);
        assert_eq!(b.setpoint(&at(4, 17 * 60 + 59)), 21.0);
        assert_eq!(b.setpoint(&at(4, 18 * 60)), 15.0);
    }

    #[test]
    fn output_set() {
        let b = RuleBasedAgent::default();
        for h in 0..24 * 14 {
            let s = b.setpoint(&CalendarTime::from_hour(h, 0));
            assert!(s == 15.0 || s == 21.0);
        }
    }
}
