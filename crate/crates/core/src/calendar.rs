//! Hour-index calendar used by every time-dependent component.
//!
//! Hour 0 is 00:00 on the first day of the episode. The weekday of that
//! first day is configurable; day-of-week 0 is Monday.

pub const HOURS_PER_DAY: usize = 24;
pub const HOURS_PER_WEEK: usize = 168;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalendarTime {
    /// 0 = Monday .. 6 = Sunday.
    pub day_of_week: usize,
    pub minute_of_day: usize,
    /// ISO-style week number, starting at 1.
    pub calendar_week: usize,
    /// Day index from episode start.
    pub day: usize,
}

impl CalendarTime {
    pub fn from_hour(hour: usize, start_weekday: usize) -> Self {
        let day = hour / HOURS_PER_DAY;
        let day_of_week = (day + start_weekday) % 7;
        // Week 1 is the week containing the first episode day.
        let calendar_week = (day + start_weekday) / 7 + 1;
        CalendarTime {
            day_of_week,
            minute_of_day: (hour % HOURS_PER_DAY) * 60,
            calendar_week,
            day,
        }
    }

    pub fn hour_of_day(&self) -> usize {
        self.minute_of_day / 60
    }

    pub fn is_weekday(&self) -> bool {
        self.day_of_week < 5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weekday_offsets() {
        let t = CalendarTime::from_hour(0, 0);
        assert_eq!((t.day_of_week, t.minute_of_day, t.calendar_week), (0, 0, 1));
        let t = CalendarTime::from_hour(24 * 5 + 13, 0);
        assert_eq!(t.day_of_week, 5);
        assert_eq!(t.minute_of_day, 13 * 60);
        assert!(!t.is_weekday());
        // Friday start: day 3 is Monday of week 2.
        let t = CalendarTime::from_hour(24 * 3, 4);
        assert_eq!((t.day_of_week, t.calendar_week), (0, 2));
    }
}
