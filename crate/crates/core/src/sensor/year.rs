use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::HOURS_PER_YEAR;

/// A fixed 8,760-hour calendar year. In leap years February 29 is skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimYear {
    pub year: i32,
}

fn is_leap(year: i32) -> bool {
    NaiveDate::from_ymd_opt(year, 2, 29).is_some()
}

pub(crate) fn is_leap_day(ts: &NaiveDateTime) -> bool {
    ts.month() == 2 && ts.day() == 29
}

impl SimYear {
    pub fn new(year: i32) -> Self {
        Self { year }
    }

    /// Hour slot of `ts`, or `None` outside the year or on a leap day.
    pub fn hour_index(&self, ts: &NaiveDateTime) -> Option<usize> {
        if ts.year() != self.year || is_leap_day(ts) {
            return None;
        }
        let mut day = ts.ordinal0() as usize;
        if is_leap(self.year) && ts.month() > 2 {
            day -= 1;
        }
        Some(day * 24 + ts.hour() as usize)
    }

    pub fn hour_start(&self, index: usize) -> NaiveDateTime {
        assert!(index < HOURS_PER_YEAR, "hour index {index} out of range");
        let jan1 = NaiveDate::from_ymd_opt(self.year, 1, 1)
            .expect("valid year")
            .and_hms_opt(0, 0, 0)
            .expect("midnight");
        let mut day = index / 24;
        if is_leap(self.year) && day >= 59 {
            day += 1;
        }
        jan1 + Duration::days(day as i64) + Duration::hours((index % 24) as i64)
    }
}
