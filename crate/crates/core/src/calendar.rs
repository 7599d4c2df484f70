//! Weekly calendar grid.
//!
//! Weeks are numbered on a global Sunday-anchored grid so that interest
//! windows, valuation rounds and founding dates can be compared as integers.

use chrono::{Datelike, Duration, NaiveDate, Weekday};

/// Ordinal of a week on the global grid (week 0 starts 1970-01-04, a Sunday).
pub type WeekIndex = i64;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 4).expect("valid epoch")
}

/// Index of the week containing `date`.
pub fn week_of(date: NaiveDate) -> WeekIndex {
    (date - epoch()).num_days().div_euclid(7)
}

/// Start date (Sunday) of week `index`.
pub fn week_start(index: WeekIndex) -> NaiveDate {
    let start = epoch() + Duration::days(index * 7);
    debug_assert_eq!(start.weekday(), Weekday::Sun);
    start
}

/// Parses a strict `YYYY-MM-DD` date.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let bytes = raw.as_bytes();
    if bytes.len() != 10 || bytes[4] != b'-' || bytes[7] != b'-' {
        return None;
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok()
}

pub fn format_date(date: NaiveDate) -> String {
    date.format("%Y-%m-%d").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn week_index_round_trip() {
        let d = NaiveDate::from_ymd_opt(2014, 3, 2).unwrap();
        assert_eq!(d.weekday(), Weekday::Sun);
        assert_eq!(week_start(week_of(d)), d);
        let thu = NaiveDate::from_ymd_opt(2014, 3, 6).unwrap();
        assert_eq!(week_of(thu), week_of(d));
        let before = NaiveDate::from_ymd_opt(1969, 12, 31).unwrap();
        assert_eq!(week_of(before), -1);
    }

    #[test]
    fn strict_dates() {
        assert!(parse_date("2012-06-15").is_some());
        assert!(parse_date("2012-6-15").is_none());
        assert!(parse_date("June 2012").is_none());
        assert!(parse_date("2012-02-30").is_none());
    }
}
