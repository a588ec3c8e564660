//! Calendar dates and year-months without time of day.
//!
//! Month arithmetic adds calendar months and clamps the day to the end of the
//! target month (31 Jan + 1 month = 28/29 Feb).

use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    year: i32,
    month: u8,
    day: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DateError {
    Format,
    OutOfRange,
}

impl fmt::Display for DateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DateError::Format => f.write_str("expected an ISO-8601 date"),
            DateError::OutOfRange => f.write_str("date component out of range"),
        }
    }
}

impl core::error::Error for DateError {}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl Date {
    pub fn new(year: i32, month: u8, day: u8) -> Result<Self, DateError> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(DateError::OutOfRange);
        }
        Ok(Date { year, month, day })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    pub fn day(self) -> u8 {
        self.day
    }

    pub fn year_month(self) -> YearMonth {
        YearMonth { year: self.year, month: self.month }
    }

    /// Days since 1970-01-01 (proleptic Gregorian).
    pub fn to_days(self) -> i64 {
        let y = self.year as i64 - if self.month <= 2 { 1 } else { 0 };
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = y - era * 400;
        let m = self.month as i64;
        let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + self.day as i64 - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        era * 146_097 + doe - 719_468
    }

    pub fn from_days(days: i64) -> Self {
        let z = days + 719_468;
        let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
        let doe = z - era * 146_097;
        let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        let mp = (5 * doy + 2) / 153;
        let day = (doy - (153 * mp + 2) / 5 + 1) as u8;
        let month = if mp < 10 { mp + 3 } else { mp - 9 } as u8;
        let year = (yoe + era * 400 + if month <= 2 { 1 } else { 0 }) as i32;
        Date { year, month, day }
    }

    pub fn add_days(self, days: i64) -> Self {
        Date::from_days(self.to_days() + days)
    }

    pub fn add_months(self, months: i32) -> Self {
        let ym = self.year_month().add_months(months);
        let day = self.day.min(days_in_month(ym.year, ym.month));
        Date { year: ym.year, month: ym.month, day }
    }

    /// Whole days from `earlier` to `self` (negative when `self` is earlier).
    pub fn days_since(self, earlier: Date) -> i64 {
        self.to_days() - earlier.to_days()
    }
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self, DateError> {
        if !(1..=12).contains(&month) {
            return Err(DateError::OutOfRange);
        }
        Ok(YearMonth { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ord: i64) -> Self {
        YearMonth { year: ord.div_euclid(12) as i32, month: (ord.rem_euclid(12) + 1) as u8 }
    }

    pub fn add_months(self, months: i32) -> Self {
        YearMonth::from_ordinal(self.ordinal() + months as i64)
    }

    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    pub fn first_day(self) -> Date {
        Date { year: self.year, month: self.month, day: 1 }
    }

    /// Iterates `self..=last` month by month.
    pub fn through(self, last: YearMonth) -> impl Iterator<Item = YearMonth> {
        (self.ordinal()..=last.ordinal()).map(YearMonth::from_ordinal)
    }
}

fn parse_number<T: FromStr>(s: &str, width: usize) -> Result<T, DateError> {
    if s.len() != width || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(DateError::Format);
    }
    s.parse().map_err(|_| DateError::Format)
}

impl FromStr for Date {
    type Err = DateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split('-');
        let (Some(y), Some(m), Some(d), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(DateError::Format);
        };
        Date::new(parse_number(y, 4)?, parse_number(m, 2)?, parse_number(d, 2)?)
    }
}

impl FromStr for YearMonth {
    type Err = DateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split('-');
        let (Some(y), Some(m), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(DateError::Format);
        };
        YearMonth::new(parse_number(y, 4)?, parse_number(m, 2)?)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn d(s: &str) -> Date {
        s.parse().unwrap()
    }

    #[test]
    fn day_differences() {
        assert_eq!(d("2016-10-08").days_since(d("2015-04-15")), 542);
        assert_eq!(d("1970-01-01").to_days(), 0);
        assert_eq!(d("2000-03-01").days_since(d("2000-02-28")), 2);
    }

    #[test]
    fn month_addition_clamps() {
        assert_eq!(d("2015-01-31").add_months(1), d("2015-02-28"));
        assert_eq!(d("2016-01-31").add_months(1), d("2016-02-29"));
        assert_eq!(d("2015-04-22").add_months(18), d("2016-10-22"));
        assert_eq!(d("2015-08-31").add_months(-6), d("2015-02-28"));
    }

    #[test]
    fn rejects_malformed() {
        assert!("2015-4-15".parse::<Date>().is_err());
        assert!("2015-02-29".parse::<Date>().is_err());
        assert!("15.04.2015".parse::<Date>().is_err());
        assert!("2015-13".parse::<YearMonth>().is_err());
    }

    #[test]
    fn year_month_iteration() {
        let a: YearMonth = "2015-11".parse().unwrap();
        let b: YearMonth = "2016-02".parse().unwrap();
        assert_eq!(a.through(b).count(), 4);
        assert_eq!(b.months_since(a), 3);
        assert_eq!(a.add_months(14).to_string(), "2017-01");
    }

    proptest! {
        #[test]
        fn days_round_trip(days in -200_000i64..200_000) {
            let date = Date::from_days(days);
            prop_assert_eq!(date.to_days(), days);
            prop_assert_eq!(date.to_string().parse::<Date>().unwrap(), date);
        }
    }
}
