//! Fixed-point tariff values in ct/kWh.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

/// Number of fractional decimal digits carried by [`Price`].
pub const SCALE_DIGITS: u32 = 4;
const SCALE: i64 = 10_000;

/// A per-kWh tariff, bid or market value in ct/kWh, held exactly with four
/// fractional digits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(i64);

impl Price {
    pub const ZERO: Price = Price(0);
    /// The additive tariff cut for a late or relocated project (0.3 ct/kWh).
    pub const REDUCTION_STEP: Price = Price(3_000);

    /// Builds a price from ten-thousandths of a ct/kWh.
    pub const fn from_units(units: i64) -> Self {
        Price(units)
    }

    /// Builds a price from hundredths of a ct/kWh (`from_hundredths(613)` is 6.13).
    pub const fn from_hundredths(h: i64) -> Self {
        Price(h * 100)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    /// Rounds a floating-point ct/kWh value to the nearest representable
    /// price, halves away from zero. Returns `None` for non-finite input.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let scaled = libm::round(value * SCALE as f64);
        if scaled.abs() >= i64::MAX as f64 {
            return None;
        }
        Some(Price(scaled as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn abs_diff(self, other: Price) -> Price {
        Price((self.0 - other.0).abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Mean of a non-empty set of prices, rounded to the fixed-point grid.
    pub fn mean<I: IntoIterator<Item = Price>>(prices: I) -> Option<Price> {
        let mut sum: i128 = 0;
        let mut n: i128 = 0;
        for p in prices {
            sum += p.0 as i128;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        // round half away from zero in integer arithmetic
        let q = if sum >= 0 { (2 * sum + n) / (2 * n) } else { -((-2 * sum + n) / (2 * n)) };
        Some(Price(q as i64))
    }
}

impl Add for Price {
    type Output = Price;
    fn add(self, rhs: Price) -> Price {
        Price(self.0 + rhs.0)
    }
}

impl AddAssign for Price {
    fn add_assign(&mut self, rhs: Price) {
        self.0 += rhs.0;
    }
}

impl Sub for Price {
    type Output = Price;
    fn sub(self, rhs: Price) -> Price {
        Price(self.0 - rhs.0)
    }
}

impl SubAssign for Price {
    fn sub_assign(&mut self, rhs: Price) {
        self.0 -= rhs.0;
    }
}

impl Neg for Price {
    type Output = Price;
    fn neg(self) -> Price {
        Price(-self.0)
    }
}

impl Sum for Price {
    fn sum<I: Iterator<Item = Price>>(iter: I) -> Price {
        iter.fold(Price::ZERO, Add::add)
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:04}", sign, abs / SCALE as u64, abs % SCALE as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsePriceError {
    Empty,
    InvalidDigit,
    TooManyFractionDigits,
    Overflow,
}

impl fmt::Display for ParsePriceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsePriceError::Empty => f.write_str("empty price"),
            ParsePriceError::InvalidDigit => f.write_str("invalid digit in price"),
            ParsePriceError::TooManyFractionDigits => {
                write!(f, "price carries more than {} fractional digits", SCALE_DIGITS)
            }
            ParsePriceError::Overflow => f.write_str("price out of range"),
        }
    }
}

impl core::error::Error for ParsePriceError {}

impl FromStr for Price {
    type Err = ParsePriceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(ParsePriceError::Empty);
        }
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParsePriceError::Empty);
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParsePriceError::InvalidDigit);
        }
        // trailing zeros beyond the scale are harmless
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > SCALE_DIGITS as usize {
            return Err(ParsePriceError::TooManyFractionDigits);
        }
        let mut units: i64 = 0;
        for b in int_part.bytes() {
            units = units
                .checked_mul(10)
                .and_then(|u| u.checked_add((b - b'0') as i64))
                .ok_or(ParsePriceError::Overflow)?;
        }
        units = units.checked_mul(SCALE).ok_or(ParsePriceError::Overflow)?;
        let mut frac: i64 = 0;
        for (i, b) in frac_trimmed.bytes().enumerate() {
            frac += (b - b'0') as i64 * 10_i64.pow(SCALE_DIGITS - 1 - i as u32);
        }
        units = units.checked_add(frac).ok_or(ParsePriceError::Overflow)?;
        Ok(Price(if negative { -units } else { units }))
    }
}
