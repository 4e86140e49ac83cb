//! Exact money and rate arithmetic.
//!
//! Amounts are held as whole stotinki (1 BGN = 100 stotinki) and rates as
//! basis points (1 bp = 0.01%). Products that fall between stotinki are kept
//! as exact rationals until a single final rounding step.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact rational used for pre-rounding amounts, average rates and metrics.
pub type Exact = Ratio<i128>;

pub const STOTINKI_PER_BGN: i64 = 100;
pub const BP_PER_UNIT: u32 = 10_000;

/// An amount of money in stotinki. May be negative (transfers, deltas).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_stotinki(stotinki: i64) -> Self {
        Money(stotinki)
    }

    /// Whole leva.
    pub const fn from_bgn(bgn: i64) -> Self {
        Money(bgn * STOTINKI_PER_BGN)
    }

    pub const fn stotinki(self) -> i64 {
        self.0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn times(self, factor: i64) -> Self {
        Money(self.0 * factor)
    }

    pub fn exact(self) -> Exact {
        Exact::from_integer(self.0 as i128)
    }

    /// Rounds an exact stotinki amount half away from zero (half-up for the
    /// non-negative amounts that tax computations produce).
    pub fn round_half_up(exact: Exact) -> Self {
        Money(exact.round().to_integer() as i64)
    }

    /// Largest whole-stotinki amount not above `exact`.
    pub fn floor(exact: Exact) -> Self {
        Money(exact.floor().to_integer() as i64)
    }

    /// `self × rate`, rounded half-up.
    pub fn apply_rate(self, rate: Rate) -> Self {
        Money::round_half_up(self.exact() * rate.fraction())
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

/// Renders as decimal BGN with exactly two fraction digits, e.g. `-300.00`.
impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let per = STOTINKI_PER_BGN as u64;
        write!(f, "{sign}{}.{:02}", abs / per, abs % per)
    }
}

/// Parses decimal BGN with a dot separator and at most two fraction digits.
impl FromStr for Money {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidInput(format!("invalid money amount {s:?}"));
        let (negative, digits) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match digits.split_once('.') {
            Some((w, f)) => (w, f),
            None => (digits, ""),
        };
        if whole.is_empty()
            || frac.len() > 2
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || (digits.contains('.') && frac.is_empty())
        {
            return Err(bad());
        }
        let whole: i64 = whole.parse().map_err(|_| bad())?;
        let mut cents: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        if frac.len() == 1 {
            cents *= 10;
        }
        let value = whole.checked_mul(STOTINKI_PER_BGN).and_then(|v| v.checked_add(cents)).ok_or_else(bad)?;
        Ok(Money(if negative { -value } else { value }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A tax rate in basis points. Valid rates lie in `0..=10000`; construction
/// through [`Rate::from_bp`] is unchecked so that schedule validation can
/// report out-of-range input instead of rejecting it up front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rate(u32);

impl Rate {
    pub const ZERO: Rate = Rate(0);
    pub const FULL: Rate = Rate(BP_PER_UNIT);

    pub const fn from_bp(bp: u32) -> Self {
        Rate(bp)
    }

    pub const fn percent(pct: u32) -> Self {
        Rate(pct * 100)
    }

    pub fn checked(bp: u32) -> Result<Self, Error> {
        if bp > BP_PER_UNIT {
            return Err(Error::InvalidInput(format!("rate {bp} bp exceeds 10000 bp")));
        }
        Ok(Rate(bp))
    }

    /// Converts a fraction such as `0.99` to the nearest basis point.
    pub fn from_fraction(fraction: f64) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidInput(format!("fraction {fraction} outside [0, 1]")));
        }
        Ok(Rate((fraction * BP_PER_UNIT as f64).round() as u32))
    }

    pub const fn bp(self) -> u32 {
        self.0
    }

    pub const fn is_valid(self) -> bool {
        self.0 <= BP_PER_UNIT
    }

    pub fn fraction(self) -> Exact {
        Exact::new(self.0 as i128, BP_PER_UNIT as i128)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}%", self.0 / 100, self.0 % 100)
    }
}

/// Formats an exact fraction as a fixed-point decimal with `digits` fraction
/// digits, rounding half away from zero. Used for stable report output.
pub fn format_fraction(value: Exact, digits: u32) -> String {
    let scale = 10i128.pow(digits);
    let scaled = (value * Exact::from_integer(scale)).round().to_integer();
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    if digits == 0 {
        return format!("{sign}{abs}");
    }
    let scale = scale as u128;
    format!("{sign}{}.{:0width$}", abs / scale, abs % scale, width = digits as usize)
}
