//! Tax schedules: ordered brackets applied in marginal or slab mode.
//!
//! A bracket covers `[lower, next.lower)`; the top bracket is open-ended.
//! Tax is computed exactly in rational stotinki and rounded half-up once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::money::{Exact, Money, Rate, BP_PER_UNIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Each slice of the base is taxed at its own bracket's rate.
    Marginal,
    /// The whole base is taxed at the rate of the bracket containing it.
    Slab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Monthly,
    Annual,
}

impl Period {
    pub fn as_str(self) -> &'static str {
        match self {
            Period::Monthly => "monthly",
            Period::Annual => "annual",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(rename = "lower_bgn")]
    pub lower: Money,
    #[serde(rename = "rate_bp")]
    pub rate: Rate,
}

impl Bracket {
    pub const fn new(lower: Money, rate: Rate) -> Self {
        Bracket { lower, rate }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub period: Period,
    pub mode: Mode,
    pub brackets: Vec<Bracket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleClass {
    Progressive,
    Proportional,
    Regressive,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    FirstLowerNotZero { lower: Money },
    DuplicateLower { index: usize, lower: Money },
    Unsorted { index: usize },
    RateOutOfRange { index: usize, rate: Rate },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "schedule has no brackets"),
            Violation::FirstLowerNotZero { lower } => {
                write!(f, "first lower must be 0 (found {lower})")
            }
            Violation::DuplicateLower { index, lower } => {
                write!(f, "duplicate lower bound {lower} at bracket {index}")
            }
            Violation::Unsorted { index } => {
                write!(f, "bracket {index} is not above the previous lower bound")
            }
            Violation::RateOutOfRange { index, rate } => {
                write!(f, "rate {} bp at bracket {index} is out of range", rate.bp())
            }
        }
    }
}

/// Uniform multiplier applied to every bracket rate, stored in parts per
/// 10^12. Scaled rates are clamped at 100%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RateScale(u64);

impl RateScale {
    pub const UNIT: u64 = 1_000_000_000_000;
    pub const IDENTITY: RateScale = RateScale(Self::UNIT);
    pub const ZERO: RateScale = RateScale(0);

    pub const fn from_parts(parts: u64) -> Self {
        RateScale(parts)
    }

    pub fn from_f64(factor: f64) -> Result<Self> {
        let parts = factor * Self::UNIT as f64;
        if !factor.is_finite() || factor < 0.0 || parts > u64::MAX as f64 {
            return Err(Error::InvalidInput(format!("invalid rate scale {factor}")));
        }
        Ok(RateScale(parts.round() as u64))
    }

    pub const fn parts(self) -> u64 {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / Self::UNIT as f64
    }

    /// `self × other`, rounded to the nearest part.
    pub fn compose(self, other: RateScale) -> RateScale {
        let product = self.0 as u128 * other.0 as u128;
        let unit = Self::UNIT as u128;
        RateScale(((product + unit / 2) / unit).min(u64::MAX as u128) as u64)
    }

    /// Scaled rate as an exact fraction of the base, clamped at 100%.
    pub fn apply(self, rate: Rate) -> Exact {
        let cap = BP_PER_UNIT as i128 * Self::UNIT as i128;
        let scaled = (rate.bp() as i128 * self.0 as i128).min(cap);
        Exact::new(scaled, cap)
    }
}

impl Default for RateScale {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Canonical decimal form without trailing zeros, e.g. `1.5`.
impl fmt::Display for RateScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / Self::UNIT;
        let frac = self.0 % Self::UNIT;
        if frac == 0 {
            return write!(f, "{whole}");
        }
        let digits = format!("{frac:012}");
        write!(f, "{whole}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for RateScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("invalid rate scale {s:?}"));
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if whole.is_empty()
            || frac.len() > 12
            || !whole.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let whole: u64 = whole.parse().map_err(|_| bad())?;
        let frac: u64 = if frac.is_empty() { 0 } else { format!("{frac:0<12}").parse().map_err(|_| bad())? };
        whole.checked_mul(Self::UNIT).and_then(|w| w.checked_add(frac)).map(RateScale).ok_or_else(bad)
    }
}

impl Serialize for RateScale {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RateScale {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One bracket's share of a computed tax, for itemized breakdowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketLine {
    pub lower: Money,
    pub upper: Option<Money>,
    pub rate: Rate,
    /// Portion of the base taxed in this bracket.
    pub portion: Money,
    /// Exact pre-rounding tax attributed to this bracket.
    pub tax: Exact,
}

impl Schedule {
    pub fn new(period: Period, mode: Mode, brackets: Vec<Bracket>) -> Result<Self> {
        let schedule = Schedule { period, mode, brackets };
        schedule.check()?;
        Ok(schedule)
    }

    /// A single-bracket schedule taxing everything at `rate`.
    pub fn flat(rate: Rate, period: Period) -> Self {
        Schedule { period, mode: Mode::Marginal, brackets: vec![Bracket::new(Money::ZERO, rate)] }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let Some(first) = self.brackets.first() else {
            violations.push(Violation::Empty);
            return violations;
        };
        if first.lower != Money::ZERO {
            violations.push(Violation::FirstLowerNotZero { lower: first.lower });
        }
        for (index, pair) in self.brackets.windows(2).enumerate() {
            let index = index + 1;
            if pair[1].lower == pair[0].lower {
                violations.push(Violation::DuplicateLower { index, lower: pair[1].lower });
            } else if pair[1].lower < pair[0].lower {
                violations.push(Violation::Unsorted { index });
            }
        }
        for (index, bracket) in self.brackets.iter().enumerate() {
            if !bracket.rate.is_valid() {
                violations.push(Violation::RateOutOfRange { index, rate: bracket.rate });
            }
        }
        violations
    }

    pub fn check(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSchedule(violations))
        }
    }

    pub fn expect_period(&self, expected: Period) -> Result<()> {
        if self.period != expected {
            return Err(Error::PeriodMismatch { expected: expected.as_str(), actual: self.period.as_str() });
        }
        Ok(())
    }

    /// Converts a monthly schedule to annual terms by multiplying bounds by 12.
    pub fn annualized(&self) -> Schedule {
        match self.period {
            Period::Annual => self.clone(),
            Period::Monthly => Schedule {
                period: Period::Annual,
                mode: self.mode,
                brackets: self.brackets.iter().map(|b| Bracket::new(b.lower.times(12), b.rate)).collect(),
            },
        }
    }

    pub fn top_rate(&self) -> Rate {
        self.brackets.iter().map(|b| b.rate).max().unwrap_or(Rate::ZERO)
    }

    pub fn bottom_rate(&self) -> Rate {
        self.brackets.iter().map(|b| b.rate).min().unwrap_or(Rate::ZERO)
    }

    /// Index of the bracket containing `base` (lower bound inclusive).
    fn bracket_index(&self, base: Money) -> usize {
        self.brackets.partition_point(|b| b.lower <= base).saturating_sub(1)
    }

    fn upper_of(&self, index: usize) -> Option<Money> {
        self.brackets.get(index + 1).map(|b| b.lower)
    }

    fn check_base(&self, base: Money) -> Result<()> {
        self.check()?;
        if base.is_negative() {
            return Err(Error::InvalidInput(format!("negative tax base {base}")));
        }
        Ok(())
    }

    /// Per-bracket breakdown under a rate scale. Lines with a zero portion are
    /// omitted in marginal mode; slab mode yields exactly one line.
    pub fn breakdown_scaled(&self, base: Money, scale: RateScale) -> Result<Vec<BracketLine>> {
        self.check_base(base)?;
        let lines = match self.mode {
            Mode::Marginal => self
                .brackets
                .iter()
                .enumerate()
                .filter_map(|(i, bracket)| {
                    let upper = self.upper_of(i);
                    let top = upper.map_or(base, |u| base.min(u));
                    if top <= bracket.lower {
                        return None;
                    }
                    let portion = top - bracket.lower;
                    Some(BracketLine {
                        lower: bracket.lower,
                        upper,
                        rate: bracket.rate,
                        portion,
                        tax: scale.apply(bracket.rate) * portion.exact(),
                    })
                })
                .collect(),
            Mode::Slab => {
                let i = self.bracket_index(base);
                let bracket = self.brackets[i];
                vec![BracketLine {
                    lower: bracket.lower,
                    upper: self.upper_of(i),
                    rate: bracket.rate,
                    portion: base,
                    tax: scale.apply(bracket.rate) * base.exact(),
                }]
            }
        };
        Ok(lines)
    }

    /// Exact, unrounded tax in stotinki.
    pub fn exact_tax_scaled(&self, base: Money, scale: RateScale) -> Result<Exact> {
        Ok(self.breakdown_scaled(base, scale)?.into_iter().fold(Exact::from_integer(0), |acc, line| acc + line.tax))
    }

    pub fn exact_tax(&self, base: Money) -> Result<Exact> {
        self.exact_tax_scaled(base, RateScale::IDENTITY)
    }

    pub fn compute_tax_scaled(&self, base: Money, scale: RateScale) -> Result<Money> {
        Ok(Money::round_half_up(self.exact_tax_scaled(base, scale)?))
    }

    /// Tax on `base` (in this schedule's period), rounded half-up to a stotinka.
    pub fn compute_tax(&self, base: Money) -> Result<Money> {
        self.compute_tax_scaled(base, RateScale::IDENTITY)
    }

    /// Pre-rounding tax divided by the base, as an exact fraction.
    pub fn average_rate(&self, base: Money) -> Result<Exact> {
        if base == Money::ZERO {
            return Err(Error::UndefinedRate);
        }
        Ok(self.exact_tax(base)? / base.exact())
    }

    /// Rate of the bracket containing `base`; a base exactly on a bound takes
    /// the higher bracket.
    pub fn marginal_rate(&self, base: Money) -> Result<Rate> {
        self.check_base(base)?;
        Ok(self.brackets[self.bracket_index(base)].rate)
    }

    /// Classifies by the shape of the average rate over `grid`.
    pub fn classify(&self, grid: &[Money]) -> Result<ScheduleClass> {
        if grid.len() < 2 {
            return Err(Error::InvalidInput("classification grid needs at least 2 points".into()));
        }
        if grid[0] <= Money::ZERO || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("classification grid must be positive and strictly increasing".into()));
        }
        let rates = grid.iter().map(|&b| self.average_rate(b)).collect::<Result<Vec<_>>>()?;
        let rises = rates.windows(2).any(|w| w[1] > w[0]);
        let falls = rates.windows(2).any(|w| w[1] < w[0]);
        Ok(match (rises, falls) {
            (false, false) => ScheduleClass::Proportional,
            (true, false) => ScheduleClass::Progressive,
            (false, true) => ScheduleClass::Regressive,
            (true, true) => ScheduleClass::Mixed,
        })
    }
}
