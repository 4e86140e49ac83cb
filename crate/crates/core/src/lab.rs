//! Policy experiments: uniform rate scaling, revenue-neutral calibration,
//! side-by-side comparison and parameter sweeps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{self, household_taxes, DeltaSummary, MetricsReport};
use crate::money::{Money, Rate, BP_PER_UNIT};
use crate::policy::Policy;
use crate::population::{demographic_ratio, Population};
use crate::schedule::RateScale;

pub const MAX_SOLVER_ITERATIONS: u32 = 64;

/// `policy` with every bracket rate multiplied by `s`, clamped at 100%.
pub fn scale(policy: &Policy, s: RateScale) -> Policy {
    policy.scaled(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScaleSolution {
    /// Factor relative to the policy's own rates.
    pub scale: RateScale,
    #[serde(rename = "revenue_bgn")]
    pub revenue: Money,
    pub iterations: u32,
}

/// Largest factor that keeps every scaled bracket rate at or below 100%.
fn max_scale(policy: &Policy) -> RateScale {
    let top = policy.schedule.brackets.iter().map(|b| b.rate.bp()).max().unwrap_or(0) as u128;
    let current = policy.rate_scale.parts() as u128;
    if top == 0 || current == 0 {
        return RateScale::IDENTITY;
    }
    let unit = RateScale::UNIT as u128;
    let parts = BP_PER_UNIT as u128 * unit * unit / (top * current);
    RateScale::from_parts(parts.min(u64::MAX as u128) as u64)
}

/// Finds the smallest `s` in `[0, s_max]` whose revenue reaches
/// `target − tolerance`, by bisection, and checks that it stays within
/// `target + tolerance`. Bisection stops once the bracket is narrower than
/// `tolerance / total income`. The unscaled policy is returned as is when it
/// already meets the target. NIT transfers and surcharges are not scaled.
pub fn revenue_neutral_scale(
    policy: &Policy,
    population: &Population,
    target: Money,
    tolerance: Money,
) -> Result<ScaleSolution> {
    if tolerance.is_negative() {
        return Err(Error::InvalidInput("tolerance must be non-negative".into()));
    }
    policy.validate()?;
    let revenue_at = |s: u64| metrics::revenue(population, &policy.scaled(RateScale::from_parts(s)));
    let floor = target - tolerance;
    let ceiling = target + tolerance;

    let current = revenue_at(RateScale::UNIT)?;
    if (floor..=ceiling).contains(&current) {
        return Ok(ScaleSolution { scale: RateScale::IDENTITY, revenue: current, iterations: 0 });
    }
    let (mut lo, mut hi) = (0u64, max_scale(policy).parts());
    let (mut r_lo, mut r_hi) = (revenue_at(lo)?, revenue_at(hi)?);
    if r_lo > r_hi {
        return Err(Error::Solver(format!("revenue falls from {r_lo} to {r_hi} as rates rise")));
    }
    if r_hi < floor || r_lo > ceiling {
        return Err(Error::Unreachable { target, min: r_lo, max: r_hi });
    }
    let income: i128 = population.households.iter().map(|h| h.income().stotinki() as i128).sum();
    let narrow_enough =
        |lo: u64, hi: u64| (hi - lo) as i128 * income.max(1) <= tolerance.stotinki() as i128 * RateScale::UNIT as i128;

    let mut iterations = 0;
    if r_lo >= floor {
        hi = lo;
        r_hi = r_lo;
    }
    while hi - lo > 1 && !narrow_enough(lo, hi) && iterations < MAX_SOLVER_ITERATIONS {
        iterations += 1;
        let mid = lo + (hi - lo) / 2;
        let r = revenue_at(mid)?;
        if r < r_lo || r > r_hi {
            return Err(Error::Solver(format!(
                "revenue not monotone in the rate scale near {}",
                RateScale::from_parts(mid)
            )));
        }
        if r >= floor {
            (hi, r_hi) = (mid, r);
        } else {
            (lo, r_lo) = (mid, r);
        }
    }
    if r_hi > ceiling {
        return Err(Error::Solver(format!(
            "no scale within tolerance {tolerance}: revenue jumps from {r_lo} to {r_hi} at {}",
            RateScale::from_parts(hi)
        )));
    }
    Ok(ScaleSolution { scale: RateScale::from_parts(hi), revenue: r_hi, iterations })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairwiseDelta {
    pub baseline: String,
    pub policy: String,
    #[serde(flatten)]
    pub summary: DeltaSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub reports: Vec<MetricsReport>,
    /// Each later policy against the first one.
    pub pairwise: Vec<PairwiseDelta>,
}

pub fn compare(population: &Population, policies: &[Policy]) -> Result<Comparison> {
    if policies.is_empty() {
        return Err(Error::InvalidInput("compare needs at least one policy".into()));
    }
    let taxes = policies.iter().map(|p| household_taxes(population, p)).collect::<Result<Vec<_>>>()?;
    let reports = policies.iter().zip(&taxes).map(|(p, t)| metrics::report_from_taxes(population, p, t)).collect();
    let pairwise = policies
        .iter()
        .zip(&taxes)
        .skip(1)
        .map(|(p, t)| PairwiseDelta {
            baseline: policies[0].name.clone(),
            policy: p.name.clone(),
            summary: metrics::deltas(&population.households, &taxes[0], t).summary,
        })
        .collect();
    Ok(Comparison { reports, pairwise })
}

/// A policy field or population factor addressed by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Collection efficiency as a fraction, e.g. `0.99`.
    CollectionRate,
    CollectionRateBp,
    RateScale,
    BracketRateBp(usize),
    TopRateBp,
    SocialMinimum,
    PopulationScale,
    PopulationYear,
}

impl SweepParam {
    pub const PATHS: [&'static str; 8] = [
        "collection_rate",
        "collection_rate_bp",
        "rate_scale",
        "schedule.brackets[i].rate_bp",
        "schedule.top_rate_bp",
        "nit.social_minimum_per_capita_bgn",
        "population.scale",
        "population.year",
    ];

    pub fn parse(path: &str) -> Result<SweepParam> {
        let param = match path {
            "collection_rate" => SweepParam::CollectionRate,
            "collection_rate_bp" => SweepParam::CollectionRateBp,
            "rate_scale" => SweepParam::RateScale,
            "schedule.top_rate_bp" => SweepParam::TopRateBp,
            "nit.social_minimum_per_capita_bgn" => SweepParam::SocialMinimum,
            "population.scale" => SweepParam::PopulationScale,
            "population.year" => SweepParam::PopulationYear,
            _ => {
                let index = path
                    .strip_prefix("schedule.brackets[")
                    .and_then(|rest| rest.strip_suffix("].rate_bp"))
                    .and_then(|i| i.parse::<usize>().ok());
                match index {
                    Some(i) => SweepParam::BracketRateBp(i),
                    None => {
                        return Err(Error::InvalidInput(format!(
                            "unknown sweep parameter {path:?}; expected one of {}",
                            Self::PATHS.join(", ")
                        )))
                    }
                }
            }
        };
        Ok(param)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub value: String,
    pub report: MetricsReport,
}

fn parse_value<T: std::str::FromStr>(value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidInput(format!("invalid sweep value {value:?}")))
}

fn parse_bp(value: &str) -> Result<Rate> {
    Rate::checked(parse_value(value)?)
}

fn apply(
    param: SweepParam,
    value: &str,
    policy: &Policy,
    population: &Population,
) -> Result<(Policy, Option<Population>)> {
    let mut p = policy.clone();
    let mut pop = None;
    match param {
        SweepParam::CollectionRate => p.collection_rate = Rate::from_fraction(parse_value(value)?)?,
        SweepParam::CollectionRateBp => p.collection_rate = parse_bp(value)?,
        SweepParam::RateScale => p.rate_scale = parse_value(value)?,
        SweepParam::BracketRateBp(i) => {
            let count = p.schedule.brackets.len();
            let bracket =
                p.schedule.brackets.get_mut(i).ok_or_else(|| {
                    Error::InvalidInput(format!("bracket index {i} out of range (schedule has {count})"))
                })?;
            bracket.rate = parse_bp(value)?;
        }
        SweepParam::TopRateBp => {
            if let Some(last) = p.schedule.brackets.last_mut() {
                last.rate = parse_bp(value)?;
            }
        }
        SweepParam::SocialMinimum => {
            let nit = p
                .nit
                .as_mut()
                .ok_or_else(|| Error::InvalidInput(format!("policy {:?} has no nit section", policy.name)))?;
            nit.social_minimum_per_capita = parse_value(value)?;
        }
        SweepParam::PopulationScale => pop = Some(population.scaled(parse_value(value)?)?),
        SweepParam::PopulationYear => pop = Some(population.scaled(demographic_ratio(parse_value(value)?)?)?),
    }
    p.validate()?;
    Ok((p, pop))
}

/// One report per value, in order. Population parameters resample the
/// households systematically (see [`Population::resampled`]).
pub fn sweep(population: &Population, policy: &Policy, path: &str, values: &[String]) -> Result<Vec<SweepPoint>> {
    let param = SweepParam::parse(path)?;
    values
        .iter()
        .map(|value| {
            let (p, pop) = apply(param, value, policy, population)?;
            let report = metrics::evaluate(pop.as_ref().unwrap_or(population), &p)?;
            Ok(SweepPoint { value: value.trim().to_string(), report })
        })
        .collect()
}
