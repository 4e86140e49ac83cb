//! Inequality and revenue statistics over pre- and post-tax household income.
//!
//! All metrics are exact rationals. Reports render them as decimal strings
//! with six fraction digits.

use std::fmt;
use std::thread;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::household::{household_tax, Household};
use crate::money::{format_fraction, Exact, Money, Rate};
use crate::policy::Policy;
use crate::population::Population;

fn total(incomes: &[Money]) -> i128 {
    incomes.iter().map(|m| m.stotinki() as i128).sum()
}

fn sorted_ascending(incomes: &[Money]) -> Vec<i128> {
    let mut values: Vec<i128> = incomes.iter().map(|m| m.stotinki() as i128).collect();
    values.sort_unstable();
    values
}

fn check_distribution(incomes: &[Money]) -> Result<i128> {
    if incomes.is_empty() {
        return Err(Error::UndefinedMetric("empty income distribution"));
    }
    if incomes.iter().any(|m| m.is_negative()) {
        return Err(Error::InvalidInput("income distribution contains negative values".into()));
    }
    let t = total(incomes);
    if t == 0 {
        return Err(Error::UndefinedMetric("total income is zero"));
    }
    Ok(t)
}

/// Gini coefficient `Σᵢⱼ|xᵢ−xⱼ| / (2n²μ)`, evaluated in O(n log n) as
/// `Σᵢ (2i − n − 1)·x₍ᵢ₎ / (n·Σx)` over the ascending order.
pub fn gini(incomes: &[Money]) -> Result<Exact> {
    let t = check_distribution(incomes)?;
    let n = incomes.len() as i128;
    let weighted: i128 =
        sorted_ascending(incomes).iter().enumerate().map(|(i, x)| (2 * (i as i128 + 1) - n - 1) * x).sum();
    Ok(Exact::new(weighted, n * t))
}

/// Cumulative income share at each cumulative population share `i/n`,
/// ascending by income, from (0, 0) to (1, 1).
pub fn lorenz_points(incomes: &[Money]) -> Result<Vec<(Exact, Exact)>> {
    let t = check_distribution(incomes)?;
    let n = incomes.len() as i128;
    let mut points = Vec::with_capacity(incomes.len() + 1);
    points.push((Exact::from_integer(0), Exact::from_integer(0)));
    let mut running = 0i128;
    for (i, x) in sorted_ascending(incomes).into_iter().enumerate() {
        running += x;
        points.push((Exact::new(i as i128 + 1, n), Exact::new(running, t)));
    }
    Ok(points)
}

/// `1 − 2 × area` under a Lorenz polyline, by the trapezoid rule.
pub fn gini_from_lorenz(points: &[(Exact, Exact)]) -> Exact {
    let twice_area: Exact =
        points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).fold(Exact::from_integer(0), |acc, x| acc + x);
    Exact::from_integer(1) - twice_area
}

/// Income share of the top `⌈p·n⌉` earners. Earners are ordered by
/// descending income, then by position in `incomes`; ties do not change
/// the value.
pub fn top_share(incomes: &[Money], p: Exact) -> Result<Exact> {
    if incomes.is_empty() {
        return Err(Error::InvalidInput("top share of an empty population".into()));
    }
    if p <= Exact::from_integer(0) || p > Exact::from_integer(1) {
        return Err(Error::InvalidInput(format!("top share fraction {p} outside (0, 1]")));
    }
    let t = check_distribution(incomes)?;
    let k = (p * Exact::from_integer(incomes.len() as i128)).ceil().to_integer() as usize;
    let mut order: Vec<(i128, usize)> = incomes.iter().enumerate().map(|(i, m)| (m.stotinki() as i128, i)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let top: i128 = order[..k].iter().map(|(x, _)| x).sum();
    Ok(Exact::new(top, t))
}

/// Monthly tax of every household, in population order.
///
/// Large populations are split into contiguous chunks evaluated on scoped
/// threads and concatenated in chunk order.
pub fn household_taxes(population: &Population, policy: &Policy) -> Result<Vec<Money>> {
    policy.validate()?;
    let households = &population.households;
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16);
    if households.len() < 2_048 || workers == 1 {
        return households.iter().map(|h| household_tax(h, policy)).collect();
    }
    let chunk = households.len().div_ceil(workers);
    thread::scope(|scope| {
        let handles: Vec<_> = households
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|h| household_tax(h, policy)).collect::<Result<Vec<_>>>()))
            .collect();
        let mut taxes = Vec::with_capacity(households.len());
        for handle in handles {
            taxes.extend(handle.join().expect("tax worker panicked")?);
        }
        Ok(taxes)
    })
}

fn collected(assessed: Money, collection_rate: Rate) -> Money {
    Money::round_half_up(assessed.exact() * collection_rate.fraction())
}

/// Monthly revenue: collection rate × Σ household tax, rounded half-up once.
/// NIT transfers are negative revenue.
pub fn revenue(population: &Population, policy: &Policy) -> Result<Money> {
    let assessed: Money = household_taxes(population, policy)?.iter().sum();
    Ok(collected(assessed, policy.collection_rate))
}

/// An exact fraction that serializes as a six-digit decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fraction(pub Exact);

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_fraction(self.0, 6))
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HouseholdDelta {
    pub household_id: u64,
    #[serde(rename = "tax_a_bgn")]
    pub tax_a: Money,
    #[serde(rename = "tax_b_bgn")]
    pub tax_b: Money,
    #[serde(rename = "delta_bgn")]
    pub delta: Money,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DeltaSummary {
    pub winners: usize,
    pub losers: usize,
    pub unchanged: usize,
    #[serde(rename = "net_delta_bgn")]
    pub net_delta: Money,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WinnersLosers {
    #[serde(flatten)]
    pub summary: DeltaSummary,
    pub households: Vec<HouseholdDelta>,
}

/// Per-household `tax_b − tax_a`; winners pay less under `b`.
pub fn winners_losers(population: &Population, a: &Policy, b: &Policy) -> Result<WinnersLosers> {
    let taxes_a = household_taxes(population, a)?;
    let taxes_b = household_taxes(population, b)?;
    Ok(deltas(&population.households, &taxes_a, &taxes_b))
}

pub(crate) fn deltas(households: &[Household], taxes_a: &[Money], taxes_b: &[Money]) -> WinnersLosers {
    let mut out = WinnersLosers::default();
    for ((h, &tax_a), &tax_b) in households.iter().zip(taxes_a).zip(taxes_b) {
        let delta = tax_b - tax_a;
        match delta.cmp(&Money::ZERO) {
            std::cmp::Ordering::Less => out.summary.winners += 1,
            std::cmp::Ordering::Greater => out.summary.losers += 1,
            std::cmp::Ordering::Equal => out.summary.unchanged += 1,
        }
        out.summary.net_delta += delta;
        out.households.push(HouseholdDelta { household_id: h.id, tax_a, tax_b, delta });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LorenzPoint {
    pub population_share: Fraction,
    pub income_share: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopShare {
    pub p: Fraction,
    pub pre: Option<Fraction>,
    pub post: Option<Fraction>,
}

/// Households grouped by pre-tax income: decile `k` holds the households at
/// positions `⌊k·n/10⌋ .. ⌊(k+1)·n/10⌋` of the ascending order (ties by id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecileRow {
    pub decile: u8,
    pub households: usize,
    #[serde(rename = "income_bgn")]
    pub income: Money,
    #[serde(rename = "tax_bgn")]
    pub tax: Money,
    /// `None` when the decile has no income.
    pub effective_rate: Option<Fraction>,
}

/// Monthly figures for one policy over one population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricsReport {
    pub policy: String,
    pub period: &'static str,
    pub households: usize,
    #[serde(rename = "gross_income_bgn")]
    pub gross_income: Money,
    #[serde(rename = "assessed_tax_bgn")]
    pub assessed_tax: Money,
    #[serde(rename = "collection_rate_bp")]
    pub collection_rate: Rate,
    #[serde(rename = "total_revenue_bgn")]
    pub total_revenue: Money,
    pub gini_pre: Option<Fraction>,
    pub gini_post: Option<Fraction>,
    pub redistribution: Option<Fraction>,
    pub lorenz_pre: Vec<LorenzPoint>,
    pub lorenz_post: Vec<LorenzPoint>,
    pub top_shares: Vec<TopShare>,
    pub deciles: Vec<DecileRow>,
}

/// Top-share fractions included in every report: 1% and 10%.
pub const REPORT_TOP_SHARES: [(i128, i128); 2] = [(1, 100), (1, 10)];

fn decile_lorenz(incomes: &[Money]) -> Vec<LorenzPoint> {
    let Ok(points) = lorenz_points(incomes) else {
        return Vec::new();
    };
    let n = incomes.len();
    let mut vertices: Vec<usize> = (0..=10).map(|k| k * n / 10).collect();
    vertices.dedup();
    vertices
        .into_iter()
        .map(|i| LorenzPoint { population_share: Fraction(points[i].0), income_share: Fraction(points[i].1) })
        .collect()
}

/// Evaluates `policy` over `population`. Post-tax income is gross income
/// minus assessed tax; metrics that are undefined for the distribution (no
/// income, negative post-tax income) are reported as `null`.
pub fn evaluate(population: &Population, policy: &Policy) -> Result<MetricsReport> {
    let taxes = household_taxes(population, policy)?;
    Ok(report_from_taxes(population, policy, &taxes))
}

pub(crate) fn report_from_taxes(population: &Population, policy: &Policy, taxes: &[Money]) -> MetricsReport {
    let households = &population.households;
    let pre: Vec<Money> = households.iter().map(Household::income).collect();
    let post: Vec<Money> = pre.iter().zip(taxes).map(|(&i, &t)| i - t).collect();
    let assessed: Money = taxes.iter().sum();

    let gini_pre = gini(&pre).ok();
    let gini_post = gini(&post).ok();
    let redistribution = gini_pre.zip(gini_post).map(|(a, b)| Fraction(a - b));

    let top_shares = REPORT_TOP_SHARES
        .iter()
        .map(|&(num, den)| {
            let p = Exact::new(num, den);
            TopShare {
                p: Fraction(p),
                pre: top_share(&pre, p).ok().map(Fraction),
                post: top_share(&post, p).ok().map(Fraction),
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..households.len()).collect();
    order.sort_by(|&a, &b| pre[a].cmp(&pre[b]).then(households[a].id.cmp(&households[b].id)));
    let n = households.len();
    let deciles = if n == 0 {
        Vec::new()
    } else {
        (0..10)
            .map(|k| {
                let slice = &order[k * n / 10..(k + 1) * n / 10];
                let income: Money = slice.iter().map(|&i| pre[i]).sum();
                let tax: Money = slice.iter().map(|&i| taxes[i]).sum();
                let effective_rate = (income != Money::ZERO)
                    .then(|| Fraction(Exact::new(tax.stotinki() as i128, income.stotinki() as i128)));
                DecileRow { decile: k as u8 + 1, households: slice.len(), income, tax, effective_rate }
            })
            .collect()
    };

    MetricsReport {
        policy: policy.name.clone(),
        period: "monthly",
        households: n,
        gross_income: pre.iter().sum(),
        assessed_tax: assessed,
        collection_rate: policy.collection_rate,
        total_revenue: collected(assessed, policy.collection_rate),
        gini_pre: gini_pre.map(Fraction),
        gini_post: gini_post.map(Fraction),
        redistribution,
        lorenz_pre: decile_lorenz(&pre),
        lorenz_post: decile_lorenz(&post),
        top_shares,
        deciles,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReferencePoint {
    pub series: &'static str,
    pub year: u16,
    pub share_pct: u8,
}

/// Published US top-1% income shares, carried as labeled reference data.
/// Whether the figures are pre- or post-tax is not stated.
pub const US_TOP1_REFERENCE: [ReferencePoint; 2] = [
    ReferencePoint { series: "us_top1_income_share", year: 1970, share_pct: 8 },
    ReferencePoint { series: "us_top1_income_share", year: 2010, share_pct: 17 },
];
