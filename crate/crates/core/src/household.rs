//! 2+N households and household-level taxation.
//!
//! All household taxes are monthly amounts. Policies whose schedule or
//! reliefs are annual are evaluated on `12 × monthly income` and the
//! household's annual total is divided by 12, rounded half-up.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::{Exact, Money, Rate};
use crate::policy::{HouseholdMode, Policy};
use crate::relief::{apply_reliefs, ReliefClaims, ReliefOutcome, ReliefRules};
use crate::schedule::{BracketLine, Period, RateScale, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Adult,
    Child,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Adult => "adult",
            Role::Child => "child",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub id: u64,
    pub role: Role,
    #[serde(rename = "monthly_income_bgn")]
    pub monthly_income: Money,
    #[serde(default, skip_serializing_if = "ReliefClaims::is_empty")]
    pub claims: ReliefClaims,
}

impl Member {
    pub fn new(id: u64, role: Role, monthly_income: Money) -> Self {
        Member { id, role, monthly_income, claims: ReliefClaims::default() }
    }

    pub fn with_claims(mut self, claims: ReliefClaims) -> Self {
        self.claims = claims;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Household {
    pub id: u64,
    pub members: Vec<Member>,
}

impl Household {
    pub fn new(id: u64, members: Vec<Member>) -> Result<Self> {
        let household = Household { id, members };
        household.validate()?;
        Ok(household)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::Validation { household_id: self.id, message };
        if !self.members.iter().any(|m| m.role == Role::Adult) {
            return Err(invalid("household has no adult".into()));
        }
        let mut seen = HashSet::new();
        for member in &self.members {
            if !seen.insert(member.id) {
                return Err(invalid(format!("duplicate member id {}", member.id)));
            }
            if member.monthly_income.is_negative() {
                return Err(invalid(format!("member {} has negative income", member.id)));
            }
            member.claims.validate().map_err(|e| invalid(format!("member {}: {e}", member.id)))?;
            if member.role == Role::Child && member.claims.children > 0 {
                return Err(invalid(format!("child member {} claims child relief", member.id)));
            }
        }
        let claimed: u32 = self.members.iter().map(|m| m.claims.children).sum();
        if claimed as usize > self.child_count() {
            return Err(invalid(format!("{claimed} children claimed but household lists {}", self.child_count())));
        }
        Ok(())
    }

    pub fn income(&self) -> Money {
        self.members.iter().map(|m| m.monthly_income).sum()
    }

    pub fn adult_count(&self) -> usize {
        self.members.iter().filter(|m| m.role == Role::Adult).count()
    }

    pub fn child_count(&self) -> usize {
        self.members.iter().filter(|m| m.role == Role::Child).count()
    }
}

/// Negative income tax parameters. Below the household minimum the tax is
/// `-(minimum - income) × transfer_rate`; above it the schedule applies to
/// the excess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NitParams {
    pub social_minimum_per_capita: Money,
    pub transfer_rate: Rate,
    pub schedule: Schedule,
}

impl NitParams {
    pub fn new(social_minimum_per_capita: Money, schedule: Schedule) -> Self {
        NitParams { social_minimum_per_capita, transfer_rate: Rate::FULL, schedule }
    }

    pub fn validate(&self) -> Result<()> {
        if self.social_minimum_per_capita.is_negative() {
            return Err(Error::InvalidInput("social minimum must be non-negative".into()));
        }
        if !self.transfer_rate.is_valid() {
            return Err(Error::InvalidInput("NIT transfer rate above 100%".into()));
        }
        self.schedule.check()?;
        self.schedule.expect_period(Period::Monthly)
    }
}

pub fn household_minimum(h: &Household, params: &NitParams) -> Money {
    minimum_for(h, params.social_minimum_per_capita)
}

fn minimum_for(h: &Household, per_capita: Money) -> Money {
    per_capita.times(h.members.len() as i64)
}

struct NitParts {
    minimum: Money,
    transfer: Money,
    taxable_excess: Money,
}

fn nit_parts(income: Money, minimum: Money, transfer_rate: Rate, relief: Money) -> NitParts {
    if income < minimum {
        NitParts { minimum, transfer: (minimum - income).apply_rate(transfer_rate), taxable_excess: Money::ZERO }
    } else {
        NitParts { minimum, transfer: Money::ZERO, taxable_excess: (income - minimum - relief).max(Money::ZERO) }
    }
}

fn nit_tax_scaled(h: &Household, params: &NitParams, scale: RateScale, relief: Money) -> Result<Money> {
    params.validate()?;
    let parts = nit_parts(h.income(), household_minimum(h, params), params.transfer_rate, relief);
    if parts.transfer > Money::ZERO {
        return Ok(-parts.transfer);
    }
    params.schedule.compute_tax_scaled(parts.taxable_excess, scale)
}

/// Monthly negative income tax for a household; negative values are transfers.
pub fn nit_tax(h: &Household, params: &NitParams) -> Result<Money> {
    nit_tax_scaled(h, params, RateScale::IDENTITY, Money::ZERO)
}

fn per_member_tax_scaled(h: &Household, schedule: &Schedule, scale: RateScale, pooled: bool) -> Result<Money> {
    schedule.expect_period(Period::Monthly)?;
    if pooled {
        return schedule.compute_tax_scaled(h.income(), scale);
    }
    h.members.iter().map(|m| schedule.compute_tax_scaled(m.monthly_income, scale)).sum()
}

/// Monthly schedule applied to each member's income separately.
pub fn per_member_tax(h: &Household, schedule: &Schedule) -> Result<Money> {
    per_member_tax_scaled(h, schedule, RateScale::IDENTITY, false)
}

/// How individual-mode taxation is carried out for a policy.
enum IndividualBasis<'a> {
    /// Monthly schedule on monthly income, no reliefs.
    Monthly(&'a Schedule),
    /// Annual schedule on 12 × monthly income after optional reliefs.
    Annual(Schedule, Option<&'a ReliefRules>),
}

impl<'a> IndividualBasis<'a> {
    fn for_policy(policy: &'a Policy) -> Self {
        match (&policy.relief_rules, policy.schedule.period) {
            (None, Period::Monthly) => IndividualBasis::Monthly(&policy.schedule),
            (rules, _) => IndividualBasis::Annual(policy.schedule.annualized(), rules.as_ref()),
        }
    }
}

fn annual_reliefs(member: &Member, rules: Option<&ReliefRules>) -> Result<Option<ReliefOutcome>> {
    rules.map(|r| apply_reliefs(member.monthly_income.times(12), &member.claims, r)).transpose()
}

fn individual_tax(h: &Household, policy: &Policy) -> Result<Money> {
    let scale = policy.rate_scale;
    match IndividualBasis::for_policy(policy) {
        IndividualBasis::Monthly(schedule) => {
            h.members.iter().map(|m| schedule.compute_tax_scaled(m.monthly_income, scale)).sum()
        }
        IndividualBasis::Annual(schedule, rules) => {
            // exact annual taxes of all members, rounded once after dividing by 12
            let mut annual = Exact::from_integer(0);
            for member in &h.members {
                let base = match annual_reliefs(member, rules)? {
                    Some(outcome) => outcome.taxable_base,
                    None => member.monthly_income.times(12),
                };
                annual += schedule.exact_tax_scaled(base, scale)?;
            }
            Ok(Money::round_half_up(annual / Exact::from_integer(12)))
        }
    }
}

/// Monthly relief allowance used when a NIT policy opts into reliefs.
fn nit_relief_allowance(h: &Household, policy: &Policy) -> Result<Money> {
    let applies = policy.nit.as_ref().is_some_and(|n| n.apply_reliefs);
    let Some(rules) = policy.relief_rules.as_ref().filter(|_| applies) else {
        return Ok(Money::ZERO);
    };
    let mut annual = Money::ZERO;
    for member in &h.members {
        let base = member.monthly_income.times(12);
        annual += base - apply_reliefs(base, &member.claims, rules)?.taxable_base;
    }
    Ok(Money::floor(annual.exact() / Exact::from_integer(12)))
}

fn childless_surcharge(h: &Household, policy: &Policy) -> Money {
    match policy.childless_surcharge {
        Some(rate) if h.child_count() == 0 => {
            h.members.iter().filter(|m| m.role == Role::Adult).map(|m| m.monthly_income.apply_rate(rate)).sum()
        }
        _ => Money::ZERO,
    }
}

/// Monthly tax for a household under `policy`, before collection efficiency.
pub fn household_tax(h: &Household, policy: &Policy) -> Result<Money> {
    let base = match policy.household_mode {
        HouseholdMode::Individual => individual_tax(h, policy)?,
        HouseholdMode::Nit => {
            let params = policy.nit_params()?;
            let relief = nit_relief_allowance(h, policy)?;
            nit_tax_scaled(h, &params, policy.rate_scale, relief)?
        }
        HouseholdMode::PerMember => {
            per_member_tax_scaled(h, &policy.schedule, policy.rate_scale, policy.pool_household_income)?
        }
    };
    Ok(base + childless_surcharge(h, policy))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BracketItem {
    #[serde(rename = "lower_bgn")]
    pub lower: Money,
    #[serde(rename = "upper_bgn")]
    pub upper: Option<Money>,
    #[serde(rename = "rate_bp")]
    pub rate: Rate,
    #[serde(rename = "portion_bgn")]
    pub portion: Money,
    /// Display amount; the authoritative total is rounded once over all lines.
    #[serde(rename = "tax_bgn")]
    pub tax: Money,
}

impl From<BracketLine> for BracketItem {
    fn from(line: BracketLine) -> Self {
        BracketItem {
            lower: line.lower,
            upper: line.upper,
            rate: line.rate,
            portion: line.portion,
            tax: Money::round_half_up(line.tax),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberBreakdown {
    pub member_id: u64,
    pub role: Role,
    #[serde(rename = "monthly_income_bgn")]
    pub monthly_income: Money,
    /// Period of `base`, `taxable_base` and `tax`.
    pub period: Period,
    #[serde(rename = "base_bgn")]
    pub base: Money,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reliefs: Option<ReliefOutcome>,
    #[serde(rename = "taxable_base_bgn")]
    pub taxable_base: Money,
    pub brackets: Vec<BracketItem>,
    #[serde(rename = "tax_bgn")]
    pub tax: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NitBreakdown {
    #[serde(rename = "social_minimum_per_capita_bgn")]
    pub social_minimum_per_capita: Money,
    pub members: usize,
    #[serde(rename = "household_minimum_bgn")]
    pub household_minimum: Money,
    #[serde(rename = "relief_allowance_bgn")]
    pub relief_allowance: Money,
    #[serde(rename = "transfer_bgn")]
    pub transfer: Money,
    #[serde(rename = "taxable_excess_bgn")]
    pub taxable_excess: Money,
    pub brackets: Vec<BracketItem>,
}

/// Itemized monthly tax for one household.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HouseholdBreakdown {
    pub household_id: u64,
    pub policy: String,
    pub period: Period,
    pub household_mode: HouseholdMode,
    #[serde(rename = "gross_income_bgn")]
    pub gross_income: Money,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<MemberBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nit: Option<NitBreakdown>,
    #[serde(rename = "childless_surcharge_bgn")]
    pub childless_surcharge: Money,
    #[serde(rename = "total_tax_bgn")]
    pub total_tax: Money,
    #[serde(rename = "net_income_bgn")]
    pub net_income: Money,
}

fn member_line(
    member: &Member,
    schedule: &Schedule,
    scale: RateScale,
    period: Period,
    base: Money,
    reliefs: Option<ReliefOutcome>,
) -> Result<MemberBreakdown> {
    let taxable_base = reliefs.as_ref().map_or(base, |r| r.taxable_base);
    let brackets = schedule.breakdown_scaled(taxable_base, scale)?;
    Ok(MemberBreakdown {
        member_id: member.id,
        role: member.role,
        monthly_income: member.monthly_income,
        period,
        base,
        reliefs,
        taxable_base,
        brackets: brackets.into_iter().map(BracketItem::from).collect(),
        tax: schedule.compute_tax_scaled(taxable_base, scale)?,
    })
}

pub fn household_breakdown(h: &Household, policy: &Policy) -> Result<HouseholdBreakdown> {
    policy.validate()?;
    h.validate()?;
    let scale = policy.rate_scale;
    let mut members = Vec::new();
    let mut nit = None;
    match policy.household_mode {
        HouseholdMode::Individual => match IndividualBasis::for_policy(policy) {
            IndividualBasis::Monthly(schedule) => {
                for m in &h.members {
                    members.push(member_line(m, schedule, scale, Period::Monthly, m.monthly_income, None)?);
                }
            }
            IndividualBasis::Annual(schedule, rules) => {
                for m in &h.members {
                    let reliefs = annual_reliefs(m, rules)?;
                    let base = m.monthly_income.times(12);
                    members.push(member_line(m, &schedule, scale, Period::Annual, base, reliefs)?);
                }
            }
        },
        HouseholdMode::PerMember if !policy.pool_household_income => {
            for m in &h.members {
                members.push(member_line(m, &policy.schedule, scale, Period::Monthly, m.monthly_income, None)?);
            }
        }
        HouseholdMode::PerMember => {
            let lines = policy.schedule.breakdown_scaled(h.income(), scale)?;
            let head = h.members.first().expect("validated household has members");
            let mut pooled = member_line(head, &policy.schedule, scale, Period::Monthly, h.income(), None)?;
            pooled.brackets = lines.into_iter().map(BracketItem::from).collect();
            members.push(pooled);
        }
        HouseholdMode::Nit => {
            let params = policy.nit_params()?;
            let relief_allowance = nit_relief_allowance(h, policy)?;
            let parts = nit_parts(h.income(), household_minimum(h, &params), params.transfer_rate, relief_allowance);
            nit = Some(NitBreakdown {
                social_minimum_per_capita: params.social_minimum_per_capita,
                members: h.members.len(),
                household_minimum: parts.minimum,
                relief_allowance,
                transfer: parts.transfer,
                taxable_excess: parts.taxable_excess,
                brackets: params
                    .schedule
                    .breakdown_scaled(parts.taxable_excess, scale)?
                    .into_iter()
                    .map(BracketItem::from)
                    .collect(),
            });
        }
    }
    let surcharge = childless_surcharge(h, policy);
    let total_tax = household_tax(h, policy)?;
    Ok(HouseholdBreakdown {
        household_id: h.id,
        policy: policy.name.clone(),
        period: Period::Monthly,
        household_mode: policy.household_mode,
        gross_income: h.income(),
        members,
        nit,
        childless_surcharge: surcharge,
        total_tax,
        net_income: h.income() - total_tax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::schedule::{Bracket, Mode};
    use proptest::prelude::*;

    fn bgn(v: i64) -> Money {
        Money::from_bgn(v)
    }

    /// Two adults sharing `income` plus `children` zero-income children.
    fn family(income: Money, children: usize) -> Household {
        let half = Money::from_stotinki(income.stotinki() / 2);
        let mut members = vec![Member::new(1, Role::Adult, half), Member::new(2, Role::Adult, income - half)];
        for c in 0..children {
            members.push(Member::new(3 + c as u64, Role::Child, Money::ZERO));
        }
        Household::new(1, members).unwrap()
    }

    fn nit_flat() -> NitParams {
        NitParams::new(bgn(300), Schedule::flat(Rate::percent(10), Period::Monthly))
    }

    fn proposed_slab() -> Schedule {
        presets::proposed_progressive().schedule
    }

    #[test]
    fn minimum_examples() {
        assert_eq!(household_minimum(&family(bgn(0), 3), &nit_flat()), bgn(1_500));
        let single = Household::new(1, vec![Member::new(1, Role::Adult, bgn(100))]).unwrap();
        assert_eq!(household_minimum(&single, &nit_flat()), bgn(300));
        assert_eq!(household_minimum(&family(bgn(0), 0), &nit_flat()), bgn(600));
    }

    #[test]
    fn nit_examples() {
        assert_eq!(nit_tax(&family(bgn(1_200), 3), &nit_flat()).unwrap(), bgn(-300));
        assert_eq!(nit_tax(&family(bgn(1_500), 3), &nit_flat()).unwrap(), Money::ZERO);
        assert_eq!(nit_tax(&family(bgn(8_000), 3), &nit_flat()).unwrap(), bgn(650));
    }

    #[test]
    fn nit_partial_transfer_rate() {
        let mut params = nit_flat();
        params.transfer_rate = Rate::percent(50);
        assert_eq!(nit_tax(&family(bgn(1_200), 3), &params).unwrap(), bgn(-150));
    }

    #[test]
    fn nit_rejects_annual_schedule() {
        let params = NitParams::new(bgn(300), Schedule::flat(Rate::percent(10), Period::Annual));
        assert!(matches!(nit_tax(&family(bgn(1), 0), &params), Err(Error::PeriodMismatch { .. })));
    }

    #[test]
    fn per_member_examples() {
        let two_low =
            Household::new(1, vec![Member::new(1, Role::Adult, bgn(250)), Member::new(2, Role::Adult, bgn(250))])
                .unwrap();
        assert_eq!(per_member_tax(&two_low, &proposed_slab()).unwrap(), Money::ZERO);
        let one = Household::new(1, vec![Member::new(1, Role::Adult, bgn(500))]).unwrap();
        assert_eq!(per_member_tax(&one, &proposed_slab()).unwrap(), bgn(50));
        assert_eq!(per_member_tax(&family(Money::ZERO, 2), &proposed_slab()).unwrap(), Money::ZERO);
    }

    #[test]
    fn pooled_variant_taxes_joint_income() {
        let mut policy = presets::proposed_progressive();
        policy.pool_household_income = true;
        let h = Household::new(1, vec![Member::new(1, Role::Adult, bgn(250)), Member::new(2, Role::Adult, bgn(250))])
            .unwrap();
        // 500 pooled falls in the 10% slab
        assert_eq!(household_tax(&h, &policy).unwrap(), bgn(50));
    }

    #[test]
    fn household_tax_dispatch() {
        let earner = Household::new(1, vec![Member::new(1, Role::Adult, bgn(460))]).unwrap();
        assert_eq!(household_tax(&earner, &presets::flat_2008()).unwrap(), bgn(46));
        assert_eq!(household_tax(&family(bgn(1_200), 3), &presets::nit_2016()).unwrap(), bgn(-300));
        assert_eq!(household_tax(&family(Money::ZERO, 3), &presets::proposed_progressive()).unwrap(), Money::ZERO);
        assert_eq!(household_tax(&family(bgn(1_200), 3), &presets::flat_2008()).unwrap(), bgn(120));
    }

    #[test]
    fn flat_2008_uses_child_relief() {
        let h = Household::new(
            1,
            vec![
                Member::new(1, Role::Adult, bgn(1_000)).with_claims(ReliefClaims { children: 2, ..Default::default() }),
                Member::new(2, Role::Child, Money::ZERO),
                Member::new(3, Role::Child, Money::ZERO),
            ],
        )
        .unwrap();
        // (12,000 - 400) x 10% / 12
        assert_eq!(household_tax(&h, &presets::flat_2008()).unwrap(), Money::from_stotinki(9_667));
    }

    #[test]
    fn mode_period_mismatch_rejected() {
        let mut policy = presets::proposed_progressive();
        policy.schedule.period = Period::Annual;
        assert!(matches!(household_tax(&family(bgn(1), 0), &policy), Err(Error::PeriodMismatch { .. })));
    }

    #[test]
    fn childless_surcharge_applies_without_children() {
        let mut policy = presets::socialist_1970s();
        policy.childless_surcharge = Some(Rate::percent(10));
        let single = Household::new(1, vec![Member::new(1, Role::Adult, bgn(100))]).unwrap();
        assert_eq!(household_tax(&single, &policy).unwrap(), bgn(10));
        assert_eq!(household_tax(&family(bgn(200), 1), &policy).unwrap(), Money::ZERO);
    }

    #[test]
    fn nit_reliefs_flag_reduces_excess() {
        let mut policy = presets::nit_2016();
        policy.relief_rules = Some(ReliefRules::bulgaria_2016());
        let h = Household::new(
            1,
            vec![
                Member::new(1, Role::Adult, bgn(1_000))
                    .with_claims(ReliefClaims { reduced_capacity_pct: 80, ..Default::default() }),
                Member::new(2, Role::Adult, bgn(1_000)),
            ],
        )
        .unwrap();
        assert_eq!(household_tax(&h, &policy).unwrap(), bgn(140));
        policy.nit.as_mut().unwrap().apply_reliefs = true;
        // 7,920 / 12 = 660 off the 1,400 excess
        assert_eq!(household_tax(&h, &policy).unwrap(), bgn(74));
    }

    #[test]
    fn household_validation() {
        assert!(matches!(
            Household::new(7, vec![Member::new(1, Role::Child, Money::ZERO)]),
            Err(Error::Validation { household_id: 7, .. })
        ));
        assert!(Household::new(7, vec![Member::new(1, Role::Adult, bgn(1)), Member::new(1, Role::Child, Money::ZERO)])
            .is_err());
        let overclaim =
            Member::new(1, Role::Adult, bgn(1)).with_claims(ReliefClaims { children: 1, ..Default::default() });
        assert!(Household::new(7, vec![overclaim]).is_err());
    }

    #[test]
    fn breakdown_of_nit_family() {
        let b = household_breakdown(&family(bgn(1_200), 3), &presets::nit_2016()).unwrap();
        let nit = b.nit.unwrap();
        assert_eq!(nit.household_minimum, bgn(1_500));
        assert_eq!(nit.transfer, bgn(300));
        assert_eq!(b.total_tax, bgn(-300));
        assert_eq!(b.net_income, bgn(1_500));

        let b = household_breakdown(&family(bgn(8_000), 3), &presets::nit_2016()).unwrap();
        assert_eq!(b.nit.unwrap().taxable_excess, bgn(6_500));
    }

    #[test]
    fn breakdown_of_marginal_member() {
        let mut policy = presets::proposed_progressive();
        policy.schedule.mode = Mode::Marginal;
        let h = Household::new(1, vec![Member::new(1, Role::Adult, bgn(1_500))]).unwrap();
        let b = household_breakdown(&h, &policy).unwrap();
        let taxes: Vec<_> = b.members[0].brackets.iter().map(|l| l.tax).collect();
        assert_eq!(taxes, vec![Money::ZERO, bgn(70), bgn(60)]);
        assert_eq!(b.total_tax, bgn(130));
    }

    fn arb_household() -> impl Strategy<Value = Household> {
        (prop::collection::vec(0i64..2_000_000, 1..3), 0usize..5).prop_map(|(adults, children)| {
            let mut members: Vec<Member> = adults
                .iter()
                .enumerate()
                .map(|(i, &inc)| Member::new(i as u64 + 1, Role::Adult, Money::from_stotinki(inc)))
                .collect();
            for c in 0..children {
                members.push(Member::new(100 + c as u64, Role::Child, Money::ZERO));
            }
            Household::new(1, members).unwrap()
        })
    }

    fn arb_nit_schedule() -> impl Strategy<Value = Schedule> {
        prop::collection::vec(0u32..=10_000, 1..4).prop_map(|rates| Schedule {
            period: Period::Monthly,
            mode: Mode::Marginal,
            brackets: rates
                .into_iter()
                .enumerate()
                .map(|(i, r)| Bracket::new(Money::from_bgn(500 * i as i64), Rate::from_bp(r)))
                .collect(),
        })
    }

    fn with_income(h: &Household, income: Money) -> Household {
        let mut h = h.clone();
        h.members[0].monthly_income = income;
        for m in h.members.iter_mut().skip(1) {
            m.monthly_income = Money::ZERO;
        }
        h
    }

    proptest! {
        #[test]
        fn nit_monotone_and_guarantees_minimum(
            h in arb_household(),
            schedule in arb_nit_schedule(),
            a in 0i64..2_000_000,
            b in 0i64..2_000_000,
        ) {
            let params = NitParams::new(Money::from_bgn(300), schedule);
            let (lo, hi) = (Money::from_stotinki(a.min(b)), Money::from_stotinki(a.max(b)));
            let t_lo = nit_tax(&with_income(&h, lo), &params).unwrap();
            let t_hi = nit_tax(&with_income(&h, hi), &params).unwrap();
            prop_assert!(t_lo <= t_hi);
            let m = household_minimum(&h, &params);
            for (income, tax) in [(lo, t_lo), (hi, t_hi)] {
                prop_assert!(tax >= (income - m).min(Money::ZERO));
                prop_assert!(income - tax >= m);
            }
        }

        #[test]
        fn nit_transfer_slope_is_one(h in arb_household(), gap in 1i64..100_000) {
            let params = nit_flat();
            let m = household_minimum(&h, &params);
            let income = (m - Money::from_stotinki(gap)).max(Money::ZERO);
            let tax = nit_tax(&with_income(&h, income), &params).unwrap();
            prop_assert_eq!(tax, income - m);
        }

        #[test]
        fn extra_child_shifts_nit_by_per_capita(h in arb_household(), income in 0i64..3_000_000) {
            let params = nit_flat();
            let h = with_income(&h, Money::from_stotinki(income));
            let mut bigger = h.clone();
            bigger.members.push(Member::new(999, Role::Child, Money::ZERO));
            let income = h.income();
            let m = household_minimum(&h, &params);
            let before = nit_tax(&h, &params).unwrap();
            let after = nit_tax(&bigger, &params).unwrap();
            if income < m {
                prop_assert_eq!(before - after, params.social_minimum_per_capita);
            } else if income >= m + params.social_minimum_per_capita {
                let excess = income - m - params.social_minimum_per_capita;
                prop_assert_eq!(after, params.schedule.compute_tax(excess).unwrap());
            }
        }

        #[test]
        fn per_member_is_memberwise_sum(h in arb_household()) {
            let s = proposed_slab();
            let direct: Money = h.members.iter().map(|m| s.compute_tax(m.monthly_income).unwrap()).sum();
            prop_assert_eq!(per_member_tax(&h, &s).unwrap(), direct);
        }

        #[test]
        fn breakdown_total_matches_household_tax(h in arb_household(), which in 0usize..4) {
            let policy = presets::all().swap_remove(which);
            let b = household_breakdown(&h, &policy).unwrap();
            prop_assert_eq!(b.total_tax, household_tax(&h, &policy).unwrap());
        }
    }
}
