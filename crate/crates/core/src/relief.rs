//! 2016 personal income tax reliefs.
//!
//! Reliefs reduce an annual tax base. Percentage caps are all measured
//! against the pre-relief base, independently of each other, and the
//! resulting taxable base is floored at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::{Money, Rate};
use crate::schedule::{Period, Schedule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliefRules {
    #[serde(rename = "voluntary_pension_cap_bp")]
    pub voluntary_pension_cap: Rate,
    #[serde(rename = "insurance_cap_bp")]
    pub insurance_cap: Rate,
    #[serde(rename = "donation_cap_bp")]
    pub donation_cap: Rate,
    #[serde(rename = "mortgage_principal_cap_bgn")]
    pub mortgage_principal_cap: Money,
    /// Relief for one, two, and three or more children.
    #[serde(rename = "child_relief_bgn")]
    pub child_relief: [Money; 3],
    #[serde(rename = "disabled_child_relief_bgn")]
    pub disabled_child_relief: Money,
    #[serde(rename = "reduced_capacity_relief_bgn")]
    pub reduced_capacity_relief: Money,
    #[serde(rename = "reduced_capacity_threshold_pct")]
    pub reduced_capacity_threshold: u8,
}

impl Default for ReliefRules {
    fn default() -> Self {
        Self::bulgaria_2016()
    }
}

impl ReliefRules {
    pub fn bulgaria_2016() -> Self {
        ReliefRules {
            voluntary_pension_cap: Rate::percent(10),
            insurance_cap: Rate::percent(10),
            donation_cap: Rate::percent(5),
            mortgage_principal_cap: Money::from_bgn(100_000),
            child_relief: [Money::from_bgn(200), Money::from_bgn(400), Money::from_bgn(600)],
            disabled_child_relief: Money::from_bgn(2_000),
            reduced_capacity_relief: Money::from_bgn(7_920),
            reduced_capacity_threshold: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.voluntary_pension_cap, self.insurance_cap, self.donation_cap];
        if rates.iter().any(|r| !r.is_valid()) {
            return Err(Error::InvalidInput("relief cap rate above 100%".into()));
        }
        let amounts = [self.mortgage_principal_cap, self.disabled_child_relief, self.reduced_capacity_relief];
        if amounts.iter().chain(&self.child_relief).any(|m| m.is_negative()) {
            return Err(Error::InvalidInput("relief amounts must be non-negative".into()));
        }
        if self.child_relief.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("child relief must not decrease with the number of children".into()));
        }
        if self.reduced_capacity_threshold > 100 {
            return Err(Error::InvalidInput("reduced capacity threshold above 100%".into()));
        }
        Ok(())
    }

    /// Relief for `count` children without a disability rating.
    pub fn child_relief_for(&self, count: u32) -> Money {
        match count {
            0 => Money::ZERO,
            1 => self.child_relief[0],
            2 => self.child_relief[1],
            _ => self.child_relief[2],
        }
    }
}

/// Relief-relevant facts for one taxpayer. Money fields are annual.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReliefClaims {
    pub voluntary_pension_paid: Money,
    pub insurance_paid: Money,
    pub service_purchase_paid: Money,
    pub donations: Money,
    pub mortgage_interest_paid: Money,
    pub mortgage_principal: Money,
    pub children: u32,
    pub disabled_children: u32,
    pub reduced_capacity_pct: u8,
    pub young_family_eligible: bool,
}

impl ReliefClaims {
    pub fn validate(&self) -> Result<()> {
        let amounts = [
            self.voluntary_pension_paid,
            self.insurance_paid,
            self.service_purchase_paid,
            self.donations,
            self.mortgage_interest_paid,
            self.mortgage_principal,
        ];
        if amounts.iter().any(|m| m.is_negative()) {
            return Err(Error::InvalidInput("relief claim amounts must be non-negative".into()));
        }
        if self.disabled_children > self.children {
            return Err(Error::InvalidInput("disabled children exceed children".into()));
        }
        if self.reduced_capacity_pct > 100 {
            return Err(Error::InvalidInput("reduced capacity percentage above 100".into()));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == ReliefClaims::default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Deductions {
    pub voluntary_pension: Money,
    pub insurance: Money,
    pub service_purchase: Money,
    pub donations: Money,
    pub mortgage_interest: Money,
    pub children: Money,
    pub disabled_children: Money,
    pub reduced_capacity: Money,
}

impl Deductions {
    pub fn total(&self) -> Money {
        [
            self.voluntary_pension,
            self.insurance,
            self.service_purchase,
            self.donations,
            self.mortgage_interest,
            self.children,
            self.disabled_children,
            self.reduced_capacity,
        ]
        .iter()
        .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReliefOutcome {
    pub taxable_base: Money,
    pub deductions: Deductions,
}

/// `min(paid, cap × base)`, with the cap floored to whole stotinki.
fn capped(paid: Money, cap: Rate, base: Money) -> Money {
    paid.min(Money::floor(cap.fraction() * base.exact()))
}

pub fn apply_reliefs(annual_base: Money, claims: &ReliefClaims, rules: &ReliefRules) -> Result<ReliefOutcome> {
    if annual_base.is_negative() {
        return Err(Error::InvalidInput(format!("negative annual base {annual_base}")));
    }
    claims.validate()?;

    let mortgage_interest = if !claims.young_family_eligible {
        Money::ZERO
    } else if claims.mortgage_principal > rules.mortgage_principal_cap {
        // only interest attributable to the capped part of the principal
        Money::floor(
            claims.mortgage_interest_paid.exact() * rules.mortgage_principal_cap.exact()
                / claims.mortgage_principal.exact(),
        )
    } else {
        claims.mortgage_interest_paid
    };

    let reduced_capacity =
        if claims.reduced_capacity_pct >= rules.reduced_capacity_threshold && claims.reduced_capacity_pct > 0 {
            rules.reduced_capacity_relief
        } else {
            Money::ZERO
        };

    let deductions = Deductions {
        voluntary_pension: capped(claims.voluntary_pension_paid, rules.voluntary_pension_cap, annual_base),
        insurance: capped(claims.insurance_paid, rules.insurance_cap, annual_base),
        service_purchase: claims.service_purchase_paid,
        donations: capped(claims.donations, rules.donation_cap, annual_base),
        mortgage_interest,
        children: rules.child_relief_for(claims.children - claims.disabled_children),
        disabled_children: rules.disabled_child_relief.times(claims.disabled_children as i64),
        reduced_capacity,
    };
    let taxable_base = (annual_base - deductions.total()).max(Money::ZERO);
    Ok(ReliefOutcome { taxable_base, deductions })
}

/// Tax on an annual base after reliefs. The schedule must be annual.
pub fn annual_tax(
    annual_base: Money,
    claims: &ReliefClaims,
    rules: &ReliefRules,
    schedule: &Schedule,
) -> Result<Money> {
    schedule.expect_period(Period::Annual)?;
    schedule.compute_tax(apply_reliefs(annual_base, claims, rules)?.taxable_base)
}
