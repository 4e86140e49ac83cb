//! Policy bundles and the TOML policy-file format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::household::NitParams;
use crate::money::{Money, Rate};
use crate::relief::ReliefRules;
use crate::schedule::{Period, RateScale, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HouseholdMode {
    /// Each member taxed on their own income, reliefs applied per member.
    Individual,
    /// Negative income tax on the pooled household income.
    Nit,
    /// Monthly schedule applied to each member's income, no reliefs.
    PerMember,
}

impl HouseholdMode {
    pub fn as_str(self) -> &'static str {
        match self {
            HouseholdMode::Individual => "individual",
            HouseholdMode::Nit => "nit",
            HouseholdMode::PerMember => "per_member",
        }
    }
}

fn full_rate() -> Rate {
    Rate::FULL
}

fn is_full_rate(rate: &Rate) -> bool {
    *rate == Rate::FULL
}

fn is_false(value: &bool) -> bool {
    !*value
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NitSettings {
    #[serde(rename = "social_minimum_per_capita_bgn")]
    pub social_minimum_per_capita: Money,
    #[serde(rename = "transfer_rate_bp", default = "full_rate", skip_serializing_if = "is_full_rate")]
    pub transfer_rate: Rate,
    /// Lets 2016 reliefs reduce the taxable excess above the minimum.
    #[serde(default, skip_serializing_if = "is_false")]
    pub apply_reliefs: bool,
}

impl NitSettings {
    pub fn new(social_minimum_per_capita: Money) -> Self {
        NitSettings { social_minimum_per_capita, transfer_rate: Rate::FULL, apply_reliefs: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub household_mode: HouseholdMode,
    #[serde(rename = "collection_rate_bp", default = "full_rate")]
    pub collection_rate: Rate,
    /// Per-member variant only: tax the pooled household income once.
    #[serde(default, skip_serializing_if = "is_false")]
    pub pool_household_income: bool,
    /// Extra rate on adult income in households without children.
    #[serde(rename = "childless_surcharge_bp", default, skip_serializing_if = "Option::is_none")]
    pub childless_surcharge: Option<Rate>,
    #[serde(default, skip_serializing_if = "RateScale::is_identity")]
    pub rate_scale: RateScale,
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nit: Option<NitSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relief_rules: Option<ReliefRules>,
}

impl Policy {
    pub fn new(name: impl Into<String>, household_mode: HouseholdMode, schedule: Schedule) -> Self {
        Policy {
            name: name.into(),
            description: None,
            household_mode,
            collection_rate: Rate::FULL,
            pool_household_income: false,
            childless_surcharge: None,
            rate_scale: RateScale::IDENTITY,
            schedule,
            nit: None,
            relief_rules: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.check()?;
        if !self.collection_rate.is_valid() {
            return Err(Error::InvalidInput("collection rate above 100%".into()));
        }
        if self.childless_surcharge.is_some_and(|r| !r.is_valid()) {
            return Err(Error::InvalidInput("childless surcharge above 100%".into()));
        }
        if let Some(rules) = &self.relief_rules {
            rules.validate()?;
        }
        match self.household_mode {
            HouseholdMode::Individual => Ok(()),
            HouseholdMode::Nit => self.nit_params()?.validate(),
            HouseholdMode::PerMember => self.schedule.expect_period(Period::Monthly),
        }
    }

    /// NIT parameters built from the policy schedule and its `nit` section.
    pub fn nit_params(&self) -> Result<NitParams> {
        let settings = self.nit.as_ref().ok_or_else(|| {
            Error::InvalidInput(format!("policy {:?} is in nit mode without nit parameters", self.name))
        })?;
        Ok(NitParams {
            social_minimum_per_capita: settings.social_minimum_per_capita,
            transfer_rate: settings.transfer_rate,
            schedule: self.schedule.clone(),
        })
    }

    /// The same policy with every bracket rate multiplied by `scale`.
    pub fn scaled(&self, scale: RateScale) -> Policy {
        Policy { rate_scale: self.rate_scale.compose(scale), ..self.clone() }
    }

    pub fn from_toml(text: &str) -> Result<Policy> {
        let policy: Policy = toml::from_str(text).map_err(|e| Error::PolicyFile(e.to_string()))?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::PolicyFile(e.to_string()))
    }
}
