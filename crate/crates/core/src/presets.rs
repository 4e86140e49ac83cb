//! Bundled policies.
//!
//! * `flat_2008`: 10% flat tax on annual income with the 2016 reliefs.
//! * `proposed_progressive`: 0% to 20% monthly scale applied per household
//!   member. Bands are normalized to lower-inclusive bounds at 0, 300, 1,000,
//!   2,000, 4,000, 6,000 and 8,000 BGN; the 20% band is open-ended. Slab mode
//!   by default; switch `schedule.mode` to `marginal` for the sliced reading.
//! * `nit_2016`: negative income tax with a 300 BGN per-capita monthly
//!   minimum and a flat 10% on household income above the minimum.
//! * `socialist_1970s`: monthly wage tax exempt below 120 BGN, 8% from 120,
//!   14% from 340, 99% collection efficiency. Interior rates between 8% and
//!   14% are illustrative.

use crate::money::{Money, Rate};
use crate::policy::{HouseholdMode, NitSettings, Policy};
use crate::relief::ReliefRules;
use crate::schedule::{Bracket, Mode, Period, Schedule};

pub const PRESET_NAMES: [&str; 4] = ["flat_2008", "proposed_progressive", "nit_2016", "socialist_1970s"];

fn brackets(bands: &[(i64, u32)]) -> Vec<Bracket> {
    bands.iter().map(|&(lower, bp)| Bracket::new(Money::from_bgn(lower), Rate::from_bp(bp))).collect()
}

pub fn flat_2008() -> Policy {
    let mut p = Policy::new("flat_2008", HouseholdMode::Individual, Schedule::flat(Rate::percent(10), Period::Annual));
    p.description = Some("10% flat personal income tax with 2016 reliefs".into());
    p.relief_rules = Some(ReliefRules::bulgaria_2016());
    p
}

pub fn proposed_scale(mode: Mode) -> Schedule {
    Schedule {
        period: Period::Monthly,
        mode,
        brackets: brackets(&[
            (0, 0),
            (300, 1_000),
            (1_000, 1_200),
            (2_000, 1_400),
            (4_000, 1_600),
            (6_000, 1_800),
            (8_000, 2_000),
        ]),
    }
}

pub fn proposed_progressive() -> Policy {
    let mut p = Policy::new("proposed_progressive", HouseholdMode::PerMember, proposed_scale(Mode::Slab));
    p.description = Some("provisional 0-20% scale per household member".into());
    p
}

pub fn nit_2016() -> Policy {
    let mut p = Policy::new("nit_2016", HouseholdMode::Nit, Schedule::flat(Rate::percent(10), Period::Monthly));
    p.description = Some("negative income tax, 300 BGN monthly minimum per capita".into());
    p.nit = Some(NitSettings::new(Money::from_bgn(300)));
    p
}

pub fn socialist_wage_scale() -> Schedule {
    Schedule {
        period: Period::Monthly,
        mode: Mode::Slab,
        brackets: brackets(&[
            (0, 0),
            (120, 800),
            (130, 900),
            (172, 1_000),
            (214, 1_100),
            (256, 1_200),
            (298, 1_300),
            (340, 1_400),
        ]),
    }
}

pub fn socialist_1970s() -> Policy {
    let mut p = Policy::new("socialist_1970s", HouseholdMode::Individual, socialist_wage_scale());
    p.description = Some("planned-economy wage tax, 120 BGN threshold, 8-14%; interior rates illustrative".into());
    p.collection_rate = Rate::from_bp(9_900);
    p
}

/// Planned-economy schedules for income streams other than wages. None of
/// them is active in `socialist_1970s`; the childless surcharge can be
/// enabled with `childless_surcharge_bp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialistAddons {
    /// Annual fee income of scientists and artists, up to 50% above 40,000 BGN.
    pub fee_income: Schedule,
    /// Annual rental income, 9% up to 81%.
    pub rental_income: Schedule,
    /// "Bachelor" tax on income of adults without children.
    pub childless_surcharge: Rate,
}

/// Interior bracket bounds are illustrative; only the end rates are sourced.
pub fn socialist_addons() -> SocialistAddons {
    SocialistAddons {
        fee_income: Schedule {
            period: Period::Annual,
            mode: Mode::Marginal,
            brackets: brackets(&[(0, 1_000), (10_000, 2_000), (20_000, 3_000), (30_000, 4_000), (40_000, 5_000)]),
        },
        rental_income: Schedule {
            period: Period::Annual,
            mode: Mode::Marginal,
            brackets: brackets(&[(0, 900), (1_200, 2_700), (2_400, 4_500), (3_600, 6_300), (4_800, 8_100)]),
        },
        childless_surcharge: Rate::percent(10),
    }
}

pub fn all() -> Vec<Policy> {
    vec![flat_2008(), proposed_progressive(), nit_2016(), socialist_1970s()]
}

pub fn by_name(name: &str) -> Option<Policy> {
    match name {
        "flat_2008" => Some(flat_2008()),
        "proposed_progressive" => Some(proposed_progressive()),
        "nit_2016" => Some(nit_2016()),
        "socialist_1970s" => Some(socialist_1970s()),
        _ => None,
    }
}
