//! Populations of households: CSV ingest and export, seeded synthesis, and
//! demographic scaling.

mod csv;
mod synth;

pub use self::csv::{export_population, load_population, CSV_HEADER};
pub use self::synth::{synthesize, IncomeDistribution, SynthesisParams, ACCEPTANCE_SEED, REFERENCE_HOUSEHOLDS};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::household::Household;
use crate::money::Money;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Population {
    pub households: Vec<Household>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PopulationSummary {
    pub households: usize,
    pub persons: usize,
    pub adults: usize,
    pub children: usize,
    #[serde(rename = "total_monthly_income_bgn")]
    pub total_monthly_income: Money,
}

impl Population {
    pub fn new(households: Vec<Household>) -> Result<Self> {
        let population = Population { households };
        population.validate()?;
        Ok(population)
    }

    pub fn validate(&self) -> Result<()> {
        let mut household_ids = std::collections::HashSet::new();
        let mut person_ids = std::collections::HashSet::new();
        for h in &self.households {
            h.validate()?;
            if !household_ids.insert(h.id) {
                return Err(Error::Validation { household_id: h.id, message: "duplicate household id".into() });
            }
            for m in &h.members {
                if !person_ids.insert(m.id) {
                    return Err(Error::Validation {
                        household_id: h.id,
                        message: format!("person id {} appears more than once", m.id),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.households.len()
    }

    pub fn is_empty(&self) -> bool {
        self.households.is_empty()
    }

    pub fn summary(&self) -> PopulationSummary {
        let persons = self.households.iter().map(|h| h.members.len()).sum();
        let adults = self.households.iter().map(Household::adult_count).sum();
        PopulationSummary {
            households: self.households.len(),
            persons,
            adults,
            children: persons - adults,
            total_monthly_income: self.households.iter().map(Household::income).sum(),
        }
    }

    /// Systematic resample to `count` households: output household `j` copies
    /// input household `floor(j × n / count)`. Households and persons are
    /// renumbered from 1 in output order.
    pub fn resampled(&self, count: usize) -> Result<Population> {
        if self.households.is_empty() && count > 0 {
            return Err(Error::InvalidInput("cannot resample an empty population".into()));
        }
        let n = self.households.len();
        let mut next_person = 1u64;
        let households = (0..count)
            .map(|j| {
                let source = &self.households[(j as u128 * n as u128 / count as u128) as usize];
                let mut h = source.clone();
                h.id = j as u64 + 1;
                for m in &mut h.members {
                    m.id = next_person;
                    next_person += 1;
                }
                h
            })
            .collect();
        Ok(Population { households })
    }

    /// Resample by a population ratio; the household count is rounded half-up.
    pub fn scaled(&self, factor: f64) -> Result<Population> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidInput(format!("invalid population scale {factor}")));
        }
        self.resampled((self.households.len() as f64 * factor).round() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DemographicPreset {
    pub year: u16,
    pub population_count: u64,
}

const DEMOGRAPHIC_SERIES: [DemographicPreset; 4] = [
    DemographicPreset { year: 2015, population_count: 7_168_009 },
    DemographicPreset { year: 2030, population_count: 6_554_784 },
    DemographicPreset { year: 2050, population_count: 5_813_550 },
    DemographicPreset { year: 2070, population_count: 5_132_023 },
];

/// Bulgarian population in 2015 and projections to 2070.
pub fn demographic_presets() -> Vec<DemographicPreset> {
    DEMOGRAPHIC_SERIES.to_vec()
}

pub fn demographic_preset(year: u16) -> Option<DemographicPreset> {
    DEMOGRAPHIC_SERIES.iter().copied().find(|p| p.year == year)
}

/// Population of `year` relative to the 2015 base.
pub fn demographic_ratio(year: u16) -> Result<f64> {
    let base = DEMOGRAPHIC_SERIES[0].population_count as f64;
    demographic_preset(year)
        .map(|p| p.population_count as f64 / base)
        .ok_or_else(|| Error::InvalidInput(format!("no demographic preset for {year}")))
}
