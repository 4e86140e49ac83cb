//! Seeded synthetic populations.
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded with `seed_from_u64`.
//! Normal deviates come from the Box–Muller transform evaluated with `libm`,
//! so the same parameters give the same households on every platform.
//! Default parameters are illustrative, not calibrated to survey data.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::Population;
use crate::error::{Error, Result};
use crate::household::{Household, Member, Role};
use crate::money::Money;

/// Seed of the reference population used by the acceptance checks.
pub const ACCEPTANCE_SEED: u64 = 2016;

/// Household count of the reference population.
pub const REFERENCE_HOUSEHOLDS: usize = 10_000;

const MAX_HOUSEHOLDS: usize = 5_000_000;
const MAX_INCOME: Money = Money::from_bgn(10_000_000);

/// Log-normal monthly income: `ln(income in BGN) ~ N(location, scale²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeDistribution {
    pub location: f64,
    pub scale: f64,
}

impl IncomeDistribution {
    /// Median 800 BGN a month, log-scale 0.85.
    pub fn reference() -> Self {
        Self::with_median(800.0, 0.85)
    }

    pub fn with_median(median_bgn: f64, scale: f64) -> Self {
        IncomeDistribution { location: libm::log(median_bgn), scale }
    }
}

fn reference_adults() -> Vec<u32> {
    vec![30, 70]
}

fn reference_children() -> Vec<u32> {
    vec![35, 30, 25, 10]
}

fn reference_income() -> IncomeDistribution {
    IncomeDistribution::reference()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisParams {
    pub household_count: usize,
    /// Relative weights of households with 1, 2, ... adults.
    #[serde(default = "reference_adults")]
    pub adults_weights: Vec<u32>,
    /// Relative weights of households with 0, 1, 2, ... children.
    #[serde(default = "reference_children")]
    pub children_weights: Vec<u32>,
    #[serde(default = "reference_income")]
    pub income: IncomeDistribution,
    /// Lowest adult income, e.g. a minimum wage.
    #[serde(default, rename = "income_floor_bgn", skip_serializing_if = "Option::is_none")]
    pub income_floor: Option<Money>,
    pub seed: u64,
}

impl SynthesisParams {
    pub fn reference(seed: u64, household_count: usize) -> Self {
        SynthesisParams {
            household_count,
            adults_weights: reference_adults(),
            children_weights: reference_children(),
            income: IncomeDistribution::reference(),
            income_floor: None,
            seed,
        }
    }

    /// The fixed-seed population the acceptance checks run against.
    pub fn acceptance() -> Self {
        Self::reference(ACCEPTANCE_SEED, REFERENCE_HOUSEHOLDS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.household_count > MAX_HOUSEHOLDS {
            return Err(Error::InvalidInput(format!("household_count above {MAX_HOUSEHOLDS}")));
        }
        for (name, weights) in [("adults_weights", &self.adults_weights), ("children_weights", &self.children_weights)]
        {
            if weights.is_empty() || weights.iter().all(|&w| w == 0) {
                return Err(Error::InvalidInput(format!("{name} needs at least one positive weight")));
            }
            if weights.len() > 32 {
                return Err(Error::InvalidInput(format!("{name} has more than 32 entries")));
            }
        }
        let IncomeDistribution { location, scale } = self.income;
        if !location.is_finite() || !(-10.0..=20.0).contains(&location) {
            return Err(Error::InvalidInput(format!("income location {location} out of range")));
        }
        if !scale.is_finite() || !(0.0..=10.0).contains(&scale) {
            return Err(Error::InvalidInput(format!("income scale {scale} out of range")));
        }
        if self.income_floor.is_some_and(|f| f.is_negative() || f > MAX_INCOME) {
            return Err(Error::InvalidInput("income floor out of range".into()));
        }
        Ok(())
    }
}

struct Draws(ChaCha8Rng);

impl Draws {
    /// Uniform on (0, 1].
    fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
    }

    fn categorical(&mut self, weights: &[u32]) -> usize {
        let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
        let mut pick = ((u128::from(self.0.next_u64()) * u128::from(total)) >> 64) as u64;
        for (i, &w) in weights.iter().enumerate() {
            if pick < u64::from(w) {
                return i;
            }
            pick -= u64::from(w);
        }
        unreachable!("pick below total weight")
    }

    fn income(&mut self, dist: IncomeDistribution) -> Money {
        let z = self.standard_normal();
        let stotinki = libm::round(libm::exp(dist.location + dist.scale * z) * 100.0);
        Money::from_stotinki(stotinki as i64).min(MAX_INCOME)
    }
}

/// Draws a population. Per household: adult count, child count, then one
/// income per adult. Children earn nothing; the first adult claims all of
/// the household's children for reliefs.
pub fn synthesize(params: &SynthesisParams) -> Result<Population> {
    params.validate()?;
    let mut draws = Draws(ChaCha8Rng::seed_from_u64(params.seed));
    let mut next_person = 1u64;
    let mut households = Vec::with_capacity(params.household_count);
    for h in 0..params.household_count {
        let adults = draws.categorical(&params.adults_weights) + 1;
        let children = draws.categorical(&params.children_weights);
        let mut members = Vec::with_capacity(adults + children);
        for a in 0..adults {
            let mut income = draws.income(params.income);
            if let Some(floor) = params.income_floor {
                income = income.max(floor);
            }
            let mut member = Member::new(next_person, Role::Adult, income);
            if a == 0 {
                member.claims.children = children as u32;
            }
            members.push(member);
            next_person += 1;
        }
        for _ in 0..children {
            members.push(Member::new(next_person, Role::Child, Money::ZERO));
            next_person += 1;
        }
        households.push(Household { id: h as u64 + 1, members });
    }
    Population::new(households)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::export_population;

    fn csv_bytes(p: &Population) -> Vec<u8> {
        let mut buf = Vec::new();
        export_population(p, &mut buf).unwrap();
        buf
    }

    #[test]
    fn same_seed_same_population() {
        let params = SynthesisParams::reference(7, 1_000);
        let a = synthesize(&params).unwrap();
        let b = synthesize(&params).unwrap();
        assert_eq!(a, b);
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
        assert_eq!(a.len(), 1_000);
        let other = synthesize(&SynthesisParams::reference(8, 1_000)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn zero_households() {
        assert!(synthesize(&SynthesisParams::reference(1, 0)).unwrap().is_empty());
    }

    #[test]
    fn zero_scale_collapses_to_location() {
        let mut params = SynthesisParams::reference(3, 200);
        params.income = IncomeDistribution { location: libm::log(700.0), scale: 0.0 };
        let expected = Money::from_stotinki(libm::round(libm::exp(libm::log(700.0)) * 100.0) as i64);
        assert_eq!(expected, Money::from_bgn(700));
        for h in &synthesize(&params).unwrap().households {
            for m in &h.members {
                match m.role {
                    Role::Adult => assert_eq!(m.monthly_income, expected),
                    Role::Child => assert_eq!(m.monthly_income, Money::ZERO),
                }
            }
        }
    }

    #[test]
    fn floor_and_shape() {
        let mut params = SynthesisParams::reference(11, 2_000);
        params.income_floor = Some(Money::from_bgn(460));
        let pop = synthesize(&params).unwrap();
        for h in &pop.households {
            assert!((1..=2).contains(&h.adult_count()));
            assert!(h.child_count() <= 3);
            assert_eq!(h.members[0].claims.children as usize, h.child_count());
            for m in h.members.iter().filter(|m| m.role == Role::Adult) {
                assert!(m.monthly_income >= Money::from_bgn(460));
                assert!(m.monthly_income <= MAX_INCOME);
            }
        }
        let summary = pop.summary();
        assert!(summary.children > 0 && summary.adults > 2_000);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = SynthesisParams::reference(1, 10);
        p.adults_weights = vec![0, 0];
        assert!(synthesize(&p).is_err());
        let mut p = SynthesisParams::reference(1, 10);
        p.income.scale = f64::NAN;
        assert!(synthesize(&p).is_err());
        let mut p = SynthesisParams::reference(1, 10);
        p.income.scale = -1.0;
        assert!(synthesize(&p).is_err());
    }

    #[test]
    fn uniform_is_open_at_zero() {
        let mut d = Draws(ChaCha8Rng::seed_from_u64(0));
        for _ in 0..10_000 {
            let u = d.uniform();
            assert!(u > 0.0 && u <= 1.0);
            assert!(d.standard_normal().is_finite());
        }
    }

    #[test]
    fn params_deserialize_with_defaults() {
        let p: SynthesisParams = toml::from_str("household_count = 5\nseed = 9").unwrap();
        assert_eq!(p, SynthesisParams::reference(9, 5));
    }
}
