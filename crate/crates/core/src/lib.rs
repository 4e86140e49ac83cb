//! Household tax microsimulation.
//!
//! Amounts are exact stotinki, rates are basis points, and every tax is
//! rounded half away from zero exactly once. Household taxes are monthly;
//! annual schedules are evaluated on twelve months of income and divided
//! back.

pub mod error;
pub mod household;
pub mod lab;
pub mod metrics;
pub mod money;
pub mod policy;
pub mod population;
pub mod presets;
pub mod relief;
pub mod schedule;

pub use error::{Error, Result};
pub use household::{household_breakdown, household_tax, Household, HouseholdBreakdown, Member, Role};
pub use lab::{compare, revenue_neutral_scale, sweep, Comparison, ScaleSolution};
pub use metrics::{evaluate, gini, lorenz_points, revenue, top_share, winners_losers, MetricsReport};
pub use money::{Exact, Money, Rate};
pub use policy::{HouseholdMode, Policy};
pub use population::{load_population, synthesize, Population, SynthesisParams};
pub use schedule::{Mode, Period, RateScale, Schedule};
