//! Population and policy sources shared by the CLI and the service.

use std::fs;
use std::path::{Path, PathBuf};

use taxsim_core::population::{load_population, IncomeDistribution, Population, SynthesisParams, REFERENCE_HOUSEHOLDS};
use taxsim_core::{presets, synthesize, Money, Policy};

use crate::error::{AppError, AppResult};

/// Parses `seed=7,n=1000[,median=800,sigma=0.85,floor=460]`.
///
/// `seed` is required; `n` defaults to the reference size. `median` and
/// `floor` are monthly BGN amounts, `sigma` the log-scale spread.
pub fn parse_synth(spec: &str) -> AppResult<SynthesisParams> {
    let bad = |msg: String| AppError::Usage(format!("--synth: {msg}"));
    let mut seed = None;
    let mut params = SynthesisParams::reference(0, REFERENCE_HOUSEHOLDS);
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        let value = value.trim();
        let number = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{key}: not a number: {v:?}")));
        match key.trim() {
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad(format!("seed: not a u64: {value:?}")))?),
            "n" => params.household_count = value.parse().map_err(|_| bad(format!("n: not a count: {value:?}")))?,
            "median" => {
                let median = number(value)?;
                if median.is_nan() || median <= 0.0 {
                    return Err(bad("median must be positive".into()));
                }
                params.income = IncomeDistribution::with_median(median, params.income.scale);
            }
            "sigma" => params.income.scale = number(value)?,
            "floor" => {
                params.income_floor = Some(value.parse::<Money>().map_err(|e| bad(format!("floor: {e}")))?);
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    params.seed = seed.ok_or_else(|| bad("seed is required".into()))?;
    params.validate()?;
    Ok(params)
}

pub fn read_population(path: &Path) -> AppResult<Population> {
    let file = fs::File::open(path).map_err(|source| AppError::File { path: path.to_path_buf(), source })?;
    Ok(load_population(std::io::BufReader::new(file))?)
}

pub enum PopulationSource {
    Csv(PathBuf),
    Synth(SynthesisParams),
}

impl PopulationSource {
    pub fn load(&self) -> AppResult<Population> {
        match self {
            PopulationSource::Csv(path) => read_population(path),
            PopulationSource::Synth(params) => Ok(synthesize(params)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyRef {
    Preset(String),
    File(PathBuf),
}

pub fn preset(name: &str) -> AppResult<Policy> {
    presets::by_name(name).ok_or_else(|| {
        AppError::Usage(format!("unknown preset {name:?}; available: {}", presets::PRESET_NAMES.join(", ")))
    })
}

impl PolicyRef {
    pub fn resolve(&self) -> AppResult<Policy> {
        match self {
            PolicyRef::Preset(name) => preset(name),
            PolicyRef::File(path) => {
                let text = fs::read_to_string(path).map_err(|source| AppError::File { path: path.clone(), source })?;
                Ok(Policy::from_toml(&text)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_spec() {
        let p = parse_synth("seed=7,n=1000").unwrap();
        assert_eq!(p, SynthesisParams::reference(7, 1_000));
        let p = parse_synth("n=5, seed=1, sigma=0, floor=460").unwrap();
        assert_eq!(p.income.scale, 0.0);
        assert_eq!(p.income_floor, Some(Money::from_bgn(460)));
        assert!(parse_synth("n=5").is_err());
        assert!(parse_synth("seed=x").is_err());
        assert!(parse_synth("seed=1,colour=red").is_err());
        assert!(parse_synth("seed=1,median=-3").is_err());
        assert!(parse_synth("seed=1,sigma=-3").is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("nope"), Err(AppError::Usage(_))));
        assert_eq!(preset("nit_2016").unwrap().name, "nit_2016");
    }
}
