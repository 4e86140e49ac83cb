//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 for I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use taxsim_core::population::export_population;
use taxsim_core::{evaluate, lab, lorenz_points, presets, revenue, winners_losers, Exact, Household, Money, Policy};

use crate::error::{AppError, AppResult};
use crate::inputs::{parse_synth, PolicyRef, PopulationSource};
use crate::render::{self, Format};

pub const ADDR_ENV: &str = "TAXSIM_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "taxsim", version, about = "Household tax microsimulation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one or more policies over a population.
    Simulate(SimulateArgs),
    /// Evaluate policies side by side; later policies are compared with the first.
    Compare(CompareArgs),
    /// Re-evaluate one policy for each value of a parameter.
    Sweep(SweepArgs),
    /// Find the uniform rate scale that raises a target revenue.
    Solve(SolveArgs),
    /// Summarize or export a population.
    Population(PopulationArgs),
    /// List bundled policies or print one as a policy file.
    Presets(PresetsArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Population CSV file.
    #[arg(long, value_name = "CSV")]
    population: Option<PathBuf>,
    /// Synthetic population, e.g. `seed=7,n=1000[,median=800,sigma=0.85,floor=460]`.
    #[arg(long, value_name = "SPEC")]
    synth: Option<String>,
}

impl SourceArgs {
    fn source(&self) -> AppResult<PopulationSource> {
        match (&self.population, &self.synth) {
            (Some(path), _) => Ok(PopulationSource::Csv(path.clone())),
            (None, Some(spec)) => Ok(PopulationSource::Synth(parse_synth(spec)?)),
            (None, None) => Err(AppError::Usage("a population source is required".into())),
        }
    }
}

#[derive(Debug, Args)]
#[group(id = "policy", required = true, multiple = true)]
struct PolicyArgs {
    /// Bundled policy by name (repeatable).
    #[arg(long = "preset", value_name = "NAME")]
    presets: Vec<String>,
    /// Policy file in TOML (repeatable).
    #[arg(long = "policy", value_name = "FILE")]
    policy_files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    policies: PolicyArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Also write the full pre- and post-tax Lorenz curves to this CSV file.
    #[arg(long, value_name = "PATH")]
    lorenz_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    policies: PolicyArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Also write per-household tax changes against the first policy to this CSV file.
    #[arg(long, value_name = "PATH")]
    deltas_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    policies: PolicyArgs,
    /// Parameter path, e.g. `collection_rate`, `schedule.brackets[6].rate_bp`, `population.year`.
    #[arg(long, value_name = "PATH")]
    param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    values: Vec<String>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Args)]
#[group(id = "goal", required = true, multiple = false, args = ["target", "target_ratio"])]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    policies: PolicyArgs,
    /// Target monthly revenue in BGN.
    #[arg(long, value_name = "BGN")]
    target: Option<Money>,
    /// Target as a multiple of current revenue, e.g. `1.5`.
    #[arg(long, value_name = "RATIO")]
    target_ratio: Option<String>,
    /// Accepted revenue deviation in BGN.
    #[arg(long, value_name = "BGN", default_value = "1.00")]
    tolerance: Money,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Args)]
struct PopulationArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Print the population as CSV instead of a summary.
    #[arg(long)]
    export: bool,
}

#[derive(Debug, Args)]
struct PresetsArgs {
    /// Print this preset as a policy file.
    #[arg(long, value_name = "NAME")]
    show: Option<String>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Listen address; defaults to $TAXSIM_ADDR, then 127.0.0.1:8080.
    #[arg(long)]
    addr: Option<String>,
}

/// Presets and policy files in command-line order.
fn ordered_policies(matches: &ArgMatches, args: &PolicyArgs) -> Vec<PolicyRef> {
    let indices = |id: &str| matches.indices_of(id).map(|i| i.collect::<Vec<_>>()).unwrap_or_default();
    let mut refs: Vec<(usize, PolicyRef)> = indices("presets")
        .into_iter()
        .zip(&args.presets)
        .map(|(i, name)| (i, PolicyRef::Preset(name.clone())))
        .chain(
            indices("policy_files")
                .into_iter()
                .zip(&args.policy_files)
                .map(|(i, path)| (i, PolicyRef::File(path.clone()))),
        )
        .collect();
    refs.sort_by_key(|(i, _)| *i);
    refs.into_iter().map(|(_, r)| r).collect()
}

fn resolve_all(refs: &[PolicyRef]) -> AppResult<Vec<Policy>> {
    refs.iter().map(PolicyRef::resolve).collect()
}

fn single(refs: &[PolicyRef], command: &str) -> AppResult<Policy> {
    match refs {
        [one] => one.resolve(),
        _ => Err(AppError::Usage(format!("{command} takes exactly one policy"))),
    }
}

fn write_file(path: &Path, text: &str) -> AppResult<()> {
    fs::write(path, text).map_err(|source| AppError::File { path: path.to_path_buf(), source })
}

fn simulate(args: &SimulateArgs, refs: &[PolicyRef]) -> AppResult<String> {
    let policies = resolve_all(refs)?;
    let population = args.source.source()?.load()?;
    let reports = policies.iter().map(|p| evaluate(&population, p)).collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &args.lorenz_csv {
        let pre: Vec<Money> = population.households.iter().map(Household::income).collect();
        let mut curves = Vec::new();
        if let Ok(points) = lorenz_points(&pre) {
            curves.push(("pre_tax".to_string(), points));
        }
        for policy in &policies {
            let taxes = taxsim_core::metrics::household_taxes(&population, policy)?;
            let post: Vec<Money> = pre.iter().zip(&taxes).map(|(&i, &t)| i - t).collect();
            if let Ok(points) = lorenz_points(&post) {
                curves.push((policy.name.clone(), points));
            }
        }
        write_file(path, &render::lorenz_csv(&curves))?;
    }
    Ok(render::reports(&reports, args.format))
}

fn compare(args: &CompareArgs, refs: &[PolicyRef]) -> AppResult<String> {
    let policies = resolve_all(refs)?;
    let population = args.source.source()?.load()?;
    let comparison = lab::compare(&population, &policies)?;
    if let Some(path) = &args.deltas_csv {
        let mut text = String::from("baseline,policy,household_id,tax_a_bgn,tax_b_bgn,delta_bgn\n");
        for other in &policies[1..] {
            for d in winners_losers(&population, &policies[0], other)?.households {
                text += &format!(
                    "{},{},{},{},{},{}\n",
                    policies[0].name, other.name, d.household_id, d.tax_a, d.tax_b, d.delta
                );
            }
        }
        write_file(path, &text)?;
    }
    Ok(render::comparison(&comparison, args.format))
}

fn sweep(args: &SweepArgs, refs: &[PolicyRef]) -> AppResult<String> {
    let policy = single(refs, "sweep")?;
    let population = args.source.source()?.load()?;
    let values: Vec<String> = args.values.iter().filter(|v| !v.trim().is_empty()).cloned().collect();
    let points = lab::sweep(&population, &policy, &args.param, &values)?;
    Ok(render::sweep(&args.param, &points, args.format))
}

fn parse_ratio(text: &str) -> AppResult<Exact> {
    let bad = || AppError::Usage(format!("--target-ratio: invalid ratio {text:?}"));
    let (whole, frac) = text.trim().split_once('.').unwrap_or((text.trim(), ""));
    if whole.is_empty() || frac.len() > 12 || !(whole.bytes().chain(frac.bytes())).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: i128 = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    Ok(Exact::new(digits, 10i128.pow(frac.len() as u32)))
}

fn solve(args: &SolveArgs, refs: &[PolicyRef]) -> AppResult<String> {
    let policy = single(refs, "solve")?;
    let population = args.source.source()?.load()?;
    let target = match (&args.target, &args.target_ratio) {
        (Some(target), _) => *target,
        (None, Some(ratio)) => Money::round_half_up(revenue(&population, &policy)?.exact() * parse_ratio(ratio)?),
        (None, None) => return Err(AppError::Usage("--target or --target-ratio is required".into())),
    };
    let report = crate::api::solve_report(&population, &policy, target, args.tolerance)?;
    Ok(render::solve(&report, args.format))
}

fn population(args: &PopulationArgs) -> AppResult<String> {
    let population = args.source.source()?.load()?;
    if args.export {
        let mut buf = Vec::new();
        export_population(&population, &mut buf)?;
        return Ok(String::from_utf8(buf).expect("csv export is utf-8"));
    }
    Ok(render::json_line(&population.summary()))
}

fn list_presets(args: &PresetsArgs) -> AppResult<String> {
    match &args.show {
        Some(name) => Ok(crate::inputs::preset(name)?.to_toml()?),
        None => Ok(presets::all()
            .iter()
            .map(|p| format!("{:<22}{}\n", p.name, p.description.as_deref().unwrap_or("")))
            .collect()),
    }
}

fn serve(args: &ServeArgs) -> AppResult<String> {
    let addr = args.addr.clone().or_else(|| std::env::var(ADDR_ENV).ok()).unwrap_or_else(|| DEFAULT_ADDR.to_string());
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(crate::api::serve(&addr)).map_err(|e| AppError::Usage(format!("serve on {addr}: {e}")))?;
    Ok(String::new())
}

fn dispatch(matches: &ArgMatches, cli: &Cli) -> AppResult<String> {
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand is required");
    match &cli.command {
        Command::Simulate(a) => simulate(a, &ordered_policies(sub, &a.policies)),
        Command::Compare(a) => compare(a, &ordered_policies(sub, &a.policies)),
        Command::Sweep(a) => sweep(a, &ordered_policies(sub, &a.policies)),
        Command::Solve(a) => solve(a, &ordered_policies(sub, &a.policies)),
        Command::Population(a) => population(a),
        Command::Presets(a) => list_presets(a),
        Command::Serve(a) => serve(a),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = Cli::command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m).map(|cli| (m, cli)));
    let (matches, cli) = match parsed {
        Ok(ok) => ok,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                1
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    let result = dispatch(&matches, &cli).and_then(|out| {
        stdout.write_all(out.as_bytes())?;
        stdout.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("1.5").unwrap(), Exact::new(3, 2));
        assert_eq!(parse_ratio("2").unwrap(), Exact::from_integer(2));
        assert!(parse_ratio("-1").is_err());
        assert!(parse_ratio("1.").is_ok());
        assert!(parse_ratio("x").is_err());
    }
}
