//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits non-zero if
//! any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxsim_core::lab::MAX_SOLVER_ITERATIONS;
use taxsim_core::population::ACCEPTANCE_SEED;
use taxsim_core::relief::{apply_reliefs, ReliefClaims, ReliefRules};
use taxsim_core::schedule::Bracket;
use taxsim_core::{
    evaluate, gini, household_breakdown, household_tax, lorenz_points, presets, revenue, revenue_neutral_scale,
    synthesize, top_share, Exact, Household, Member, Mode, Money, Period, Rate, Role, Schedule, SynthesisParams,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn eq<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    ensure(got == want, || format!("{what}: got {got:?}, want {want:?}"))
}

fn bgn(v: i64) -> Money {
    Money::from_bgn(v)
}

fn household(adults: &[i64], children: usize) -> Household {
    let mut members: Vec<Member> =
        adults.iter().enumerate().map(|(i, &inc)| Member::new(i as u64 + 1, Role::Adult, bgn(inc))).collect();
    for c in 0..children {
        members.push(Member::new((adults.len() + c) as u64 + 1, Role::Child, Money::ZERO));
    }
    Household::new(1, members).expect("valid household")
}

fn flat_tax_example() -> Check {
    let h = household(&[460], 0);
    let policy = presets::flat_2008();
    let started = Instant::now();
    let tax = household_tax(&h, &policy).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    eq("tax", tax, Money::from_stotinki(4_600))?;
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("460.00 -> {tax} BGN in {elapsed:?}"))
}

fn nit_example() -> Check {
    let policy = presets::nit_2016();
    let low = household(&[600, 600], 3);
    let tax = household_tax(&low, &policy).map_err(|e| e.to_string())?;
    eq("tax at 1,200", tax, bgn(-300))?;
    let high = household(&[4_000, 4_000], 3);
    let breakdown = household_breakdown(&high, &policy).map_err(|e| e.to_string())?;
    let nit = breakdown.nit.ok_or("no NIT breakdown")?;
    eq("taxable excess at 8,000", nit.taxable_excess, bgn(6_500))?;
    Ok(format!("1,200 -> {tax}; 8,000 -> excess {}", nit.taxable_excess))
}

fn relief_goldens() -> Check {
    let rules = ReliefRules::bulgaria_2016();
    let base = bgn(12_000);
    let two = ReliefClaims { children: 2, ..Default::default() };
    let out = apply_reliefs(base, &two, &rules).map_err(|e| e.to_string())?;
    eq("taxable with two children", out.taxable_base, bgn(11_600))?;

    let reduced = ReliefClaims { reduced_capacity_pct: 50, ..Default::default() };
    let out = apply_reliefs(base, &reduced, &rules).map_err(|e| e.to_string())?;
    eq("reduced capacity deduction", out.deductions.reduced_capacity, bgn(7_920))?;
    eq("reduced capacity total", out.deductions.total(), bgn(7_920))?;

    let generous = ReliefClaims { donations: bgn(5_000), ..Default::default() };
    let out = apply_reliefs(base, &generous, &rules).map_err(|e| e.to_string())?;
    eq("donation deduction", out.deductions.donations, bgn(600))?;
    let modest = ReliefClaims { donations: bgn(250), ..Default::default() };
    let out = apply_reliefs(base, &modest, &rules).map_err(|e| e.to_string())?;
    eq("donation below cap", out.deductions.donations, bgn(250))?;
    Ok("11,600 / 7,920 / donations capped at 600.00 of 12,000".into())
}

/// Hand-computed bracket slices for 1,500 BGN under the marginal scale.
fn marginal_fixture() -> Result<Money, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/proposed_marginal_1500.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut total = Money::ZERO;
    let mut covered = Money::ZERO;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| fields[i].parse::<Money>().map_err(|e| e.to_string());
        covered += parse(3)?;
        total += parse(4)?;
    }
    eq("fixture slices", covered, bgn(1_500))?;
    Ok(total)
}

fn scale_goldens() -> Check {
    let member = household_tax(&household(&[250], 0), &presets::proposed_progressive()).map_err(|e| e.to_string())?;
    eq("member at 250", member, Money::ZERO)?;
    let slab = presets::proposed_scale(Mode::Slab).compute_tax(bgn(500)).map_err(|e| e.to_string())?;
    eq("slab at 500", slab, bgn(50))?;
    let marginal = presets::proposed_scale(Mode::Marginal).compute_tax(bgn(1_500)).map_err(|e| e.to_string())?;
    let expected = marginal_fixture()?;
    eq("fixture total", expected, bgn(130))?;
    eq("marginal at 1,500", marginal, expected)?;
    Ok(format!("250 -> {member}; slab 500 -> {slab}; marginal 1,500 -> {marginal}"))
}

fn random_incomes(rng: &mut ChaCha8Rng) -> Vec<Money> {
    let n = 1 + (rng.next_u64() % 60) as usize;
    // small ranges produce ties
    let range = [10, 1_000, 5_000_000][(rng.next_u64() % 3) as usize];
    let mut incomes: Vec<Money> = (0..n).map(|_| Money::from_stotinki((rng.next_u64() % range) as i64)).collect();
    if incomes.iter().all(|m| *m == Money::ZERO) {
        incomes[0] = Money::from_stotinki(1);
    }
    incomes
}

fn pairwise_gini(x: &[Money]) -> Exact {
    let n = x.len() as i128;
    let total: i128 = x.iter().map(|m| m.stotinki() as i128).sum();
    let diff: i128 =
        x.iter().flat_map(|a| x.iter().map(move |b| (a.stotinki() as i128 - b.stotinki() as i128).abs())).sum();
    Exact::new(diff, 2 * n * total)
}

fn metric_properties() -> Check {
    const CASES: usize = 1_000;
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED);
    let started = Instant::now();
    for case in 0..CASES {
        let fail = |what: &str| format!("case {case}: {what}");
        let x = random_incomes(&mut rng);
        let g = gini(&x).map_err(|e| fail(&e.to_string()))?;
        ensure(g == pairwise_gini(&x), || fail("gini differs from pairwise definition"))?;

        let k = 2 + (rng.next_u64() % 1_000) as i64;
        let scaled: Vec<Money> = x.iter().map(|m| m.times(k)).collect();
        ensure(gini(&scaled).unwrap() == g, || fail("gini not scale invariant"))?;

        let m = 2 + (rng.next_u64() % 4) as usize;
        let replicated: Vec<Money> = x.iter().copied().cycle().take(x.len() * m).collect();
        ensure(gini(&replicated).unwrap() == g, || fail("gini not replication invariant"))?;

        let points = lorenz_points(&x).unwrap();
        let twice_area: Exact =
            points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).fold(Exact::from_integer(0), |a, b| a + b);
        ensure(Exact::from_integer(1) - twice_area == g, || fail("gini differs from Lorenz area"))?;

        let zero = Exact::from_integer(0);
        let one = Exact::from_integer(1);
        ensure(points[0] == (zero, zero) && points[points.len() - 1] == (one, one), || fail("Lorenz endpoints"))?;
        let slopes: Vec<Exact> = points.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        ensure(slopes.windows(2).all(|s| s[0] <= s[1]), || fail("Lorenz curve not convex"))?;
        ensure(points.iter().all(|(p, l)| l <= p), || fail("Lorenz curve above the diagonal"))?;

        let a = 1 + (rng.next_u64() % 1_000) as i128;
        let b = 1 + (rng.next_u64() % 1_000) as i128;
        let (p1, p2) = (Exact::new(a.min(b), 1_000), Exact::new(a.max(b), 1_000));
        let (s1, s2) = (top_share(&x, p1).unwrap(), top_share(&x, p2).unwrap());
        ensure(s1 <= s2, || fail("top share not monotone in p"))?;
        ensure(s1 >= zero && s2 <= one, || fail("top share outside [0, 1]"))?;
        ensure(top_share(&x, one).unwrap() == one, || fail("top share at p = 1"))?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{CASES} cases, 0 failures, {elapsed:?}"))
}

fn random_schedule(rng: &mut ChaCha8Rng) -> Schedule {
    let extra = (rng.next_u64() % 6) as usize;
    let mut lowers: Vec<i64> = (0..extra).map(|_| 1 + (rng.next_u64() % 12_000) as i64).collect();
    lowers.push(0);
    lowers.sort_unstable();
    lowers.dedup();
    Schedule {
        period: Period::Monthly,
        mode: Mode::Marginal,
        brackets: lowers
            .into_iter()
            .map(|l| Bracket::new(Money::from_stotinki(l), Rate::from_bp((rng.next_u64() % 10_001) as u32)))
            .collect(),
    }
}

fn schedule_oracle() -> Check {
    const SCHEDULES: usize = 200;
    const MAX_BASE: i64 = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED + 1);
    let mut checked = 0usize;
    for case in 0..SCHEDULES {
        let schedule = random_schedule(&mut rng);
        let lowers: Vec<i64> = schedule.brackets.iter().map(|b| b.lower.stotinki()).collect();
        let rates: Vec<i128> = schedule.brackets.iter().map(|b| b.rate.bp() as i128).collect();
        // basis points accumulated one stotinka at a time
        let mut cumulative = Vec::with_capacity(MAX_BASE as usize + 1);
        let mut bp_total = 0i128;
        cumulative.push(0i128);
        for k in 0..MAX_BASE {
            let i = lowers.iter().rposition(|&l| l <= k).expect("first bracket starts at zero");
            bp_total += rates[i];
            cumulative.push(bp_total);
        }
        let mut bases: Vec<i64> = (0..40).map(|_| (rng.next_u64() % (MAX_BASE as u64 + 1)) as i64).collect();
        bases.extend(lowers.iter().flat_map(|&l| [l - 1, l, l + 1]).filter(|b| (0..=MAX_BASE).contains(b)));
        bases.push(MAX_BASE);
        for base in bases {
            let tax = schedule.compute_tax(Money::from_stotinki(base)).map_err(|e| e.to_string())?;
            let oracle = Money::round_half_up(Exact::new(cumulative[base as usize], 10_000));
            ensure((tax - oracle).abs() <= Money::from_stotinki(1), || {
                format!("schedule {case} {:?}: base {base} tax {tax} oracle {oracle}", schedule.brackets)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{SCHEDULES} schedules, {checked} bases up to 100.00 BGN, all within 1 stotinka"))
}

fn solver_linearity() -> Check {
    let pop = synthesize(&SynthesisParams::acceptance()).map_err(|e| e.to_string())?;
    let policy = presets::flat_2008();
    let current = revenue(&pop, &policy).map_err(|e| e.to_string())?;
    let target = Money::round_half_up(current.exact() * Exact::new(3, 2));
    let started = Instant::now();
    let solution = revenue_neutral_scale(&policy, &pop, target, bgn(1)).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let error = (solution.scale.as_f64() - 1.5).abs();
    ensure(error <= 1e-6, || format!("scale {} is {error:e} from 1.5", solution.scale))?;
    ensure(solution.iterations <= MAX_SOLVER_ITERATIONS, || format!("{} iterations", solution.iterations))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "seed {ACCEPTANCE_SEED}, {} households: scale {} ({error:.1e} off) in {} iterations, {elapsed:?}",
        pop.len(),
        solution.scale,
        solution.iterations
    ))
}

fn directional_ordering() -> Check {
    let pop = synthesize(&SynthesisParams::acceptance()).map_err(|e| e.to_string())?;
    let scale = presets::proposed_scale(Mode::Slab);
    let earners: Vec<Money> = pop
        .households
        .iter()
        .flat_map(|h| &h.members)
        .filter(|m| m.role == Role::Adult)
        .map(|m| m.monthly_income)
        .collect();
    for (i, bracket) in scale.brackets.iter().enumerate() {
        let upper = scale.brackets.get(i + 1).map(|b| b.lower);
        let hits = earners.iter().filter(|&&m| m >= bracket.lower && upper.is_none_or(|u| m < u)).count();
        ensure(hits > 0, || format!("no earner in the bracket from {}", bracket.lower))?;
    }
    let flat = evaluate(&pop, &presets::flat_2008()).map_err(|e| e.to_string())?;
    let proposed = evaluate(&pop, &presets::proposed_progressive()).map_err(|e| e.to_string())?;
    let pre = flat.gini_pre.ok_or("pre-tax gini undefined")?;
    let flat_post = flat.gini_post.ok_or("flat gini undefined")?;
    let proposed_post = proposed.gini_post.ok_or("proposed gini undefined")?;
    ensure(proposed_post.0 < flat_post.0, || format!("proposed {proposed_post} >= flat {flat_post}"))?;
    ensure(flat_post.0 < pre.0, || format!("flat {flat_post} >= pre-tax {pre}"))?;
    Ok(format!("proposed {proposed_post} < flat {flat_post} < pre-tax {pre}"))
}

fn cli_determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_taxsim");
    let synth = format!("seed={ACCEPTANCE_SEED},n=10000");
    let args = [
        "simulate",
        "--synth",
        &synth,
        "--preset",
        "flat_2008",
        "--preset",
        "proposed_progressive",
        "--format",
        "jsonl",
    ];
    let run = || Command::new(exe).args(args).output().map_err(|e| e.to_string());
    let (first, second) = (run()?, run()?);
    ensure(first.status.success(), || String::from_utf8_lossy(&first.stderr).into_owned())?;
    ensure(!first.stdout.is_empty(), || "no output".into())?;
    ensure(first.stdout == second.stdout, || "outputs differ".into())?;
    Ok(format!("{} identical bytes over two runs", first.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("flat tax on 460 BGN", flat_tax_example),
        ("negative income tax family", nit_example),
        ("relief goldens", relief_goldens),
        ("proposed scale goldens", scale_goldens),
        ("metric property suite", metric_properties),
        ("marginal schedule vs per-stotinka oracle", schedule_oracle),
        ("revenue-neutral solver linearity", solver_linearity),
        ("inequality ordering", directional_ordering),
        ("CLI determinism", cli_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] {name}: {reason}");
            }
        }
    }
    let _ = panic::take_hook();
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
