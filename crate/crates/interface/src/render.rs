//! Output formats for reports: aligned text tables, CSV rows and JSON lines.
//!
//! JSON lines carry exactly the API's response bodies, one per line.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use taxsim_core::lab::{Comparison, PairwiseDelta, ScaleSolution, SweepPoint};
use taxsim_core::metrics::{Fraction, MetricsReport, TopShare};
use taxsim_core::{Exact, Money};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

fn opt(value: Option<Fraction>) -> String {
    value.map_or_else(|| "-".to_string(), |f| f.to_string())
}

fn csv_opt(value: Option<Fraction>) -> String {
    value.map_or_else(String::new, |f| f.to_string())
}

pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("report types serialize");
    line.push('\n');
    line
}

fn percent_label(p: Fraction) -> String {
    let pct = p.0 * Exact::from_integer(100);
    if pct.is_integer() {
        format!("top {}%", pct.to_integer())
    } else {
        format!("top {}%", taxsim_core::money::format_fraction(pct, 2))
    }
}

fn share(shares: &[TopShare], index: usize, post: bool) -> Option<Fraction> {
    shares.get(index).and_then(|s| if post { s.post } else { s.pre })
}

pub fn report_table(r: &MetricsReport) -> String {
    let mut out = String::new();
    let mut row = |label: &str, value: String| {
        let _ = writeln!(out, "{label:<20}{value}");
    };
    row("policy", r.policy.clone());
    row("period", r.period.to_string());
    row("households", r.households.to_string());
    row("gross income", format!("{} BGN", r.gross_income));
    row("assessed tax", format!("{} BGN", r.assessed_tax));
    row("collection rate", r.collection_rate.to_string());
    row("revenue", format!("{} BGN", r.total_revenue));
    row("gini pre-tax", opt(r.gini_pre));
    row("gini post-tax", opt(r.gini_post));
    row("redistribution", opt(r.redistribution));
    for s in &r.top_shares {
        row(&format!("{} share", percent_label(s.p)), format!("{} pre, {} post", opt(s.pre), opt(s.post)));
    }
    if !r.deciles.is_empty() {
        let _ = writeln!(out);
        let _ =
            writeln!(out, "{:>6} {:>10} {:>16} {:>14} {:>10}", "decile", "households", "income BGN", "tax BGN", "rate");
        for d in &r.deciles {
            let _ = writeln!(
                out,
                "{:>6} {:>10} {:>16} {:>14} {:>10}",
                d.decile,
                d.households,
                d.income,
                d.tax,
                opt(d.effective_rate)
            );
        }
    }
    out
}

const REPORT_COLUMNS: [&str; 14] = [
    "policy",
    "period",
    "households",
    "gross_income_bgn",
    "assessed_tax_bgn",
    "collection_rate_bp",
    "total_revenue_bgn",
    "gini_pre",
    "gini_post",
    "redistribution",
    "top1_pre",
    "top1_post",
    "top10_pre",
    "top10_post",
];

fn report_header() -> Vec<String> {
    let mut header: Vec<String> = REPORT_COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend((1..=10).map(|k| format!("decile{k}_rate")));
    header
}

fn report_fields(r: &MetricsReport) -> Vec<String> {
    let mut fields = vec![
        r.policy.clone(),
        r.period.to_string(),
        r.households.to_string(),
        r.gross_income.to_string(),
        r.assessed_tax.to_string(),
        r.collection_rate.bp().to_string(),
        r.total_revenue.to_string(),
        csv_opt(r.gini_pre),
        csv_opt(r.gini_post),
        csv_opt(r.redistribution),
        csv_opt(share(&r.top_shares, 0, false)),
        csv_opt(share(&r.top_shares, 0, true)),
        csv_opt(share(&r.top_shares, 1, false)),
        csv_opt(share(&r.top_shares, 1, true)),
    ];
    fields.extend((0..10).map(|k| csv_opt(r.deciles.get(k).and_then(|d| d.effective_rate))));
    fields
}

fn write_csv(rows: Vec<Vec<String>>) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 fields")
}

pub fn reports(reports: &[MetricsReport], format: Format) -> String {
    match format {
        Format::Jsonl => reports.iter().map(json_line).collect(),
        Format::Csv => {
            let mut rows = vec![report_header()];
            rows.extend(reports.iter().map(report_fields));
            write_csv(rows)
        }
        Format::Table => reports.iter().map(report_table).collect::<Vec<_>>().join("\n"),
    }
}

fn pairwise_line(p: &PairwiseDelta) -> String {
    format!(
        "{} vs {}: {} winners, {} losers, {} unchanged, net change {} BGN\n",
        p.policy, p.baseline, p.summary.winners, p.summary.losers, p.summary.unchanged, p.summary.net_delta
    )
}

pub fn comparison(c: &Comparison, format: Format) -> String {
    match format {
        Format::Jsonl => json_line(c),
        Format::Csv => {
            let mut header = report_header();
            header.extend(["winners", "losers", "unchanged", "net_delta_bgn"].map(String::from));
            let mut rows = vec![header];
            for (i, r) in c.reports.iter().enumerate() {
                let mut fields = report_fields(r);
                match i.checked_sub(1).and_then(|j| c.pairwise.get(j)) {
                    Some(p) => fields.extend([
                        p.summary.winners.to_string(),
                        p.summary.losers.to_string(),
                        p.summary.unchanged.to_string(),
                        p.summary.net_delta.to_string(),
                    ]),
                    None => fields.extend(std::iter::repeat_n(String::new(), 4)),
                }
                rows.push(fields);
            }
            write_csv(rows)
        }
        Format::Table => {
            let mut out = reports(&c.reports, Format::Table);
            if !c.pairwise.is_empty() {
                out.push('\n');
                out.extend(c.pairwise.iter().map(pairwise_line));
            }
            out
        }
    }
}

pub fn sweep(parameter: &str, points: &[SweepPoint], format: Format) -> String {
    match format {
        Format::Jsonl => points.iter().map(json_line).collect(),
        Format::Csv => {
            let mut header = vec![parameter.to_string()];
            header.extend(report_header());
            let mut rows = vec![header];
            for p in points {
                let mut fields = vec![p.value.clone()];
                fields.extend(report_fields(&p.report));
                rows.push(fields);
            }
            write_csv(rows)
        }
        Format::Table => {
            let mut out = format!(
                "{:<16} {:>16} {:>10} {:>10} {:>14}\n",
                parameter.rsplit('.').next().unwrap_or(parameter),
                "revenue BGN",
                "gini post",
                "redistrib",
                "households"
            );
            for p in points {
                let _ = writeln!(
                    out,
                    "{:<16} {:>16} {:>10} {:>10} {:>14}",
                    p.value,
                    p.report.total_revenue,
                    opt(p.report.gini_post),
                    opt(p.report.redistribution),
                    p.report.households
                );
            }
            out
        }
    }
}

/// Solver result as rendered by the CLI and returned by the API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub policy: String,
    #[serde(rename = "current_revenue_bgn")]
    pub current_revenue: Money,
    #[serde(rename = "target_bgn")]
    pub target: Money,
    #[serde(rename = "tolerance_bgn")]
    pub tolerance: Money,
    #[serde(flatten)]
    pub solution: ScaleSolution,
}

pub fn solve(r: &SolveReport, format: Format) -> String {
    match format {
        Format::Jsonl => json_line(r),
        Format::Csv => write_csv(vec![
            ["policy", "current_revenue_bgn", "target_bgn", "tolerance_bgn", "scale", "revenue_bgn", "iterations"]
                .map(String::from)
                .to_vec(),
            vec![
                r.policy.clone(),
                r.current_revenue.to_string(),
                r.target.to_string(),
                r.tolerance.to_string(),
                r.solution.scale.to_string(),
                r.solution.revenue.to_string(),
                r.solution.iterations.to_string(),
            ],
        ]),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "{:<20}{}", "policy", r.policy);
            let _ = writeln!(out, "{:<20}{} BGN", "current revenue", r.current_revenue);
            let _ = writeln!(out, "{:<20}{} BGN (± {})", "target", r.target, r.tolerance);
            let _ = writeln!(out, "{:<20}{}", "rate scale", r.solution.scale);
            let _ = writeln!(out, "{:<20}{} BGN", "revenue", r.solution.revenue);
            let _ = writeln!(out, "{:<20}{}", "iterations", r.solution.iterations);
            out
        }
    }
}

/// Full Lorenz polyline as `policy,population_share,income_share` rows.
pub fn lorenz_csv(curves: &[(String, Vec<(Exact, Exact)>)]) -> String {
    let mut rows = vec![["policy", "population_share", "income_share"].map(String::from).to_vec()];
    for (policy, points) in curves {
        for (x, y) in points {
            rows.push(vec![policy.clone(), Fraction(*x).to_string(), Fraction(*y).to_string()]);
        }
    }
    write_csv(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use taxsim_core::household::{Household, Member, Role};
    use taxsim_core::{evaluate, presets, Population};

    fn report() -> MetricsReport {
        let pop = Population::new(
            (1..=10)
                .map(|i| Household::new(i, vec![Member::new(i, Role::Adult, Money::from_bgn(460))]).unwrap())
                .collect(),
        )
        .unwrap();
        evaluate(&pop, &presets::flat_2008()).unwrap()
    }

    #[test]
    fn csv_has_one_header_and_one_row_per_report() {
        let r = report();
        let text = reports(&[r.clone(), r], Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("policy,period,households"));
        assert!(lines[1].starts_with("flat_2008,monthly,10,4600.00,460.00,10000,460.00,0.000000"));
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    }

    #[test]
    fn table_shows_decile_rates() {
        let text = report_table(&report());
        assert!(text.contains("revenue             460.00 BGN"));
        assert!(text.contains("0.100000"));
        assert!(text.contains("top 1% share"));
    }

    #[test]
    fn jsonl_is_one_object_per_line() {
        let text = reports(&[report(), report()], Format::Jsonl);
        assert_eq!(text.lines().count(), 2);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["total_revenue_bgn"], "460.00");
        }
    }
}
