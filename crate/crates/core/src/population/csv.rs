use std::io::{Read, Write};

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use super::Population;
use crate::error::{Error, Result};
use crate::household::{Household, Member, Role};
use crate::money::Money;
use crate::relief::ReliefClaims;

/// Column order of the population CSV. Relief claim amounts are annual BGN.
pub const CSV_HEADER: [&str; 14] = [
    "person_id",
    "household_id",
    "role",
    "monthly_income_bgn",
    "children",
    "disabled_children",
    "reduced_capacity_pct",
    "pension_paid",
    "insurance_paid",
    "service_purchase_paid",
    "donations",
    "mortgage_interest",
    "mortgage_principal",
    "young_family",
];

struct Row {
    household_id: u64,
    member: Member,
}

fn parse_row(record: &StringRecord, line: u64) -> Result<Row> {
    let err = |message: String| Error::Parse { line, message };
    if record.len() != CSV_HEADER.len() {
        return Err(err(format!("expected {} fields, found {}", CSV_HEADER.len(), record.len())));
    }
    let field = |i: usize| record.get(i).unwrap_or_default().trim();
    let int = |i: usize| -> Result<u64> {
        field(i)
            .parse::<u64>()
            .map_err(|_| err(format!("{}: expected a non-negative integer, found {:?}", CSV_HEADER[i], field(i))))
    };
    let money = |i: usize| -> Result<Money> {
        let value: Money = field(i).parse().map_err(|e: Error| err(format!("{}: {e}", CSV_HEADER[i])))?;
        if value.is_negative() {
            return Err(err(format!("{}: negative amount {value}", CSV_HEADER[i])));
        }
        Ok(value)
    };
    let small = |i: usize| -> Result<u32> {
        u32::try_from(int(i)?).map_err(|_| err(format!("{}: value too large", CSV_HEADER[i])))
    };

    let role = match field(2) {
        "adult" => Role::Adult,
        "child" => Role::Child,
        other => return Err(err(format!("role: expected adult or child, found {other:?}"))),
    };
    let reduced_capacity_pct = int(6)?;
    if reduced_capacity_pct > 100 {
        return Err(err(format!("reduced_capacity_pct: {reduced_capacity_pct} exceeds 100")));
    }
    let young_family_eligible = match field(13) {
        "true" => true,
        "false" => false,
        other => return Err(err(format!("young_family: expected true or false, found {other:?}"))),
    };
    let claims = ReliefClaims {
        children: small(4)?,
        disabled_children: small(5)?,
        reduced_capacity_pct: reduced_capacity_pct as u8,
        voluntary_pension_paid: money(7)?,
        insurance_paid: money(8)?,
        service_purchase_paid: money(9)?,
        donations: money(10)?,
        mortgage_interest_paid: money(11)?,
        mortgage_principal: money(12)?,
        young_family_eligible,
    };
    Ok(Row { household_id: int(1)?, member: Member { id: int(0)?, role, monthly_income: money(3)?, claims } })
}

/// Reads a population CSV. Households appear in order of first occurrence
/// and members keep their row order.
pub fn load_population<R: Read>(source: R) -> Result<Population> {
    let mut reader = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(source);
    let mut records = reader.records();

    match records.next() {
        None => return Ok(Population::default()),
        Some(header) => {
            let header = header.map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
            let found: Vec<&str> = header.iter().map(str::trim).collect();
            if found != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header; expected {}", CSV_HEADER.join(",")),
                });
            }
        }
    }

    let mut households: Vec<Household> = Vec::new();
    let mut index: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for record in records {
        let record =
            record.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = parse_row(&record, line)?;
        let slot = *index.entry(row.household_id).or_insert_with(|| {
            households.push(Household { id: row.household_id, members: Vec::new() });
            households.len() - 1
        });
        households[slot].members.push(row.member);
    }
    Population::new(households)
}

/// Writes a population in the CSV layout accepted by [`load_population`].
pub fn export_population<W: Write>(population: &Population, sink: W) -> Result<()> {
    let mut writer = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(sink);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(CSV_HEADER).map_err(csv_err)?;
    for h in &population.households {
        for m in &h.members {
            let c = &m.claims;
            writer
                .write_record([
                    m.id.to_string(),
                    h.id.to_string(),
                    m.role.as_str().to_string(),
                    m.monthly_income.to_string(),
                    c.children.to_string(),
                    c.disabled_children.to_string(),
                    c.reduced_capacity_pct.to_string(),
                    c.voluntary_pension_paid.to_string(),
                    c.insurance_paid.to_string(),
                    c.service_purchase_paid.to_string(),
                    c.donations.to_string(),
                    c.mortgage_interest_paid.to_string(),
                    c.mortgage_principal.to_string(),
                    c.young_family_eligible.to_string(),
                ])
                .map_err(csv_err)?;
        }
    }
    writer.flush()?;
    Ok(())
}
