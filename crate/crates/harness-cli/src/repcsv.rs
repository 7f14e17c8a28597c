//! Replication-level CSV output and input.
//!
//! Header contract (one row per successful `(replication, method)` pair):
//! `scenario,n,rep,seed,method,beta1_hat,std_err,ci_lo,ci_hi,covered,corr_y1_y2,true_beta1`

use std::path::Path;
use std::str::FromStr;

use nco_core::Method;

use crate::error::HarnessError;
use crate::study::RepRecord;

pub const REP_CSV_HEADER: [&str; 12] = [
    "scenario",
    "n",
    "rep",
    "seed",
    "method",
    "beta1_hat",
    "std_err",
    "ci_lo",
    "ci_hi",
    "covered",
    "corr_y1_y2",
    "true_beta1",
];

pub fn write_rep_csv(records: &[RepRecord], path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(REP_CSV_HEADER)?;
    for r in records {
        writer.write_record(&[
            r.scenario.clone(),
            r.n.to_string(),
            r.rep_index.to_string(),
            r.seed.to_string(),
            r.method.to_string(),
            format!("{}", r.beta1_hat),
            format!("{}", r.std_err),
            format!("{}", r.ci_lo),
            format!("{}", r.ci_hi),
            r.covered.to_string(),
            format!("{}", r.corr_y1_y2),
            format!("{}", r.true_beta1),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, HarnessError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| HarnessError::MalformedInput(format!("missing column `{name}`")))
}

pub fn read_rep_csv(path: &Path) -> Result<Vec<RepRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let idx: Vec<usize> = REP_CSV_HEADER
        .iter()
        .map(|name| column(&headers, name))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(idx[i]).unwrap_or("").to_string();
        let parse_f64 = |i: usize| -> Result<f64, HarnessError> {
            field(i).parse().map_err(|_| {
                HarnessError::MalformedInput(format!(
                    "row {}: `{}` is not a number",
                    row_no + 1,
                    field(i)
                ))
            })
        };
        let method = Method::from_str(&field(4)).map_err(HarnessError::MalformedInput)?;
        out.push(RepRecord {
            scenario: field(0),
            n: field(1).parse().map_err(|_| {
                HarnessError::MalformedInput(format!("row {}: bad n", row_no + 1))
            })?,
            rep_index: field(2).parse().map_err(|_| {
                HarnessError::MalformedInput(format!("row {}: bad rep", row_no + 1))
            })?,
            seed: field(3).parse().map_err(|_| {
                HarnessError::MalformedInput(format!("row {}: bad seed", row_no + 1))
            })?,
            method,
            beta1_hat: parse_f64(5)?,
            std_err: parse_f64(6)?,
            ci_lo: parse_f64(7)?,
            ci_hi: parse_f64(8)?,
            covered: if field(9) == "1" { 1 } else { 0 },
            corr_y1_y2: parse_f64(10)?,
            true_beta1: parse_f64(11)?,
        });
    }
    Ok(out)
}
