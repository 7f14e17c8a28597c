//! CSV ingestion and export of subject-level cohort data.
//!
//! Expected file shape: UTF-8, comma-separated, mandatory header row.
//! Required columns are the treatment indicator, the primary outcome
//! indicator, and either a single negative-control count column or a
//! family of per-type columns (summed at ingestion). Any additional
//! columns named by the covariate schema are parsed according to their
//! declared kind. Missing covariate values are a hard error; no
//! imputation is performed.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CoreError;
use crate::types::{CovariateKind, CovariateValue, Dataset, SubjectRecord};

/// Where the negative-control count comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Y2Source {
    /// A single column holding the total count.
    Column(String),
    /// Sum every column whose name starts with this prefix
    /// (per-type indicator or count columns).
    TypePrefix(String),
}

/// Maps the dataset's standard fields onto CSV column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub t: String,
    pub y1: String,
    pub y2: Y2Source,
    /// Column holding the subject identifier; row numbers are used when absent.
    pub id: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            t: "t".to_string(),
            y1: "y1".to_string(),
            y2: Y2Source::Column("y2".to_string()),
            id: Some("id".to_string()),
        }
    }
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize, CoreError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CoreError::MissingColumn(name.to_string()))
}

fn parse_binary(field: &str, row: usize, column: &str) -> Result<u8, CoreError> {
    match field.trim().parse::<u8>() {
        Ok(v @ (0 | 1)) => Ok(v),
        _ => {
            // Distinguish a numeric-but-invalid value from unparseable text.
            if field.trim().parse::<f64>().is_ok() {
                Err(CoreError::InvariantViolation {
                    row,
                    reason: format!("column `{column}` must be 0 or 1, got `{field}`"),
                })
            } else {
                Err(CoreError::ParseError {
                    row,
                    column: column.to_string(),
                    message: format!("`{field}` is not a number"),
                })
            }
        }
    }
}

fn parse_count(field: &str, row: usize, column: &str) -> Result<u32, CoreError> {
    match field.trim().parse::<u32>() {
        Ok(v) => Ok(v),
        Err(_) => {
            if field.trim().parse::<f64>().is_ok() {
                Err(CoreError::InvariantViolation {
                    row,
                    reason: format!(
                        "column `{column}` must be a nonnegative integer, got `{field}`"
                    ),
                })
            } else {
                Err(CoreError::ParseError {
                    row,
                    column: column.to_string(),
                    message: format!("`{field}` is not a number"),
                })
            }
        }
    }
}

/// Reads and validates a cohort CSV file. Row order is preserved;
/// data rows are numbered from 1 in error messages.
pub fn load_csv(
    path: &Path,
    schema: &BTreeMap<String, CovariateKind>,
    map: &ColumnMap,
) -> Result<Dataset, CoreError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();

    let t_idx = find_column(&headers, &map.t)?;
    let y1_idx = find_column(&headers, &map.y1)?;
    let y2_cols: Vec<(usize, String)> = match &map.y2 {
        Y2Source::Column(name) => vec![(find_column(&headers, name)?, name.clone())],
        Y2Source::TypePrefix(prefix) => {
            let cols: Vec<(usize, String)> = headers
                .iter()
                .enumerate()
                .filter(|(_, h)| h.starts_with(prefix.as_str()))
                .map(|(i, h)| (i, h.to_string()))
                .collect();
            if cols.is_empty() {
                return Err(CoreError::MissingColumn(format!("{prefix}*")));
            }
            cols
        }
    };
    let id_idx = match &map.id {
        Some(name) => Some(find_column(&headers, name)?),
        None => None,
    };
    let mut cov_idx: Vec<(String, CovariateKind, usize)> = Vec::new();
    for (name, kind) in schema {
        cov_idx.push((name.clone(), *kind, find_column(&headers, name)?));
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let field = |idx: usize| row.get(idx).unwrap_or("");

        let t = parse_binary(field(t_idx), row_no, &map.t)?;
        let y1 = parse_binary(field(y1_idx), row_no, &map.y1)?;
        let mut y2: u32 = 0;
        for (idx, name) in &y2_cols {
            y2 += parse_count(field(*idx), row_no, name)?;
        }
        let id = match id_idx {
            Some(idx) => field(idx).to_string(),
            None => row_no.to_string(),
        };

        let mut covariates = BTreeMap::new();
        for (name, kind, idx) in &cov_idx {
            let raw = field(*idx).trim();
            if raw.is_empty() {
                return Err(CoreError::ParseError {
                    row: row_no,
                    column: name.clone(),
                    message: "missing covariate value".to_string(),
                });
            }
            let value = match kind {
                CovariateKind::Numeric => {
                    let v: f64 = raw.parse().map_err(|_| CoreError::ParseError {
                        row: row_no,
                        column: name.clone(),
                        message: format!("`{raw}` is not a number"),
                    })?;
                    CovariateValue::Numeric(v)
                }
                CovariateKind::Categorical => CovariateValue::Categorical(raw.to_string()),
            };
            covariates.insert(name.clone(), value);
        }

        records.push(SubjectRecord {
            id,
            t,
            y1,
            y2,
            covariates,
        });
    }

    Dataset::new(records, schema.clone())
}

/// Writes a dataset back to CSV with columns `id,t,y1,y2` followed by the
/// covariates in schema order. Numeric covariates are printed with Rust's
/// shortest round-trip formatting, so `load_csv(write_csv(d)) == d`.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<(), CoreError> {
    let mut writer = csv::Writer::from_path(path)?;
    let cov_names: Vec<&String> = dataset.schema().keys().collect();

    let mut header = vec![
        "id".to_string(),
        "t".to_string(),
        "y1".to_string(),
        "y2".to_string(),
    ];
    header.extend(cov_names.iter().map(|s| s.to_string()));
    writer.write_record(&header)?;

    for rec in dataset.records() {
        let mut row = vec![
            rec.id.clone(),
            rec.t.to_string(),
            rec.y1.to_string(),
            rec.y2.to_string(),
        ];
        for name in &cov_names {
            let v = match rec.covariate(name).expect("schema-validated") {
                CovariateValue::Categorical(s) => s.clone(),
                CovariateValue::Numeric(v) => format!("{v}"),
            };
            row.push(v);
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn no_id_map() -> ColumnMap {
        ColumnMap {
            id: None,
            ..ColumnMap::default()
        }
    }

    #[test]
    fn wellformed_three_rows_load() {
        let f = write_tmp("t,y1,y2\n0,0,0\n1,1,2\n0,1,1\n");
        let ds = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.records()[1].y2, 2);
        assert_eq!(ds.records()[2].id, "3");
    }

    #[test]
    fn negative_y2_is_invariant_violation() {
        let f = write_tmp("t,y1,y2\n0,0,-1\n");
        let err = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::InvariantViolation { row: 1, .. }));
    }

    #[test]
    fn fractional_y2_is_invariant_violation() {
        let f = write_tmp("t,y1,y2\n0,0,1.5\n");
        let err = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::InvariantViolation { row: 1, .. }));
    }

    #[test]
    fn nonbinary_y1_is_invariant_violation() {
        let f = write_tmp("t,y1,y2\n0,2,0\n");
        let err = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::InvariantViolation { row: 1, .. }));
    }

    #[test]
    fn junk_treatment_is_parse_error() {
        let f = write_tmp("t,y1,y2\nmaybe,0,0\n");
        let err = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::ParseError { row: 1, .. }));
    }

    #[test]
    fn missing_required_column() {
        let f = write_tmp("t,y1\n0,0\n");
        let err = load_csv(f.path(), &BTreeMap::new(), &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::MissingColumn(c) if c == "y2"));
    }

    #[test]
    fn per_type_columns_are_summed() {
        let f = write_tmp("t,y1,y2_type_a,y2_type_b\n0,0,1,2\n1,1,0,0\n");
        let map = ColumnMap {
            y2: Y2Source::TypePrefix("y2_type_".to_string()),
            id: None,
            ..ColumnMap::default()
        };
        let ds = load_csv(f.path(), &BTreeMap::new(), &map).unwrap();
        assert_eq!(ds.records()[0].y2, 3);
        assert_eq!(ds.records()[1].y2, 0);
    }

    #[test]
    fn missing_covariate_value_is_hard_error() {
        let f = write_tmp("t,y1,y2,age\n0,0,0,\n");
        let mut schema = BTreeMap::new();
        schema.insert("age".to_string(), CovariateKind::Numeric);
        let err = load_csv(f.path(), &schema, &no_id_map()).unwrap_err();
        assert!(matches!(err, CoreError::ParseError { row: 1, .. }));
    }

    #[test]
    fn covariates_parse_by_schema_kind() {
        let f = write_tmp("t,y1,y2,age,site\n0,1,2,18.5,b\n");
        let mut schema = BTreeMap::new();
        schema.insert("age".to_string(), CovariateKind::Numeric);
        schema.insert("site".to_string(), CovariateKind::Categorical);
        let ds = load_csv(f.path(), &schema, &no_id_map()).unwrap();
        let rec = &ds.records()[0];
        assert_eq!(rec.covariate("age").unwrap().as_numeric(), Some(18.5));
        assert_eq!(rec.covariate("site").unwrap().as_categorical(), Some("b"));
    }
}
