//! One-shot analysis of a cohort CSV: infer the covariate schema, run a
//! single method, and render the result as a table and as JSON.
//!
//! Schema inference: `t`, `y1`, `y2` (or `y2_*` per-type columns) are
//! outcome columns, `id` identifies subjects when present, and every other
//! column becomes a covariate — numeric when all its values parse as
//! numbers, categorical otherwise.

use std::collections::BTreeMap;
use std::path::Path;

use nco_core::{
    load_csv, ColumnMap, CovariateKind, Dataset, EstimateResult, Method, StratumSpec, Y2Source,
};
use nco_estimators::{RegressionSpec, Term, Transform};

use crate::error::HarnessError;
use crate::methods::{run_method, AnalysisOptions};

const RESERVED: [&str; 4] = ["t", "y1", "y2", "id"];

/// Infers the covariate schema of a cohort CSV.
pub fn infer_schema(path: &Path) -> Result<(BTreeMap<String, CovariateKind>, ColumnMap), HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();

    let mut has_id = false;
    let mut y2_prefix = false;
    let mut candidates: Vec<(usize, String)> = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        if name == "id" {
            has_id = true;
        } else if name == "y2_type_" || name.starts_with("y2_type_") {
            y2_prefix = true;
        } else if !RESERVED.contains(&name) {
            candidates.push((i, name.to_string()));
        }
    }

    let mut numeric: Vec<bool> = vec![true; candidates.len()];
    for row in reader.records() {
        let row = row?;
        for (slot, (idx, _)) in candidates.iter().enumerate() {
            let field = row.get(*idx).unwrap_or("").trim();
            if !field.is_empty() && field.parse::<f64>().is_err() {
                numeric[slot] = false;
            }
        }
    }

    let mut schema = BTreeMap::new();
    for ((_, name), is_num) in candidates.into_iter().zip(numeric) {
        schema.insert(
            name,
            if is_num {
                CovariateKind::Numeric
            } else {
                CovariateKind::Categorical
            },
        );
    }
    let map = ColumnMap {
        t: "t".to_string(),
        y1: "y1".to_string(),
        y2: if y2_prefix {
            Y2Source::TypePrefix("y2_type_".to_string())
        } else {
            Y2Source::Column("y2".to_string())
        },
        id: has_id.then(|| "id".to_string()),
    };
    Ok((schema, map))
}

pub fn load_cohort(path: &Path) -> Result<Dataset, HarnessError> {
    let (schema, map) = infer_schema(path)?;
    Ok(load_csv(path, &schema, &map)?)
}

/// Parses a term list like `age+age^2+site`, inferring the transform from
/// the schema kind (`name^2` squares a numeric covariate).
pub fn parse_terms(text: &str, data: &Dataset) -> Result<Vec<Term>, HarnessError> {
    let mut terms = Vec::new();
    for raw in text.split('+').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, squared) = match raw.strip_suffix("^2") {
            Some(base) => (base.trim(), true),
            None => (raw, false),
        };
        let kind = data.covariate_kind(name).ok_or_else(|| {
            HarnessError::InvalidArguments(format!("regression term `{name}` is not a covariate"))
        })?;
        let transform = match (kind, squared) {
            (CovariateKind::Numeric, false) => Transform::Linear,
            (CovariateKind::Numeric, true) => Transform::Square,
            (CovariateKind::Categorical, false) => Transform::CategoricalIndicators,
            (CovariateKind::Categorical, true) => {
                return Err(HarnessError::InvalidArguments(format!(
                    "`{raw}`: cannot square the categorical covariate `{name}`"
                )))
            }
        };
        terms.push(Term {
            covariate: name.to_string(),
            transform,
        });
    }
    Ok(terms)
}

/// Parses `primary=age+age^2+site,secondary=age+site`.
pub fn parse_regression(text: &str, data: &Dataset) -> Result<RegressionSpec, HarnessError> {
    let mut spec = RegressionSpec::default();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            HarnessError::InvalidArguments(format!(
                "`{part}`: expected `primary=...` or `secondary=...`"
            ))
        })?;
        let terms = parse_terms(value, data)?;
        match key.trim() {
            "primary" => spec.primary_terms = terms,
            "secondary" => spec.secondary_terms = terms,
            other => {
                return Err(HarnessError::InvalidArguments(format!(
                    "unknown regression block `{other}`"
                )))
            }
        }
    }
    Ok(spec)
}

/// Parses repeated `name=a,b,c` cut lists into a stratum spec.
pub fn build_strata(
    keys: &[String],
    cuts: &[String],
    data: &Dataset,
) -> Result<StratumSpec, HarnessError> {
    let mut spec = StratumSpec::new(keys.to_vec());
    for entry in cuts {
        let (name, list) = entry.split_once('=').ok_or_else(|| {
            HarnessError::InvalidArguments(format!("`{entry}`: expected `name=c1,c2,...`"))
        })?;
        let mut values = Vec::new();
        for v in list.split(',') {
            values.push(v.trim().parse::<f64>().map_err(|_| {
                HarnessError::InvalidArguments(format!("cut `{v}` is not a number"))
            })?);
        }
        spec.numeric_cuts.insert(name.trim().to_string(), values);
    }
    spec.validate(data)?;
    Ok(spec)
}

/// Runs one method over a loaded cohort.
pub fn analyze(
    data: &Dataset,
    method: Method,
    options: &AnalysisOptions,
) -> Result<EstimateResult, HarnessError> {
    Ok(run_method(data, method, options)?)
}

/// Human-readable report table.
pub fn render_report(result: &EstimateResult, n: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!("method        {}\n", result.method));
    out.push_str(&format!("subjects      {n}\n"));
    out.push_str(&format!("log RR        {:+.6}\n", result.beta1_hat));
    out.push_str(&format!("std error     {:.6}\n", result.std_err));
    out.push_str(&format!(
        "{:.0}% CI        [{:+.6}, {:+.6}]\n",
        result.ci_level * 100.0,
        result.ci.0,
        result.ci.1
    ));
    out.push_str(&format!(
        "VE            {:.4} (CI [{:.4}, {:.4}])\n",
        result.ve,
        1.0 - result.ci.1.exp(),
        1.0 - result.ci.0.exp()
    ));
    if let Some((b1, b2)) = result.components {
        out.push_str(&format!(
            "components    beta1* {b1:+.6}  beta2* {b2:+.6}\n"
        ));
    }
    if !result.diagnostics.excluded_strata.is_empty() {
        out.push_str(&format!(
            "excluded      {}\n",
            result.diagnostics.excluded_strata.join("; ")
        ));
    }
    for w in &result.diagnostics.warnings {
        out.push_str(&format!("warning       {w}\n"));
    }
    out
}

/// Machine-readable report.
pub fn report_json(result: &EstimateResult, n: usize) -> serde_json::Value {
    serde_json::json!({
        "method": result.method.to_string(),
        "n": n,
        "beta1_hat": result.beta1_hat,
        "std_err": result.std_err,
        "ci_level": result.ci_level,
        "ci_lo": result.ci.0,
        "ci_hi": result.ci.1,
        "ve": result.ve,
        "components": result.components.map(|(b1, b2)| serde_json::json!({
            "beta1_star": b1,
            "beta2_star": b2,
        })),
        "diagnostics": {
            "solver_iterations": result.diagnostics.solver_iterations,
            "excluded_strata": result.diagnostics.excluded_strata,
            "warnings": result.diagnostics.warnings,
        },
    })
}
