use std::collections::BTreeMap;

use crate::error::CoreError;

/// Kind of a covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateKind {
    Categorical,
    Numeric,
}

/// A single covariate value.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateValue {
    Categorical(String),
    Numeric(f64),
}

impl CovariateValue {
    pub fn kind(&self) -> CovariateKind {
        match self {
            CovariateValue::Categorical(_) => CovariateKind::Categorical,
            CovariateValue::Numeric(_) => CovariateKind::Numeric,
        }
    }

    /// Numeric payload, if this is a numeric value.
    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            CovariateValue::Numeric(v) => Some(*v),
            CovariateValue::Categorical(_) => None,
        }
    }

    /// Categorical label, if this is a categorical value.
    pub fn as_categorical(&self) -> Option<&str> {
        match self {
            CovariateValue::Categorical(s) => Some(s),
            CovariateValue::Numeric(_) => None,
        }
    }
}

/// One subject: treatment indicator, primary outcome indicator,
/// negative-control event count, and named covariates.
///
/// `t` and `y1` are binary; `y2` is the total number of negative-control
/// events (e.g. infections by non-targeted virus strains). Covariate names
/// are unique by construction of the map.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub t: u8,
    pub y1: u8,
    pub y2: u32,
    pub covariates: BTreeMap<String, CovariateValue>,
}

impl SubjectRecord {
    pub fn covariate(&self, name: &str) -> Option<&CovariateValue> {
        self.covariates.get(name)
    }
}

/// An ordered, validated collection of subject records with a covariate
/// schema. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SubjectRecord>,
    schema: BTreeMap<String, CovariateKind>,
}

impl Dataset {
    /// Validates every record against the schema: binary `t` and `y1`,
    /// covariate names and kinds matching exactly.
    pub fn new(
        records: Vec<SubjectRecord>,
        schema: BTreeMap<String, CovariateKind>,
    ) -> Result<Self, CoreError> {
        if records.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        for (row, rec) in records.iter().enumerate() {
            let row = row + 1;
            if rec.t > 1 {
                return Err(CoreError::InvariantViolation {
                    row,
                    reason: format!("treatment indicator must be 0 or 1, got {}", rec.t),
                });
            }
            if rec.y1 > 1 {
                return Err(CoreError::InvariantViolation {
                    row,
                    reason: format!("primary outcome must be 0 or 1, got {}", rec.y1),
                });
            }
            if rec.covariates.len() != schema.len() {
                return Err(CoreError::SchemaMismatch {
                    id: rec.id.clone(),
                    reason: format!(
                        "expected {} covariates, found {}",
                        schema.len(),
                        rec.covariates.len()
                    ),
                });
            }
            for (name, kind) in &schema {
                match rec.covariates.get(name) {
                    None => {
                        return Err(CoreError::SchemaMismatch {
                            id: rec.id.clone(),
                            reason: format!("missing covariate `{name}`"),
                        })
                    }
                    Some(v) if v.kind() != *kind => {
                        return Err(CoreError::SchemaMismatch {
                            id: rec.id.clone(),
                            reason: format!("covariate `{name}` has the wrong kind"),
                        })
                    }
                    Some(CovariateValue::Numeric(v)) if !v.is_finite() => {
                        return Err(CoreError::InvariantViolation {
                            row,
                            reason: format!("covariate `{name}` is not finite"),
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(Dataset { records, schema })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[SubjectRecord] {
        &self.records
    }

    pub fn schema(&self) -> &BTreeMap<String, CovariateKind> {
        &self.schema
    }

    pub fn covariate_kind(&self, name: &str) -> Option<CovariateKind> {
        self.schema.get(name).copied()
    }

    /// Number of treated subjects.
    pub fn n_treated(&self) -> usize {
        self.records.iter().filter(|r| r.t == 1).count()
    }

    /// True when both arms are nonempty, the precondition for every
    /// two-arm estimation operation.
    pub fn both_arms_nonempty(&self) -> bool {
        let n1 = self.n_treated();
        n1 >= 1 && self.n() - n1 >= 1
    }
}
