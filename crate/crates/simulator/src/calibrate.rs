//! Intercept calibration: choose per-type intercepts so the enumerated
//! marginal incidences hit their targets, and optionally shift all
//! secondary intercepts uniformly to hit a target mean count. The marginal
//! is strictly increasing in the intercept, so bisection converges; the
//! upper bracket is the validity bound where some Bernoulli parameter
//! reaches one.

use std::collections::BTreeMap;

use crate::config::GeneratorConfig;
use crate::enumerate::{marginal_incidence, marginal_mean_y2};
use crate::error::SimulatorError;

/// Calibration targets: marginal incidence per primary-type label, and an
/// optional target for the expected negative-control count.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct CalibrationTargets {
    #[serde(default)]
    pub incidence: BTreeMap<String, f64>,
    #[serde(default)]
    pub mean_y2: Option<f64>,
}

const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;

fn bisect<F>(mut lo: f64, mut hi: f64, target: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    // Invariant: f(lo) < target <= f(hi), f increasing.
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target).abs() <= BISECT_TOL {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Returns a copy of the config with calibrated intercepts.
pub fn calibrate_intercepts(
    config: &GeneratorConfig,
    targets: &CalibrationTargets,
) -> Result<GeneratorConfig, SimulatorError> {
    config.validate()?;
    let mut out = config.clone();

    for (label, &target) in &targets.incidence {
        let idx = out
            .primary_types
            .iter()
            .position(|ty| &ty.label == label)
            .ok_or_else(|| {
                SimulatorError::InvalidConfig(format!(
                    "calibration target names unknown primary type `{label}`"
                ))
            })?;
        if !(target > 0.0 && target < 1.0) {
            return Err(SimulatorError::InvalidConfig(format!(
                "incidence target for `{label}` must be in (0,1)"
            )));
        }

        // Intercept cap where the largest Bernoulli parameter reaches 1.
        let current_max = out.max_bernoulli_param(&out.primary_types[idx]);
        let mu_cap = out.primary_types[idx].intercept - current_max.ln();

        let marginal_at = |mu: f64, cfg: &mut GeneratorConfig| {
            cfg.primary_types[idx].intercept = mu;
            marginal_incidence(cfg, &cfg.primary_types[idx])
        };
        let mut probe = out.clone();
        let max_achievable = marginal_at(mu_cap, &mut probe);
        if target > max_achievable + BISECT_TOL {
            return Err(SimulatorError::TargetUnreachable {
                label: label.clone(),
                target,
                max_achievable,
            });
        }
        let mu = bisect(mu_cap - 45.0, mu_cap, target, |mu| {
            marginal_at(mu, &mut probe)
        });
        out.primary_types[idx].intercept = mu;
    }

    if let Some(target) = targets.mean_y2 {
        if target <= 0.0 {
            return Err(SimulatorError::InvalidConfig(
                "mean_y2 target must be positive".to_string(),
            ));
        }
        // Largest uniform shift that keeps every secondary type valid.
        let shift_cap = out
            .secondary_types
            .iter()
            .map(|ty| -out.max_bernoulli_param(ty).ln())
            .fold(f64::INFINITY, f64::min);

        let mean_at = |shift: f64, cfg: &mut GeneratorConfig| {
            for (ty, base) in cfg.secondary_types.iter_mut().zip(&out.secondary_types) {
                ty.intercept = base.intercept + shift;
            }
            marginal_mean_y2(cfg)
        };
        let mut probe = out.clone();
        let max_achievable = mean_at(shift_cap, &mut probe);
        if target > max_achievable + BISECT_TOL {
            return Err(SimulatorError::TargetUnreachable {
                label: "mean_y2".to_string(),
                target,
                max_achievable,
            });
        }
        let shift = bisect(shift_cap - 45.0, shift_cap, target, |s| {
            mean_at(s, &mut probe)
        });
        for ty in &mut out.secondary_types {
            ty.intercept += shift;
        }
    }

    out.validate()?;
    Ok(out)
}
