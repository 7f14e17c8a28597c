//! Subject-level nonparametric bootstrap used for the standard errors of
//! the stratified ratio estimators, whose closed-form variances are not
//! implemented here.

use nco_core::derive_seed;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;

/// Replicate count and base seed for a bootstrap run. Replicate `b` draws
/// from an RNG seeded with `derive_seed(seed, b)`, so results do not depend
/// on worker count or evaluation order.
#[derive(Debug, Clone, Copy)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            replicates: 500,
            seed: 42,
        }
    }
}

/// Standard error of a statistic under subject resampling.
///
/// `estimate` maps a resampled index multiset to a statistic, returning
/// `None` for degenerate resamples (which are skipped and counted).
/// Returns `(standard error, skipped count)`, or `None` in the first slot
/// when fewer than two replicates were usable.
pub(crate) fn bootstrap_se<F>(
    n: usize,
    options: &BootstrapOptions,
    estimate: F,
) -> (Option<f64>, usize)
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    let replicates: Vec<Option<f64>> = (0..options.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = Pcg64::seed_from_u64(derive_seed(options.seed, b as u64));
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            estimate(&indices)
        })
        .collect();

    let values: Vec<f64> = replicates.iter().filter_map(|v| *v).collect();
    let skipped = options.replicates - values.len();
    if values.len() < 2 {
        return (None, skipped);
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (Some(var.sqrt()), skipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_is_deterministic_for_a_seed() {
        let data: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let mean_of = |idx: &[usize]| {
            Some(idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64)
        };
        let opts = BootstrapOptions {
            replicates: 200,
            seed: 9,
        };
        let (a, _) = bootstrap_se(data.len(), &opts, mean_of);
        let (b, _) = bootstrap_se(data.len(), &opts, mean_of);
        assert_eq!(a, b);
        // Bootstrap SE of a mean should approximate sd/sqrt(n).
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let sd = (data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let expected = sd / n.sqrt();
        let got = a.unwrap();
        assert!(
            (got - expected).abs() / expected < 0.25,
            "bootstrap SE {got} vs analytic {expected}"
        );
    }

    #[test]
    fn degenerate_replicates_are_counted() {
        let opts = BootstrapOptions {
            replicates: 50,
            seed: 1,
        };
        let (se, skipped) = bootstrap_se(10, &opts, |idx| {
            // Reject resamples that do not contain index 0.
            if idx.contains(&0) {
                Some(idx.len() as f64)
            } else {
                None
            }
        });
        assert!(skipped > 0);
        assert!(se.is_some());
    }
}
