use nco_core::{Dataset, SubjectRecord};
use rayon::prelude::*;

/// A vector-valued per-subject estimating function with analytic Jacobian.
///
/// Both `score` and `jacobian` must be deterministic functions of
/// `(record, theta)`. The Jacobian is `d score / d theta`, written
/// row-major into a `p*p` buffer, and must match finite differences of the
/// score (a test obligation for every shipped system).
pub trait EstimatingSystem: Sync {
    /// Parameter count `p`.
    fn dim_theta(&self) -> usize;

    /// Per-subject score contribution, written into `out` (length `p`).
    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]);

    /// Row-major `p x p` Jacobian of the score, written into `out`.
    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]);

    /// Whether `theta` keeps this record inside the admissible region
    /// (e.g. implied event probabilities in (0,1) for log-link binary
    /// scores). The solver halves steps that leave the region.
    fn admissible(&self, _record: &SubjectRecord, _theta: &[f64]) -> bool {
        true
    }
}

/// Sum of per-record scores, accumulated serially in record order.
pub fn total_score(system: &dyn EstimatingSystem, data: &Dataset, theta: &[f64]) -> Vec<f64> {
    let p = system.dim_theta();
    let mut total = vec![0.0; p];
    let mut buf = vec![0.0; p];
    for rec in data.records() {
        system.score(rec, theta, &mut buf);
        for (t, b) in total.iter_mut().zip(&buf) {
            *t += b;
        }
    }
    total
}

/// Parallel score accumulation. Agrees with [`total_score`] up to
/// floating-point reassociation; the solver itself stays serial so results
/// are bitwise reproducible.
pub fn par_total_score(
    system: &dyn EstimatingSystem,
    data: &Dataset,
    theta: &[f64],
) -> Vec<f64> {
    let p = system.dim_theta();
    data.records()
        .par_iter()
        .fold(
            || vec![0.0; p],
            |mut acc, rec| {
                let mut buf = vec![0.0; p];
                system.score(rec, theta, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b;
                }
                acc
            },
        )
        .reduce(
            || vec![0.0; p],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        )
}

/// Central finite-difference Jacobian of a system's score at `theta`,
/// row-major. Intended for tests validating analytic Jacobians.
pub fn fd_jacobian(
    system: &dyn EstimatingSystem,
    record: &SubjectRecord,
    theta: &[f64],
) -> Vec<f64> {
    let p = system.dim_theta();
    let mut out = vec![0.0; p * p];
    let mut plus = vec![0.0; p];
    let mut minus = vec![0.0; p];
    let mut shifted = theta.to_vec();
    for j in 0..p {
        let h = 1e-6 * theta[j].abs().max(1.0);
        shifted[j] = theta[j] + h;
        system.score(record, &shifted, &mut plus);
        shifted[j] = theta[j] - h;
        system.score(record, &shifted, &mut minus);
        shifted[j] = theta[j];
        for i in 0..p {
            out[i * p + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    out
}

/// Several systems over disjoint parameter blocks, stacked into one.
///
/// The stacked score is the concatenation of the block scores and the
/// stacked Jacobian is block-diagonal, but the sandwich meat of the stack
/// is generally *not* block-diagonal, which is the whole point: it carries
/// the covariance between block estimates.
pub struct StackedSystem<'a> {
    parts: Vec<&'a dyn EstimatingSystem>,
    offsets: Vec<usize>,
    dim: usize,
}

impl<'a> StackedSystem<'a> {
    pub fn new(parts: Vec<&'a dyn EstimatingSystem>) -> Self {
        let mut offsets = Vec::with_capacity(parts.len());
        let mut dim = 0;
        for part in &parts {
            offsets.push(dim);
            dim += part.dim_theta();
        }
        StackedSystem {
            parts,
            offsets,
            dim,
        }
    }

    /// Parameter offset of block `i` within the stacked vector.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }
}

impl EstimatingSystem for StackedSystem<'_> {
    fn dim_theta(&self) -> usize {
        self.dim
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        for (part, &off) in self.parts.iter().zip(&self.offsets) {
            let p = part.dim_theta();
            part.score(record, &theta[off..off + p], &mut out[off..off + p]);
        }
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut buf = Vec::new();
        for (part, &off) in self.parts.iter().zip(&self.offsets) {
            let p = part.dim_theta();
            buf.resize(p * p, 0.0);
            part.jacobian(record, &theta[off..off + p], &mut buf);
            for i in 0..p {
                for j in 0..p {
                    out[(off + i) * self.dim + (off + j)] = buf[i * p + j];
                }
            }
        }
    }

    fn admissible(&self, record: &SubjectRecord, theta: &[f64]) -> bool {
        self.parts.iter().zip(&self.offsets).all(|(part, &off)| {
            let p = part.dim_theta();
            part.admissible(record, &theta[off..off + p])
        })
    }
}
