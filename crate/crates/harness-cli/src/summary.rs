//! Study-summary rendering: a fixed-key TOML document (documented in the
//! README) and a human-readable table.

use crate::study::StudySummary;

/// Serializes a summary as TOML with one `[[method]]` block per method.
pub fn summary_toml(summary: &StudySummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario = {:?}\n", summary.scenario));
    out.push_str(&format!("n = {}\n", summary.n));
    out.push_str(&format!("reps = {}\n", summary.reps));
    out.push_str(&format!("seed = {}\n", summary.seed));
    out.push_str(&format!("true_beta1 = {}\n", summary.true_beta1));
    out.push_str(&format!(
        "mean_corr_y1_y2 = {}\n",
        summary.mean_corr_y1_y2
    ));
    for w in &summary.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    for m in &summary.methods {
        out.push('\n');
        out.push_str("[[method]]\n");
        out.push_str(&format!("name = {:?}\n", m.method.to_string()));
        out.push_str(&format!("successes = {}\n", m.successes));
        out.push_str(&format!("failures = {}\n", m.failures));
        out.push_str(&format!("mean_bias = {}\n", m.mean_bias));
        out.push_str(&format!("empirical_variance = {}\n", m.empirical_variance));
        if let Some(ratio) = m.variance_ratio_vs_unaug {
            out.push_str(&format!("variance_ratio_vs_unaug = {ratio}\n"));
        }
        out.push_str(&format!("coverage = {}\n", m.coverage));
        out.push_str(&format!("mean_std_err = {}\n", m.mean_std_err));
    }
    out
}

/// Fixed-width console table.
pub fn summary_table(summary: &StudySummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario {}  n {}  reps {}  seed {}\n",
        summary.scenario, summary.n, summary.reps, summary.seed
    ));
    out.push_str(&format!(
        "true beta1 {:+.5}  mean corr(y1,y2) {:.3}\n\n",
        summary.true_beta1, summary.mean_corr_y1_y2
    ));
    out.push_str(&format!(
        "{:<10} {:>5} {:>5} {:>10} {:>10} {:>9} {:>9} {:>10}\n",
        "method", "ok", "fail", "bias", "emp var", "vr", "coverage", "mean SE"
    ));
    for m in &summary.methods {
        let ratio = m
            .variance_ratio_vs_unaug
            .map(|r| format!("{r:.3}"))
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{:<10} {:>5} {:>5} {:>+10.5} {:>10.6} {:>9} {:>9.4} {:>10.5}\n",
            m.method.to_string(),
            m.successes,
            m.failures,
            m.mean_bias,
            m.empirical_variance,
            ratio,
            m.coverage,
            m.mean_std_err
        ));
    }
    for w in &summary.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}
