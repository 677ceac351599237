//! Aggregates over trials: means, standard errors, Wilson intervals and the
//! τ₁/τ₂ ratio. All reals are rounded to 12 significant digits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{GeoError, Result};

use super::run::{TrialResult, TrialStatus};

/// Formats with 12 significant digits, `%.12g` style.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding, so 9.9999999999999 becomes 1e1
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

/// Success count with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub n: usize,
    pub fraction: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Wilson score interval at the given two-sided level. `n ≥ 1`.
pub fn wilson(successes: usize, n: usize, level: f64) -> Proportion {
    assert!(n > 0 && successes <= n, "wilson needs 0 <= successes <= n, n >= 1");
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // clamp so that rounding never pushes the estimate outside
    Proportion {
        successes,
        n,
        fraction: round12(p),
        lower: round12((center - half).max(0.0).min(p)),
        upper: round12((center + half).min(1.0).max(p)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub r: f64,
    pub metric: String,
    pub k: usize,
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    /// A single observation: the standard error is reported as 0.
    pub degenerate: bool,
    /// Present for 0/1 metrics.
    pub success: Option<Proportion>,
}

/// mean τ₁,ₖ / mean τ₂,ₖ over successful trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub r: f64,
    pub k: usize,
    pub mean_tau1: f64,
    pub mean_tau2: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub trials: usize,
    pub failed: usize,
    pub failure_rate: f64,
    pub metrics: Vec<MetricSummary>,
    pub ratios: Vec<RatioSummary>,
}

impl SummaryStats {
    pub fn metric(&self, r: f64, metric: &str, k: usize, label: &str) -> Option<&MetricSummary> {
        self.metrics
            .iter()
            .find(|m| m.r == r && m.metric == metric && m.k == k && m.label == label)
    }
}

#[derive(Default)]
struct Acc {
    values: Vec<f64>,
    flag: bool,
}

/// Summarises successful trials; failed ones only count towards the
/// failure rate. Groups appear in order of first occurrence.
pub fn summarize(results: &[TrialResult]) -> Result<SummaryStats> {
    let ok: Vec<&TrialResult> = results.iter().filter(|t| t.status == TrialStatus::Ok).collect();
    if ok.is_empty() {
        let reason = results.iter().find_map(|t| match &t.status {
            TrialStatus::Failed { reason } => Some(reason.as_str()),
            TrialStatus::Ok => None,
        });
        return Err(GeoError::regime(
            "NO_SUCCESSFUL_TRIALS",
            format!(
                "none of {} trials succeeded; first failure: {}",
                results.len(),
                reason.unwrap_or("none")
            ),
        ));
    }
    let mut order: Vec<(u64, String, usize, String)> = Vec::new();
    let mut groups: HashMap<(u64, String, usize, String), Acc> = HashMap::new();
    for t in &ok {
        for o in &t.outcomes {
            let key = (t.r.to_bits(), o.metric.clone(), o.k, o.label.clone());
            let acc = groups.entry(key.clone()).or_insert_with(|| {
                order.push(key);
                Acc::default()
            });
            acc.values.push(o.value);
            acc.flag |= o.flag;
        }
    }
    let metrics = order
        .into_iter()
        .map(|key| {
            let acc = &groups[&key];
            let (mean, stderr) = mean_stderr(&acc.values);
            let n = acc.values.len();
            let success = acc.flag.then(|| {
                let s = acc.values.iter().filter(|&&v| v == 1.0).count();
                wilson(s, n, 0.95)
            });
            MetricSummary {
                r: f64::from_bits(key.0),
                metric: key.1,
                k: key.2,
                label: key.3,
                n,
                mean: round12(mean),
                stderr: round12(stderr),
                degenerate: n == 1,
                success,
            }
        })
        .collect::<Vec<_>>();

    let mut ratios = Vec::new();
    for m in metrics.iter().filter(|m| m.metric == "tau1") {
        if let Some(m2) = metrics.iter().find(|x| x.metric == "tau2" && x.r == m.r && x.k == m.k) {
            ratios.push(RatioSummary {
                r: m.r,
                k: m.k,
                mean_tau1: m.mean,
                mean_tau2: m2.mean,
                ratio: round12(m.mean / m2.mean),
            });
        }
    }
    let failed = results.len() - ok.len();
    Ok(SummaryStats {
        trials: results.len(),
        failed,
        failure_rate: round12(failed as f64 / results.len() as f64),
        metrics,
        ratios,
    })
}

/// Sample mean and standard error of the mean; the error is 0 for n = 1.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
