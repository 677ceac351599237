//! Time scales of the processes as functions of (d, r, k, ε, c).

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::{expected_degree_count_real, GeoParams};

/// All time scales for one parameter set; values are real point counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeFormulas {
    /// (d/4θ) log(1/r)/r^d + (1−ε)((2k−1)/4θ) loglog(1/r)/r^d.
    pub t_min: f64,
    /// (d/4θ) log(1/r)/r^d + (k/θ) loglog(1/r)/r^d.
    pub t_max: f64,
    /// Warm-up length of the online rule, 2c^d loglog(1/r)/r^d.
    pub t2: f64,
    /// d log(1/r)/(θ r^d) + (1−ε) k loglog(1/r)/(θ r^d).
    pub l_minus: f64,
    /// d log(1/r)/(θ r^d) + (1+ε) k loglog(1/r)/(θ r^d).
    pub l_plus: f64,
    /// Root on the decreasing tail of E[Z_{k−1,t}] = loglog(1/r).
    pub t_star: f64,
    /// Online speed constant (2c^d + 2)/θ.
    pub online_constant: f64,
}

impl TimeFormulas {
    /// t_min with its ε replaced.
    pub fn t_min_at(params: &GeoParams, k: usize, eps: f64) -> Result<f64> {
        let (lg, llg, th, rd) = scales(params)?;
        let d = params.d as f64;
        Ok(d / (4.0 * th) * lg / rd + (1.0 - eps) * (2.0 * k as f64 - 1.0) / (4.0 * th) * llg / rd)
    }

    /// L±_ε for a signed ε (negative gives L−).
    pub fn l_at(params: &GeoParams, k: usize, signed_eps: f64) -> Result<f64> {
        let (lg, llg, th, rd) = scales(params)?;
        let d = params.d as f64;
        Ok(d * lg / (th * rd) + (1.0 + signed_eps) * k as f64 * llg / (th * rd))
    }

    /// Always-first checkpoint below the connectivity threshold:
    /// `mean_tau` − (1/θ + 1/2) loglog(1/r)/r^d, in offered points.
    pub fn subcritical_offered(params: &GeoParams, mean_tau: f64) -> Result<f64> {
        let (_, llg, th, rd) = scales(params)?;
        Ok(mean_tau - (1.0 / th + 0.5) * llg / rd)
    }
}

fn scales(params: &GeoParams) -> Result<(f64, f64, f64, f64)> {
    let llg = params.loglog_inv_r()?;
    Ok((params.log_inv_r(), llg, params.theta_d, params.r.powi(params.d as i32)))
}

/// Evaluates every time scale. `k ≥ 1`, `eps ≥ 0`, `c > 0`.
pub fn time_formulas(params: &GeoParams, k: usize, eps: f64, c: f64) -> Result<TimeFormulas> {
    if k == 0 {
        return Err(GeoError::Usage("k must be at least 1".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(GeoError::Usage(format!("invalid eps = {eps} or c = {c}")));
    }
    let (lg, llg, th, rd) = scales(params).map_err(|_| {
        GeoError::Domain(format!(
            "log log(1/r) must be positive; use r < 1/e (got r = {})",
            params.r
        ))
    })?;
    let d = params.d as f64;
    let kf = k as f64;
    Ok(TimeFormulas {
        t_min: TimeFormulas::t_min_at(params, k, eps)?,
        t_max: d / (4.0 * th) * lg / rd + kf / th * llg / rd,
        t2: 2.0 * c.powi(params.d as i32) * llg / rd,
        l_minus: TimeFormulas::l_at(params, k, -eps)?,
        l_plus: TimeFormulas::l_at(params, k, eps)?,
        t_star: t_star(params, k)?,
        online_constant: (2.0 * c.powi(params.d as i32) + 2.0) / th,
    })
}

/// Solves E[Z_{k−1,t}] = loglog(1/r) for t past the maximum of the curve.
fn t_star(params: &GeoParams, k: usize) -> Result<f64> {
    let target = params.loglog_inv_r()?;
    let p = params.ball_volume();
    let kappa = (k - 1) as u64;
    let f = |t: f64| expected_degree_count_real(t, kappa, p);
    // the curve peaks near k/p and decreases after it
    let mut lo = (k as f64 / p).max(kappa as f64 + 1.0);
    if f(lo)? <= target {
        return Err(GeoError::Domain(format!(
            "expected degree-{kappa} count never exceeds loglog(1/r) = {target}; r too large"
        )));
    }
    let mut hi = 2.0 * lo;
    while f(hi)? > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
