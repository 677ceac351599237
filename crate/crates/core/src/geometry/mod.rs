//! Torus metric primitives, uniform sampling and the closed-form volumes
//! used by the time formulas.

mod quadrature;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{GeoError, Result};

pub use quadrature::integrate;

/// Relative tolerance of the cap integral in [`union_two_balls_volume`].
pub const UNION_VOLUME_REL_TOL: f64 = 1e-12;

/// A point of the unit torus, stored in canonical form with every
/// coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Box<[f64]>,
}

impl TorusPoint {
    /// Builds a point, reducing every coordinate mod 1.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeoError::Usage("torus point needs dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeoError::Usage("torus point coordinates must be finite".into()));
        }
        Ok(Self {
            coords: coords.iter().map(|&c| canonical(c)).collect(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Reduces a coordinate into `[0, 1)`.
#[inline]
pub fn canonical(x: f64) -> f64 {
    let y = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Dimension, radius and the cached unit-ball volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoParams {
    pub d: usize,
    pub r: f64,
    pub theta_d: f64,
}

impl GeoParams {
    /// Requires `d >= 1` and `0 < r < 1/4`.
    pub fn new(d: usize, r: f64) -> Result<Self> {
        if d == 0 {
            return Err(GeoError::Usage("dimension must be >= 1".into()));
        }
        if !(r > 0.0 && r < 0.25) {
            return Err(GeoError::Domain(format!("radius {r} must lie in (0, 1/4)")));
        }
        Ok(Self {
            d,
            r,
            theta_d: unit_ball_volume(d)?,
        })
    }

    /// Volume of a single radius-r ball, θ_d r^d.
    pub fn ball_volume(&self) -> f64 {
        self.theta_d * self.r.powi(self.d as i32)
    }

    /// log(1/r).
    pub fn log_inv_r(&self) -> f64 {
        (1.0 / self.r).ln()
    }

    /// log log(1/r); domain error unless positive.
    pub fn loglog_inv_r(&self) -> Result<f64> {
        let v = self.log_inv_r().ln();
        if v > 0.0 {
            Ok(v)
        } else {
            Err(GeoError::Domain(format!(
                "loglog(1/r) = {v} is not positive at r = {}; use a smaller r",
                self.r
            )))
        }
    }
}

/// Per-axis wraparound difference, in `[0, 1/2]`.
#[inline]
pub fn axis_delta(a: f64, b: f64) -> f64 {
    let t = (a - b).abs();
    t.min(1.0 - t)
}

/// Squared torus distance between two coordinate slices of equal length.
#[inline]
pub fn torus_dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let t = axis_delta(x, y);
            t * t
        })
        .sum()
}

/// Torus distance between two points of the same dimension.
pub fn torus_distance(a: &TorusPoint, b: &TorusPoint) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(GeoError::Usage(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(torus_dist_sq(a.coords(), b.coords()).sqrt())
}

/// Volume θ_d of the unit d-ball, via θ_d = 2π/d · θ_{d−2}.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(GeoError::Usage("dimension must be >= 1".into()));
    }
    Ok(ball_volume_recurrence(d))
}

fn ball_volume_recurrence(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * ball_volume_recurrence(d - 2),
    }
}

/// Volume of the union of two radius-r balls whose centers are `nu` apart.
///
/// θ_d r^d + θ_{d−1} r^d ∫_ι^{π−ι} sin^d u du with ι = arccos(ν/2r).
pub fn union_two_balls_volume(params: &GeoParams, nu: f64) -> Result<f64> {
    Ok(params.ball_volume() + union_excess_volume(params, nu)?)
}

/// The part of the union volume outside the first ball.
pub fn union_excess_volume(params: &GeoParams, nu: f64) -> Result<f64> {
    let r = params.r;
    if !(0.0..=2.0 * r).contains(&nu) {
        return Err(GeoError::Domain(format!("nu = {nu} outside [0, 2r] with r = {r}")));
    }
    if nu + 2.0 * r >= 0.5 {
        return Err(GeoError::Domain(format!(
            "nu + 2r = {} must stay below 1/2 for the union to embed in the torus",
            nu + 2.0 * r
        )));
    }
    if nu == 0.0 {
        return Ok(0.0);
    }
    let d = params.d as i32;
    let iota = (nu / (2.0 * r)).min(1.0).acos();
    let integral = integrate(
        |u: f64| u.sin().powi(d),
        iota,
        PI - iota,
        UNION_VOLUME_REL_TOL,
    );
    Ok(ball_volume_recurrence(params.d - 1) * r.powi(d) * integral)
}

/// Union area of two radius-r discs `nu` apart in the plane, from the
/// circular-lens formula. Independent of the quadrature in
/// [`union_two_balls_volume`].
pub fn union_two_discs_area(r: f64, nu: f64) -> Result<f64> {
    if !(r > 0.0) || !(0.0..=2.0 * r).contains(&nu) {
        return Err(GeoError::Domain(format!("need r > 0 and nu in [0, 2r], got r = {r}, nu = {nu}")));
    }
    let lens = 2.0 * r * r * (nu / (2.0 * r)).acos() - nu / 2.0 * (4.0 * r * r - nu * nu).sqrt();
    Ok(2.0 * PI * r * r - lens)
}

/// Monte Carlo estimate of [`union_two_balls_volume`] by rejection in the
/// bounding box. Returns the estimate and its standard error.
pub fn union_volume_monte_carlo<R: Rng + ?Sized>(
    params: &GeoParams,
    nu: f64,
    rng: &mut R,
    samples: usize,
) -> Result<(f64, f64)> {
    let (d, r) = (params.d, params.r);
    if !(0.0..=2.0 * r).contains(&nu) || samples == 0 {
        return Err(GeoError::Domain(format!("nu = {nu} outside [0, 2r] or no samples")));
    }
    let box_vol = (nu + 2.0 * r) * (2.0 * r).powi(d as i32 - 1);
    let r2 = r * r;
    let mut x = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        x[0] = rng.random_range(-r..nu + r);
        for c in &mut x[1..] {
            *c = rng.random_range(-r..r);
        }
        let tail: f64 = x[1..].iter().map(|c| c * c).sum();
        if x[0] * x[0] + tail <= r2 || (x[0] - nu).powi(2) + tail <= r2 {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    Ok((box_vol * f, box_vol * (f * (1.0 - f) / samples as f64).sqrt()))
}

/// Expected number of degree-κ vertices in G_n, n·C(n−1,κ)·p^κ(1−p)^{n−1−κ}
/// with p = θ_d r^d.
pub fn expected_degree_count(n: u64, kappa: u64, params: &GeoParams) -> Result<f64> {
    if n == 0 || kappa > n - 1 {
        return Err(GeoError::Domain(format!("kappa = {kappa} must lie in [0, n-1] for n = {n}")));
    }
    expected_degree_count_real(n as f64, kappa, params.ball_volume())
}

/// Real-argument extension of [`expected_degree_count`], used for root
/// finding in t. `p` is the edge probability θ_d r^d.
pub fn expected_degree_count_real(n: f64, kappa: u64, p: f64) -> Result<f64> {
    let k = kappa as f64;
    if !(n >= k + 1.0) {
        return Err(GeoError::Domain(format!("kappa = {kappa} must lie in [0, n-1] for n = {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(GeoError::Domain(format!("edge probability {p} must lie in (0, 1)")));
    }
    let m = n - 1.0;
    let ln_binom = ln_gamma(m + 1.0) - ln_gamma(k + 1.0) - ln_gamma(m - k + 1.0);
    let ln = n.ln() + ln_binom + k * p.ln() + (m - k) * (-p).ln_1p();
    Ok(ln.exp())
}

/// Independent stream for one trial, derived from the master seed.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Draws a point with i.i.d. Uniform[0,1) coordinates.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R, d: usize) -> TorusPoint {
    let mut coords = vec![0.0; d];
    fill_uniform(rng, &mut coords);
    TorusPoint {
        coords: coords.into_boxed_slice(),
    }
}

/// Fills `out` with i.i.d. Uniform[0,1) coordinates.
#[inline]
pub fn fill_uniform<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for c in out.iter_mut() {
        *c = rng.random::<f64>();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c).unwrap()
    }

    #[test]
    fn distance_wraps_around() {
        assert!((torus_distance(&pt(&[0.1]), &pt(&[0.9])).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(torus_distance(&pt(&[0.3, 0.4]), &pt(&[0.3, 0.4])).unwrap(), 0.0);
        let d = torus_distance(&pt(&[0.95, 0.5]), &pt(&[0.05, 0.5])).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn distance_dimension_mismatch_is_usage_error() {
        let e = torus_distance(&pt(&[0.1]), &pt(&[0.1, 0.2])).unwrap_err();
        assert!(matches!(e, GeoError::Usage(_)));
    }

    #[test]
    fn canonicalization_reduces_mod_one() {
        let p = pt(&[1.25, -0.25, -1e-20]);
        assert_eq!(p.coords()[0], 0.25);
        assert_eq!(p.coords()[1], 0.75);
        assert!(p.coords()[2] < 1.0 && p.coords()[2] >= 0.0);
    }

    #[test]
    fn ball_volumes_low_dimensions() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn ball_volume_matches_gamma_form() {
        for d in 1..=12 {
            let gamma_form = (d as f64 / 2.0 * PI.ln() - ln_gamma(d as f64 / 2.0 + 1.0)).exp();
            let v = unit_ball_volume(d).unwrap();
            assert!((v - gamma_form).abs() / gamma_form < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn params_reject_large_radius() {
        assert!(GeoParams::new(2, 0.25).is_err());
        assert!(GeoParams::new(2, 0.0).is_err());
        assert!(GeoParams::new(0, 0.1).is_err());
    }

    #[test]
    fn union_volume_endpoints() {
        for d in 1..=4 {
            let p = GeoParams::new(d, 0.05).unwrap();
            let v0 = union_two_balls_volume(&p, 0.0).unwrap();
            let v2 = union_two_balls_volume(&p, 0.1).unwrap();
            assert!((v0 - p.ball_volume()).abs() < 1e-15);
            assert!((v2 - 2.0 * p.ball_volume()).abs() / v2 < 1e-11, "d = {d}");
        }
    }

    #[test]
    fn union_volume_rejects_out_of_range() {
        let p = GeoParams::new(2, 0.1).unwrap();
        assert!(matches!(union_two_balls_volume(&p, -0.01), Err(GeoError::Domain(_))));
        assert!(matches!(union_two_balls_volume(&p, 0.21), Err(GeoError::Domain(_))));
        let big = GeoParams::new(2, 0.2).unwrap();
        assert!(matches!(union_two_balls_volume(&big, 0.15), Err(GeoError::Domain(_))));
    }

    #[test]
    fn lens_formula_matches_quadrature() {
        let p = GeoParams::new(2, 0.05).unwrap();
        for i in 0..=10 {
            let nu = 0.01 * i as f64;
            let a = union_two_discs_area(0.05, nu).unwrap();
            let q = union_two_balls_volume(&p, nu).unwrap();
            assert!((a - q).abs() / a < 1e-9, "nu = {nu}: {a} vs {q}");
        }
    }

    #[test]
    fn monte_carlo_union_is_close() {
        let p = GeoParams::new(3, 0.05).unwrap();
        let mut rng = trial_rng(3, 0);
        let (est, se) = union_volume_monte_carlo(&p, 0.04, &mut rng, 200_000).unwrap();
        let exact = union_two_balls_volume(&p, 0.04).unwrap();
        assert!((est - exact).abs() < 4.0 * se, "{est} ± {se} vs {exact}");
    }

    #[test]
    fn degree_count_trivial_cases() {
        let p = GeoParams::new(2, 0.05).unwrap();
        assert!((expected_degree_count(1, 0, &p).unwrap() - 1.0).abs() < 1e-12);
        // θ r² = 0.5 exceeds the r < 1/4 restriction, so use the raw form.
        assert!((expected_degree_count_real(2.0, 1, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(expected_degree_count(3, 3, &p).is_err());
    }

    #[test]
    fn degree_count_no_underflow_at_large_n() {
        let p = GeoParams::new(2, 0.001).unwrap();
        let v = expected_degree_count(100_000_000, 2, &p).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_uniform(&mut trial_rng(7, 0), 2);
        let b = sample_uniform(&mut trial_rng(7, 0), 2);
        let c = sample_uniform(&mut trial_rng(8, 0), 2);
        let e = sample_uniform(&mut trial_rng(7, 1), 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, e);
    }
}
