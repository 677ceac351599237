//! Coarse and fine cube tessellations of the torus, cube classification
//! (full/nonfull, sea/close/far), blow-ups, remote sets and the Cr region.

mod cr;
mod lattice;
mod regions;
mod remote;

pub use cr::{cr_region, CrRegion};
pub use lattice::{lattice_components, Lattice, Reach};
pub(crate) use regions::{blow_up_by, cube_set_diameter};
pub use regions::{
    blow_up, classify_fullness, classify_regions, cutoff_outside_blow_up, far_without_close_neighbor, CubeLabels,
    FarCluster, Region, REGIME_TOO_SPARSE,
};
pub use remote::{
    annulus_membership, find_remote_sets, measure_remote_volume, RemoteCandidate, RemoteReport,
    RemoteSet, MAX_REMOTE_CANDIDATE_CUBES,
};

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::GeoParams;

/// Smallest cube count per axis accepted for the coarse grid.
pub const MIN_CUBES_PER_AXIS: usize = 10;

/// Largest coarse or fine cube count allocated.
pub const MAX_TESS_CUBES: usize = 1 << 26;

/// Smallest aspect constant: cube diagonal ≤ r/2 needs c ≥ 2√d.
pub fn min_aspect(d: usize) -> f64 {
    2.0 * (d as f64).sqrt()
}

/// Default aspect constant 8√d.
pub fn default_aspect(d: usize) -> f64 {
    8.0 * (d as f64).sqrt()
}

/// U = ⌈θ_d (c+1) c^{d−1}⌉, the nonfull-component size scale.
pub fn component_size_scale(params: &GeoParams, c: f64) -> usize {
    (params.theta_d * (c + 1.0) * c.powi(params.d as i32 - 1)).ceil() as usize
}

/// Fullness threshold M for k-connectivity: max(k, 3k² + ⌈2d/α⌉).
pub fn fullness_threshold_k(k: usize, d: usize, alpha: f64) -> usize {
    k.max(3 * k * k + (2.0 * d as f64 / alpha).ceil() as usize)
}

/// Fullness threshold M for Hamiltonicity: 2(4U + 6 + 2(2c+1)^d) + ⌈2d/α⌉.
pub fn fullness_threshold_hamilton(params: &GeoParams, c: f64, alpha: f64) -> usize {
    let u = component_size_scale(params, c);
    let block = (2.0 * c + 1.0).powi(params.d as i32).ceil() as usize;
    2 * (4 * u + 6 + 2 * block) + (2.0 * params.d as f64 / alpha).ceil() as usize
}

/// Default surrogate exponent α = d/4.
pub fn default_alpha(d: usize) -> f64 {
    d as f64 / 4.0
}

/// Target fine side r·√(log log(1/r)) / log(1/r).
pub fn fine_side_target(params: &GeoParams) -> Result<f64> {
    Ok(params.r * params.loglog_inv_r()?.sqrt() / params.log_inv_r())
}

/// Coarse tessellation into `m_side^d` cubes of side `1/m_side ≤ r/c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarseTess {
    pub params: GeoParams,
    pub c: f64,
    pub m_side: usize,
    pub side: f64,
}

impl CoarseTess {
    pub fn lattice(&self) -> Lattice {
        Lattice {
            d: self.params.d,
            m: self.m_side,
        }
    }

    pub fn cube_count(&self) -> usize {
        self.lattice().cell_count()
    }

    /// Cube containing a canonical point.
    pub fn cube_of(&self, p: &[f64]) -> usize {
        cell_of(p, self.m_side)
    }

    pub fn center(&self, cube: usize) -> Vec<f64> {
        self.lattice()
            .coords(cube)
            .iter()
            .map(|&x| (x as f64 + 0.5) * self.side)
            .collect()
    }

    /// Points per cube for a flat coordinate array.
    pub fn count_points(&self, flat: &[f64]) -> Vec<u32> {
        let mut counts = vec![0u32; self.cube_count()];
        for p in flat.chunks_exact(self.params.d) {
            counts[self.cube_of(p)] += 1;
        }
        counts
    }

    /// ℓ∞ reach of 𝒢 (center distance ≤ 4r) in cube units.
    pub fn nonfull_reach(&self) -> Reach {
        Reach::Chebyshev((4.0 * self.params.r / self.side + 1e-9).floor() as usize)
    }

    /// Euclidean reach of 𝒢̃ (center distance ≤ (c−d)r/c) in cube units.
    pub fn tilde_reach(&self) -> Reach {
        let d = self.params.d as f64;
        Reach::Euclid((self.c - d) * self.params.r / (self.c * self.side))
    }
}

/// Fine tessellation refining the coarse one by `factor` per axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FineTess {
    pub params: GeoParams,
    pub factor: usize,
    pub m_fine: usize,
    pub s_f: f64,
    pub coarse_m: usize,
}

impl FineTess {
    pub fn lattice(&self) -> Lattice {
        Lattice {
            d: self.params.d,
            m: self.m_fine,
        }
    }

    pub fn cube_count(&self) -> usize {
        self.lattice().cell_count()
    }

    pub fn cube_of(&self, p: &[f64]) -> usize {
        cell_of(p, self.m_fine)
    }

    pub fn center(&self, cube: usize) -> Vec<f64> {
        self.lattice()
            .coords(cube)
            .iter()
            .map(|&x| (x as f64 + 0.5) * self.s_f)
            .collect()
    }

    /// Coarse cube containing a fine cube.
    pub fn parent(&self, fine: usize) -> usize {
        let coarse = Lattice {
            d: self.params.d,
            m: self.coarse_m,
        };
        let c: Vec<usize> = self.lattice().coords(fine).iter().map(|&x| x / self.factor).collect();
        coarse.id(&c)
    }

    /// Euclidean reach of 𝒢_f (center distance ≤ 2r) in fine-cube units.
    pub fn reach(&self) -> Reach {
        Reach::Euclid(2.0 * self.params.r / self.s_f)
    }
}

fn cell_of(p: &[f64], m: usize) -> usize {
    p.iter()
        .rev()
        .fold(0, |acc, &x| acc * m + ((x * m as f64) as usize).min(m - 1))
}

/// Builds the coarse grid with `m_side = ⌈c/r⌉` and the fine grid with
/// factor `⌈side / s_f target⌉`.
pub fn build_tessellations(params: &GeoParams, c: f64) -> Result<(CoarseTess, FineTess)> {
    let d = params.d;
    if !c.is_finite() || c < min_aspect(d) || c <= d as f64 {
        return Err(GeoError::Config(format!(
            "aspect constant c = {c} must be at least {:.4} and exceed d = {d}",
            min_aspect(d)
        )));
    }
    let m_side = (c / params.r).ceil() as usize;
    if m_side < MIN_CUBES_PER_AXIS {
        return Err(GeoError::Config(format!(
            "r = {} is too large for c = {c}: {m_side} cubes per axis, need at least {MIN_CUBES_PER_AXIS}",
            params.r
        )));
    }
    let count_ok = |m: usize| m.checked_pow(d as u32).is_some_and(|n| n <= MAX_TESS_CUBES);
    if !count_ok(m_side) {
        return Err(GeoError::Config(format!(
            "coarse tessellation with {m_side}^{d} cubes exceeds the limit of {MAX_TESS_CUBES}"
        )));
    }
    let side = 1.0 / m_side as f64;
    let factor = (side / fine_side_target(params)?).ceil().max(1.0) as usize;
    let m_fine = m_side * factor;
    if !count_ok(m_fine) {
        return Err(GeoError::Config(format!(
            "fine tessellation with {m_fine}^{d} cubes exceeds the limit of {MAX_TESS_CUBES}"
        )));
    }
    Ok((
        CoarseTess {
            params: *params,
            c,
            m_side,
            side,
        },
        FineTess {
            params: *params,
            factor,
            m_fine,
            s_f: 1.0 / m_fine as f64,
            coarse_m: m_side,
        },
    ))
}
