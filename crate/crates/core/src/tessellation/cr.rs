//! The region Cr(𝒮): half-balls at the ends of a diameter segment ab of a
//! connected fine-cube set, joined by ball pieces cut by slabs orthogonal
//! to ab and by half-spaces beyond the points farthest from ab.
//!
//! Geometry is done in "half units": a fine cube with integer index x has
//! corners 2x and 2x+2 and center 2x+1 per axis, so the corner/center set
//! Z_f is integral and the diameter, slab and extremal choices are exact.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use super::remote::is_connected_set;
use super::FineTess;
use crate::error::{GeoError, Result};
use crate::geometry::{canonical, unit_ball_volume};

/// Cr(𝒮) for a connected fine-cube set, in coordinates unwrapped around
/// the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrRegion {
    pub d: usize,
    pub r: f64,
    pub s_f: f64,
    /// Fine cubes holding a, b and the extremal points, sorted and distinct.
    pub skeleton: Vec<usize>,
    /// Diameter of the union of the input cubes.
    pub lambda: f64,
    /// Number of slabs between the end hyperplanes.
    pub l: usize,
    /// Radius r − 2 s_f √d of every piece.
    pub rho: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    normals: Vec<Vec<f64>>,
    direction: Vec<f64>,
    reference: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn idot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn isub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Builds Cr(𝒮) for a 𝒢_f-connected set of fine cubes whose union has
/// diameter in [s_f, 20dr). Requires d ≥ 2.
pub fn cr_region(fine: &FineTess, cubes: &[usize]) -> Result<CrRegion> {
    let d = fine.params.d;
    let r = fine.params.r;
    if d < 2 {
        return Err(GeoError::Domain("the Cr region is defined for d >= 2 only".into()));
    }
    let mut cubes = cubes.to_vec();
    cubes.sort_unstable();
    cubes.dedup();
    let lat = fine.lattice();
    if cubes.is_empty() || !is_connected_set(&lat, &cubes, fine.reach()) {
        return Err(GeoError::Usage("cube set is empty or not connected in the fine graph".into()));
    }
    let rho = r - 2.0 * fine.s_f * (d as f64).sqrt();
    if rho <= 0.0 {
        return Err(GeoError::Domain(format!("piece radius {rho} is not positive")));
    }

    let unwrapped = unwrap(&lat, &cubes, fine.reach());
    let mut corners: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut points: BTreeSet<Vec<i64>> = BTreeSet::new();
    for x in &unwrapped {
        points.insert(x.iter().map(|&c| 2 * c + 1).collect());
        for mask in 0..1u32 << d {
            let z: Vec<i64> = (0..d).map(|a| 2 * x[a] + 2 * i64::from(mask >> a & 1)).collect();
            corners.insert(z);
        }
    }
    points.extend(corners.iter().cloned());

    // diameter pair: a ≺-minimal among endpoints, b ≺-minimal partner
    let corner_list: Vec<&Vec<i64>> = corners.iter().collect();
    let mut best = 0i128;
    let mut pair: Option<(usize, usize)> = None;
    for i in 0..corner_list.len() {
        for j in 0..corner_list.len() {
            if i == j {
                continue;
            }
            let w = isub(corner_list[j], corner_list[i]);
            let len = idot(&w, &w);
            if len > best {
                best = len;
                pair = Some((i, j));
            }
        }
    }
    let (ia, ib) = pair.ok_or_else(|| GeoError::Domain("cube set has zero diameter".into()))?;
    let (za, zb) = (corner_list[ia].clone(), corner_list[ib].clone());
    let half = fine.s_f / 2.0;
    let lambda = (best as f64).sqrt() * half;
    if lambda < fine.s_f || lambda >= 20.0 * d as f64 * r {
        return Err(GeoError::Domain(format!(
            "diameter {lambda} outside [s_f, 20dr) = [{}, {})",
            fine.s_f,
            20.0 * d as f64 * r
        )));
    }
    if 1.2 * lambda + r >= 0.5 {
        return Err(GeoError::Domain(format!(
            "diameter {lambda} too large to place the region on the torus"
        )));
    }

    let v = isub(&zb, &za);
    let vv = best;
    let vlen = (vv as f64).sqrt();
    let l = ((lambda / (2.0 * r)).ceil() as usize).max(1);
    let real = |z: &[i64]| -> Vec<f64> { z.iter().map(|&c| c as f64 * half).collect() };
    let direction: Vec<f64> = v.iter().map(|&c| c as f64 / vlen).collect();

    let mut alphas = Vec::with_capacity(l);
    let mut normals = Vec::with_capacity(l);
    let mut alpha_z = Vec::with_capacity(l);
    for i in 1..=l {
        let lo = 2.0 * r * (i - 1) as f64;
        let hi = (2.0 * r * i as f64).min(lambda);
        let mut chosen: Option<(&Vec<i64>, i128)> = None;
        for z in &points {
            let w = isub(z, &za);
            let proj = idot(&w, &v) as f64 / vlen * half;
            let tol = 1e-12 * lambda;
            if proj < lo - tol || proj > hi + tol {
                continue;
            }
            let wv = idot(&w, &v);
            let off = idot(&w, &w) * vv - wv * wv;
            if chosen.is_none_or(|(_, o)| off > o) {
                chosen = Some((z, off));
            }
        }
        let (z, off) = chosen.ok_or_else(|| GeoError::Construction {
            step: "cr_region",
            component: None,
            detail: format!("slab {i} contains no corner or center"),
        })?;
        if off == 0 {
            return Err(GeoError::Construction {
                step: "cr_region",
                component: None,
                detail: format!("extremal point of slab {i} lies on the diameter line"),
            });
        }
        let w = isub(z, &za);
        let t = idot(&w, &v) as f64 / vv as f64;
        let perp: Vec<f64> = w.iter().zip(&v).map(|(&x, &y)| x as f64 - t * y as f64).collect();
        let norm = dot(&perp, &perp).sqrt();
        normals.push(perp.iter().map(|x| x / norm).collect());
        alphas.push(real(z));
        alpha_z.push(z.clone());
    }

    // q(y): smallest member cube containing y
    let owner = |z: &[i64]| -> usize {
        unwrapped
            .iter()
            .zip(&cubes)
            .filter(|(x, _)| (0..d).all(|a| 2 * x[a] <= z[a] && z[a] <= 2 * x[a] + 2))
            .map(|(_, &q)| q)
            .min()
            .expect("a point of the set lies in some member cube")
    };
    let mut skeleton: Vec<usize> = std::iter::once(&za)
        .chain(std::iter::once(&zb))
        .chain(alpha_z.iter())
        .map(|z| owner(z))
        .collect();
    skeleton.sort_unstable();
    skeleton.dedup();

    let (a, b) = (real(&za), real(&zb));
    let reference = a.iter().zip(&b).map(|(x, y)| (x + y) / 2.0).collect();
    Ok(CrRegion {
        d,
        r,
        s_f: fine.s_f,
        skeleton,
        lambda,
        l,
        rho,
        a,
        b,
        alphas,
        normals,
        direction,
        reference,
    })
}

/// Integer cube coordinates unwrapped along a BFS tree, so that adjacent
/// cubes differ by their minimal torus offset.
fn unwrap(lat: &Lattice, cubes: &[usize], reach: super::Reach) -> Vec<Vec<i64>> {
    let m = lat.m as i64;
    let coords: Vec<Vec<i64>> = cubes
        .iter()
        .map(|&q| lat.coords(q).iter().map(|&x| x as i64).collect())
        .collect();
    let mut out: Vec<Option<Vec<i64>>> = vec![None; cubes.len()];
    out[0] = Some(coords[0].clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let base = out[i].clone().expect("visited");
        for j in 0..cubes.len() {
            if out[j].is_none() && lat.adjacent(cubes[i], cubes[j], reach) {
                let pos = (0..lat.d)
                    .map(|a| {
                        let mut delta = (coords[j][a] - coords[i][a]).rem_euclid(m);
                        if delta > m / 2 {
                            delta -= m;
                        }
                        base[a] + delta
                    })
                    .collect();
                out[j] = Some(pos);
                queue.push_back(j);
            }
        }
    }
    out.into_iter().map(|x| x.expect("connected set")).collect()
}

impl CrRegion {
    fn projection(&self, x: &[f64]) -> f64 {
        let w: Vec<f64> = x.iter().zip(&self.a).map(|(p, q)| p - q).collect();
        dot(&w, &self.direction)
    }

    /// Membership for a point in the unwrapped frame.
    pub fn contains_unwrapped(&self, x: &[f64]) -> bool {
        let rho2 = self.rho * self.rho;
        let proj = self.projection(x);
        if proj <= 0.0 && dist_sq(x, &self.a) <= rho2 {
            return true;
        }
        if proj >= self.lambda && dist_sq(x, &self.b) <= rho2 {
            return true;
        }
        (0..self.l).any(|i| {
            let lo = 2.0 * self.r * i as f64;
            let hi = (2.0 * self.r * (i + 1) as f64).min(self.lambda);
            let alpha = &self.alphas[i];
            let w: Vec<f64> = x.iter().zip(alpha).map(|(p, q)| p - q).collect();
            proj >= lo && proj <= hi && dot(&w, &w) <= rho2 && dot(&w, &self.normals[i]) >= 0.0
        })
    }

    /// Maps a canonical torus point to its image nearest the region.
    pub fn unwrap_point(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.reference)
            .map(|(&x, &c)| x + (c - x).round())
            .collect()
    }

    /// Membership for a canonical torus point.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.contains_unwrapped(&self.unwrap_point(p))
    }

    /// Axis-aligned box (unwrapped) holding every piece.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let centers = std::iter::once(&self.a).chain(std::iter::once(&self.b)).chain(&self.alphas);
        let mut lo = vec![f64::INFINITY; self.d];
        let mut hi = vec![f64::NEG_INFINITY; self.d];
        for c in centers {
            for a in 0..self.d {
                lo[a] = lo[a].min(c[a] - self.rho);
                hi[a] = hi[a].max(c[a] + self.rho);
            }
        }
        (lo, hi)
    }

    /// Monte Carlo volume over the bounding box: (estimate, standard error).
    pub fn estimate_volume<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> (f64, f64) {
        let (lo, hi) = self.bounding_box();
        let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        let mut x = vec![0.0; self.d];
        let mut hits = 0usize;
        for _ in 0..samples {
            for a in 0..self.d {
                x[a] = lo[a] + (hi[a] - lo[a]) * rng.random::<f64>();
            }
            if self.contains_unwrapped(&x) {
                hits += 1;
            }
        }
        let f = hits as f64 / samples.max(1) as f64;
        (f * box_vol, box_vol * (f * (1.0 - f) / samples.max(1) as f64).sqrt())
    }

    /// Canonical torus coordinates of `n` uniform points of the region.
    pub fn sample_inside<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::with_capacity(n);
        let mut x = vec![0.0; self.d];
        while out.len() < n {
            for a in 0..self.d {
                x[a] = lo[a] + (hi[a] - lo[a]) * rng.random::<f64>();
            }
            if self.contains_unwrapped(&x) {
                out.push(x.iter().map(|&c| canonical(c)).collect());
            }
        }
        out
    }

    /// Lower and upper volume bounds θ_d r^d + (θ_{d−1}λ/2^{d+2} − 3θ_d d² s_f) r^{d−1}
    /// and 21 d θ_d r^d.
    pub fn volume_bounds(&self) -> Result<(f64, f64)> {
        let d = self.d as i32;
        let th = unit_ball_volume(self.d)?;
        let th1 = unit_ball_volume(self.d - 1)?;
        let dd = (self.d * self.d) as f64;
        let lower = th * self.r.powi(d)
            + (th1 * self.lambda / 2f64.powi(d + 2) - 3.0 * th * dd * self.s_f) * self.r.powi(d - 1);
        Ok((lower, 21.0 * self.d as f64 * th * self.r.powi(d)))
    }
}
