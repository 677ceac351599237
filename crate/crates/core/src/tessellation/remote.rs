//! Annuli around fine-cube sets and detection of κ-remote sets.
//!
//! A set Q of fine cubes is κ-remote when it is 𝒢_f-connected, avoids the
//! sea, and its annulus (balls of radius r − s_f√d/2 around member centers,
//! minus ⋃Q) holds at most κ−1 points.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::lattice::{lattice_components, Lattice, Reach};
use super::regions::{cube_set_diameter, CubeLabels, Region};
use super::{CoarseTess, FineTess};
use crate::error::{GeoError, Result};
use crate::geometry::{torus_dist_sq, TorusPoint};

/// Largest number of non-sea fine cubes examined before giving up.
pub const MAX_REMOTE_CANDIDATE_CUBES: usize = 100_000;

/// Sets above this size get their diameter from boundary cubes only.
const EXACT_DIAMETER_LIMIT: usize = 4096;

/// A κ-remote set of fine cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteSet {
    pub cubes: Vec<usize>,
    pub kappa: usize,
    pub diameter: f64,
    pub annulus_point_count: usize,
}

/// A maximal 𝒢_f-connected set of non-sea fine cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteCandidate {
    pub cubes: Vec<usize>,
    pub diameter: f64,
    /// Exact when below κ, otherwise capped at κ.
    pub annulus_point_count: usize,
    pub is_remote: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteReport {
    pub kappa: usize,
    pub candidates: Vec<RemoteCandidate>,
    /// Distinct κ-remote sets found among candidates and ball-grown subsets.
    pub remote_sets: Vec<RemoteSet>,
    /// Fine cubes belonging to some reported κ-remote set, sorted.
    pub flagged: Vec<usize>,
}

impl RemoteReport {
    /// One JSON object per line: candidates first, then remote sets.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.candidates {
            let line = serde_json::json!({
                "kind": "candidate",
                "kappa": self.kappa,
                "size": c.cubes.len(),
                "diameter": c.diameter,
                "annulus_point_count": c.annulus_point_count,
                "is_remote": c.is_remote,
                "cubes": c.cubes,
            });
            writeln!(w, "{line}")?;
        }
        for s in &self.remote_sets {
            let line = serde_json::json!({
                "kind": "remote_set",
                "kappa": s.kappa,
                "size": s.cubes.len(),
                "diameter": s.diameter,
                "annulus_point_count": s.annulus_point_count,
                "cubes": s.cubes,
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn annulus_radius(fine: &FineTess) -> f64 {
    fine.params.r - fine.s_f * (fine.params.d as f64).sqrt() / 2.0
}

/// Whether `p` lies in Ann(Q): within r − s_f√d/2 of some member-cube
/// center and inside no member cube.
pub fn annulus_membership(fine: &FineTess, cubes: &[usize], p: &TorusPoint) -> Result<bool> {
    if cubes.is_empty() {
        return Err(GeoError::Usage("annulus of an empty cube set".into()));
    }
    if p.dim() != fine.params.d {
        return Err(GeoError::Usage("point dimension does not match the tessellation".into()));
    }
    Ok(in_annulus(fine, cubes, p.coords()))
}

fn in_annulus(fine: &FineTess, cubes: &[usize], p: &[f64]) -> bool {
    let own = fine.cube_of(p);
    if cubes.contains(&own) {
        return false;
    }
    let rho = annulus_radius(fine);
    let rho2 = rho * rho;
    rho > 0.0 && cubes.iter().any(|&q| torus_dist_sq(p, &fine.center(q)) <= rho2)
}

/// Points bucketed by fine cube.
struct PointIndex<'a> {
    d: usize,
    flat: &'a [f64],
    by_cube: HashMap<usize, Vec<u32>>,
}

impl<'a> PointIndex<'a> {
    fn new(fine: &FineTess, flat: &'a [f64]) -> Self {
        let d = fine.params.d;
        let mut by_cube: HashMap<usize, Vec<u32>> = HashMap::new();
        for (i, p) in flat.chunks_exact(d).enumerate() {
            by_cube.entry(fine.cube_of(p)).or_default().push(i as u32);
        }
        Self { d, flat, by_cube }
    }

    fn point(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.flat[i * self.d..(i + 1) * self.d]
    }

    fn len(&self) -> usize {
        self.flat.len() / self.d
    }
}

/// Number of points in Ann(Q), stopping once it exceeds `limit`.
/// `cubes` must be sorted.
fn count_annulus(fine: &FineTess, index: &PointIndex, cubes: &[usize], limit: usize) -> usize {
    let rho = annulus_radius(fine);
    if rho <= 0.0 {
        return 0;
    }
    let rho2 = rho * rho;
    let lat = fine.lattice();
    let centers: Vec<Vec<f64>> = cubes.iter().map(|&q| fine.center(q)).collect();
    let mut count = 0;
    let test = |i: u32, count: &mut usize| {
        let p = index.point(i);
        if centers.iter().any(|c| torus_dist_sq(p, c) <= rho2) {
            *count += 1;
        }
    };

    let window = (rho / fine.s_f + 0.5).ceil() as usize;
    let per_member = (2 * window + 1).saturating_pow(lat.d as u32);
    if cubes.len().saturating_mul(per_member) > index.len() {
        for (&cube, ids) in &index.by_cube {
            if cubes.binary_search(&cube).is_ok() {
                continue;
            }
            for &i in ids {
                test(i, &mut count);
                if count > limit {
                    return count;
                }
            }
        }
        return count;
    }
    let offsets = lat.offsets(Reach::Chebyshev(window));
    let mut seen: HashSet<usize> = HashSet::new();
    for &q in cubes {
        let c = lat.coords(q);
        for cube in std::iter::once(q).chain(offsets.iter().map(|o| lat.shifted(&c, o))) {
            if !seen.insert(cube) || cubes.binary_search(&cube).is_ok() {
                continue;
            }
            if let Some(ids) = index.by_cube.get(&cube) {
                for &i in ids {
                    test(i, &mut count);
                    if count > limit {
                        return count;
                    }
                }
            }
        }
    }
    count
}

pub(crate) fn is_connected_set(lat: &Lattice, cubes: &[usize], reach: Reach) -> bool {
    if cubes.is_empty() {
        return false;
    }
    let mut seen = vec![false; cubes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut reached = 1;
    while let Some(i) = stack.pop() {
        for j in 0..cubes.len() {
            if !seen[j] && lat.adjacent(cubes[i], cubes[j], reach) {
                seen[j] = true;
                reached += 1;
                stack.push(j);
            }
        }
    }
    reached == cubes.len()
}

/// Diameter of ⋃Q; large sets use only cubes with a missing face neighbour.
fn set_diameter(lat: &Lattice, cubes: &[usize], s_f: f64) -> f64 {
    if cubes.len() <= EXACT_DIAMETER_LIMIT {
        return cube_set_diameter(lat, cubes, s_f);
    }
    let faces = lat.offsets(Reach::Euclid(1.0));
    let boundary: Vec<usize> = cubes
        .iter()
        .copied()
        .filter(|&q| {
            let c = lat.coords(q);
            faces.iter().any(|o| cubes.binary_search(&lat.shifted(&c, o)).is_err())
        })
        .collect();
    cube_set_diameter(lat, &boundary, s_f)
}

/// Enumerates maximal 𝒢_f-connected non-sea fine-cube sets, tests each for
/// κ-remoteness, and flags cubes lying in some κ-remote set found by growing
/// balls (radius 0, s_f, 2s_f, 4s_f, …) around each unflagged cube until
/// one qualifies. Every singleton is tested.
pub fn find_remote_sets(
    tess: &CoarseTess,
    fine: &FineTess,
    labels: &CubeLabels,
    flat_points: &[f64],
    kappa: usize,
) -> Result<RemoteReport> {
    let regions = labels
        .regions
        .as_ref()
        .ok_or_else(|| GeoError::Usage("region labels are required for remote sets".into()))?;
    if kappa == 0 {
        return Err(GeoError::Usage("kappa must be at least 1".into()));
    }
    if fine.coarse_m != tess.m_side {
        return Err(GeoError::Usage("fine tessellation does not refine this coarse one".into()));
    }
    let lat = fine.lattice();
    let n = lat.cell_count();
    let active: Vec<bool> = (0..n).map(|q| regions[fine.parent(q)] != Region::Sea).collect();
    let total = active.iter().filter(|&&a| a).count();
    if total > MAX_REMOTE_CANDIDATE_CUBES {
        return Err(GeoError::regime(
            super::REGIME_TOO_SPARSE,
            format!("{total} non-sea fine cubes exceed the limit of {MAX_REMOTE_CANDIDATE_CUBES}"),
        ));
    }
    let reach = fine.reach();
    let (ids, count) = lattice_components(lat, &active, reach);
    let mut comps: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (q, &id) in ids.iter().enumerate() {
        if id != u32::MAX {
            comps[id as usize].push(q);
        }
    }

    let index = PointIndex::new(fine, flat_points);
    let limit = kappa - 1;
    let mut candidates = Vec::with_capacity(count);
    let mut found: Vec<RemoteSet> = Vec::new();
    let mut flagged = vec![false; n];

    for comp in comps {
        let ann = count_annulus(fine, &index, &comp, limit);
        let diameter = set_diameter(&lat, &comp, fine.s_f);
        let is_remote = ann <= limit;
        if is_remote {
            for &q in &comp {
                flagged[q] = true;
            }
            found.push(RemoteSet {
                cubes: comp.clone(),
                kappa,
                diameter,
                annulus_point_count: ann,
            });
        } else {
            grow_balls(fine, &index, &comp, kappa, diameter, &mut flagged, &mut found);
        }
        candidates.push(RemoteCandidate {
            cubes: comp,
            diameter,
            annulus_point_count: ann.min(kappa),
            is_remote,
        });
    }
    found.sort_by(|a, b| a.cubes.cmp(&b.cubes));
    found.dedup_by(|a, b| a.cubes == b.cubes);
    Ok(RemoteReport {
        kappa,
        candidates,
        remote_sets: found,
        flagged: (0..n).filter(|&q| flagged[q]).collect(),
    })
}

fn grow_balls(
    fine: &FineTess,
    index: &PointIndex,
    comp: &[usize],
    kappa: usize,
    comp_diameter: f64,
    flagged: &mut [bool],
    found: &mut Vec<RemoteSet>,
) {
    let lat = fine.lattice();
    let reach = fine.reach();
    let centers: Vec<Vec<f64>> = comp.iter().map(|&q| fine.center(q)).collect();
    for (i, &q) in comp.iter().enumerate() {
        // flagged cubes only get their singleton tested
        let already = flagged[q];
        let mut radius = 0.0;
        let mut last_len = 0;
        loop {
            let r2 = radius * radius * (1.0 + 1e-12);
            let members: Vec<usize> = comp
                .iter()
                .zip(&centers)
                .filter(|(_, c)| torus_dist_sq(&centers[i], c) <= r2)
                .map(|(&p, _)| p)
                .collect();
            if members.len() == comp.len() {
                break;
            }
            if members.len() > last_len {
                last_len = members.len();
                let ann = count_annulus(fine, index, &members, kappa - 1);
                if ann < kappa && is_connected_set(&lat, &members, reach) {
                    for &m in &members {
                        flagged[m] = true;
                    }
                    found.push(RemoteSet {
                        diameter: set_diameter(&lat, &members, fine.s_f),
                        cubes: members,
                        kappa,
                        annulus_point_count: ann,
                    });
                    break;
                }
            }
            if already || radius > comp_diameter {
                break;
            }
            radius = if radius == 0.0 { fine.s_f } else { 2.0 * radius };
        }
    }
}

/// Total volume of fine cubes flagged κ-remote.
pub fn measure_remote_volume(
    tess: &CoarseTess,
    fine: &FineTess,
    labels: &CubeLabels,
    flat_points: &[f64],
    kappa: usize,
) -> Result<f64> {
    let report = find_remote_sets(tess, fine, labels, flat_points, kappa)?;
    Ok(report.flagged.len() as f64 * fine.s_f.powi(fine.params.d as i32))
}
