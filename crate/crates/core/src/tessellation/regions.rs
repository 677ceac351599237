//! Fullness labels, nonfull components, sea/close/far regions and blow-ups.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::lattice::{lattice_components, Lattice};
use super::CoarseTess;
use crate::error::{GeoError, Result};

/// Diagnostic code raised when no full component covers most of the torus.
pub const REGIME_TOO_SPARSE: &str = "REGIME_TOO_SPARSE";

/// Far clusters with more cubes than this skip the diameter diagnostic.
const DIAMETER_CHECK_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Sea,
    Close,
    Far,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Sea => "SEA",
            Region::Close => "CLOSE",
            Region::Far => "FAR",
        }
    }
}

/// 𝒢̃-connected set of far cubes and the nonfull component enclosing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarCluster {
    pub cubes: Vec<usize>,
    pub owner: Option<usize>,
    pub diameter: Option<f64>,
}

/// Per-cube labels with respect to one point set and threshold M.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeLabels {
    pub threshold: usize,
    pub counts: Vec<u32>,
    pub full: Vec<bool>,
    /// Index into `components` for nonfull cubes, `u32::MAX` for full ones.
    pub component_id: Vec<u32>,
    /// Nonfull 𝒢-components as sorted cube lists, ordered by smallest cube.
    pub components: Vec<Vec<usize>>,
    pub regions: Option<Vec<Region>>,
    pub far_clusters: Vec<FarCluster>,
    /// Far cubes F(N) per nonfull component, sorted.
    pub far_sets: Vec<Vec<usize>>,
    pub sea_size: usize,
    pub diagnostics: Vec<String>,
}

impl CubeLabels {
    pub fn nonfull_count(&self) -> usize {
        self.full.iter().filter(|&&f| !f).count()
    }

    pub fn max_component_size(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn component_of(&self, cube: usize) -> Option<usize> {
        let id = self.component_id[cube];
        (id != u32::MAX).then_some(id as usize)
    }

    pub fn region(&self, cube: usize) -> Option<Region> {
        self.regions.as_ref().map(|r| r[cube])
    }

    pub fn cubes_in(&self, region: Region) -> Vec<usize> {
        match &self.regions {
            Some(r) => (0..r.len()).filter(|&q| r[q] == region).collect(),
            None => Vec::new(),
        }
    }

    /// CSV with header `cube,x1..xd,count,full,component,region`; cube
    /// coordinates are 0-based cell indices.
    pub fn write_csv<W: Write>(&self, tess: &CoarseTess, mut w: W) -> std::io::Result<()> {
        let lat = tess.lattice();
        write!(w, "cube")?;
        for a in 1..=lat.d {
            write!(w, ",x{a}")?;
        }
        writeln!(w, ",count,full,component,region")?;
        for q in 0..lat.cell_count() {
            write!(w, "{q}")?;
            for x in lat.coords(q) {
                write!(w, ",{x}")?;
            }
            let comp = self.component_of(q).map_or(String::new(), |c| c.to_string());
            let region = self.region(q).map_or("", Region::as_str);
            writeln!(w, ",{},{},{comp},{region}", self.counts[q], u8::from(self.full[q]))?;
        }
        Ok(())
    }
}

/// Counts points per cube, marks cubes with at least `threshold` points as
/// full and groups nonfull cubes into 𝒢-components (center ℓ∞ distance ≤ 4r).
pub fn classify_fullness(tess: &CoarseTess, flat_points: &[f64], threshold: usize) -> CubeLabels {
    let counts = tess.count_points(flat_points);
    let full: Vec<bool> = counts.iter().map(|&c| c as usize >= threshold).collect();
    let nonfull: Vec<bool> = full.iter().map(|f| !f).collect();
    let (component_id, n_comp) = lattice_components(tess.lattice(), &nonfull, tess.nonfull_reach());
    let mut components = vec![Vec::new(); n_comp];
    for (q, &id) in component_id.iter().enumerate() {
        if id != u32::MAX {
            components[id as usize].push(q);
        }
    }
    let mut diagnostics = Vec::new();
    if flat_points.is_empty() {
        diagnostics.push("no points: every cube is nonfull".to_string());
    }
    CubeLabels {
        threshold,
        counts,
        full,
        component_id,
        components,
        regions: None,
        far_clusters: Vec::new(),
        far_sets: vec![Vec::new(); n_comp],
        sea_size: 0,
        diagnostics,
    }
}

/// Sea = largest 𝒢̃-component of full cubes; close = nonfull cubes with a
/// 𝒢̃-neighbour in the sea; far = all other cubes. Far cubes are grouped
/// into 𝒢̃-clusters, each owned by the component of its smallest close
/// 𝒢̃-neighbour.
pub fn classify_regions(tess: &CoarseTess, mut labels: CubeLabels) -> Result<CubeLabels> {
    let lat = tess.lattice();
    let n = lat.cell_count();
    let reach = tess.tilde_reach();
    let (full_comp, n_full_comp) = lattice_components(lat, &labels.full, reach);
    let mut sizes = vec![0usize; n_full_comp];
    for &id in &full_comp {
        if id != u32::MAX {
            sizes[id as usize] += 1;
        }
    }
    let (sea_id, sea_size) = sizes
        .iter()
        .enumerate()
        .fold((u32::MAX, 0), |best, (i, &s)| if s > best.1 { (i as u32, s) } else { best });
    if 2 * sea_size <= n {
        return Err(GeoError::regime(
            REGIME_TOO_SPARSE,
            format!("largest full component has {sea_size} of {n} cubes"),
        ));
    }
    if n_full_comp > 1 {
        labels
            .diagnostics
            .push(format!("{} full components besides the sea", n_full_comp - 1));
    }

    let offsets = lat.offsets(reach);
    let is_sea = |q: usize| full_comp[q] == sea_id;
    let mut regions = vec![Region::Far; n];
    for q in 0..n {
        if is_sea(q) {
            regions[q] = Region::Sea;
        } else if !labels.full[q] {
            let c = lat.coords(q);
            if offsets.iter().any(|o| is_sea(lat.shifted(&c, o))) {
                regions[q] = Region::Close;
            }
        }
    }

    let far: Vec<bool> = regions.iter().map(|&r| r == Region::Far).collect();
    let (far_id, n_clusters) = lattice_components(lat, &far, reach);
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for (q, &id) in far_id.iter().enumerate() {
        if id != u32::MAX {
            clusters[id as usize].push(q);
        }
    }
    let mut far_sets = vec![Vec::new(); labels.components.len()];
    let mut far_clusters = Vec::with_capacity(n_clusters);
    let max_diam = 20.0 * tess.params.d as f64 * tess.params.r;
    for (i, cubes) in clusters.into_iter().enumerate() {
        let mut close_nbrs: Vec<usize> = Vec::new();
        for &q in &cubes {
            let c = lat.coords(q);
            close_nbrs.extend(
                offsets
                    .iter()
                    .map(|o| lat.shifted(&c, o))
                    .filter(|&p| regions[p] == Region::Close),
            );
        }
        close_nbrs.sort_unstable();
        close_nbrs.dedup();
        let mut owners: Vec<usize> = close_nbrs
            .iter()
            .filter_map(|&q| labels.component_of(q))
            .collect();
        let owner = close_nbrs.first().and_then(|&q| labels.component_of(q));
        owners.sort_unstable();
        owners.dedup();
        match owners.len() {
            0 => labels
                .diagnostics
                .push(format!("far cluster {i} has no close neighbour")),
            1 => {}
            _ => labels.diagnostics.push(format!(
                "far cluster {i} touches {} nonfull components; assigned to {}",
                owners.len(),
                owner.unwrap_or(0)
            )),
        }
        let diameter = (cubes.len() <= DIAMETER_CHECK_LIMIT).then(|| cube_set_diameter(&lat, &cubes, tess.side));
        if let Some(diam) = diameter {
            if diam > max_diam {
                labels
                    .diagnostics
                    .push(format!("far cluster {i} has diameter {diam:.4} > 20dr"));
            }
        }
        if let Some(o) = owner {
            far_sets[o].extend_from_slice(&cubes);
        }
        far_clusters.push(FarCluster { cubes, owner, diameter });
    }
    for s in &mut far_sets {
        s.sort_unstable();
    }
    labels.regions = Some(regions);
    labels.far_clusters = far_clusters;
    labels.far_sets = far_sets;
    labels.sea_size = sea_size;
    Ok(labels)
}

/// Largest Euclidean distance between points of the union of the cubes.
pub(crate) fn cube_set_diameter(lat: &Lattice, cubes: &[usize], side: f64) -> f64 {
    let coords: Vec<Vec<usize>> = cubes.iter().map(|&q| lat.coords(q)).collect();
    let mut best = 0usize;
    for (i, a) in coords.iter().enumerate() {
        for b in &coords[i..] {
            let s: usize = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let g = lat.axis_gap(x, y) + 1;
                    g * g
                })
                .sum();
            best = best.max(s);
        }
    }
    (best as f64).sqrt() * side
}

/// Cubes at ℓ∞ distance at most `b·r/c` from `cubes`, measured in whole
/// cube steps. Sorted.
pub fn blow_up(tess: &CoarseTess, cubes: &[usize], b: usize) -> Vec<usize> {
    blow_up_by(tess, cubes, b as f64)
}

/// [`blow_up`] for a real factor `b`.
pub(crate) fn blow_up_by(tess: &CoarseTess, cubes: &[usize], b: f64) -> Vec<usize> {
    let steps = (b * tess.params.r / (tess.c * tess.side) + 1e-9).floor() as usize;
    dilate(tess.lattice(), cubes, steps)
}

/// Closed ℓ∞ dilation of a cube set by `steps` cells, with wraparound.
pub(crate) fn dilate(lat: Lattice, cubes: &[usize], steps: usize) -> Vec<usize> {
    let n = lat.cell_count();
    let mut mask = vec![false; n];
    for &q in cubes {
        mask[q] = true;
    }
    let m = lat.m;
    let whole_line = 2 * steps + 1 >= m;
    let mut stride = 1;
    for _ in 0..lat.d {
        let mut next = mask.clone();
        for q in (0..n).filter(|&q| mask[q]) {
            let x = (q / stride) % m;
            let base = q - x * stride;
            if whole_line {
                for y in 0..m {
                    next[base + y * stride] = true;
                }
            } else {
                for o in 0..=2 * steps {
                    let y = (x + m + o - steps) % m;
                    next[base + y * stride] = true;
                }
            }
        }
        mask = next;
        stride *= m;
    }
    (0..n).filter(|&q| mask[q]).collect()
}

/// Cubes outside the giant 𝒢̃-component of 𝒯 ∖ N that are not in the
/// c-blow-up of N. Empty when the cutoff lies within the blow-up.
pub fn cutoff_outside_blow_up(tess: &CoarseTess, labels: &CubeLabels, component: usize) -> Result<Vec<usize>> {
    let lat = tess.lattice();
    let comp = labels
        .components
        .get(component)
        .ok_or_else(|| GeoError::Usage(format!("no nonfull component {component}")))?;
    let mut active = vec![true; lat.cell_count()];
    for &q in comp {
        active[q] = false;
    }
    let (ids, count) = lattice_components(lat, &active, tess.tilde_reach());
    let mut sizes = vec![0usize; count];
    for &id in ids.iter().filter(|&&id| id != u32::MAX) {
        sizes[id as usize] += 1;
    }
    let giant = (0..count).max_by_key(|&i| (sizes[i], std::cmp::Reverse(i)));
    let blown = blow_up_by(tess, comp, tess.c);
    Ok((0..lat.cell_count())
        .filter(|&q| giant.is_none_or(|g| ids[q] != g as u32))
        .filter(|q| blown.binary_search(q).is_err())
        .collect())
}

/// Far cubes with no close 𝒢̃-neighbour.
pub fn far_without_close_neighbor(tess: &CoarseTess, labels: &CubeLabels) -> Vec<usize> {
    let Some(regions) = &labels.regions else { return Vec::new() };
    let lat = tess.lattice();
    let offsets = lat.offsets(tess.tilde_reach());
    (0..regions.len())
        .filter(|&q| regions[q] == Region::Far)
        .filter(|&q| {
            let c = lat.coords(q);
            !offsets.iter().any(|o| regions[lat.shifted(&c, o)] == Region::Close)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::build_tessellations;
    use super::*;
    use crate::geometry::GeoParams;
    use crate::tessellation::Reach;

    fn tess(c: f64, r: f64) -> CoarseTess {
        build_tessellations(&GeoParams::new(2, r).unwrap(), c).unwrap().0
    }

    /// One point at the center of every cube except `holes`.
    fn points_except(t: &CoarseTess, holes: &[usize]) -> Vec<f64> {
        (0..t.cube_count())
            .filter(|q| !holes.contains(q))
            .flat_map(|q| t.center(q))
            .collect()
    }

    #[test]
    fn all_full_is_all_sea() {
        let t = tess(3.5, 0.05);
        let l = classify_regions(&t, classify_fullness(&t, &points_except(&t, &[]), 1)).unwrap();
        assert_eq!(l.sea_size, t.cube_count());
        assert!(l.components.is_empty());
    }

    #[test]
    fn isolated_nonfull_cube_is_close() {
        let t = tess(3.5, 0.05);
        let hole = t.lattice().id(&[20, 30]);
        let l = classify_regions(&t, classify_fullness(&t, &points_except(&t, &[hole]), 1)).unwrap();
        assert_eq!(l.region(hole), Some(Region::Close));
        assert!(l.cubes_in(Region::Far).is_empty());
        assert_eq!(l.components, vec![vec![hole]]);
    }

    #[test]
    fn enclosed_full_cube_is_far() {
        // reach of 𝒢̃ is 1.5 cubes: a ring of width one around a cube cuts it off
        let t = tess(3.5, 0.05);
        let lat = t.lattice();
        let center = lat.id(&[30, 30]);
        let ring: Vec<usize> = lat
            .offsets(Reach::Chebyshev(1))
            .iter()
            .map(|o| lat.shifted(&[30, 30], o))
            .collect();
        let l = classify_regions(&t, classify_fullness(&t, &points_except(&t, &ring), 1)).unwrap();
        assert_eq!(l.region(center), Some(Region::Far));
        assert!(l.full[center]);
        for &q in &ring {
            assert_eq!(l.region(q), Some(Region::Close));
        }
        assert_eq!(l.far_clusters.len(), 1);
        assert_eq!(l.far_clusters[0].owner, Some(0));
        assert_eq!(l.far_sets[0], vec![center]);
        assert!(far_without_close_neighbor(&t, &l).is_empty());
        assert!(cutoff_outside_blow_up(&t, &l, 0).unwrap().is_empty());
    }

    #[test]
    fn no_points_is_too_sparse() {
        let t = tess(3.5, 0.05);
        let l = classify_fullness(&t, &[], 1);
        assert_eq!(l.components.len(), 1);
        assert!(!l.diagnostics.is_empty());
        match classify_regions(&t, l) {
            Err(GeoError::Regime { code, .. }) => assert_eq!(code, REGIME_TOO_SPARSE),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blow_up_unit_dilation() {
        let t = tess(3.5, 0.05);
        let q = t.lattice().id(&[0, 0]);
        assert_eq!(blow_up(&t, &[q], 0), vec![q]);
        // smallest b with b·r/c at least one cube side
        let b = (t.c * t.side / t.params.r).ceil() as usize;
        assert_eq!(blow_up(&t, &[q], b).len(), 9);
    }

    #[test]
    fn blow_up_matches_distance_filter() {
        let t = tess(3.5, 0.05);
        let lat = t.lattice();
        let set: Vec<usize> = (0..lat.cell_count()).filter(|q| q * 7919 % 211 == 0).collect();
        for b in 0..6 {
            let steps = (b as f64 * t.params.r / (t.c * t.side) + 1e-9).floor() as usize;
            let want: Vec<usize> = (0..lat.cell_count())
                .filter(|&q| set.iter().any(|&s| lat.adjacent(q, s, Reach::Chebyshev(steps))))
                .collect();
            let got = blow_up(&t, &set, b);
            assert_eq!(got, want, "b = {b}");
            assert!(set.iter().all(|s| got.binary_search(s).is_ok()));
        }
    }

    #[test]
    fn fullness_is_monotone() {
        let t = tess(3.5, 0.05);
        let pts = points_except(&t, &[3, 4, 5]);
        let more: Vec<f64> = pts.iter().chain(t.center(3).iter()).copied().collect();
        let a = classify_fullness(&t, &pts, 1);
        let b = classify_fullness(&t, &more, 1);
        assert!(a.full.iter().zip(&b.full).all(|(&x, &y)| !x || y));
    }

    #[test]
    fn labels_csv_has_header_and_rows() {
        let t = tess(3.5, 0.05);
        let l = classify_regions(&t, classify_fullness(&t, &points_except(&t, &[0]), 1)).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("cube,x1,x2,count,full,component,region"));
        assert_eq!(lines.next(), Some("0,0,0,0,0,0,CLOSE"));
        assert_eq!(text.lines().count(), t.cube_count() + 1);
    }
}
