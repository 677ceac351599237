//! The reference construction: far-reaching paths and absorbing paths per
//! nonfull component, then a traversal of the doubled spanning tree of the
//! sea that drains every sea cube on its last visit.

use std::collections::BTreeMap;

use crate::error::{GeoError, Result};
use crate::spatial_graph::{DynamicGeoGraph, NeighborLists};
use crate::tessellation::{blow_up_by, CoarseTess, CubeLabels, Region};

use super::flow::two_disjoint_paths;
use super::{verify_cycle, AbsorbingPath, FarPath, HamiltonPlan, SeaUsage};

fn stuck(step: &'static str, component: Option<usize>, detail: impl Into<String>) -> GeoError {
    GeoError::Construction {
        step,
        component,
        detail: detail.into(),
    }
}

struct State<'a> {
    graph: &'a DynamicGeoGraph,
    cube_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    used: Vec<bool>,
    far_use: Vec<u32>,
    anchor_use: Vec<u32>,
    /// Step-4 paths keyed by the sea cube holding both of their ends.
    attached: BTreeMap<usize, Vec<Vec<usize>>>,
}

impl State<'_> {
    fn unused_in(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.members[q].iter().copied().filter(|&v| !self.used[v])
    }

    fn take(&mut self, path: &[usize], regions: &[Region]) {
        for &v in path {
            debug_assert!(!self.used[v], "vertex {v} used twice");
            self.used[v] = true;
            let q = self.cube_of[v];
            if regions[q] == Region::Sea {
                self.far_use[q] += 1;
            }
        }
    }
}

/// Builds a Hamilton cycle of `graph` from region labels computed with the
/// Hamiltonicity threshold. The result is verified before it is returned;
/// any step that cannot proceed yields a `Construction` error naming it.
pub fn build_reference_cycle(graph: &DynamicGeoGraph, tess: &CoarseTess, labels: &CubeLabels) -> Result<HamiltonPlan> {
    let regions = labels
        .regions
        .as_deref()
        .ok_or_else(|| stuck("regions", None, "region classification missing"))?;
    let n_cubes = tess.cube_count();
    if regions.len() != n_cubes {
        return Err(GeoError::Usage(format!(
            "labels cover {} cubes, tessellation has {n_cubes}",
            regions.len()
        )));
    }
    let n = graph.len();
    let cube_of: Vec<usize> = (0..n).map(|v| tess.cube_of(graph.point(v))).collect();
    let mut members = vec![Vec::new(); n_cubes];
    for (v, &q) in cube_of.iter().enumerate() {
        members[q].push(v);
    }
    let mut st = State {
        graph,
        cube_of,
        members,
        used: vec![false; n],
        far_use: vec![0; n_cubes],
        anchor_use: vec![0; n_cubes],
        attached: BTreeMap::new(),
    };
    let lat = tess.lattice();
    let offsets = lat.offsets(tess.tilde_reach());
    let sea_neighbors = |q: usize| -> Vec<usize> {
        let c = lat.coords(q);
        let mut out: Vec<usize> = offsets
            .iter()
            .map(|o| lat.shifted(&c, o))
            .filter(|&p| regions[p] == Region::Sea)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };

    // Step 4
    let mut far_paths = Vec::new();
    let mut absorbing_paths = Vec::new();
    for (ci, comp) in labels.components.iter().enumerate() {
        let far_cubes = labels.far_sets.get(ci).map(Vec::as_slice).unwrap_or(&[]);
        let far_vs: Vec<usize> = far_cubes.iter().flat_map(|&q| st.members[q].iter().copied()).collect();
        if !far_vs.is_empty() {
            let path = far_reaching_path(&st, tess, regions, ci, comp, far_cubes, &far_vs)?;
            st.take(&path.vertices, regions);
            st.attached.entry(path.anchor_cube).or_default().push(path.vertices.clone());
            far_paths.push(path);
        }
        for &p in comp {
            let left: Vec<usize> = st.unused_in(p).collect();
            if left.is_empty() {
                continue;
            }
            if regions[p] != Region::Close {
                return Err(stuck(
                    "step4-close",
                    Some(ci),
                    format!("{} cube {p} keeps {} vertices outside the far-reaching path", regions[p].as_str(), left.len()),
                ));
            }
            let anchor = sea_neighbors(p)
                .into_iter()
                .map(|q| (st.unused_in(q).count(), q))
                .max_by_key(|&(free, q)| (free, std::cmp::Reverse(q)))
                .filter(|&(free, _)| free >= 2)
                .map(|(_, q)| q)
                .ok_or_else(|| stuck("step4-anchor", Some(ci), format!("close cube {p} has no sea neighbour with two free vertices")))?;
            let ends: Vec<usize> = st.unused_in(anchor).take(2).collect();
            let mut vertices = Vec::with_capacity(left.len() + 2);
            vertices.push(ends[0]);
            vertices.extend_from_slice(&left);
            vertices.push(ends[1]);
            for &v in &vertices {
                st.used[v] = true;
            }
            st.anchor_use[anchor] += 2;
            st.attached.entry(anchor).or_default().push(vertices.clone());
            absorbing_paths.push(AbsorbingPath {
                component: ci,
                close_cube: p,
                anchor_cube: anchor,
                vertices,
            });
        }
    }
    if let Some(v) = (0..n).find(|&v| !st.used[v] && regions[st.cube_of[v]] != Region::Sea) {
        let q = st.cube_of[v];
        return Err(stuck(
            "step4-unabsorbed",
            labels.component_of(q),
            format!("vertex {v} in {} cube {q} belongs to no far set", regions[q].as_str()),
        ));
    }

    // Step 5: doubled BFS tree of the sea
    let sea: Vec<usize> = (0..n_cubes).filter(|&q| regions[q] == Region::Sea).collect();
    let root = *sea.first().ok_or_else(|| stuck("step5-tree", None, "empty sea"))?;
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut seen = vec![false; n_cubes];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut reached = 1;
    while let Some(q) = queue.pop_front() {
        for p in sea_neighbors(q) {
            if !seen[p] {
                seen[p] = true;
                reached += 1;
                parent.insert(p, q);
                children.entry(q).or_default().push(p);
                queue.push_back(p);
            }
        }
    }
    if reached != sea.len() {
        return Err(stuck("step5-tree", None, format!("BFS reached {reached} of {} sea cubes", sea.len())));
    }
    let mut tour = vec![root];
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let (q, i) = *top;
        match children.get(&q).and_then(|c| c.get(i)) {
            Some(&child) => {
                top.1 += 1;
                tour.push(child);
                stack.push((child, 0));
            }
            None => {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    tour.push(p);
                }
            }
        }
    }
    if tour.len() > 1 {
        tour.pop();
    }

    let mut visits = vec![0u32; n_cubes];
    let mut last = vec![0usize; n_cubes];
    for (j, &q) in tour.iter().enumerate() {
        visits[q] += 1;
        last[q] = j;
    }
    let mut traversal = vec![0u32; n_cubes];
    let mut cycle = Vec::with_capacity(n);
    for (j, &q) in tour.iter().enumerate() {
        if last[q] == j {
            let rest: Vec<usize> = st.unused_in(q).collect();
            let paths = st.attached.remove(&q).unwrap_or_default();
            if rest.is_empty() && paths.is_empty() {
                return Err(stuck("step5-budget", None, format!("sea cube {q} is empty on its last visit")));
            }
            traversal[q] += rest.len() as u32;
            for &v in &rest {
                st.used[v] = true;
            }
            cycle.extend(rest);
            for p in paths {
                cycle.extend(p);
            }
        } else {
            let v = st
                .unused_in(q)
                .next()
                .ok_or_else(|| stuck("step5-budget", None, format!("sea cube {q} ran out at visit {j}")))?;
            st.used[v] = true;
            traversal[q] += 1;
            cycle.push(v);
        }
    }
    let sea_usage = sea
        .iter()
        .map(|&q| SeaUsage {
            cube: q,
            available: st.members[q].len(),
            far_path: st.far_use[q] as usize,
            anchors: st.anchor_use[q] as usize,
            visits: visits[q] as usize,
            traversal: traversal[q] as usize,
        })
        .collect();
    let plan = HamiltonPlan {
        threshold: labels.threshold,
        tree_root: root,
        tree_edges: parent.into_iter().collect(),
        tour,
        far_paths,
        absorbing_paths,
        sea_usage,
        cycle,
    };
    verify_cycle(st.graph, &plan.cycle)
        .map_err(|d| stuck("verify", None, format!("{}: {d:?}", d.code())))?;
    Ok(plan)
}

/// A path through every far vertex of component `ci` with both ends in one
/// sea cube of N′_{2c}, found from two disjoint attachments.
fn far_reaching_path(
    st: &State<'_>,
    tess: &CoarseTess,
    regions: &[Region],
    ci: usize,
    comp: &[usize],
    far_cubes: &[usize],
    far_vs: &[usize],
) -> Result<FarPath> {
    let g = st.graph;
    for (i, &a) in far_vs.iter().enumerate() {
        let nb = g.neighbors(a);
        if let Some(&b) = far_vs[i + 1..].iter().find(|&&b| !nb.contains(&(b as u32))) {
            return Err(stuck("step4-far-clique", Some(ci), format!("far vertices {a} and {b} are not adjacent")));
        }
    }
    let mut core: Vec<usize> = comp.iter().chain(far_cubes).copied().collect();
    core.sort_unstable();
    core.dedup();
    let zone = blow_up_by(tess, &core, 2.0 * tess.c);
    let lat = tess.lattice();
    let anchor_coords = lat.coords(far_cubes[0]);
    let mut candidates: Vec<(usize, usize)> = zone
        .iter()
        .copied()
        .filter(|&q| regions[q] == Region::Sea && st.unused_in(q).nth(1).is_some())
        .map(|q| {
            let gaps = lat.coords(q).iter().zip(&anchor_coords).map(|(&x, &y)| lat.axis_gap(x, y).pow(2)).sum();
            (gaps, q)
        })
        .collect();
    candidates.sort_unstable();

    let mut is_far = vec![false; st.used.len()];
    for &v in far_vs {
        is_far[v] = true;
    }
    for (_, s) in candidates {
        let sinks: Vec<usize> = st.unused_in(s).collect();
        let transit =
            |v: usize| !st.used[v] && !is_far[v] && zone.binary_search(&st.cube_of[v]).is_ok();
        let Some([p1, p2]) = two_disjoint_paths(g, &transit, far_vs, &sinks) else {
            continue;
        };
        let (f1, f2) = (p1[0], p2[0]);
        let mut vertices: Vec<usize> = p1.iter().rev().copied().collect();
        vertices.extend(far_vs.iter().copied().filter(|&v| v != f1 && v != f2));
        if f2 != f1 {
            vertices.push(f2);
        }
        vertices.extend_from_slice(&p2[1..]);
        return Ok(FarPath {
            component: ci,
            anchor_cube: s,
            vertices,
        });
    }
    Err(stuck(
        "step4-far-attach",
        Some(ci),
        format!("no sea cube of N'_2c admits two disjoint attachments for {} far vertices", far_vs.len()),
    ))
}
