//! Stage 1: vertices in the 2c-blow-ups of nonfull components that enclose
//! far cubes.
//!
//! Components are processed in the order of their smallest cube. A component
//! N with no vertex whose partner lies in ℬ takes F1 or F2; a component with
//! exactly one such vertex Y is processed jointly with the component N̄ of
//! its partner Ȳ (F3–F7). Pairs that end with both members are resolved by
//! the fallback rule and recorded; nothing is dropped silently.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::spatial_graph::{find_separated_sets, DynamicGeoGraph, NeighborLists, MAX_SEPARATED_POOL};
use crate::tessellation::{blow_up_by, cube_set_diameter, CoarseTess, CubeLabels, Region};

use super::{Case, PartnerTable, Stage};

/// Far sets with more cubes than this are treated as having large diameter.
const DIAMETER_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConflictKind {
    /// Both members were demanded by the case rules.
    DoubleDemand,
    /// A component involved had two or more vertices with partners in ℬ.
    MultiplePartners,
    /// Neither member was assigned.
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub pair: usize,
    pub kind: ConflictKind,
    /// Component whose processing assigned the pair last.
    pub component: Option<usize>,
    /// The member kept by the fallback.
    pub kept: usize,
}

/// What stage 1 did with one nonfull component enclosing far cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarComponentPlan {
    pub component: usize,
    pub far_cubes: Vec<usize>,
    /// diam(⋃F(N)); None when too many cubes to measure.
    pub far_diameter: Option<f64>,
    /// Vertices in N_{2c} whose partner lies in ℬ.
    pub p_set: Vec<usize>,
    /// None when the component was handled together with an earlier one.
    pub case: Option<Case>,
    pub partner_component: Option<usize>,
    /// Vertices deleted by the separated-set procedure (V or V̄).
    pub deleted: Vec<usize>,
    /// Vertices this step put into CS₁ (counting partners).
    pub assigned: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stage1Report {
    pub plans: Vec<FarComponentPlan>,
    pub conflicts: Vec<Conflict>,
    /// Vertex lies in ℬ.
    pub in_b: Vec<bool>,
    /// Pairs with at least one member in ℬ.
    pub b_pairs: usize,
    pub case_counts: BTreeMap<Case, usize>,
    pub diagnostics: Vec<String>,
}

struct Component {
    id: usize,
    blown: Vec<usize>,
    far: Vec<usize>,
    far_diameter: Option<f64>,
}

struct Ctx<'a> {
    graph: &'a DynamicGeoGraph,
    regions: &'a [Region],
    table: &'a PartnerTable,
    k: usize,
    far_cube: Vec<bool>,
}

impl Ctx<'_> {
    fn is_far_vertex(&self, v: usize, comp: &Component) -> bool {
        comp.far.binary_search(&v).is_ok()
    }

    /// Degree bound for members of a separated set of at most
    /// MAX_SEPARATED_POOL vertices.
    fn degree_cap(&self) -> usize {
        MAX_SEPARATED_POOL + self.k - 2
    }

    fn alive_degree(&self, v: usize, alive: &[bool]) -> usize {
        self.graph.neighbors(v).iter().filter(|&&u| alive[u as usize]).count()
    }

    fn pool_error(&self, step: &'static str, comp: &Component, pool: usize) -> GeoError {
        let cubes: Vec<usize> = comp.far.iter().map(|&v| self.table.cube[v]).take(16).collect();
        GeoError::Construction {
            step,
            component: Some(comp.id),
            detail: format!(
                "separated-set pool of {pool} vertices exceeds {MAX_SEPARATED_POOL}; {} blown-up vertices, {} far vertices, far cubes (first 16) {cubes:?}",
                comp.blown.len(),
                comp.far.len()
            ),
        }
    }

    /// Whether some (k−1)-separated set lies inside F(N).
    fn far_has_separated(&self, comp: &Component) -> Result<bool> {
        let alive = vec![true; self.graph.len()];
        let pool: Vec<usize> = comp
            .far
            .iter()
            .copied()
            .filter(|&v| self.alive_degree(v, &alive) <= self.degree_cap())
            .collect();
        if pool.len() > MAX_SEPARATED_POOL {
            return Err(self.pool_error("stage1-far-check", comp, pool.len()));
        }
        Ok(!find_separated_sets(self.graph, &pool, self.k - 1, MAX_SEPARATED_POOL, None)?.is_empty())
    }

    /// Deletes (k−1)-separated sets within N_{2c} until none is left, always
    /// taking the lexicographically smallest inclusion-minimal one. Sea
    /// vertices are not searched.
    fn delete_separated(&self, comp: &Component) -> Result<Vec<usize>> {
        let mut alive = vec![true; self.graph.len()];
        let mut deleted = Vec::new();
        loop {
            let pool: Vec<usize> = comp
                .blown
                .iter()
                .copied()
                .filter(|&v| {
                    alive[v]
                        && self.regions[self.table.cube[v]] != Region::Sea
                        && self.alive_degree(v, &alive) <= self.degree_cap()
                })
                .collect();
            if pool.len() > MAX_SEPARATED_POOL {
                return Err(self.pool_error("stage1-deletion", comp, pool.len()));
            }
            let sets = find_separated_sets(self.graph, &pool, self.k - 1, MAX_SEPARATED_POOL, Some(&alive))?;
            let Some(first) = sets.first() else { break };
            for &v in &first.vertices {
                alive[v] = false;
                deleted.push(v);
            }
        }
        deleted.sort_unstable();
        Ok(deleted)
    }
}

/// Pending assignments: vertices demanded by some rule, with the case and
/// component that demanded them last.
struct Demands {
    by: Vec<Option<(Case, usize)>>,
}

impl Demands {
    /// Adds `keep` and the partners of `give_away`; returns how many.
    fn apply(&mut self, keep: &[usize], give_away: &[usize], case: Case, comp: usize) -> usize {
        for &v in keep {
            self.by[v] = Some((case, comp));
        }
        for &v in give_away {
            self.by[PartnerTable::partner(v)] = Some((case, comp));
        }
        keep.len() + give_away.len()
    }
}

fn minus(a: &[usize], remove: &[&[usize]]) -> Vec<usize> {
    a.iter()
        .copied()
        .filter(|v| remove.iter().all(|r| r.binary_search(v).is_err()))
        .collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Builds CS₁ into `table` from G_{2τ₂} and region labels of its points.
pub fn build_cs1(
    graph: &DynamicGeoGraph,
    tess: &CoarseTess,
    labels: &CubeLabels,
    k: usize,
    table: &mut PartnerTable,
) -> Result<Stage1Report> {
    if k == 0 {
        return Err(GeoError::Usage("k must be at least 1".into()));
    }
    let regions = labels
        .regions
        .as_deref()
        .ok_or_else(|| GeoError::Usage("stage 1 needs sea/close/far regions".into()))?;
    let n = graph.len();
    if n % 2 == 1 || table.member.len() != n {
        return Err(GeoError::Usage(format!(
            "graph has {n} vertices, table {}; both must be equal and even",
            table.member.len()
        )));
    }
    let lat = tess.lattice();

    // vertices grouped by cube
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (table.cube[v], v));
    let vertices_in = |cubes: &[usize]| -> Vec<usize> {
        let mut out = Vec::new();
        for &q in cubes {
            let lo = order.partition_point(|&v| table.cube[v] < q);
            let hi = order.partition_point(|&v| table.cube[v] <= q);
            out.extend_from_slice(&order[lo..hi]);
        }
        out.sort_unstable();
        out
    };

    let mut far_cube = vec![false; tess.cube_count()];
    let mut comps: Vec<Component> = Vec::new();
    for (id, far_cubes) in labels.far_sets.iter().enumerate() {
        if far_cubes.is_empty() {
            continue;
        }
        for &q in far_cubes {
            far_cube[q] = true;
        }
        let base = union(&labels.components[id], far_cubes);
        let blown_cubes = blow_up_by(tess, &base, 2.0 * tess.c);
        let far_diameter =
            (far_cubes.len() <= DIAMETER_LIMIT).then(|| cube_set_diameter(&lat, far_cubes, tess.side));
        comps.push(Component {
            id,
            blown: vertices_in(&blown_cubes),
            far: vertices_in(far_cubes),
            far_diameter,
        });
    }

    let mut report = Stage1Report {
        in_b: vec![false; n],
        ..Default::default()
    };
    // owner of each vertex in ℬ: first component (in order) whose blow-up holds it
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (ci, c) in comps.iter().enumerate() {
        for &v in &c.blown {
            report.in_b[v] = true;
            if owner[v].is_none() {
                owner[v] = Some(ci);
            } else {
                report.diagnostics.push(format!(
                    "vertex {v} lies in the blow-ups of components {} and {}",
                    comps[owner[v].unwrap()].id,
                    c.id
                ));
            }
        }
    }
    report.b_pairs = (0..n / 2).filter(|&i| report.in_b[2 * i] || report.in_b[2 * i + 1]).count();

    let ctx = Ctx {
        graph,
        regions,
        table,
        k,
        far_cube,
    };
    let r10 = tess.params.r / 10.0;
    let mut demands = Demands { by: vec![None; n] };
    let mut processed = vec![false; comps.len()];
    let mut multi = vec![false; comps.len()];

    for ci in 0..comps.len() {
        let c = &comps[ci];
        let p_set: Vec<usize> = c
            .blown
            .iter()
            .copied()
            .filter(|&v| report.in_b[PartnerTable::partner(v)])
            .collect();
        let mut plan = FarComponentPlan {
            component: c.id,
            far_cubes: labels.far_sets[c.id].clone(),
            far_diameter: c.far_diameter,
            p_set: p_set.clone(),
            case: None,
            partner_component: None,
            deleted: Vec::new(),
            assigned: 0,
        };
        if processed[ci] {
            report.plans.push(plan);
            continue;
        }
        processed[ci] = true;
        if p_set.len() >= 2 {
            multi[ci] = true;
            report.diagnostics.push(format!(
                "component {} has {} vertices with partners in B; processed alone",
                c.id,
                p_set.len()
            ));
        }
        // joint processing needs exactly one Y whose partner's component is unprocessed
        let joint = match p_set.as_slice() {
            [y] => {
                let ybar = PartnerTable::partner(*y);
                let cj = owner[ybar].expect("partner lies in B");
                if cj == ci || processed[cj] {
                    report.diagnostics.push(format!(
                        "component {}: partner component {} already handled; processed alone",
                        c.id, comps[cj].id
                    ));
                    multi[ci] = true;
                    None
                } else {
                    Some((*y, ybar, cj))
                }
            }
            _ => None,
        };

        match joint {
            None => {
                let large = c.far_diameter.is_none_or(|dm| dm >= r10);
                if large {
                    let keep = minus(&c.blown, &[&c.far]);
                    plan.assigned = demands.apply(&keep, &c.far, Case::F1, c.id);
                    plan.case = Some(Case::F1);
                } else if !ctx.far_has_separated(c)? {
                    plan.assigned = demands.apply(&c.blown, &[], Case::F2, c.id);
                    plan.case = Some(Case::F2);
                } else {
                    let v = ctx.delete_separated(c)?;
                    let keep = minus(&c.blown, &[&v]);
                    plan.assigned = demands.apply(&keep, &v, Case::F2, c.id);
                    plan.deleted = v;
                    plan.case = Some(Case::F2);
                }
            }
            Some((y, ybar, cj)) => {
                processed[cj] = true;
                let d = &comps[cj];
                plan.partner_component = Some(d.id);
                let both = union(&c.blown, &d.blown);
                let y_far = ctx.is_far_vertex(y, c);
                let ybar_far = ctx.is_far_vertex(ybar, d);
                let (case, keep, give): (Case, Vec<usize>, Vec<usize>) = match (y_far, ybar_far) {
                    (false, false) => {
                        let keep = minus(&both, &[&[ybar], &c.far, &d.far]);
                        (Case::F3, keep, union(&c.far, &d.far))
                    }
                    (false, true) | (true, false) => {
                        let keep = minus(&both, &[&c.far, &d.far]);
                        (Case::F4, keep, union(&c.far, &d.far))
                    }
                    (true, true) => {
                        let sep_n = ctx.far_has_separated(c)?;
                        let sep_nbar = ctx.far_has_separated(d)?;
                        match (sep_n, sep_nbar) {
                            (false, false) => (Case::F5, minus(&both, &[&c.far]), c.far.clone()),
                            (true, false) => (Case::F6, minus(&both, &[&c.far]), c.far.clone()),
                            (false, true) => (Case::F6, minus(&both, &[&d.far]), d.far.clone()),
                            (true, true) => {
                                let v = ctx.delete_separated(c)?;
                                let vbar = ctx.delete_separated(d)?;
                                let all = union(&v, &vbar);
                                plan.deleted = all.clone();
                                (Case::F7, minus(&both, &[&all]), all)
                            }
                        }
                    }
                };
                plan.assigned = demands.apply(&keep, &give, case, c.id);
                plan.case = Some(case);
            }
        }
        if let Some(case) = plan.case {
            *report.case_counts.entry(case).or_default() += 1;
        }
        report.plans.push(plan);
    }

    // commit, resolving pairs that were demanded twice or not at all
    let far_nbrs = |v: usize| {
        graph
            .neighbors(v)
            .iter()
            .filter(|&&u| ctx.far_cube[ctx.table.cube[u as usize]])
            .count()
    };
    let comp_index: BTreeMap<usize, usize> = comps.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let mut commits: Vec<(usize, Stage)> = Vec::new();
    for i in 0..n / 2 {
        let (a, b) = (2 * i, 2 * i + 1);
        if !(report.in_b[a] || report.in_b[b]) {
            continue;
        }
        match (demands.by[a], demands.by[b]) {
            (Some((ca, _)), None) => commits.push((a, Stage::Cs1(ca))),
            (None, Some((cb, _))) => commits.push((b, Stage::Cs1(cb))),
            (da, db) => {
                let kept = if far_nbrs(b) > far_nbrs(a) { b } else { a };
                let component = da.or(db).map(|(_, comp)| comp);
                let involved_multi = [da, db]
                    .iter()
                    .flatten()
                    .any(|&(_, comp)| comp_index.get(&comp).is_some_and(|&ci| multi[ci]));
                let kind = if da.is_none() {
                    ConflictKind::Unassigned
                } else if involved_multi {
                    ConflictKind::MultiplePartners
                } else {
                    ConflictKind::DoubleDemand
                };
                report.conflicts.push(Conflict {
                    pair: i,
                    kind,
                    component,
                    kept,
                });
                commits.push((kept, Stage::Fallback));
            }
        }
    }
    drop(ctx);
    for (v, stage) in commits {
        table.set(v, stage);
    }
    Ok(report)
}
