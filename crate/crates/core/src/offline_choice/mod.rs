//! Offline 2-choice: a choice set built from G_{2τ₂,ₖ} in three stages.
//!
//! Stage 1 handles pairs with a member near far cubes (cases F1–F7), stage 2
//! orients the multigraph of the remaining pairs over coarse cubes, and
//! stage 3 extends the set online past τ₂,ₖ.

mod orient;
mod stage1;
mod stage2;
mod stage3;

pub use orient::{orient_balanced, Orientation};
pub use stage1::{build_cs1, Conflict, ConflictKind, FarComponentPlan, Stage1Report};
pub use stage2::{build_cs2, Stage2Report};
pub use stage3::{extend_cs3, Cs3Config, Cs3Run};

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spatial_graph::{DynamicGeoGraph, NeighborLists};
use crate::tessellation::{
    build_tessellations, classify_fullness, classify_regions, default_alpha, default_aspect, fullness_threshold_k,
    CoarseTess, CubeLabels,
};
use crate::GeoParams;

/// Cases of the stage-1 algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

impl Case {
    pub const ALL: [Case; 7] = [Case::F1, Case::F2, Case::F3, Case::F4, Case::F5, Case::F6, Case::F7];
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Which step put a vertex into the choice set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    None,
    Cs1(Case),
    Cs2,
    Cs3,
    /// Stage-1 conflict resolved by the fallback rule.
    Fallback,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::None => write!(f, "NONE"),
            Stage::Cs1(c) => write!(f, "CS1/{c}"),
            Stage::Cs2 => write!(f, "CS2"),
            Stage::Cs3 => write!(f, "CS3"),
            Stage::Fallback => write!(f, "FALLBACK"),
        }
    }
}

/// Per-vertex state of the partner pairs. Pair i (0-based) is vertices
/// 2i and 2i+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerTable {
    /// Coarse cube of every vertex.
    pub cube: Vec<usize>,
    /// Degree in G_{2τ₂} of every vertex.
    pub degree: Vec<usize>,
    pub member: Vec<bool>,
    pub stage: Vec<Stage>,
}

impl PartnerTable {
    /// A table with no members; `graph` must hold an even number of points.
    pub fn new(graph: &DynamicGeoGraph, tess: &CoarseTess) -> Self {
        let n = graph.len();
        debug_assert!(n % 2 == 0, "odd vertex count {n}");
        Self {
            cube: (0..n).map(|v| tess.cube_of(graph.point(v))).collect(),
            degree: (0..n).map(|v| graph.degree(v)).collect(),
            member: vec![false; n],
            stage: vec![Stage::None; n],
        }
    }

    pub fn pair_count(&self) -> usize {
        self.member.len() / 2
    }

    pub fn partner(v: usize) -> usize {
        v ^ 1
    }

    pub fn set(&mut self, v: usize, stage: Stage) {
        self.member[v] = true;
        self.stage[v] = stage;
    }

    pub fn clear(&mut self, v: usize) {
        self.member[v] = false;
        self.stage[v] = Stage::None;
    }

    /// Vertex ids of the current members.
    pub fn members(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&v| self.member[v]).collect()
    }

    /// Appends a new pair with the given coarse cubes and no member.
    pub fn push_pair(&mut self, cubes: [usize; 2]) {
        for q in cubes {
            self.cube.push(q);
            self.degree.push(0);
            self.member.push(false);
            self.stage.push(Stage::None);
        }
    }
}

/// A pair that does not hold exactly one member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub pair: usize,
    pub members: [bool; 2],
    pub stages: [Stage; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks exactly one member per pair for pairs `0..upto_pairs`.
pub fn validate_choice_set(table: &PartnerTable, upto_pairs: usize) -> ValidationReport {
    let upto = upto_pairs.min(table.pair_count());
    let violations = (0..upto)
        .filter_map(|i| {
            let m = [table.member[2 * i], table.member[2 * i + 1]];
            (m[0] == m[1]).then(|| Violation {
                pair: i,
                members: m,
                stages: [table.stage[2 * i], table.stage[2 * i + 1]],
            })
        })
        .collect();
    ValidationReport {
        pairs_checked: upto,
        violations,
    }
}

/// Parameters of the offline construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfflineConfig {
    pub k: usize,
    pub c: f64,
    /// Fullness threshold M.
    pub threshold: usize,
}

impl OfflineConfig {
    /// Aspect 8√d and M = max(k, 3k² + ⌈2d/α⌉) with α = d/4.
    pub fn new(params: &GeoParams, k: usize) -> Self {
        Self {
            k,
            c: default_aspect(params.d),
            threshold: fullness_threshold_k(k, params.d, default_alpha(params.d)),
        }
    }
}

/// Result of stages 1 and 2 on G_{2τ₂}.
#[derive(Debug, Clone)]
pub struct OfflineConstruction {
    pub tess: CoarseTess,
    pub labels: CubeLabels,
    pub table: PartnerTable,
    pub stage1: Stage1Report,
    pub stage2: Stage2Report,
}

impl OfflineConstruction {
    /// Fraction of pairs meeting ℬ that needed the conflict fallback.
    pub fn conflict_rate(&self) -> f64 {
        if self.stage1.b_pairs == 0 {
            0.0
        } else {
            self.stage1.conflicts.len() as f64 / self.stage1.b_pairs as f64
        }
    }

    /// One JSON line per processed component, then one per conflict.
    pub fn write_audit_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for plan in &self.stage1.plans {
            let line = serde_json::json!({
                "component": plan.component,
                "case": plan.case.map(|c| c.to_string()),
                "far_cubes": plan.far_cubes.len(),
                "assigned": plan.assigned,
                "deleted": plan.deleted,
                "partner_component": plan.partner_component,
            });
            writeln!(w, "{line}")?;
        }
        for c in &self.stage1.conflicts {
            let line = serde_json::json!({
                "conflict_pair": c.pair,
                "kind": format!("{:?}", c.kind),
                "component": c.component,
                "kept": c.kept,
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Classifies cubes wrt the points of `graph` and builds CS₁ ∪ CS₂.
pub fn construct_offline(graph: &DynamicGeoGraph, cfg: &OfflineConfig) -> Result<OfflineConstruction> {
    let (tess, _) = build_tessellations(graph.params(), cfg.c)?;
    let labels = classify_regions(&tess, classify_fullness(&tess, graph.flat_coords(), cfg.threshold))?;
    let mut table = PartnerTable::new(graph, &tess);
    let stage1 = build_cs1(graph, &tess, &labels, cfg.k, &mut table)?;
    let stage2 = build_cs2(&tess, &stage1.in_b, &mut table);
    Ok(OfflineConstruction {
        tess,
        labels,
        table,
        stage1,
        stage2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(member: &[bool]) -> PartnerTable {
        PartnerTable {
            cube: vec![0; member.len()],
            degree: vec![0; member.len()],
            member: member.to_vec(),
            stage: member.iter().map(|&m| if m { Stage::Cs2 } else { Stage::None }).collect(),
        }
    }

    #[test]
    fn valid_set_has_no_violations() {
        let t = table(&[true, false, false, true, true, false]);
        let rep = validate_choice_set(&t, 3);
        assert!(rep.is_valid());
        assert_eq!(rep.pairs_checked, 3);
    }

    #[test]
    fn missing_pair_is_reported_with_none() {
        let t = table(&[true, false, false, false, true, false]);
        let rep = validate_choice_set(&t, 3);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].pair, 1);
        assert_eq!(rep.violations[0].stages, [Stage::None, Stage::None]);
        assert_eq!(Stage::None.to_string(), "NONE");
    }

    #[test]
    fn any_single_flag_flip_is_detected() {
        use rand::Rng;
        let mut rng = crate::geometry::trial_rng(5, 0);
        for _ in 0..200 {
            let n = rng.random_range(1..40usize);
            let member: Vec<bool> = (0..n)
                .flat_map(|_| {
                    let f = rng.random_bool(0.5);
                    [f, !f]
                })
                .collect();
            let mut t = table(&member);
            assert!(validate_choice_set(&t, n).is_valid());
            let v = rng.random_range(0..2 * n);
            t.member[v] = !t.member[v];
            let rep = validate_choice_set(&t, n);
            assert_eq!(rep.violations.len(), 1);
            assert_eq!(rep.violations[0].pair, v / 2);
        }
    }
}
