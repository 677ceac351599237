//! Stage 2: pairs away from every far-cube blow-up.

use serde::{Deserialize, Serialize};

use crate::tessellation::CoarseTess;

use super::orient::orient_balanced;
use super::{PartnerTable, Stage};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Report {
    /// Pairs assigned in this stage (edges of 𝓜_s).
    pub pairs: usize,
    /// Pairs with both members in one cube.
    pub loops: usize,
    /// Largest |indeg − outdeg| over cubes; at most 1 by construction.
    pub max_imbalance: usize,
}

/// Every pair without a member in ℬ becomes an edge between the cubes of
/// its members; after a balanced orientation the member in the tail cube
/// joins CS₂. Loops keep the first member.
pub fn build_cs2(tess: &CoarseTess, in_b: &[bool], table: &mut PartnerTable) -> Stage2Report {
    let n_cubes = tess.cube_count();
    let mut pairs = Vec::new();
    let mut edges = Vec::new();
    for i in 0..table.pair_count() {
        let (a, b) = (2 * i, 2 * i + 1);
        if in_b[a] || in_b[b] {
            continue;
        }
        pairs.push(i);
        edges.push((table.cube[a], table.cube[b]));
    }
    let orientation = orient_balanced(n_cubes, &edges);
    let mut loops = 0;
    for (e, &i) in pairs.iter().enumerate() {
        let (u, v) = edges[e];
        if u == v {
            loops += 1;
        }
        let chosen = if orientation.forward[e] { 2 * i } else { 2 * i + 1 };
        table.set(chosen, Stage::Cs2);
    }
    let (out, inn) = orientation.degrees(n_cubes, &edges);
    let max_imbalance = out.iter().zip(&inn).map(|(&o, &i)| o.abs_diff(i)).max().unwrap_or(0);
    Stage2Report {
        pairs: pairs.len(),
        loops,
        max_imbalance,
    }
}
