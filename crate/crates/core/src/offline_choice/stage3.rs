//! Stage 3: online extension past τ₂,ₖ. X_{2i−1} is kept when it has at
//! least k neighbours in CS^{i−1} (and, for Hamiltonicity, does not land in
//! a rejected cube); otherwise X_{2i} is kept.

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::processes::PairStream;
use crate::spatial_graph::{is_k_connected, DynamicGeoGraph};
use crate::tessellation::CoarseTess;

use super::{PartnerTable, Stage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cs3Config {
    pub k: usize,
    /// Last pair index i (1-based) to process.
    pub horizon: usize,
    /// Pair indices i at which G(CS^i) is tested for k-connectivity.
    pub checkpoints: Vec<usize>,
    /// Coarse cubes where the first point is always discarded.
    pub reject_cubes: Option<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub struct Cs3Run {
    /// G(CS^i) at the horizon, vertices in insertion order.
    pub cs_graph: DynamicGeoGraph,
    /// (i, k-connected) at each checkpoint reached.
    pub checks: Vec<(usize, bool)>,
    pub first_chosen: usize,
    pub second_chosen: usize,
}

impl Cs3Run {
    pub fn all_connected(&self) -> bool {
        self.checks.iter().all(|&(_, ok)| ok)
    }
}

/// Extends the choice set in `table` (pairs 1..=τ₂ already assigned) with
/// pairs read from `stream`, which must sit right after X_{2τ₂}.
pub fn extend_cs3(
    base: &DynamicGeoGraph,
    tess: &CoarseTess,
    table: &mut PartnerTable,
    stream: &mut PairStream,
    cfg: &Cs3Config,
) -> Result<Cs3Run> {
    let tau2 = table.pair_count();
    if stream.next_index() != 2 * tau2 || base.len() != 2 * tau2 {
        return Err(GeoError::Usage(format!(
            "stream at index {} and graph of {} points do not follow {tau2} pairs",
            stream.next_index(),
            base.len()
        )));
    }
    if cfg.k == 0 {
        return Err(GeoError::Usage("k must be at least 1".into()));
    }
    let params = *base.params();
    let mut cs = DynamicGeoGraph::new(params);
    for v in table.members() {
        cs.insert_coords(base.point(v));
    }
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let mut next_check = checkpoints.partition_point(|&i| i < tau2);
    let mut run_checks = Vec::new();
    let check = |cs: &DynamicGeoGraph, i: usize, out: &mut Vec<(usize, bool)>| {
        out.push((i, is_k_connected(cs, cfg.k)));
    };
    if checkpoints.get(next_check) == Some(&tau2) {
        check(&cs, tau2, &mut run_checks);
        next_check += 1;
    }

    let (mut first_chosen, mut second_chosen) = (0, 0);
    let d = params.d;
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    for i in tau2 + 1..=cfg.horizon {
        stream.next_into(&mut a);
        stream.next_into(&mut b);
        let (qa, qb) = (tess.cube_of(&a), tess.cube_of(&b));
        let rejected = cfg.reject_cubes.as_ref().is_some_and(|rc| rc[qa]);
        let keep_first = !rejected && cs.neighbors_within(&a, params.r)?.len() >= cfg.k;
        table.push_pair([qa, qb]);
        let v = 2 * (i - 1) + usize::from(!keep_first);
        table.set(v, Stage::Cs3);
        if keep_first {
            first_chosen += 1;
            cs.insert_coords(&a);
        } else {
            second_chosen += 1;
            cs.insert_coords(&b);
        }
        while checkpoints.get(next_check) == Some(&i) {
            check(&cs, i, &mut run_checks);
            next_check += 1;
        }
    }
    Ok(Cs3Run {
        cs_graph: cs,
        checks: run_checks,
        first_chosen,
        second_chosen,
    })
}
