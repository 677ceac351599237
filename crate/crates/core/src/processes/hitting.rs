//! Incremental hitting times τ₁,ₖ (minimum degree ≥ k) and τ₂,ₖ (no partner
//! pair with both members of degree ≤ k−1 in G_{2t}).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::spatial_graph::{DynamicGeoGraph, NeighborLists};

/// Latched hitting times and the current bad pairs, keyed by k.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingRecord {
    pub tau1: BTreeMap<usize, usize>,
    pub tau2: BTreeMap<usize, usize>,
    /// 0-based pair indices whose members both have degree ≤ k−1.
    pub bad_pairs: BTreeMap<usize, Vec<usize>>,
}

impl HittingRecord {
    pub fn tau1(&self, k: usize) -> Option<usize> {
        self.tau1.get(&k).copied()
    }

    pub fn tau2(&self, k: usize) -> Option<usize> {
        self.tau2.get(&k).copied()
    }
}

/// Maintains, for each tracked k, the number of vertices of degree ≤ k−1
/// and the set of bad pairs, updated in O(new edges) per insertion.
#[derive(Debug, Clone)]
pub struct HittingTracker {
    ks: Vec<usize>,
    low: Vec<usize>,
    bad: Vec<BTreeSet<usize>>,
    tau1: Vec<Option<usize>>,
    tau2: Vec<Option<usize>>,
    t: usize,
}

impl HittingTracker {
    /// Tracks every distinct positive k in `ks`.
    pub fn new(ks: &[usize]) -> Self {
        let mut ks: Vec<usize> = ks.iter().copied().filter(|&k| k > 0).collect();
        ks.sort_unstable();
        ks.dedup();
        let n = ks.len();
        Self {
            ks,
            low: vec![0; n],
            bad: vec![BTreeSet::new(); n],
            tau1: vec![None; n],
            tau2: vec![None; n],
            t: 0,
        }
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    pub fn time(&self) -> usize {
        self.t
    }

    /// Updates after vertex `v` (the newest, `v == g.len() − 1`) was inserted.
    pub fn on_insert(&mut self, g: &DynamicGeoGraph, v: usize) {
        debug_assert_eq!(v + 1, g.len());
        self.t = v + 1;
        for &u in g.neighbors(v) {
            let u = u as usize;
            let du = g.degree(u);
            // u just moved from degree du−1 to du: it leaves the low set of k = du
            if let Ok(j) = self.ks.binary_search(&du) {
                self.low[j] -= 1;
                self.bad[j].remove(&(u / 2));
            }
        }
        let dv = g.degree(v);
        for (j, &k) in self.ks.iter().enumerate() {
            if dv < k {
                self.low[j] += 1;
                if v % 2 == 1 && g.degree(v - 1) < k {
                    self.bad[j].insert(v / 2);
                }
            }
        }
        for j in 0..self.ks.len() {
            if self.tau1[j].is_none() && self.low[j] == 0 {
                self.tau1[j] = Some(self.t);
            }
            if self.t % 2 == 0 && self.tau2[j].is_none() && self.bad[j].is_empty() {
                self.tau2[j] = Some(self.t / 2);
            }
        }
    }

    pub fn tau1(&self, k: usize) -> Option<usize> {
        self.ks.binary_search(&k).ok().and_then(|j| self.tau1[j])
    }

    pub fn tau2(&self, k: usize) -> Option<usize> {
        self.ks.binary_search(&k).ok().and_then(|j| self.tau2[j])
    }

    /// Vertices of degree ≤ k−1 right now.
    pub fn low_count(&self, k: usize) -> Option<usize> {
        self.ks.binary_search(&k).ok().map(|j| self.low[j])
    }

    pub fn all_latched(&self) -> bool {
        self.tau1.iter().chain(&self.tau2).all(Option::is_some)
    }

    pub fn record(&self) -> HittingRecord {
        let mut rec = HittingRecord::default();
        for (j, &k) in self.ks.iter().enumerate() {
            if let Some(t) = self.tau1[j] {
                rec.tau1.insert(k, t);
            }
            if let Some(t) = self.tau2[j] {
                rec.tau2.insert(k, t);
            }
            rec.bad_pairs.insert(k, self.bad[j].iter().copied().collect());
        }
        rec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeoParams;

    fn graph() -> DynamicGeoGraph {
        DynamicGeoGraph::new(GeoParams::new(2, 0.1).unwrap())
    }

    #[test]
    fn close_first_pair_hits_at_two() {
        let mut g = graph();
        let mut h = HittingTracker::new(&[1]);
        for p in [[0.5, 0.5], [0.55, 0.5]] {
            let v = g.insert_coords(&p) - 1;
            h.on_insert(&g, v);
        }
        assert_eq!(h.tau1(1), Some(2));
        assert_eq!(h.tau2(1), Some(1));
    }

    #[test]
    fn isolated_pair_is_bad_for_every_k() {
        let mut g = graph();
        let mut h = HittingTracker::new(&[1, 2, 3]);
        for p in [[0.1, 0.1], [0.6, 0.6]] {
            let v = g.insert_coords(&p) - 1;
            h.on_insert(&g, v);
        }
        let rec = h.record();
        for k in 1..=3 {
            assert_eq!(rec.bad_pairs[&k], vec![0]);
            assert_eq!(h.tau2(k), None);
        }
        // a point adjacent to both members clears the pair at k = 1
        let mut g2 = graph();
        let mut h2 = HittingTracker::new(&[1, 2]);
        for p in [[0.5, 0.4], [0.5, 0.6], [0.7, 0.7], [0.5, 0.5]] {
            let v = g2.insert_coords(&p) - 1;
            h2.on_insert(&g2, v);
        }
        let rec2 = h2.record();
        assert!(!rec2.bad_pairs[&1].contains(&0));
        assert!(rec2.bad_pairs[&2].contains(&0));
    }
}
