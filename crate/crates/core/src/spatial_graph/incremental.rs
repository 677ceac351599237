//! Component tracking for large append-only geometric graphs without
//! storing adjacency.
//!
//! Cells have side at most r/(2√d), so any two points in cells at ℓ∞ cell
//! distance ≤ 1 are adjacent. Points sharing a cell are therefore always in
//! one component, and a distant cell needs its points scanned only when its
//! component differs from the new point's.

use std::collections::HashMap;

use crate::geometry::torus_dist_sq;

const DENSE_CELL_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone)]
enum Cells {
    Dense(Vec<Vec<u32>>),
    Sparse(HashMap<usize, Vec<u32>>),
}

impl Cells {
    fn get(&self, id: usize) -> &[u32] {
        match self {
            Cells::Dense(v) => &v[id],
            Cells::Sparse(h) => h.get(&id).map_or(&[], Vec::as_slice),
        }
    }

    fn push(&mut self, id: usize, p: u32) {
        match self {
            Cells::Dense(v) => v[id].push(p),
            Cells::Sparse(h) => h.entry(id).or_default().push(p),
        }
    }
}

/// Union-find over points of a geometric graph on the torus.
#[derive(Debug, Clone)]
pub struct IncrementalConnectivity {
    d: usize,
    r2: f64,
    m: usize,
    rings: usize,
    cells: Cells,
    coords: Vec<f64>,
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl IncrementalConnectivity {
    pub fn new(d: usize, r: f64) -> Self {
        let m = (2.0 * (d as f64).sqrt() / r).ceil() as usize;
        let rings = (r * m as f64).ceil() as usize;
        let count = m.checked_pow(d as u32);
        let cells = match count {
            Some(c) if c <= DENSE_CELL_LIMIT => Cells::Dense(vec![Vec::new(); c]),
            _ => Cells::Sparse(HashMap::new()),
        };
        Self {
            d,
            r2: r * r,
            m,
            rings,
            cells,
            coords: Vec::new(),
            parent: Vec::new(),
            size: Vec::new(),
            components: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    /// At least one point and a single component.
    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.components -= 1;
        true
    }

    /// Adds a canonical point; returns the new point count.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        self.coords.extend_from_slice(p);
        self.components += 1;

        let m = self.m;
        let own: Vec<usize> = p
            .iter()
            .map(|&x| ((x * m as f64) as usize).min(m - 1))
            .collect();
        // per axis: distinct (coordinate, torus cell distance)
        let axes: Vec<Vec<(usize, usize)>> = own
            .iter()
            .map(|&c| {
                if 2 * self.rings + 1 >= m {
                    (0..m)
                        .map(|x| {
                            let t = x.abs_diff(c);
                            (x, t.min(m - t))
                        })
                        .collect()
                } else {
                    (0..=2 * self.rings)
                        .map(|o| ((c + m + o - self.rings) % m, o.abs_diff(self.rings)))
                        .collect()
                }
            })
            .collect();

        let d = self.d;
        let mut idx = vec![0usize; d];
        loop {
            let mut cell = 0;
            let mut cheb = 0;
            for a in (0..d).rev() {
                let (x, dist) = axes[a][idx[a]];
                cell = cell * m + x;
                cheb = cheb.max(dist);
            }
            let first = self.cells.get(cell).first().copied();
            if let Some(first) = first {
                if self.find(first) != self.find(id) {
                    if cheb <= 1 {
                        self.union(first, id);
                    } else {
                        let hit = self.cells.get(cell).iter().copied().find(|&q| {
                            let q = q as usize;
                            torus_dist_sq(p, &self.coords[q * d..(q + 1) * d]) <= self.r2
                        });
                        if let Some(q) = hit {
                            self.union(q, id);
                        }
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == d {
                    let cell = own.iter().rev().fold(0, |acc, &x| acc * m + x);
                    self.cells.push(cell, id);
                    return self.parent.len();
                }
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{connected_components, DynamicGeoGraph};
    use super::*;
    use crate::geometry::{sample_uniform, trial_rng, GeoParams};

    #[test]
    fn matches_full_graph_component_count() {
        for (d, r, n, seed) in [(2, 0.05, 800, 1u64), (2, 0.02, 3000, 2), (3, 0.12, 500, 3), (1, 0.003, 400, 4)] {
            let mut inc = IncrementalConnectivity::new(d, r);
            let mut g = DynamicGeoGraph::new(GeoParams::new(d, r).unwrap());
            let mut rng = trial_rng(seed, 0);
            for t in 1..=n {
                let p = sample_uniform(&mut rng, d);
                inc.insert(p.coords());
                g.insert_coords(p.coords());
                if t % 97 == 0 || t == n {
                    assert_eq!(inc.component_count(), connected_components(&g).len(), "d={d} t={t}");
                }
            }
        }
    }

    #[test]
    fn empty_is_not_connected() {
        let mut inc = IncrementalConnectivity::new(2, 0.1);
        assert!(!inc.is_connected());
        inc.insert(&[0.5, 0.5]);
        assert!(inc.is_connected());
        inc.insert(&[0.0, 0.0]);
        assert_eq!(inc.component_count(), 2);
    }
}
