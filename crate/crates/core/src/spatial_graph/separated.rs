//! Inclusion-minimal κ-separated sets within a small vertex pool.
//!
//! A minimal κ-separated set is connected: a component S' of a separated set
//! S has N(S') ⊆ N(S). So only connected subsets of the pool are searched.

use serde::{Deserialize, Serialize};

use super::NeighborLists;
use crate::error::{GeoError, Result};

/// Largest candidate pool accepted by [`find_separated_sets`].
pub const MAX_SEPARATED_POOL: usize = 64;

/// Connected subsets visited before the search is refused.
const MAX_ENUMERATED: usize = 4_000_000;

/// Vertex set with few outside neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatedSet {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// |N_G(vertices)|, counting only live vertices.
    pub neighbor_count: usize,
}

/// All inclusion-minimal subsets of `pool` with at most `max_size` vertices
/// whose live neighbourhood in `g` has at most `kappa` vertices.
///
/// `alive`, when given, marks vertices still present; dead vertices are
/// neither pool members nor counted as neighbours. Results are sorted by
/// vertex list.
pub fn find_separated_sets<G: NeighborLists + ?Sized>(
    g: &G,
    pool: &[usize],
    kappa: usize,
    max_size: usize,
    alive: Option<&[bool]>,
) -> Result<Vec<SeparatedSet>> {
    let is_alive = |v: usize| alive.is_none_or(|a| a[v]);
    let mut pool: Vec<usize> = pool.iter().copied().filter(|&v| is_alive(v)).collect();
    pool.sort_unstable();
    pool.dedup();
    if pool.len() > MAX_SEPARATED_POOL {
        return Err(GeoError::Usage(format!(
            "separated-set pool of {} vertices exceeds the limit of {MAX_SEPARATED_POOL}",
            pool.len()
        )));
    }
    if pool.is_empty() || max_size == 0 {
        return Ok(Vec::new());
    }
    let p = pool.len();
    let mut nbr_mask = vec![0u64; p];
    for (i, &v) in pool.iter().enumerate() {
        for &u in g.neighbors(v) {
            if let Ok(j) = pool.binary_search(&(u as usize)) {
                nbr_mask[i] |= 1 << j;
            }
        }
    }

    let mut search = Search {
        g,
        pool: &pool,
        nbr_mask: &nbr_mask,
        alive,
        kappa,
        max_size,
        visited: 0,
        found: Vec::new(),
    };
    for v in 0..p {
        let above = above_mask(v);
        let ext = nbr_mask[v] & above;
        search.extend(1 << v, nbr_mask[v], ext, above)?;
    }

    let mut found = search.found;
    found.sort_by_key(|(mask, _)| mask.count_ones());
    let mut minimal: Vec<(u64, usize)> = Vec::new();
    for (mask, count) in found {
        if minimal.iter().all(|&(m, _)| m & mask != m) {
            minimal.push((mask, count));
        }
    }
    let mut out: Vec<SeparatedSet> = minimal
        .into_iter()
        .map(|(mask, neighbor_count)| SeparatedSet {
            vertices: (0..p).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]).collect(),
            neighbor_count,
        })
        .collect();
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

fn above_mask(v: usize) -> u64 {
    if v >= 63 {
        0
    } else {
        !((1u64 << (v + 1)) - 1)
    }
}

struct Search<'a, G: ?Sized> {
    g: &'a G,
    pool: &'a [usize],
    nbr_mask: &'a [u64],
    alive: Option<&'a [bool]>,
    kappa: usize,
    max_size: usize,
    visited: usize,
    found: Vec<(u64, usize)>,
}

impl<G: NeighborLists + ?Sized> Search<'_, G> {
    /// Enumerates each connected subset once (ESU order): `set` is the
    /// current subset, `set_nbrs` its pool neighbourhood (including itself),
    /// `ext` the extension candidates, `above` the vertices allowed.
    fn extend(&mut self, set: u64, set_nbrs: u64, mut ext: u64, above: u64) -> Result<()> {
        self.visited += 1;
        if self.visited > MAX_ENUMERATED {
            return Err(GeoError::Usage(
                "separated-set search exceeded its enumeration budget".into(),
            ));
        }
        if let Some(count) = self.neighbourhood_size(set) {
            self.found.push((set, count));
        }
        if set.count_ones() as usize >= self.max_size {
            return Ok(());
        }
        while ext != 0 {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let exclusive = self.nbr_mask[w] & !set_nbrs & !set & above;
            self.extend(
                set | 1 << w,
                set_nbrs | self.nbr_mask[w] | 1 << w,
                ext | exclusive,
                above,
            )?;
        }
        Ok(())
    }

    /// |N(set)| if at most kappa.
    fn neighbourhood_size(&self, set: u64) -> Option<usize> {
        let members: Vec<usize> = (0..self.pool.len())
            .filter(|&i| set >> i & 1 == 1)
            .map(|i| self.pool[i])
            .collect();
        let mut outside: Vec<u32> = Vec::with_capacity(self.kappa + 1);
        for &v in &members {
            for &u in self.g.neighbors(v) {
                let uu = u as usize;
                if self.alive.is_some_and(|a| !a[uu]) || members.contains(&uu) {
                    continue;
                }
                if !outside.contains(&u) {
                    if outside.len() == self.kappa {
                        return None;
                    }
                    outside.push(u);
                }
            }
        }
        Some(outside.len())
    }
}
