//! Exact Hamiltonicity by backtracking over bitmask adjacency.

use crate::error::{GeoError, Result};
use crate::spatial_graph::NeighborLists;

/// Default vertex cap of [`exact_hamiltonian`].
pub const EXACT_CAP: usize = 30;

/// Whether the graph has a Hamilton cycle. Graphs with fewer than three
/// vertices have none. Errors above [`EXACT_CAP`] vertices.
pub fn exact_hamiltonian<G: NeighborLists + ?Sized>(g: &G) -> Result<bool> {
    exact_hamiltonian_capped(g, EXACT_CAP)
}

/// [`exact_hamiltonian`] with an explicit cap, at most 64.
pub fn exact_hamiltonian_capped<G: NeighborLists + ?Sized>(g: &G, cap: usize) -> Result<bool> {
    let n = g.num_vertices();
    if cap > 64 {
        return Err(GeoError::Usage(format!("exact search cap {cap} exceeds 64")));
    }
    if n > cap {
        return Err(GeoError::Usage(format!("{n} vertices exceed the exact search cap {cap}")));
    }
    if n < 3 {
        return Ok(false);
    }
    let adj: Vec<u64> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect();
    if adj.iter().any(|a| a.count_ones() < 2) {
        return Ok(false);
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Ok(Search { adj: &adj, full }.extend(0, 1))
}

struct Search<'a> {
    adj: &'a [u64],
    full: u64,
}

impl Search<'_> {
    fn extend(&self, end: usize, visited: u64) -> bool {
        if visited == self.full {
            return self.adj[end] & 1 != 0;
        }
        let open = self.full & !visited;
        if self.adj[0] & open == 0 {
            return false;
        }
        // every open vertex still needs two cycle neighbours
        let ends = 1u64 | (1 << end);
        let mut rest = open;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if (self.adj[u] & (open | ends)).count_ones() < 2 {
                return false;
            }
        }
        // the open vertices must hang together, reachable from the path end
        let mut reach = self.adj[end] & open;
        let mut frontier = reach;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.adj[u] & open & !reach;
            reach |= new;
            frontier |= new;
        }
        if reach != open {
            return false;
        }
        // fewest onward options first
        let mut cands: Vec<(u32, usize)> = Vec::new();
        let mut c = self.adj[end] & open;
        while c != 0 {
            let u = c.trailing_zeros() as usize;
            c &= c - 1;
            cands.push(((self.adj[u] & open).count_ones(), u));
        }
        cands.sort_unstable();
        cands.into_iter().any(|(_, u)| self.extend(u, visited | 1 << u))
    }
}
