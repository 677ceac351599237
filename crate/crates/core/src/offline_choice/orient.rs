//! Orientation of a multigraph with |indeg − outdeg| ≤ 1 everywhere.
//!
//! Odd-degree vertices are paired in ascending order by phantom edges, every
//! vertex then has even degree, and each Euler circuit is oriented along its
//! traversal. Dropping the phantoms changes each balance by at most one.

/// `forward[e]` is true when edge e = (u, v) is oriented u → v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    /// (tail, head) of edge `e`.
    pub fn directed(&self, edges: &[(usize, usize)], e: usize) -> (usize, usize) {
        let (u, v) = edges[e];
        if self.forward[e] {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Out- and in-degree of every vertex; a loop counts once in each.
    pub fn degrees(&self, n: usize, edges: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
        let mut out = vec![0; n];
        let mut inn = vec![0; n];
        for e in 0..edges.len() {
            let (t, h) = self.directed(edges, e);
            out[t] += 1;
            inn[h] += 1;
        }
        (out, inn)
    }
}

/// Balanced orientation of the multigraph on `0..n` with the given edges
/// (loops and parallel edges allowed). Deterministic in the edge order.
pub fn orient_balanced(n: usize, edges: &[(usize, usize)]) -> Orientation {
    let m = edges.len();
    let mut all: Vec<(usize, usize)> = edges.to_vec();
    let mut deg = vec![0usize; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let odd: Vec<usize> = (0..n).filter(|&v| deg[v] % 2 == 1).collect();
    for w in odd.chunks(2) {
        all.push((w[0], w[1]));
    }

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, v)) in all.iter().enumerate() {
        adj[u].push(e);
        if u != v {
            adj[v].push(e);
        }
    }
    let mut used = vec![false; all.len()];
    let mut forward = vec![true; all.len()];
    let mut cursor = vec![0usize; n];
    // Hierholzer; the direction an edge is first traversed is its orientation
    for start in 0..n {
        let mut stack = vec![start];
        while let Some(&v) = stack.last() {
            let mut advanced = false;
            while cursor[v] < adj[v].len() {
                let e = adj[v][cursor[v]];
                cursor[v] += 1;
                if used[e] {
                    continue;
                }
                used[e] = true;
                let (a, b) = all[e];
                let next = if a == v { b } else { a };
                forward[e] = a == v;
                stack.push(next);
                advanced = true;
                break;
            }
            if !advanced {
                stack.pop();
            }
        }
    }
    forward.truncate(m);
    Orientation { forward }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(n: usize, edges: &[(usize, usize)]) {
        let o = orient_balanced(n, edges);
        let (out, inn) = o.degrees(n, edges);
        for v in 0..n {
            assert!(out[v].abs_diff(inn[v]) <= 1, "vertex {v}: out {} in {}", out[v], inn[v]);
        }
        assert_eq!(out.iter().sum::<usize>(), edges.len());
    }

    #[test]
    fn triangle_becomes_a_cycle() {
        let e = [(0, 1), (1, 2), (2, 0)];
        let o = orient_balanced(3, &e);
        let (out, inn) = o.degrees(3, &e);
        assert_eq!(out, vec![1, 1, 1]);
        assert_eq!(inn, vec![1, 1, 1]);
    }

    #[test]
    fn single_edge_and_loops() {
        let e = [(0, 1)];
        let (out, inn) = orient_balanced(2, &e).degrees(2, &e);
        assert_eq!(out[0] + out[1], 1);
        assert_eq!(out[0].abs_diff(inn[0]), 1);
        assert_eq!(out[1].abs_diff(inn[1]), 1);
        check(1, &[(0, 0), (0, 0)]);
        check(3, &[(0, 1), (0, 1), (1, 2), (2, 2)]);
    }

    #[test]
    fn two_cycle_is_balanced() {
        let e = [(0, 1), (1, 0)];
        let (out, inn) = orient_balanced(2, &e).degrees(2, &e);
        assert_eq!(out, vec![1, 1]);
        assert_eq!(inn, vec![1, 1]);
    }

    #[test]
    fn star_and_path() {
        check(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        check(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        check(4, &[]);
    }
}
