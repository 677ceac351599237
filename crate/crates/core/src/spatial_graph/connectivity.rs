//! Components, articulation points and vertex connectivity.

use std::collections::VecDeque;

use super::NeighborLists;

/// Connected components, each sorted, listed by smallest member.
pub fn connected_components<G: NeighborLists + ?Sized>(g: &G) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &u in g.neighbors(v) {
                let u = u as usize;
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// True for graphs with at least one vertex and a single component.
pub fn is_connected<G: NeighborLists + ?Sized>(g: &G) -> bool {
    let n = g.num_vertices();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            let u = u as usize;
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == n
}

/// Cut vertices, ascending (iterative Hopcroft–Tarjan).
pub fn articulation_points<G: NeighborLists + ?Sized>(g: &G) -> Vec<usize> {
    let n = g.num_vertices();
    let mut disc = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut is_cut = vec![false; n];
    let mut timer = 0u32;
    // (vertex, parent, next neighbour position)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != u32::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        let mut root_children = 0;
        stack.push((root, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (v, parent, pos) = *top;
            let nbrs = g.neighbors(v);
            if pos < nbrs.len() {
                top.2 += 1;
                let u = nbrs[pos] as usize;
                if disc[u] == u32::MAX {
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((u, v, 0));
                } else if u != parent {
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != root && low[v] >= disc[parent] {
                        is_cut[parent] = true;
                    }
                }
            }
        }
        if root_children >= 2 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&v| is_cut[v]).collect()
}

/// Vertex connectivity at least `k`: more than `k` vertices and no set of
/// fewer than `k` vertices disconnects the graph.
///
/// Dispatches to linear-time checks for `k <= 2` and to the flow scheme of
/// [`is_k_connected_by_flow`] otherwise.
pub fn is_k_connected<G: NeighborLists + ?Sized>(g: &G, k: usize) -> bool {
    let n = g.num_vertices();
    if k == 0 {
        return n > 0;
    }
    if n <= k || g.min_degree().unwrap_or(0) < k {
        return false;
    }
    match k {
        1 => is_connected(g),
        2 => is_connected(g) && articulation_points(g).is_empty(),
        _ => is_k_connected_by_flow(g, k),
    }
}

/// Unit-capacity vertex-split network reused across s–t queries.
struct SplitNetwork {
    head: Vec<usize>,
    to: Vec<u32>,
    rev: Vec<usize>,
    cap0: Vec<u8>,
    cap: Vec<u8>,
}

impl SplitNetwork {
    fn new<G: NeighborLists + ?Sized>(g: &G) -> Self {
        let n = g.num_vertices();
        // node 2v = in(v), 2v+1 = out(v); every arc has a zero-capacity
        // reverse arc recorded in `rev`.
        let mut arcs: Vec<(u32, u32, u8)> = Vec::new();
        for v in 0..n {
            arcs.push((2 * v as u32, 2 * v as u32 + 1, 1));
            for &u in g.neighbors(v) {
                arcs.push((2 * v as u32 + 1, 2 * u, 1));
            }
        }
        let nodes = 2 * n;
        let mut deg = vec![0usize; nodes + 1];
        for &(a, b, _) in &arcs {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut head = vec![0usize; nodes + 1];
        for i in 0..nodes {
            head[i + 1] = head[i] + deg[i];
        }
        let total = head[nodes];
        let mut fill = head.clone();
        let mut to = vec![0u32; total];
        let mut cap0 = vec![0u8; total];
        let mut rev = vec![0usize; total];
        for &(a, b, c) in &arcs {
            let ia = fill[a as usize];
            fill[a as usize] += 1;
            let ib = fill[b as usize];
            fill[b as usize] += 1;
            to[ia] = b;
            cap0[ia] = c;
            to[ib] = a;
            cap0[ib] = 0;
            rev[ia] = ib;
            rev[ib] = ia;
        }
        let cap = cap0.clone();
        Self {
            head,
            to,
            rev,
            cap0,
            cap,
        }
    }

    /// Number of internally vertex-disjoint s–t paths, capped at `limit`.
    fn disjoint_paths(&mut self, s: usize, t: usize, limit: usize) -> usize {
        self.cap.copy_from_slice(&self.cap0);
        let source = 2 * s + 1;
        let sink = 2 * t;
        let nodes = self.head.len() - 1;
        let mut parent_arc = vec![usize::MAX; nodes];
        let mut flow = 0;
        while flow < limit {
            parent_arc.iter_mut().for_each(|p| *p = usize::MAX);
            let mut queue = VecDeque::new();
            queue.push_back(source);
            let mut reached = false;
            'bfs: while let Some(x) = queue.pop_front() {
                for arc in self.head[x]..self.head[x + 1] {
                    let y = self.to[arc] as usize;
                    if self.cap[arc] > 0 && y != source && parent_arc[y] == usize::MAX {
                        parent_arc[y] = arc;
                        if y == sink {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push_back(y);
                    }
                }
            }
            if !reached {
                break;
            }
            let mut y = sink;
            while y != source {
                let arc = parent_arc[y];
                self.cap[arc] -= 1;
                let back = self.rev[arc];
                self.cap[back] += 1;
                y = self.to[back] as usize;
            }
            flow += 1;
        }
        flow
    }
}

/// Number of internally vertex-disjoint paths between `s` and `t`, capped at
/// `limit`. A direct edge counts as one path.
pub fn local_vertex_connectivity<G: NeighborLists + ?Sized>(
    g: &G,
    s: usize,
    t: usize,
    limit: usize,
) -> usize {
    assert_ne!(s, t, "endpoints must differ");
    SplitNetwork::new(g).disjoint_paths(s, t, limit)
}

/// Flow-based k-connectivity test.
///
/// With W the first `k` vertices, the graph is k-connected iff every
/// `w ∈ W` has at least `k` disjoint paths to every vertex not adjacent to
/// it: any separator of size below `k` misses some `w ∈ W`, and that `w` is
/// cut from a vertex on the other side.
pub fn is_k_connected_by_flow<G: NeighborLists + ?Sized>(g: &G, k: usize) -> bool {
    let n = g.num_vertices();
    if k == 0 {
        return n > 0;
    }
    if n <= k {
        return false;
    }
    let mut net = SplitNetwork::new(g);
    let mut adjacent = vec![false; n];
    for w in 0..k {
        for &u in g.neighbors(w) {
            adjacent[u as usize] = true;
        }
        for v in 0..n {
            if v == w || adjacent[v] {
                continue;
            }
            if net.disjoint_paths(w, v, k) < k {
                return false;
            }
        }
        for &u in g.neighbors(w) {
            adjacent[u as usize] = false;
        }
    }
    true
}
