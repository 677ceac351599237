//! Connected components of active cells of a periodic cubic lattice under a
//! distance threshold between cell centers.
//!
//! Cells are grouped into blocks narrow enough that any two active cells in
//! one block are adjacent, so each block is unioned outright and only pairs
//! of nearby blocks need explicit pair checks.

/// Adjacency rule between cells, in cell-index units.
#[derive(Debug, Clone, Copy)]
pub enum Reach {
    /// ℓ∞ distance at most the given number of cells.
    Chebyshev(usize),
    /// Euclidean distance at most the given radius.
    Euclid(f64),
}

impl Reach {
    fn per_axis(self) -> usize {
        match self {
            Reach::Chebyshev(r) => r,
            Reach::Euclid(rho) => rho.floor().max(0.0) as usize,
        }
    }

    /// Block width that keeps every in-block pair adjacent.
    fn block_width(self, d: usize) -> usize {
        match self {
            Reach::Chebyshev(r) => r + 1,
            Reach::Euclid(rho) => (rho / (d as f64).sqrt()).floor().max(0.0) as usize + 1,
        }
    }

    /// Whether per-axis torus index differences `deltas` are within reach.
    #[inline]
    pub fn admits(self, deltas: impl Iterator<Item = usize>) -> bool {
        match self {
            Reach::Chebyshev(r) => deltas.into_iter().all(|t| t <= r),
            Reach::Euclid(rho) => {
                let lim = rho * rho * (1.0 + 1e-12);
                let mut s = 0.0;
                for t in deltas {
                    s += (t * t) as f64;
                    if s > lim {
                        return false;
                    }
                }
                true
            }
        }
    }
}

/// Periodic cubic lattice with `m` cells per axis in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub d: usize,
    pub m: usize,
}

impl Lattice {
    pub fn cell_count(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Cell coordinates of a linear id (axis 0 fastest).
    pub fn coords(&self, mut id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            out.push(id % self.m);
            id /= self.m;
        }
        out
    }

    pub fn id(&self, coords: &[usize]) -> usize {
        coords.iter().rev().fold(0, |acc, &x| acc * self.m + x)
    }

    /// Per-axis torus index distance.
    #[inline]
    pub fn axis_gap(&self, a: usize, b: usize) -> usize {
        let t = a.abs_diff(b);
        t.min(self.m - t)
    }

    pub fn gaps(&self, a: usize, b: usize) -> Vec<usize> {
        let (ca, cb) = (self.coords(a), self.coords(b));
        ca.iter().zip(&cb).map(|(&x, &y)| self.axis_gap(x, y)).collect()
    }

    pub fn adjacent(&self, a: usize, b: usize, reach: Reach) -> bool {
        let (mut x, mut y) = (a, b);
        let gaps = (0..self.d).map(|_| {
            let g = self.axis_gap(x % self.m, y % self.m);
            x /= self.m;
            y /= self.m;
            g
        });
        reach.admits(gaps)
    }

    /// Offsets (per-axis signed) of all cells within `reach` of the origin,
    /// excluding the origin.
    pub fn offsets(&self, reach: Reach) -> Vec<Vec<isize>> {
        let r = reach.per_axis().min(self.m / 2) as isize;
        let mut out = Vec::new();
        let mut cur = vec![-r; self.d];
        loop {
            if cur.iter().any(|&c| c != 0)
                && reach.admits(cur.iter().map(|&c| c.unsigned_abs()))
            {
                out.push(cur.clone());
            }
            let mut a = 0;
            loop {
                if a == self.d {
                    return out;
                }
                cur[a] += 1;
                if cur[a] <= r {
                    break;
                }
                cur[a] = -r;
                a += 1;
            }
        }
    }

    /// Linear id of `coords + offset` with wraparound.
    pub fn shifted(&self, coords: &[usize], offset: &[isize]) -> usize {
        let m = self.m as isize;
        let mut id = 0;
        for a in (0..self.d).rev() {
            let x = (coords[a] as isize + offset[a]).rem_euclid(m);
            id = id * self.m + x as usize;
        }
        id
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Cycle distance between two index intervals `[a0, a1]` and `[b0, b1]`.
fn interval_gap(m: usize, a: (usize, usize), b: (usize, usize)) -> usize {
    if a.0 <= b.1 && b.0 <= a.1 {
        return 0;
    }
    let d = |x: usize, y: usize| {
        let t = x.abs_diff(y);
        t.min(m - t)
    };
    d(a.0, b.0).min(d(a.0, b.1)).min(d(a.1, b.0)).min(d(a.1, b.1))
}

/// Component labels of the active cells: `labels[c]` is `u32::MAX` for
/// inactive cells, otherwise a component id. Ids are numbered in order of
/// each component's smallest cell id. Returns `(labels, component count)`.
pub fn lattice_components(lat: Lattice, active: &[bool], reach: Reach) -> (Vec<u32>, usize) {
    let n = lat.cell_count();
    assert_eq!(active.len(), n);
    let (d, m) = (lat.d, lat.m);
    let width = reach.block_width(d).min(m).max(1);
    let nb = m.div_ceil(width);
    let block_range = |b: usize| (b * width, ((b + 1) * width).min(m) - 1);
    let axis_reach = reach.per_axis();
    let near: Vec<Vec<usize>> = (0..nb)
        .map(|b| {
            (0..nb)
                .filter(|&o| interval_gap(m, block_range(b), block_range(o)) <= axis_reach)
                .collect()
        })
        .collect();

    let block_lat = Lattice { d, m: nb };
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); block_lat.cell_count()];
    for (c, _) in active.iter().enumerate().filter(|(_, &a)| a) {
        let bc: Vec<usize> = lat.coords(c).iter().map(|&x| x / width).collect();
        members[block_lat.id(&bc)].push(c as u32);
    }

    let mut uf = UnionFind::new(n);
    for cells in &members {
        for w in cells.windows(2) {
            uf.union(w[0], w[1]);
        }
    }

    for (b, cells) in members.iter().enumerate() {
        let Some(&rep) = cells.first() else { continue };
        let bc = block_lat.coords(b);
        let axes: Vec<Vec<usize>> = bc.iter().map(|&x| near[x].clone()).collect();
        let mut others = Vec::new();
        crate::spatial_graph::for_each_product(&axes, nb, &mut |o| {
            if o > b {
                others.push(o);
            }
        });
        for o in others {
            let Some(&orep) = members[o].first() else { continue };
            if uf.find(rep) == uf.find(orep) {
                continue;
            }
            'pairs: for &x in cells {
                for &y in &members[o] {
                    if lat.adjacent(x as usize, y as usize, reach) {
                        uf.union(x, y);
                        break 'pairs;
                    }
                }
            }
        }
    }

    let mut labels = vec![u32::MAX; n];
    let mut root_label: Vec<u32> = vec![u32::MAX; n];
    let mut count = 0u32;
    for c in 0..n {
        if !active[c] {
            continue;
        }
        let root = uf.find(c as u32) as usize;
        if root_label[root] == u32::MAX {
            root_label[root] = count;
            count += 1;
        }
        labels[c] = root_label[root];
    }
    (labels, count as usize)
}
