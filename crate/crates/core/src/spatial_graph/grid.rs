//! Uniform periodic cell grid over the unit torus.

use crate::geometry::torus_dist_sq;

/// Largest number of cells a grid allocates; coarser cells are used beyond it.
pub const MAX_CELLS: usize = 1 << 24;

/// Periodic grid of `m^d` cells with side `1/m`. Each cell stores its
/// points inline as `[id, x_1, .., x_d]` records, so a neighbourhood scan
/// reads contiguous memory. Ids are below 2^32 and exact as f64.
#[derive(Debug, Clone)]
pub struct CellGrid {
    d: usize,
    m: usize,
    side: f64,
    cells: Vec<Vec<f64>>,
}

impl CellGrid {
    /// Grid with cell side at least `min_side`.
    pub fn with_min_side(d: usize, min_side: f64) -> Self {
        let mut m = ((1.0 / min_side).floor() as usize).max(1);
        while m > 1 && m.checked_pow(d as u32).is_none_or(|c| c > MAX_CELLS) {
            m = ((MAX_CELLS as f64).powf(1.0 / d as f64).floor() as usize).min(m - 1).max(1);
        }
        Self::with_cells_per_axis(d, m)
    }

    pub fn with_cells_per_axis(d: usize, m: usize) -> Self {
        let count = m.pow(d as u32);
        Self {
            d,
            m,
            side: 1.0 / m as f64,
            cells: vec![Vec::new(); count],
        }
    }

    pub fn cells_per_axis(&self) -> usize {
        self.m
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    #[inline]
    pub fn axis_cell(&self, x: f64) -> usize {
        ((x * self.m as f64) as usize).min(self.m - 1)
    }

    /// Linear cell id of a point.
    #[inline]
    pub fn cell_of(&self, p: &[f64]) -> usize {
        let mut id = 0;
        for &x in p.iter().rev() {
            id = id * self.m + self.axis_cell(x);
        }
        id
    }

    /// Stores point `p` with id `id` in `cell`.
    pub fn insert(&mut self, cell: usize, id: u32, p: &[f64]) {
        debug_assert_eq!(p.len(), self.d);
        let c = &mut self.cells[cell];
        c.push(id as f64);
        c.extend_from_slice(p);
    }

    /// The `[id, coords..]` records of a cell, `d + 1` values each.
    #[inline]
    pub fn records(&self, cell: usize) -> std::slice::ChunksExact<'_, f64> {
        self.cells[cell].chunks_exact(self.d + 1)
    }

    /// Ids of the points in `cell` whose squared torus distance to `p` is at
    /// most `rho2`, appended to `out` in storage order.
    #[inline]
    pub fn collect_within(&self, cell: usize, p: &[f64], rho2: f64, out: &mut Vec<u32>) {
        for rec in self.records(cell) {
            // unconditional push then truncate: the hit test does not branch
            let hit = usize::from(torus_dist_sq(p, &rec[1..]) <= rho2);
            out.push(rec[0] as u32);
            let len = out.len() - 1 + hit;
            out.truncate(len);
        }
    }

    /// Calls `f` once for every distinct cell within `rings` cells (per axis,
    /// with wraparound) of the cell containing `p`.
    pub fn for_each_cell_near<F: FnMut(usize)>(&self, p: &[f64], rings: usize, mut f: F) {
        let axes: Vec<Vec<usize>> = p
            .iter()
            .map(|&x| wrapped_range(self.axis_cell(x), rings, self.m))
            .collect();
        for_each_product(&axes, self.m, &mut f);
    }
}

/// Distinct values of `c + o mod m` for `o` in `-rings..=rings`.
pub fn wrapped_range(c: usize, rings: usize, m: usize) -> Vec<usize> {
    if 2 * rings + 1 >= m {
        return (0..m).collect();
    }
    (0..=2 * rings)
        .map(|o| (c + m + o - rings) % m)
        .collect()
}

/// Calls `f` with the linear id (axis 0 fastest) of every element of the
/// cartesian product of the per-axis coordinate lists.
pub fn for_each_product<F: FnMut(usize)>(axes: &[Vec<usize>], m: usize, f: &mut F) {
    let d = axes.len();
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; d];
    loop {
        let mut id = 0;
        for a in (0..d).rev() {
            id = id * m + axes[a][idx[a]];
        }
        f(id);
        let mut a = 0;
        loop {
            if a == d {
                return;
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
