//! The incrementally grown geometric graph G_t, its grid index, and exact
//! connectivity and separated-set queries.

mod connectivity;
mod grid;
mod incremental;
mod separated;

use std::io::Write;

use crate::error::{GeoError, Result};
use crate::geometry::{torus_dist_sq, GeoParams, TorusPoint};

pub use connectivity::{
    articulation_points, connected_components, is_connected, is_k_connected,
    is_k_connected_by_flow, local_vertex_connectivity,
};
pub use grid::{for_each_product, wrapped_range, CellGrid};
pub use incremental::IncrementalConnectivity;
pub use separated::{find_separated_sets, SeparatedSet, MAX_SEPARATED_POOL};

/// Read access to adjacency lists over vertices `0..num_vertices()`.
pub trait NeighborLists {
    fn num_vertices(&self) -> usize;
    fn neighbors(&self, v: usize) -> &[u32];

    fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    fn min_degree(&self) -> Option<usize> {
        (0..self.num_vertices()).map(|v| self.degree(v)).min()
    }
}

/// Plain adjacency-list graph, used for induced subgraphs and fixtures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds an undirected graph; duplicate edges and loops are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v || self.adj[u].contains(&(v as u32)) {
            return;
        }
        self.adj[u].push(v as u32);
        self.adj[v].push(u as u32);
    }

    /// Subgraph induced by `vertices`; vertex `i` of the result is
    /// `vertices[i]` of `g`.
    pub fn induced<G: NeighborLists + ?Sized>(g: &G, vertices: &[usize]) -> Self {
        let mut local = vec![u32::MAX; g.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i as u32;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                g.neighbors(v)
                    .iter()
                    .filter_map(|&u| {
                        let l = local[u as usize];
                        (l != u32::MAX).then_some(l)
                    })
                    .collect()
            })
            .collect();
        Self { adj }
    }

    /// Geometric graph on a point list, by brute force.
    pub fn geometric(points: &[Vec<f64>], r: f64) -> Self {
        let mut g = Self::new(points.len());
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if torus_dist_sq(&points[i], &points[j]) <= r * r {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

impl NeighborLists for SimpleGraph {
    fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }
}

/// Degree buckets for small degrees, so low-degree queries cost O(answer).
#[derive(Debug, Clone)]
struct LowDegreeIndex {
    bound: usize,
    buckets: Vec<Vec<u32>>,
    pos: Vec<u32>,
}

impl LowDegreeIndex {
    fn new(bound: usize) -> Self {
        Self {
            bound,
            buckets: vec![Vec::new(); bound + 1],
            pos: Vec::new(),
        }
    }

    fn push_new(&mut self, v: u32, deg: usize) {
        self.pos.push(u32::MAX);
        if deg <= self.bound {
            self.pos[v as usize] = self.buckets[deg].len() as u32;
            self.buckets[deg].push(v);
        }
    }

    fn increment(&mut self, v: u32, old: usize) {
        if old > self.bound {
            return;
        }
        let b = &mut self.buckets[old];
        let at = self.pos[v as usize] as usize;
        let last = *b.last().expect("tracked vertex present in bucket");
        b.swap_remove(at);
        if last != v {
            self.pos[last as usize] = at as u32;
        }
        if old < self.bound {
            self.pos[v as usize] = self.buckets[old + 1].len() as u32;
            self.buckets[old + 1].push(v);
        } else {
            self.pos[v as usize] = u32::MAX;
        }
    }
}

/// Degree bound up to which low-degree vertex sets are maintained.
pub const TRACKED_DEGREE_BOUND: usize = 8;

/// Default maximum radius of [`DynamicGeoGraph::neighbors_within`], as a
/// multiple of `d·r`.
pub const DEFAULT_QUERY_RADIUS_FACTOR: f64 = 30.0;

/// Append-only geometric graph on the torus.
///
/// Vertex `v` (0-based) is the point `X_{v+1}` of the process. Neighbour
/// lists hold earlier neighbours first, then later neighbours in increasing
/// order, so every prefix graph G_t is available without copying.
#[derive(Debug, Clone)]
pub struct DynamicGeoGraph {
    params: GeoParams,
    coords: Vec<f64>,
    grid: CellGrid,
    adjacency: Vec<Vec<u32>>,
    n_earlier: Vec<u32>,
    low: LowDegreeIndex,
    max_query_radius: f64,
    edges: usize,
    last_degree: usize,
}

impl DynamicGeoGraph {
    pub fn new(params: GeoParams) -> Self {
        let max_query_radius = DEFAULT_QUERY_RADIUS_FACTOR * params.d as f64 * params.r;
        Self {
            grid: CellGrid::with_min_side(params.d, params.r),
            params,
            coords: Vec::new(),
            adjacency: Vec::new(),
            n_earlier: Vec::new(),
            low: LowDegreeIndex::new(TRACKED_DEGREE_BOUND),
            max_query_radius,
            edges: 0,
            last_degree: 0,
        }
    }

    /// Builds a graph by inserting `points` in order.
    pub fn from_points<'a, I>(params: GeoParams, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut g = Self::new(params);
        for p in points {
            g.insert_coords(p);
        }
        g
    }

    pub fn params(&self) -> &GeoParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.d
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn point(&self, v: usize) -> &[f64] {
        let d = self.params.d;
        &self.coords[v * d..(v + 1) * d]
    }

    pub fn torus_point(&self, v: usize) -> TorusPoint {
        TorusPoint::new(self.point(v)).expect("stored points are canonical")
    }

    /// All coordinates, point after point.
    pub fn flat_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn max_query_radius(&self) -> f64 {
        self.max_query_radius
    }

    /// Sets the largest radius accepted by [`Self::neighbors_within`].
    pub fn set_max_query_radius(&mut self, rho: f64) {
        self.max_query_radius = rho;
    }

    pub fn insert_point(&mut self, p: &TorusPoint) -> Result<usize> {
        if p.dim() != self.params.d {
            return Err(GeoError::Usage(format!(
                "point of dimension {} inserted into a {}-dimensional graph",
                p.dim(),
                self.params.d
            )));
        }
        Ok(self.insert_coords(p.coords()))
    }

    /// Inserts a canonical point and returns the new vertex count t.
    pub fn insert_coords(&mut self, p: &[f64]) -> usize {
        debug_assert_eq!(p.len(), self.params.d);
        let v = self.adjacency.len() as u32;
        let r2 = self.params.r * self.params.r;
        // room for later neighbours too; points keep arriving at about the
        // same rate, so the list typically grows to a few times its start
        let mut nbrs = Vec::with_capacity(2 * self.last_degree + 4);
        let grid = &self.grid;
        grid.for_each_cell_near(p, 1, |cell| grid.collect_within(cell, p, r2, &mut nbrs));
        for &u in &nbrs {
            let old = self.adjacency[u as usize].len();
            self.adjacency[u as usize].push(v);
            self.low.increment(u, old);
        }
        self.edges += nbrs.len();
        self.last_degree = nbrs.len();
        self.low.push_new(v, nbrs.len());
        self.n_earlier.push(nbrs.len() as u32);
        self.adjacency.push(nbrs);
        self.coords.extend_from_slice(p);
        let cell = self.grid.cell_of(p);
        self.grid.insert(cell, v, p);
        self.adjacency.len()
    }

    /// Vertices at torus distance at most `rho` from `p`, ascending.
    pub fn neighbors_within(&self, p: &[f64], rho: f64) -> Result<Vec<usize>> {
        if rho > self.max_query_radius {
            return Err(GeoError::Usage(format!(
                "query radius {rho} exceeds the supported maximum {}; rebuild the index",
                self.max_query_radius
            )));
        }
        if p.len() != self.params.d {
            return Err(GeoError::Usage("query point has the wrong dimension".into()));
        }
        let rings = (rho / self.grid.side()).ceil() as usize;
        let rho2 = rho * rho;
        let mut ids = Vec::new();
        self.grid
            .for_each_cell_near(p, rings.max(1), |cell| self.grid.collect_within(cell, p, rho2, &mut ids));
        let mut out: Vec<usize> = ids.into_iter().map(|u| u as usize).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Vertices with degree at most `bound`, ascending.
    pub fn min_degree_vertexset(&self, bound: usize) -> Vec<usize> {
        let mut out: Vec<usize> = if bound <= self.low.bound {
            self.low.buckets[..=bound]
                .iter()
                .flatten()
                .map(|&v| v as usize)
                .collect()
        } else {
            (0..self.len()).filter(|&v| self.degree(v) <= bound).collect()
        };
        out.sort_unstable();
        out
    }

    /// Number of vertices with degree at most `bound`.
    pub fn count_degree_at_most(&self, bound: usize) -> usize {
        if bound <= self.low.bound {
            self.low.buckets[..=bound].iter().map(Vec::len).sum()
        } else {
            (0..self.len()).filter(|&v| self.degree(v) <= bound).count()
        }
    }

    /// Neighbours of `v` in the prefix graph G_t (vertices `0..t`).
    pub fn prefix_neighbors(&self, v: usize, t: usize) -> &[u32] {
        let all = &self.adjacency[v];
        let early = self.n_earlier[v] as usize;
        let later = &all[early..];
        let cut = later.partition_point(|&u| (u as usize) < t);
        &all[..early + cut]
    }

    /// View of G_t for `t <= len()`.
    pub fn prefix(&self, t: usize) -> PrefixGraph<'_> {
        assert!(t <= self.len(), "prefix {t} beyond graph size {}", self.len());
        PrefixGraph { g: self, t }
    }

    /// Writes the edge list as CSV with columns `i,j` (1-based, i < j).
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j")?;
        for (v, nbrs) in self.adjacency.iter().enumerate() {
            for &u in nbrs {
                if (u as usize) > v {
                    writeln!(w, "{},{}", v + 1, u + 1)?;
                }
            }
        }
        Ok(())
    }

    /// Writes the points as CSV with columns `index,x1..xd` (1-based index).
    pub fn write_points_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.params.d).map(|a| format!("x{a}")).collect();
        writeln!(w, "index,{}", header.join(","))?;
        for v in 0..self.len() {
            let cs: Vec<String> = self.point(v).iter().map(|x| format!("{x:.12e}")).collect();
            writeln!(w, "{},{}", v + 1, cs.join(","))?;
        }
        Ok(())
    }
}

impl NeighborLists for DynamicGeoGraph {
    fn num_vertices(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }
}

/// The prefix graph G_t of a [`DynamicGeoGraph`].
#[derive(Debug, Clone, Copy)]
pub struct PrefixGraph<'a> {
    g: &'a DynamicGeoGraph,
    t: usize,
}

impl NeighborLists for PrefixGraph<'_> {
    fn num_vertices(&self) -> usize {
        self.t
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        self.g.prefix_neighbors(v, self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_uniform, trial_rng};

    fn params(r: f64) -> GeoParams {
        GeoParams::new(2, r).unwrap()
    }

    fn brute_edges(g: &DynamicGeoGraph) -> Vec<(usize, usize)> {
        let r2 = g.params().r * g.params().r;
        let mut out = Vec::new();
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                if torus_dist_sq(g.point(i), g.point(j)) <= r2 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn edges(g: &dyn NeighborLists) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..g.num_vertices() {
            for &u in g.neighbors(v) {
                if (u as usize) > v {
                    out.push((v, u as usize));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn random_graph(n: usize, r: f64, seed: u64) -> DynamicGeoGraph {
        let mut rng = trial_rng(seed, 0);
        let mut g = DynamicGeoGraph::new(params(r));
        for _ in 0..n {
            g.insert_point(&sample_uniform(&mut rng, 2)).unwrap();
        }
        g
    }

    #[test]
    fn first_point_is_isolated() {
        let mut g = DynamicGeoGraph::new(params(0.1));
        let t = g.insert_point(&TorusPoint::new(&[0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(t, 1);
        assert_eq!(g.degree(0), 0);
    }

    #[test]
    fn distance_exactly_r_is_an_edge() {
        let mut g = DynamicGeoGraph::new(params(0.125));
        g.insert_coords(&[0.25, 0.5]);
        g.insert_coords(&[0.375, 0.5]);
        assert_eq!(g.edge_count(), 1);
        g.insert_coords(&[0.5, 0.5]);
        assert_eq!(g.degree(2), 1);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn edges_match_quadratic_scan() {
        let g = random_graph(10_000, 0.05, 3);
        assert_eq!(edges(&g), brute_edges(&g));
        let deg_sum: usize = (0..g.len()).map(|v| g.degree(v)).sum();
        assert_eq!(deg_sum, 2 * g.edge_count());
    }

    #[test]
    fn prefix_view_matches_rebuilt_graph() {
        let g = random_graph(600, 0.08, 5);
        for t in [0, 1, 17, 300, 600] {
            let rebuilt = DynamicGeoGraph::from_points(
                *g.params(),
                (0..t).map(|v| g.point(v)),
            );
            assert_eq!(edges(&g.prefix(t)), edges(&rebuilt), "t = {t}");
        }
    }

    #[test]
    fn neighbors_within_matches_brute_force() {
        let g = random_graph(2000, 0.04, 11);
        let mut rng = trial_rng(12, 0);
        for _ in 0..50 {
            let p = sample_uniform(&mut rng, 2);
            let rho = 2.5 * 0.04;
            let got = g.neighbors_within(p.coords(), rho).unwrap();
            let want: Vec<usize> = (0..g.len())
                .filter(|&v| torus_dist_sq(p.coords(), g.point(v)) <= rho * rho)
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn neighbors_within_trivial_cases() {
        let mut g = DynamicGeoGraph::new(params(0.1));
        assert!(g.neighbors_within(&[0.2, 0.2], 0.1).unwrap().is_empty());
        g.insert_coords(&[0.2, 0.2]);
        assert_eq!(g.neighbors_within(&[0.2, 0.2], 0.0).unwrap(), vec![0]);
        assert!(matches!(
            g.neighbors_within(&[0.2, 0.2], 7.0),
            Err(GeoError::Usage(_))
        ));
    }

    #[test]
    fn low_degree_sets_match_recount() {
        let g = random_graph(3000, 0.02, 13);
        for bound in 0..=10 {
            let want: Vec<usize> = (0..g.len()).filter(|&v| g.degree(v) <= bound).collect();
            assert_eq!(g.min_degree_vertexset(bound), want, "bound = {bound}");
            assert_eq!(g.count_degree_at_most(bound), want.len());
        }
    }

    #[test]
    fn low_degree_trivial_cases() {
        let mut g = DynamicGeoGraph::new(params(0.01));
        for i in 0..5 {
            g.insert_coords(&[0.1 + 0.2 * i as f64, 0.5]);
        }
        assert_eq!(g.min_degree_vertexset(0), vec![0, 1, 2, 3, 4]);
        let mut k5 = DynamicGeoGraph::new(params(0.1));
        for i in 0..5 {
            k5.insert_coords(&[0.5 + 0.001 * i as f64, 0.5]);
        }
        assert!(k5.min_degree_vertexset(3).is_empty());
    }

    #[test]
    fn csv_exports_have_headers() {
        let g = random_graph(20, 0.3f64.min(0.2), 1);
        let mut e = Vec::new();
        g.write_edges_csv(&mut e).unwrap();
        let e = String::from_utf8(e).unwrap();
        assert_eq!(e.lines().next(), Some("i,j"));
        assert_eq!(e.lines().count(), g.edge_count() + 1);
        let mut p = Vec::new();
        g.write_points_csv(&mut p).unwrap();
        let p = String::from_utf8(p).unwrap();
        assert_eq!(p.lines().next(), Some("index,x1,x2"));
        assert_eq!(p.lines().count(), 21);
    }
}
