//! Hamilton cycles in G_t: the tessellation-based reference construction,
//! cycle verification and an exact backtracking oracle for small graphs.

mod construct;
mod exact;
mod flow;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::torus_dist_sq;
use crate::spatial_graph::{is_k_connected, DynamicGeoGraph};
use crate::tessellation::{component_size_scale, CubeLabels};
use crate::GeoParams;

pub use construct::build_reference_cycle;
pub use exact::{exact_hamiltonian, exact_hamiltonian_capped, EXACT_CAP};
pub use flow::two_disjoint_paths;

/// The far-reaching path of one nonfull component. Both ends lie in
/// `anchor_cube`; every other vertex is in N′_{2c}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarPath {
    pub component: usize,
    pub anchor_cube: usize,
    pub vertices: Vec<usize>,
}

/// Out-and-back path through the leftover vertices of one close cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingPath {
    pub component: usize,
    pub close_cube: usize,
    pub anchor_cube: usize,
    pub vertices: Vec<usize>,
}

/// How the vertices of one sea cube were spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeaUsage {
    pub cube: usize,
    pub available: usize,
    /// Vertices on far-reaching paths (endpoints and transit).
    pub far_path: usize,
    /// Endpoints of absorbing paths anchored here.
    pub anchors: usize,
    /// Visits of C_T to this cube.
    pub visits: usize,
    /// Vertices taken by the traversal itself.
    pub traversal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonPlan {
    pub threshold: usize,
    pub tree_root: usize,
    /// Edges (child, parent) of the BFS spanning tree T of the sea.
    pub tree_edges: Vec<(usize, usize)>,
    /// C_T as a cyclic cube sequence.
    pub tour: Vec<usize>,
    pub far_paths: Vec<FarPath>,
    pub absorbing_paths: Vec<AbsorbingPath>,
    pub sea_usage: Vec<SeaUsage>,
    pub cycle: Vec<usize>,
}

impl HamiltonPlan {
    /// Sea cubes whose usage breaks the per-cube budget: at most two
    /// far-path vertices, at most `2·anchor_cap` anchors, one visit of C_T
    /// per tree edge at the cube, and nothing beyond what the cube holds.
    pub fn budget_violations(&self, anchor_cap: usize, max_visits: usize) -> Vec<SeaUsage> {
        self.sea_usage
            .iter()
            .filter(|u| {
                u.far_path > 2
                    || u.anchors > 2 * anchor_cap
                    || u.visits == 0
                    || u.visits > max_visits
                    || u.far_path + u.anchors + u.traversal > u.available
            })
            .copied()
            .collect()
    }

    pub fn write_cycle_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        write_cycle_csv(&self.cycle, w)
    }

    pub fn write_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

pub fn write_cycle_csv<W: Write>(cycle: &[usize], mut w: W) -> std::io::Result<()> {
    writeln!(w, "position,vertex")?;
    for (i, v) in cycle.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    Ok(())
}

/// Largest number of 𝒢̃-neighbours of a cube, (2c+1)^d.
pub fn tilde_degree_bound(params: &GeoParams, c: f64) -> f64 {
    (2.0 * c + 1.0).powi(params.d as i32)
}

/// Smallest M accepted by the A1 condition: M > 2U + 2 + 2(2c+1)^d.
pub fn a1_bound(params: &GeoParams, c: f64) -> f64 {
    2.0 * component_size_scale(params, c) as f64 + 2.0 + 2.0 * tilde_degree_bound(params, c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PreconditionViolation {
    /// Region classification has not been run or found no sea.
    NoSea,
    ThresholdTooSmall { threshold: usize, bound: f64 },
    ComponentTooLarge { component: usize, size: usize, bound: usize },
    NotTwoConnected,
}

impl std::fmt::Display for PreconditionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NoSea => write!(f, "A1: no sea"),
            Self::ThresholdTooSmall { threshold, bound } => {
                write!(f, "A1: M = {threshold} does not exceed {bound:.1}")
            }
            Self::ComponentTooLarge { component, size, bound } => {
                write!(f, "A1: nonfull component {component} has {size} > {bound} cubes")
            }
            Self::NotTwoConnected => write!(f, "A2: graph is not 2-connected"),
        }
    }
}

/// Checks A1 (nonfull component sizes, with the bound doubled in offline
/// mode, then the threshold) and A2 (2-connectivity), in that order.
/// Returns the first violation.
pub fn check_preconditions(
    graph: &DynamicGeoGraph,
    labels: &CubeLabels,
    c: f64,
    offline: bool,
) -> Result<(), PreconditionViolation> {
    let params = graph.params();
    if labels.regions.is_none() {
        return Err(PreconditionViolation::NoSea);
    }
    let u = component_size_scale(params, c) * if offline { 2 } else { 1 };
    if let Some((component, comp)) = labels.components.iter().enumerate().find(|(_, comp)| comp.len() > u) {
        return Err(PreconditionViolation::ComponentTooLarge {
            component,
            size: comp.len(),
            bound: u,
        });
    }
    let bound = a1_bound(params, c);
    if (labels.threshold as f64) <= bound {
        return Err(PreconditionViolation::ThresholdTooSmall {
            threshold: labels.threshold,
            bound,
        });
    }
    if !is_k_connected(graph, 2) {
        return Err(PreconditionViolation::NotTwoConnected);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CycleDefect {
    TooFewVertices { len: usize },
    OutOfRange { position: usize, vertex: usize },
    DuplicateVertex { position: usize, vertex: usize },
    MissingVertex { vertex: usize },
    /// Edge from position `index` to the next one (cyclically) is longer than r.
    EdgeTooLong { index: usize },
}

impl CycleDefect {
    pub fn code(&self) -> &'static str {
        match self {
            Self::TooFewVertices { .. } => "TOO_FEW_VERTICES",
            Self::OutOfRange { .. } => "OUT_OF_RANGE",
            Self::DuplicateVertex { .. } => "DUPLICATE_VERTEX",
            Self::MissingVertex { .. } => "MISSING_VERTEX",
            Self::EdgeTooLong { .. } => "EDGE_TOO_LONG",
        }
    }
}

/// Whether `cycle` is a Hamilton cycle of `graph`; the first defect found
/// otherwise. Needs at least three vertices.
pub fn verify_cycle(graph: &DynamicGeoGraph, cycle: &[usize]) -> Result<(), CycleDefect> {
    let n = graph.len();
    if n < 3 {
        return Err(CycleDefect::TooFewVertices { len: n });
    }
    let mut seen = vec![false; n];
    for (position, &vertex) in cycle.iter().enumerate() {
        if vertex >= n {
            return Err(CycleDefect::OutOfRange { position, vertex });
        }
        if std::mem::replace(&mut seen[vertex], true) {
            return Err(CycleDefect::DuplicateVertex { position, vertex });
        }
    }
    if let Some(vertex) = seen.iter().position(|&s| !s) {
        return Err(CycleDefect::MissingVertex { vertex });
    }
    let r2 = graph.params().r * graph.params().r;
    for index in 0..n {
        let (a, b) = (cycle[index], cycle[(index + 1) % n]);
        if torus_dist_sq(graph.point(a), graph.point(b)) > r2 {
            return Err(CycleDefect::EdgeTooLong { index });
        }
    }
    Ok(())
}
