//! The 1-choice process: every offered point is kept.

use crate::error::{GeoError, Result};
use crate::geometry::GeoParams;
use crate::spatial_graph::DynamicGeoGraph;

use super::hitting::{HittingRecord, HittingTracker};
use super::PairStream;

/// Safety cap on inserted points for any stop rule.
pub const POINT_CAP: usize = 100_000_000;

/// When a 1-choice run ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Insert exactly this many points.
    Fixed(usize),
    /// Continue until τ₁,ₖ is latched and t ≥ ⌈factor·τ₁,ₖ⌉, and until every
    /// tracked hitting time is latched.
    AfterTau1 { k: usize, factor: f64 },
}

#[derive(Debug, Clone)]
pub struct OneChoiceRun {
    pub graph: DynamicGeoGraph,
    pub record: HittingRecord,
}

impl OneChoiceRun {
    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }
}

/// Runs the 1-choice process, tracking τ₁,ₖ and τ₂,ₖ for every k in `ks`
/// (plus the k of an [`StopRule::AfterTau1`] rule).
pub fn run_one_choice(
    stream: &mut PairStream,
    params: GeoParams,
    ks: &[usize],
    stop: StopRule,
) -> Result<OneChoiceRun> {
    if stream.dim() != params.d {
        return Err(GeoError::Usage(format!(
            "stream of dimension {} for a {}-dimensional graph",
            stream.dim(),
            params.d
        )));
    }
    let mut tracked = ks.to_vec();
    match stop {
        StopRule::Fixed(n) if n > POINT_CAP => {
            return Err(GeoError::Length(format!("{n} points exceed the cap {POINT_CAP}")));
        }
        StopRule::AfterTau1 { k, factor } => {
            if k == 0 || !(factor >= 1.0 && factor.is_finite()) {
                return Err(GeoError::Usage(format!(
                    "AfterTau1 needs k >= 1 and a finite factor >= 1 (got k = {k}, factor = {factor})"
                )));
            }
            tracked.push(k);
        }
        _ => {}
    }
    let mut graph = DynamicGeoGraph::new(params);
    let mut tracker = HittingTracker::new(&tracked);
    let mut buf = vec![0.0; params.d];
    loop {
        let t = graph.len();
        let done = match stop {
            StopRule::Fixed(n) => t >= n,
            StopRule::AfterTau1 { k, factor } => tracker.tau1(k).is_some_and(|tau| {
                t >= (factor * tau as f64).ceil() as usize && tracker.all_latched()
            }),
        };
        if done {
            break;
        }
        if t >= POINT_CAP {
            return Err(GeoError::Length(format!(
                "stop rule {stop:?} did not trigger within {POINT_CAP} points"
            )));
        }
        stream.next_into(&mut buf);
        graph.insert_coords(&buf);
        tracker.on_insert(&graph, t);
    }
    Ok(OneChoiceRun {
        graph,
        record: tracker.record(),
    })
}

/// Geometric checkpoints {τ, ⌈1.1τ⌉, ⌈1.5τ⌉, 2τ, 4τ}, deduplicated.
pub fn checkpoint_times(tau: usize) -> Vec<usize> {
    let mut v = vec![tau, (11 * tau).div_ceil(10), (3 * tau).div_ceil(2), 2 * tau, 4 * tau];
    v.dedup();
    v
}
