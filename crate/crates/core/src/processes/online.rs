//! The online 2-choice rule g and the coupled uniform sequence Y.
//!
//! Stage 1 keeps the first point of each of the first t₂ pairs. The nonfull
//! cubes of those t₂ points form Λ, which is then frozen; afterwards the
//! first point is kept iff it lies in Λ (minus large far clusters in
//! Hamilton mode), otherwise its partner is kept.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::{trial_rng, GeoParams};
use crate::spatial_graph::{DynamicGeoGraph, IncrementalConnectivity};
use crate::tessellation::{
    blow_up_by, build_tessellations, classify_fullness, classify_regions, default_alpha, fullness_threshold_hamilton,
    fullness_threshold_k, CoarseTess,
};

use super::formulas::time_formulas;
use super::hitting::HittingTracker;
use super::PairStream;

/// Which choice function to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OnlineMode {
    /// g tuned for k-connectivity: M = max(k, 3k² + ⌈2d/α⌉).
    KConnect(usize),
    /// g tuned for Hamiltonicity, with rejection of large far clusters.
    Hamilton,
    /// Keep the first point of every pair.
    AlwaysFirst,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnlineConfig {
    pub params: GeoParams,
    pub mode: OnlineMode,
    /// Tessellation aspect c (cube side about r/c).
    pub c: f64,
    /// Surrogate exponent in the fullness threshold.
    pub alpha: f64,
    /// Number of pairs offered.
    pub n_pairs: usize,
    /// Replaces ⌈t₂⌉ from the time formulas.
    pub t2_override: Option<usize>,
    /// Replaces the mode's fullness threshold M.
    pub threshold_override: Option<usize>,
    /// Keep the full graph on the chosen points (memory heavy).
    pub keep_graph: bool,
}

impl OnlineConfig {
    pub fn new(params: GeoParams, mode: OnlineMode, c: f64, n_pairs: usize) -> Self {
        Self {
            params,
            mode,
            c,
            alpha: default_alpha(params.d),
            n_pairs,
            t2_override: None,
            threshold_override: None,
            keep_graph: false,
        }
    }

    /// Stage-1 length t₂.
    pub fn t2(&self) -> Result<usize> {
        match self.t2_override {
            Some(t) => Ok(t),
            None => {
                let k = match self.mode {
                    OnlineMode::KConnect(k) => k,
                    _ => 2,
                };
                Ok(time_formulas(&self.params, k, 0.0, self.c)?.t2.ceil() as usize)
            }
        }
    }

    pub fn threshold(&self) -> usize {
        if let Some(m) = self.threshold_override {
            return m;
        }
        match self.mode {
            OnlineMode::KConnect(k) => fullness_threshold_k(k, self.params.d, self.alpha),
            OnlineMode::Hamilton => fullness_threshold_hamilton(&self.params, self.c, self.alpha),
            OnlineMode::AlwaysFirst => 0,
        }
    }
}

/// Result of one online run. Steps t are 1-based; chosen point t is X_t^g.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub params: GeoParams,
    pub mode: OnlineMode,
    pub t2: usize,
    pub threshold: usize,
    /// Λ as coarse cube ids (empty before stage 2 or in always-first mode).
    pub lambda: Vec<usize>,
    /// The 2c-blow-up of Λ.
    pub lambda_blown: Vec<usize>,
    /// Vol(Λ_{2c}).
    pub p: f64,
    /// Chosen points, flat.
    pub chosen: Vec<f64>,
    /// Whether step t kept X_{2t−1}; index t − 1.
    pub chose_first: Vec<bool>,
    /// Steps t > t₂ with a pair member in Λ_{2c}, ascending.
    pub i_steps: Vec<usize>,
    /// Steps t > t₂ with no pair member in Λ_{2c}, ascending.
    pub j_steps: Vec<usize>,
    /// Last step t at which G(X_t) was disconnected.
    pub last_disconnected: Option<usize>,
    pub graph: Option<DynamicGeoGraph>,
    pub coarse: Option<CoarseTess>,
    pub diagnostics: Vec<String>,
}

impl OnlineRun {
    pub fn len(&self) -> usize {
        self.chose_first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chose_first.is_empty()
    }

    /// X_t^g for 1-based t.
    pub fn chosen_point(&self, t: usize) -> &[f64] {
        let d = self.params.d;
        &self.chosen[(t - 1) * d..t * d]
    }

    /// Whether G(X_s) is connected for every s in [t, len].
    pub fn connected_from(&self, t: usize) -> bool {
        self.last_disconnected.is_none_or(|s| t > s)
    }

    /// Trace as JSON lines: step, 1-based index of the kept point, coords.
    pub fn write_trace_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in 1..=self.len() {
            let idx = if self.chose_first[t - 1] { 2 * t - 1 } else { 2 * t };
            let line = serde_json::json!({ "t": t, "chosen": idx, "point": self.chosen_point(t) });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

struct StageTwo {
    lambda: Vec<bool>,
    reject: Vec<bool>,
    blown: Vec<bool>,
}

/// Runs the online 2-choice process with the configured choice function.
pub fn run_online(stream: &mut PairStream, cfg: &OnlineConfig) -> Result<OnlineRun> {
    let params = cfg.params;
    let d = params.d;
    if stream.dim() != d {
        return Err(GeoError::Usage(format!("stream of dimension {} for d = {d}", stream.dim())));
    }
    let always_first = cfg.mode == OnlineMode::AlwaysFirst;
    if let OnlineMode::KConnect(0) = cfg.mode {
        return Err(GeoError::Usage("k must be at least 1".into()));
    }
    let t2 = if always_first { cfg.n_pairs } else { cfg.t2()?.min(cfg.n_pairs) };
    let threshold = cfg.threshold();
    let coarse = if always_first {
        None
    } else {
        Some(build_tessellations(&params, cfg.c)?.0)
    };

    let mut run = OnlineRun {
        params,
        mode: cfg.mode,
        t2,
        threshold,
        lambda: Vec::new(),
        lambda_blown: Vec::new(),
        p: 0.0,
        chosen: Vec::with_capacity(cfg.n_pairs * d),
        chose_first: Vec::with_capacity(cfg.n_pairs),
        i_steps: Vec::new(),
        j_steps: Vec::new(),
        last_disconnected: None,
        graph: cfg.keep_graph.then(|| DynamicGeoGraph::new(params)),
        coarse: None,
        diagnostics: Vec::new(),
    };
    let mut conn = IncrementalConnectivity::new(d, params.r);
    let mut first = vec![0.0; d];
    let mut second = vec![0.0; d];
    let mut stage: Option<StageTwo> = None;

    for t in 1..=cfg.n_pairs {
        stream.next_into(&mut first);
        stream.next_into(&mut second);
        let keep_first = match (&stage, &coarse) {
            (Some(s), Some(tess)) => {
                let q1 = tess.cube_of(&first);
                let q2 = tess.cube_of(&second);
                if s.blown[q1] || s.blown[q2] {
                    run.i_steps.push(t);
                } else {
                    run.j_steps.push(t);
                }
                s.lambda[q1] && !s.reject[q1]
            }
            _ => true,
        };
        let p = if keep_first { &first } else { &second };
        run.chosen.extend_from_slice(p);
        run.chose_first.push(keep_first);
        conn.insert(p);
        if !conn.is_connected() {
            run.last_disconnected = Some(t);
        }
        if let Some(g) = run.graph.as_mut() {
            g.insert_coords(p);
        }
        if t == t2 {
            if let Some(tess) = &coarse {
                stage = Some(freeze_lambda(tess, cfg, threshold, &mut run));
            }
        }
    }
    run.coarse = coarse;
    Ok(run)
}

fn freeze_lambda(tess: &CoarseTess, cfg: &OnlineConfig, threshold: usize, run: &mut OnlineRun) -> StageTwo {
    let n = tess.cube_count();
    let labels = classify_fullness(tess, &run.chosen, threshold);
    let lambda_cubes: Vec<usize> = (0..n).filter(|&q| !labels.full[q]).collect();
    let mut lambda = vec![false; n];
    let mut reject = vec![false; n];
    let mut blown = vec![false; n];
    if lambda_cubes.is_empty() {
        run.diagnostics.push(format!(
            "no {threshold}-nonfull cubes after t2 = {}; choice degenerates to always-first",
            run.t2
        ));
        // everything is kept first; with Λ empty no pair is routed through 𝓘
        lambda.iter_mut().for_each(|x| *x = true);
        return StageTwo { lambda, reject, blown };
    }
    for &q in &lambda_cubes {
        lambda[q] = true;
    }
    if cfg.mode == OnlineMode::Hamilton {
        match classify_regions(tess, labels) {
            Ok(regions) => {
                let cutoff = cfg.params.r / 10.0;
                for cl in &regions.far_clusters {
                    if cl.diameter.is_none_or(|dm| dm >= cutoff) {
                        for &q in &cl.cubes {
                            reject[q] = true;
                        }
                    }
                }
            }
            Err(e) => run
                .diagnostics
                .push(format!("region classification failed ({e}); far-cluster rejection skipped")),
        }
    }
    let blown_cubes = blow_up_by(tess, &lambda_cubes, 2.0 * tess.c);
    for &q in &blown_cubes {
        blown[q] = true;
    }
    run.p = blown_cubes.len() as f64 / n as f64;
    run.lambda = lambda_cubes;
    run.lambda_blown = blown_cubes;
    StageTwo { lambda, reject, blown }
}

/// The coupled sequence Y and its routing variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledY {
    pub d: usize,
    pub t2: usize,
    /// Y points, flat.
    pub points: Vec<f64>,
    /// Step s of the online run with Y_t = X_s^g; index t − 1.
    pub source: Vec<usize>,
    /// B_t for t = t₂+1, t₂+2, …
    pub bernoulli: Vec<bool>,
}

impl CoupledY {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.points[(t - 1) * self.d..t * self.d]
    }

    /// T: the number of B_t = 1 for t₂ < t ≤ `tau1`.
    pub fn t_count(&self, tau1: usize) -> usize {
        let upto = tau1.saturating_sub(self.t2).min(self.bernoulli.len());
        self.bernoulli[..upto].iter().filter(|&&b| b).count()
    }

    /// T_𝓘: the T-th smallest element of 𝓘, or None when T = 0 or 𝓘 is
    /// too short.
    pub fn t_i(&self, run: &OnlineRun, tau1: usize) -> Option<usize> {
        let t = self.t_count(tau1);
        if t == 0 {
            None
        } else {
            run.i_steps.get(t - 1).copied()
        }
    }
}

/// Builds Y_1..Y_len from a finished online run. Auxiliary Bernoulli
/// variables come from `trial_rng(master_seed, stream)`.
pub fn coupled_y_sequence(run: &OnlineRun, master_seed: u64, stream: u64, len: usize) -> Result<CoupledY> {
    let d = run.params.d;
    let t2 = run.t2;
    let mut y = CoupledY {
        d,
        t2,
        points: Vec::with_capacity(len * d),
        source: Vec::with_capacity(len),
        bernoulli: Vec::new(),
    };
    for t in 1..=len.min(t2).min(run.len()) {
        y.points.extend_from_slice(run.chosen_point(t));
        y.source.push(t);
    }
    if len > t2 && run.len() < t2 {
        return Err(GeoError::Length(format!(
            "online run has {} steps, fewer than t2 = {t2}",
            run.len()
        )));
    }
    let mut rng = trial_rng(master_seed, stream);
    let (mut next_i, mut next_j) = (0usize, 0usize);
    for t in t2 + 1..=len {
        let b = rng.random_bool(run.p.clamp(0.0, 1.0));
        y.bernoulli.push(b);
        let (queue, cursor, name) = if b {
            (&run.i_steps, &mut next_i, "I")
        } else {
            (&run.j_steps, &mut next_j, "J")
        };
        let Some(&s) = queue.get(*cursor) else {
            return Err(GeoError::Length(format!(
                "queue {name} exhausted at Y step {t} after {} entries",
                queue.len()
            )));
        };
        *cursor += 1;
        y.points.extend_from_slice(run.chosen_point(s));
        y.source.push(s);
    }
    Ok(y)
}

/// τ₁,ₖ of the 1-choice process on Y, or None if Y ends first.
pub fn y_hitting_time(params: GeoParams, y: &CoupledY, k: usize) -> Option<usize> {
    let mut g = DynamicGeoGraph::new(params);
    let mut h = HittingTracker::new(&[k]);
    for t in 1..=y.len() {
        g.insert_coords(y.point(t));
        h.on_insert(&g, t - 1);
        if let Some(tau) = h.tau1(k) {
            return Some(tau);
        }
    }
    None
}
