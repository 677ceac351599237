//! Trial execution: one seeded stream per trial, run on a rayon pool and
//! gathered in trial order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geometry::GeoParams;
use crate::hamilton::{build_reference_cycle, exact_hamiltonian, verify_cycle, EXACT_CAP};
use crate::offline_choice::{construct_offline, validate_choice_set, OfflineConfig};
use crate::processes::{
    run_one_choice, run_online, HittingRecord, OnlineConfig, OnlineMode, PairStream, StopRule, TimeFormulas,
};
use crate::spatial_graph::{is_k_connected, DynamicGeoGraph, SimpleGraph};
use crate::tessellation::{
    build_tessellations, classify_fullness, classify_regions, default_alpha, fullness_threshold_hamilton,
};

use super::config::{ExperimentConfig, ProcessKind};
use super::stats::round12;

/// Stream ids of pilot runs start here, away from the trial streams.
pub const PILOT_STREAM: u64 = 1 << 62;

/// Checkpoints, in tenths of τ₁,₂, at which the Hamilton construction runs.
pub const HAMILTON_TENTHS: [usize; 3] = [10, 15, 20];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub k: usize,
    pub tau1: usize,
    pub tau2: usize,
}

/// One measured number. `checkpoint` is the time t it refers to and
/// `label` names the schedule slot, so trials with different τ line up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub metric: String,
    pub k: usize,
    pub label: String,
    pub checkpoint: usize,
    pub value: f64,
    /// 0/1 metric, summarised as a proportion.
    pub flag: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub stream: u64,
    pub r: f64,
    pub status: TrialStatus,
    pub hitting: Vec<HittingTimes>,
    pub outcomes: Vec<Outcome>,
    pub diagnostics: Vec<String>,
    /// Not serialised: it would break reproducibility of the outputs.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Equality ignores the wall time.
impl PartialEq for TrialResult {
    fn eq(&self, other: &Self) -> bool {
        (self.index, self.stream, self.r, &self.status, &self.hitting, &self.outcomes, &self.diagnostics)
            == (other.index, other.stream, other.r, &other.status, &other.hitting, &other.outcomes, &other.diagnostics)
    }
}

impl TrialResult {
    pub fn new(index: usize, stream: u64, r: f64) -> Self {
        Self {
            index,
            stream,
            r,
            status: TrialStatus::Ok,
            hitting: Vec::new(),
            outcomes: Vec::new(),
            diagnostics: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    fn push(&mut self, metric: &str, k: usize, label: impl Into<String>, checkpoint: usize, value: f64) {
        self.outcomes.push(Outcome {
            metric: metric.into(),
            k,
            label: label.into(),
            checkpoint,
            value: round12(value),
            flag: false,
        });
    }

    fn push_flag(&mut self, metric: &str, k: usize, label: impl Into<String>, checkpoint: usize, value: bool) {
        self.outcomes.push(Outcome {
            metric: metric.into(),
            k,
            label: label.into(),
            checkpoint,
            value: f64::from(u8::from(value)),
            flag: true,
        });
    }

    pub fn outcome(&self, metric: &str, k: usize, label: &str) -> Option<&Outcome> {
        self.outcomes
            .iter()
            .find(|o| o.metric == metric && o.k == k && o.label == label)
    }

    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Label of the checkpoint ⌈f·τ⌉ for f in tenths: "tau", "1.1tau", "2tau".
pub fn tenths_label(f: usize) -> String {
    match (f / 10, f % 10) {
        (1, 0) => "tau".into(),
        (w, 0) => format!("{w}tau"),
        (w, t) => format!("{w}.{t}tau"),
    }
}

fn after(tenths: usize, tau: usize) -> usize {
    (tenths * tau).div_ceil(10)
}

/// Runs every trial of the configuration. Per-trial errors become failed
/// results; only an invalid configuration or a pool failure is an error.
/// The output does not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| GeoError::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        let pilots = if cfg.process == ProcessKind::Online {
            cfg.r
                .iter()
                .map(|&r| pilot_tau1(cfg, GeoParams::new(cfg.d, r)?))
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![Vec::new(); cfg.r.len()]
        };
        let jobs: Vec<(usize, usize)> = (0..cfg.r.len())
            .flat_map(|ri| (0..cfg.trials).map(move |i| (ri, i)))
            .collect();
        let mut results: Vec<TrialResult> = jobs
            .par_iter()
            .map(|&(ri, i)| {
                let index = ri * cfg.trials + i;
                run_trial(cfg, index, cfg.r[ri], &pilots[ri])
            })
            .collect();
        results.sort_by_key(|t| t.index);
        Ok(results)
    })
}

/// Runs a single trial; `pilot` holds the pilot mean of τ₁,ₖ per configured
/// k (online process only).
pub fn run_trial(cfg: &ExperimentConfig, index: usize, r: f64, pilot: &[f64]) -> TrialResult {
    let start = Instant::now();
    let stream = index as u64;
    let mut tr = TrialResult::new(index, stream, r);
    let outcome = GeoParams::new(cfg.d, r).and_then(|params| {
        let mut points = PairStream::new(cfg.d, cfg.seed, stream);
        match cfg.process {
            ProcessKind::One => one_choice_trial(cfg, params, &mut points, &mut tr),
            ProcessKind::Offline => offline_trial(cfg, params, &mut points, &mut tr),
            ProcessKind::Online => online_trial(cfg, params, stream, pilot, &mut tr),
        }
    });
    if let Err(e) = outcome {
        tr.status = TrialStatus::Failed { reason: e.to_string() };
    }
    tr.wall_seconds = start.elapsed().as_secs_f64();
    tr
}

fn record_hitting(
    params: &GeoParams,
    ks: &[usize],
    rec: &HittingRecord,
    tr: &mut TrialResult,
) -> Result<Vec<HittingTimes>> {
    let mut out = Vec::new();
    for &k in ks {
        let (Some(tau1), Some(tau2)) = (rec.tau1(k), rec.tau2(k)) else {
            return Err(GeoError::Length(format!("hitting times for k = {k} were not reached")));
        };
        let h = HittingTimes { k, tau1, tau2 };
        tr.push("tau1", k, "tau1", tau1, tau1 as f64);
        tr.push("tau2", k, "tau2", tau2, tau2 as f64);
        // θ r^d τ₁ / log(1/r)
        let scaled = params.theta_d * params.r.powi(params.d as i32) * tau1 as f64 / params.log_inv_r();
        tr.push("tau1_scaled", k, "tau1", tau1, scaled);
        out.push(h);
    }
    tr.hitting.extend(&out);
    Ok(out)
}

fn prefix_graph(g: &DynamicGeoGraph, t: usize) -> DynamicGeoGraph {
    let d = g.dim();
    DynamicGeoGraph::from_points(*g.params(), g.flat_coords()[..t * d].chunks(d))
}

fn one_choice_trial(cfg: &ExperimentConfig, params: GeoParams, points: &mut PairStream, tr: &mut TrialResult) -> Result<()> {
    let tenths = cfg.checkpoints.tenths();
    let last = *tenths.last().expect("nonempty schedule");
    let stop = StopRule::AfterTau1 {
        k: cfg.max_k(),
        factor: (last as f64 / 10.0).max(2.0),
    };
    let run = run_one_choice(points, params, &cfg.k, stop)?;
    let hitting = record_hitting(&params, &cfg.k, &run.record, tr)?;
    for h in &hitting {
        for &f in &tenths {
            let t = after(f, h.tau1);
            let ok = is_k_connected(&run.graph.prefix(t), h.k);
            tr.push_flag("k_connected", h.k, tenths_label(f), t, ok);
        }
        if h.k == 2 {
            for f in HAMILTON_TENTHS {
                let t = after(f, h.tau1);
                hamilton_check(cfg, &prefix_graph(&run.graph, t), &tenths_label(f), tr);
            }
        }
    }
    Ok(())
}

/// Reference construction on `g`, recorded as `hamiltonian`; a successful
/// cycle is re-verified independently (`cycle_verified`).
fn hamilton_check(cfg: &ExperimentConfig, g: &DynamicGeoGraph, label: &str, tr: &mut TrialResult) {
    let params = *g.params();
    let c = cfg.aspect();
    let t = g.len();
    let attempt = build_tessellations(&params, c).and_then(|(tess, _)| {
        let m = cfg
            .m
            .unwrap_or_else(|| fullness_threshold_hamilton(&params, c, default_alpha(params.d)));
        let labels = classify_regions(&tess, classify_fullness(&tess, g.flat_coords(), m))?;
        build_reference_cycle(g, &tess, &labels)
    });
    match attempt {
        Ok(plan) => {
            tr.push_flag("hamiltonian", 2, label, t, true);
            tr.push_flag("cycle_verified", 2, label, t, verify_cycle(g, &plan.cycle).is_ok());
            if cfg.trace {
                tr.diagnostics.push(format!(
                    "hamilton@{label}: {} far paths, {} absorbing paths, tour of {} cubes",
                    plan.far_paths.len(),
                    plan.absorbing_paths.len(),
                    plan.tour.len()
                ));
            }
        }
        Err(e) => {
            tr.push_flag("hamiltonian", 2, label, t, false);
            tr.diagnostics.push(format!("hamilton@{label}: {e}"));
        }
    }
    if t <= EXACT_CAP {
        if let Ok(h) = exact_hamiltonian(g) {
            tr.push_flag("exact_hamiltonian", 2, label, t, h);
        }
    }
}

fn offline_trial(cfg: &ExperimentConfig, params: GeoParams, points: &mut PairStream, tr: &mut TrialResult) -> Result<()> {
    let stop = StopRule::AfterTau1 { k: cfg.max_k(), factor: 1.0 };
    let run = run_one_choice(points, params, &cfg.k, stop)?;
    let hitting = record_hitting(&params, &cfg.k, &run.record, tr)?;
    let mut graph = run.graph;
    let need = hitting.iter().map(|h| 2 * h.tau2).max().unwrap_or(0);
    let mut buf = vec![0.0; params.d];
    while graph.len() < need {
        points.next_into(&mut buf);
        graph.insert_coords(&buf);
    }
    for h in &hitting {
        let k = h.k;
        let t = 2 * h.tau2;
        let g = prefix_graph(&graph, t);
        let mut ocfg = OfflineConfig::new(&params, k);
        ocfg.c = cfg.aspect();
        if let Some(m) = cfg.m {
            ocfg.threshold = m;
        }
        match construct_offline(&g, &ocfg) {
            Ok(con) => {
                tr.push_flag("offline_constructed", k, "2tau2", t, true);
                tr.push_flag("offline_valid", k, "2tau2", t, validate_choice_set(&con.table, h.tau2).is_valid());
                tr.push("conflict_rate", k, "2tau2", t, con.conflict_rate());
                tr.push("b_pairs", k, "2tau2", t, con.stage1.b_pairs as f64);
                let cs = SimpleGraph::induced(&g, &con.table.members());
                tr.push_flag("cs_k_connected", k, "2tau2", t, is_k_connected(&cs, k));
                tr.push("nonfull_components", k, "2tau2", t, con.labels.components.len() as f64);
                let largest = con.labels.components.iter().map(Vec::len).max().unwrap_or(0);
                tr.push("max_component_cubes", k, "2tau2", t, largest as f64);
            }
            // a missing sea makes the whole trial degenerate
            Err(e @ GeoError::Regime { .. }) => return Err(e),
            Err(e) => {
                tr.push_flag("offline_constructed", k, "2tau2", t, false);
                tr.diagnostics.push(format!("offline k={k}: {e}"));
            }
        }
    }
    Ok(())
}

fn online_trial(cfg: &ExperimentConfig, params: GeoParams, stream: u64, pilot: &[f64], tr: &mut TrialResult) -> Result<()> {
    let c = cfg.aspect();
    for (ki, &k) in cfg.k.iter().enumerate() {
        // supercritical: g tuned for k-connectivity, checked at 2t ≥ L⁺ + t₂
        let mut ocfg = OnlineConfig::new(params, OnlineMode::KConnect(k), c, 0);
        ocfg.threshold_override = cfg.m;
        let t2 = ocfg.t2()?;
        let l_plus = TimeFormulas::l_at(&params, k, cfg.epsilon)?;
        let t = ((l_plus + t2 as f64) / 2.0).ceil() as usize;
        ocfg.n_pairs = t;
        let run = run_online(&mut PairStream::new(params.d, cfg.seed, stream), &ocfg)?;
        tr.push_flag("online_connected", k, "L+t2", t, run.connected_from(t));
        tr.push("online_p", k, "L+t2", t, run.p);
        tr.diagnostics.extend(run.diagnostics.iter().map(|s| format!("online k={k}: {s}")));

        // subcritical: always-first with 2t offered points below the pilot mean
        let mean_tau = pilot[ki];
        tr.push("pilot_tau1", k, "pilot", 0, mean_tau);
        let offered = TimeFormulas::subcritical_offered(&params, mean_tau)?;
        let n = (offered / 2.0).floor();
        if n < 1.0 {
            tr.diagnostics.push(format!("always-first k={k}: offered count {offered:.1} leaves no step"));
            continue;
        }
        let n = n as usize;
        let first = OnlineConfig::new(params, OnlineMode::AlwaysFirst, c, n);
        let run = run_online(&mut PairStream::new(params.d, cfg.seed, stream), &first)?;
        tr.push_flag("always_first_disconnected", k, "sub", n, run.last_disconnected == Some(n));
    }
    Ok(())
}

/// Mean τ₁,ₖ per configured k over `cfg.trials` pilot runs.
pub fn pilot_tau1(cfg: &ExperimentConfig, params: GeoParams) -> Result<Vec<f64>> {
    let stop = StopRule::AfterTau1 { k: cfg.max_k(), factor: 1.0 };
    let taus = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = PairStream::new(params.d, cfg.seed, PILOT_STREAM + i);
            let rec = run_one_choice(&mut s, params, &cfg.k, stop)?.record;
            Ok(cfg.k.iter().map(|&k| rec.tau1(k).unwrap_or(0) as f64).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..cfg.k.len())
        .map(|j| taus.iter().map(|v| v[j]).sum::<f64>() / taus.len() as f64)
        .collect())
}
