//! `geochoice`: run processes, batch experiments and diagnostics from the
//! command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 regime diagnostic (no
//! usable trial or construction), 4 IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geochoice::experiments::{
    emit, fmt12, pilot_tau1, run_experiment, run_trial, summarize, ExperimentConfig, OutputFormat,
    ProcessKind, SummaryStats, TrialResult, TrialStatus,
};
use geochoice::geometry::{trial_rng, union_two_balls_volume, union_volume_monte_carlo, GeoParams};
use geochoice::hamilton::{a1_bound, build_reference_cycle, check_preconditions, write_cycle_csv};
use geochoice::processes::{run_one_choice, time_formulas, PairStream, StopRule};
use geochoice::spatial_graph::DynamicGeoGraph;
use geochoice::tessellation::{
    build_tessellations, classify_fullness, classify_regions, component_size_scale, cr_region, default_alpha,
    fullness_threshold_hamilton,
};
use geochoice::GeoError;

#[derive(Parser)]
#[command(name = "geochoice", version, about = "Random geometric graph processes on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run single trials of one process and print their hitting times and outcomes.
    Simulate(Common),
    /// Batch hitting-time statistics of the 1-choice process.
    HittingTimes(Common),
    /// Offline choice-set construction and its checks.
    Offline(Common),
    /// Online 2-choice rule g and the always-first baseline.
    Online(Common),
    /// Reference Hamilton-cycle construction on one graph.
    Hamilton {
        #[command(flatten)]
        common: Common,
        /// Number of points; defaults to the hitting time of minimum degree 2.
        #[arg(long)]
        t: Option<usize>,
    },
    /// Volume diagnostics: two-ball unions, Cr regions and time scales.
    Volume {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo samples per estimate.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key=value configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Radius; repeat for a sweep.
    #[arg(long)]
    r: Vec<f64>,
    /// Connectivity order; repeat for several.
    #[arg(long)]
    k: Vec<usize>,
    /// Tessellation aspect constant.
    #[arg(long)]
    c: Option<f64>,
    /// Fullness threshold override.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// one, online or offline.
    #[arg(long)]
    process: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, env = "GEOCHOICE_THREADS")]
    threads: Option<usize>,
    /// geometric or all.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Record extra per-trial diagnostics.
    #[arg(long)]
    trace: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        let code = match e {
            GeoError::Usage(_) | GeoError::Domain(_) | GeoError::Config(_) => 2,
            GeoError::Regime { .. } | GeoError::Construction { .. } | GeoError::Length(_) => 3,
            GeoError::Io { .. } => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

impl Common {
    fn build(&self, process: Option<ProcessKind>) -> Result<ExperimentConfig, GeoError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| GeoError::io(path, e))?;
                ExperimentConfig::from_text(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let set = |cfg: &mut ExperimentConfig, key: &str, v: Option<String>| match v {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        let list = |xs: &[String]| (!xs.is_empty()).then(|| xs.join(","));
        set(&mut cfg, "seed", self.seed.map(|x| x.to_string()))?;
        set(&mut cfg, "trials", self.trials.map(|x| x.to_string()))?;
        set(&mut cfg, "d", self.d.map(|x| x.to_string()))?;
        set(&mut cfg, "r", list(&self.r.iter().map(f64::to_string).collect::<Vec<_>>()))?;
        set(&mut cfg, "k", list(&self.k.iter().map(usize::to_string).collect::<Vec<_>>()))?;
        set(&mut cfg, "c", self.c.map(|x| x.to_string()))?;
        set(&mut cfg, "M", self.m.map(|x| x.to_string()))?;
        set(&mut cfg, "epsilon", self.epsilon.map(|x| x.to_string()))?;
        set(&mut cfg, "process", self.process.clone())?;
        set(&mut cfg, "out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set(&mut cfg, "format", self.format.clone())?;
        set(&mut cfg, "threads", self.threads.map(|x| x.to_string()))?;
        set(&mut cfg, "checkpoints", self.checkpoints.clone())?;
        if self.trace {
            cfg.trace = true;
        }
        if let Some(p) = process {
            if self.process.as_deref().is_some_and(|s| s != p.as_str()) {
                return Err(GeoError::Config(format!(
                    "this subcommand runs process '{}', not '{}'",
                    p.as_str(),
                    self.process.as_deref().unwrap_or_default()
                )));
            }
            cfg.process = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::HittingTimes(c) => batch(c, ProcessKind::One),
        Command::Offline(c) => batch(c, ProcessKind::Offline),
        Command::Online(c) => batch(c, ProcessKind::Online),
        Command::Hamilton { common, t } => hamilton(common, *t),
        Command::Volume { common, samples } => volume(common, *samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn write_outputs(cfg: &ExperimentConfig, trials: &[TrialResult], summary: &Result<SummaryStats, GeoError>) -> CliResult {
    if let Some(path) = &cfg.out {
        emit(path, cfg.format, cfg, trials, summary)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn print_summary(s: &SummaryStats) {
    println!("trials {}  failed {}", s.trials, s.failed);
    println!("{:<8} {:<26} {:>2} {:<8} {:>5} {:>14} {:>14}  success [95% CI]", "r", "metric", "k", "label", "n", "mean", "stderr");
    for m in &s.metrics {
        let ci = m
            .success
            .map(|p| format!("  {} [{}, {}]", fmt12(p.fraction), fmt12(p.lower), fmt12(p.upper)))
            .unwrap_or_default();
        println!(
            "{:<8} {:<26} {:>2} {:<8} {:>5} {:>14} {:>14}{ci}",
            fmt12(m.r),
            m.metric,
            m.k,
            m.label,
            m.n,
            fmt12(m.mean),
            fmt12(m.stderr)
        );
    }
    for q in &s.ratios {
        println!(
            "r = {}  k = {}: mean tau1 / mean tau2 = {} / {} = {}",
            fmt12(q.r),
            q.k,
            fmt12(q.mean_tau1),
            fmt12(q.mean_tau2),
            fmt12(q.ratio)
        );
    }
}

fn batch(common: &Common, process: ProcessKind) -> CliResult {
    let cfg = common.build(Some(process))?;
    let trials = run_experiment(&cfg)?;
    let summary = summarize(&trials);
    write_outputs(&cfg, &trials, &summary)?;
    println!("config hash {}", cfg.hash());
    let s = summary?;
    print_summary(&s);
    Ok(())
}

fn simulate(common: &Common) -> CliResult {
    let mut cfg = common.build(None)?;
    if common.trials.is_none() && common.config.is_none() {
        cfg.trials = 1;
    }
    let pilots = if cfg.process == ProcessKind::Online {
        cfg.r
            .iter()
            .map(|&r| pilot_tau1(&cfg, GeoParams::new(cfg.d, r)?))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![Vec::new(); cfg.r.len()]
    };
    let mut trials = Vec::new();
    for (ri, &r) in cfg.r.iter().enumerate() {
        for i in 0..cfg.trials {
            let t = run_trial(&cfg, ri * cfg.trials + i, r, &pilots[ri]);
            println!("trial {} (r = {}, {:.3} s)", t.index, fmt12(r), t.wall_seconds);
            for h in &t.hitting {
                println!("  k = {}: tau1 = {}, tau2 = {}", h.k, h.tau1, h.tau2);
            }
            for o in t.outcomes.iter().filter(|o| !o.metric.starts_with("tau")) {
                println!("  {} k={} @{} (t = {}): {}", o.metric, o.k, o.label, o.checkpoint, fmt12(o.value));
            }
            for d in &t.diagnostics {
                println!("  note: {d}");
            }
            if let TrialStatus::Failed { reason } = &t.status {
                println!("  FAILED: {reason}");
            }
            trials.push(t);
        }
    }
    let summary = summarize(&trials);
    write_outputs(&cfg, &trials, &summary)?;
    summary?;
    Ok(())
}

fn hamilton(common: &Common, t: Option<usize>) -> CliResult {
    let cfg = common.build(None)?;
    let params = GeoParams::new(cfg.d, cfg.r[0])?;
    let mut stream = PairStream::new(cfg.d, cfg.seed, 0);
    let n = match t {
        Some(n) => n,
        None => {
            let stop = StopRule::AfterTau1 { k: 2, factor: 1.0 };
            let run = run_one_choice(&mut PairStream::new(cfg.d, cfg.seed, 0), params, &[2], stop)?;
            run.record.tau1(2).expect("latched by the stop rule")
        }
    };
    let run = run_one_choice(&mut stream, params, &[], StopRule::Fixed(n))?;
    let g: DynamicGeoGraph = run.graph;
    let c = cfg.aspect();
    let m = cfg
        .m
        .unwrap_or_else(|| fullness_threshold_hamilton(&params, c, default_alpha(cfg.d)));
    println!("n = {n}, d = {}, r = {}, c = {}, M = {m}", cfg.d, fmt12(params.r), fmt12(c));
    println!(
        "A1 needs M > {} and nonfull components of at most U = {} cubes",
        fmt12(a1_bound(&params, c)),
        component_size_scale(&params, c)
    );
    let (tess, _) = build_tessellations(&params, c)?;
    let labels = classify_regions(&tess, classify_fullness(&tess, g.flat_coords(), m))?;
    match check_preconditions(&g, &labels, c, false) {
        Ok(()) => println!("preconditions A1 and A2 hold"),
        Err(v) => println!("precondition violated: {v}"),
    }
    let plan = build_reference_cycle(&g, &tess, &labels)?;
    println!(
        "Hamilton cycle built and verified: {} vertices, {} far paths, {} absorbing paths",
        plan.cycle.len(),
        plan.far_paths.len(),
        plan.absorbing_paths.len()
    );
    if let Some(path) = &cfg.out {
        let io = |e| GeoError::io(path, e);
        let file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        match cfg.format {
            OutputFormat::Csv => write_cycle_csv(&plan.cycle, file).map_err(io)?,
            OutputFormat::Json => plan.write_json(file).map_err(io)?,
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn volume(common: &Common, samples: usize) -> CliResult {
    let cfg = common.build(None)?;
    if samples == 0 {
        return Err(GeoError::Config("samples must be positive".into()).into());
    }
    let mut lines = Vec::new();
    for (ri, &r) in cfg.r.iter().enumerate() {
        let params = GeoParams::new(cfg.d, r)?;
        lines.push(format!("# d = {}, r = {}, theta_d r^d = {}", cfg.d, fmt12(r), fmt12(params.ball_volume())));
        lines.push("nu/r,union_quadrature,union_monte_carlo,stderr".into());
        let mut rng = trial_rng(cfg.seed, ri as u64);
        for i in 0..=8 {
            let nu = r * i as f64 / 4.0;
            if nu + 2.0 * r >= 0.5 {
                break;
            }
            let exact = union_two_balls_volume(&params, nu)?;
            let (mc, se) = union_volume_monte_carlo(&params, nu, &mut rng, samples)?;
            lines.push(format!("{},{},{},{}", fmt12(i as f64 / 4.0), fmt12(exact), fmt12(mc), fmt12(se)));
        }
        if cfg.d >= 2 {
            let (_, fine) = build_tessellations(&params, cfg.aspect())?;
            lines.push("cr_cubes,cr_lower,cr_upper,cr_monte_carlo,stderr".into());
            let lat = fine.lattice();
            // straight runs of fine cubes along the first axis
            for len in [1usize, 2, 4, 8] {
                let cubes: Vec<usize> = (0..len)
                    .map(|i| {
                        let mut x = vec![0usize; cfg.d];
                        x[0] = i;
                        lat.id(&x)
                    })
                    .collect();
                match cr_region(&fine, &cubes) {
                    Ok(cr) => {
                        let (lo, hi) = cr.volume_bounds()?;
                        let (v, se) = cr.estimate_volume(&mut rng, samples);
                        lines.push(format!("{len},{},{},{},{}", fmt12(lo), fmt12(hi), fmt12(v), fmt12(se)));
                    }
                    Err(e) => lines.push(format!("# cr of {len} cubes: {e}")),
                }
            }
        }
        lines.push("k,t_min,t_max,t2,l_minus,l_plus,t_star".into());
        for &k in &cfg.k {
            let tf = time_formulas(&params, k, cfg.epsilon, cfg.aspect())?;
            lines.push(format!(
                "{k},{},{},{},{},{},{}",
                fmt12(tf.t_min),
                fmt12(tf.t_max),
                fmt12(tf.t2),
                fmt12(tf.l_minus),
                fmt12(tf.l_plus),
                fmt12(tf.t_star)
            ));
        }
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    if let Some(path) = &cfg.out {
        write_text(path, &text)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), GeoError> {
    std::fs::write(path, text).map_err(|e| GeoError::io(path, e))
}
