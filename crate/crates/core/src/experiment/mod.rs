//! Config-driven experiment runs with reproducible artifacts.
//!
//! A run writes into `<output root>/<kind>-<hash prefix>/` and finishes with a
//! `manifest.json` listing the SHA-256 of every artifact. Reruns of the same
//! config produce byte-identical files.

pub mod config;

pub use config::*;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::composition::{init_gaussian, HiddenSkillVector, ModelState, SgdTrainer};
use crate::distributions::{DistributionKind, SkillDistribution};
use crate::error::{Error, Result};
use crate::generators::arithmetic::{gen_arithmetic, ArithmeticConfig};
use crate::generators::gsm::{gen_gsm, GsmConfig};
use crate::generators::multihop::{gen_multihop_qa, gen_qa_stream, gen_relation_graph};
use crate::generators::s5::{gen_state_tracking, Hops};
use crate::generators::{to_jsonl, DatasetManifest, DatasetRecord};
use crate::pca::pca_top2;
use crate::population::population_gd_trajectory;
use crate::probes::{
    check_init_concentration, check_pl_inequality, check_stationary_points, csq_packing, estimate_gradient_noise,
    noise_batch_size, separation_experiment, CsqPackingConfig, InitBrackets, SeedStreams, SeparationConfig,
};
use crate::rng::{derive_rng, derive_seed, rng_from_seed};
use crate::sgd::run_sgd;
use crate::stages::{
    assign_bins, bin_skill_sets, checkpoint_diffs, detect_stages, landscape_slice, tail_gradient_norm,
    StageThresholds, TailGradientPoint,
};
use crate::trajectory::{TrajectoryLog, TrajectoryOptions};

pub const MANIFEST_SCHEMA: &str = "skillcomp.manifest/v1";
pub const SUMMARY_SCHEMA: &str = "skillcomp.summary/v1";

/// Environment variable overriding the config's output root.
pub const OUTPUT_ENV: &str = "SKILLCOMP_OUT";

const TAIL_GRADIENT_SAMPLES: usize = 20_000;

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub output_root: Option<PathBuf>,
    pub parallelism: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TrialStatus {
    Completed,
    Diverged { step: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub name: String,
    #[serde(flatten)]
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema: String,
    pub kind: String,
    pub config_hash: String,
    pub version: String,
    pub config: serde_json::Value,
    pub trials: Vec<TrialRecord>,
    pub diverged: usize,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunReport {
    pub fn diverged(&self) -> bool {
        self.manifest.diverged > 0
    }

    /// 2 when any trial diverged, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.diverged() {
            2
        } else {
            0
        }
    }
}

/// `--out`, then `SKILLCOMP_OUT`, then the config's `output_dir`, then `runs`.
pub fn resolve_output_root(cli: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs"))
}

struct Artifacts {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl Artifacts {
    fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        self.entries.push(ArtifactEntry {
            path: rel.to_string(),
            bytes: contents.len(),
            sha256: config::hex(&Sha256::digest(contents)),
        });
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
}

/// Validates `config` with `overrides` applied and runs it.
pub fn run_experiment(config: &ExperimentConfig, overrides: &RunOverrides) -> Result<RunReport> {
    let mut cfg = config.clone();
    if let Some(seed) = overrides.seed {
        cfg.seeds.root = Some(seed);
    }
    if let Some(p) = overrides.parallelism {
        cfg.parallelism = Some(p);
    }
    cfg.validate()?;
    if cfg.kind != ExperimentKind::GenData && cfg.task.k % 2 == 1 {
        log::warn!("k = {} is odd; the convergence guarantees assume even k", cfg.task.k);
    }
    let hash = cfg.hash();
    let root = resolve_output_root(overrides.output_root.as_deref(), &cfg);
    let dir = root.join(format!("{}-{}", cfg.kind.name(), &hash[..12]));
    std::fs::create_dir_all(&dir)?;
    let mut artifacts = Artifacts { dir: dir.clone(), entries: Vec::new() };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.parallelism {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let ctx = Ctx { cfg: &cfg, hash: hash.clone() };
    log::info!("running {} into {}", cfg.kind.name(), dir.display());
    let trials = pool.install(|| match cfg.kind {
        ExperimentKind::MinimalRun => run_single(&ctx, &mut artifacts, Dynamics::Sgd),
        ExperimentKind::PopulationRun => run_single(&ctx, &mut artifacts, Dynamics::Population),
        ExperimentKind::SweepAlpha => run_sweep(&ctx, &mut artifacts),
        ExperimentKind::Separation => run_separation(&ctx, &mut artifacts),
        ExperimentKind::Landscape => run_landscape(&ctx, &mut artifacts),
        ExperimentKind::Probes => run_probes(&ctx, &mut artifacts),
        ExperimentKind::GenData => run_gen_data(&ctx, &mut artifacts),
    })?;

    let diverged = trials.iter().filter(|t| matches!(t.status, TrialStatus::Diverged { .. })).count();
    if diverged > 0 {
        log::warn!("{diverged} of {} trials diverged", trials.len());
    }
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.into(),
        kind: cfg.kind.name().into(),
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION").into(),
        config: serde_json::to_value(ExperimentConfig { parallelism: None, ..cfg.clone() })?,
        trials,
        diverged,
        artifacts: artifacts.entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(RunReport { dir, manifest })
}

fn completed(name: impl Into<String>) -> TrialRecord {
    TrialRecord { name: name.into(), status: TrialStatus::Completed }
}

fn trial_setup(cfg: &ExperimentConfig, trial: u64) -> Result<(HiddenSkillVector, ModelState)> {
    let d = cfg.task.d;
    let wstar = match cfg.task.wstar {
        HiddenVectorInit::Rademacher => {
            HiddenSkillVector::rademacher(d, &mut rng_from_seed(cfg.seeds.trial_seed(SeedRole::Wstar, trial)))
        }
        HiddenVectorInit::Ones => HiddenSkillVector::ones(d),
    };
    let w0 = init_gaussian(d, cfg.task.init_scale, &mut rng_from_seed(cfg.seeds.trial_seed(SeedRole::Init, trial)))?;
    Ok((wstar, w0))
}

fn trajectory_options(cfg: &ExperimentConfig, dist: &SkillDistribution, extra_loss_threshold: Option<f64>) -> Result<TrajectoryOptions> {
    let l = &cfg.logging;
    let mut loss_thresholds = l.loss_thresholds.clone();
    if let Some(t) = extra_loss_threshold {
        if !loss_thresholds.contains(&t) {
            loss_thresholds.push(t);
        }
    }
    Ok(TrajectoryOptions {
        log_every: l.log_every,
        checkpoint_every: l.checkpoint_every,
        loss_thresholds,
        recovery_thresholds: l.recovery_thresholds.clone(),
        stop_loss: l.stop_loss,
        stop_recovery: l.stop_recovery,
        bins: if l.bins > 0 { Some(bin_skill_sets(&assign_bins(dist, l.bins)?)) } else { None },
    })
}

/// A finished trajectory, or the step at which it diverged.
type Outcome = std::result::Result<TrajectoryLog, u64>;

/// One trial of `dynamics`; divergence is returned as a status, other
/// errors propagate.
fn simulate(
    cfg: &ExperimentConfig,
    dist: &SkillDistribution,
    trial: u64,
    dynamics: Dynamics,
    opts: &TrajectoryOptions,
) -> Result<Outcome> {
    let (wstar, w0) = trial_setup(cfg, trial)?;
    let eta = cfg.task.eta_for(dist);
    let res = match dynamics {
        Dynamics::Population => {
            population_gd_trajectory(&w0.w, wstar.as_slice(), dist.weights(), cfg.task.k, eta, cfg.task.steps, opts)
        }
        Dynamics::Sgd => {
            let mut trainer = SgdTrainer::new(dist, &wstar, cfg.task.k, eta, cfg.task.batch_size)?;
            let mut state = w0;
            let mut rng = rng_from_seed(cfg.seeds.trial_seed(SeedRole::Data, trial));
            run_sgd(&mut trainer, &mut state, cfg.task.steps, opts, &mut rng)
        }
    };
    match res {
        Ok(log) => Ok(Ok(log)),
        Err(Error::Divergence { step }) => Ok(Err(step)),
        Err(e) => Err(e),
    }
}

fn run_single(ctx: &Ctx, out: &mut Artifacts, dynamics: Dynamics) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let dist = cfg.distribution.build(cfg.task.d, &cfg.seeds, 0)?;
    let opts = trajectory_options(cfg, &dist, None)?;
    let log = match simulate(cfg, &dist, 0, dynamics, &opts)? {
        Ok(log) => log,
        Err(step) => return Ok(vec![TrialRecord { name: "trial-0".into(), status: TrialStatus::Diverged { step } }]),
    };
    out.write("trajectory.csv", log.to_csv(&ctx.hash).as_bytes())?;
    if dynamics == Dynamics::Population {
        let eta = cfg.task.eta_for(&dist);
        let pl = check_pl_inequality(&log, dist.weights(), cfg.task.k, eta);
        let mut text = String::new();
        let _ = writeln!(text, "pl_min_ratio={}", pl.min_ratio.map(|x| x.to_string()).unwrap_or_default());
        let _ = writeln!(text, "pl_pass={}", pl.pass);
        let _ = writeln!(text, "pl_preconditions_met={}", pl.preconditions_met);
        let _ = writeln!(text, "pl_checked_steps={}", pl.ratios.len());
        let _ = writeln!(text, "pl_skipped_steps={}", pl.skipped_steps.len());
        out.write("pl.txt", text.as_bytes())?;
        if cfg.logging.bins > 0 {
            let mut report = detect_stages(&log, StageThresholds::default())?;
            if let (Some(s2), true) = (report.stage2_entry_step, cfg.logging.bins >= 4) {
                report.tail_gradient.push(tail_gradient_at(cfg, &dist, s2)?);
            }
            out.write("stages.txt", report.to_key_values().as_bytes())?;
        }
    }
    Ok(vec![completed("trial-0")])
}

/// Tail-bin gradient norms at `step` of trial 0's population run, with head
/// (bin 1) and middle (bins 2 to 4) contexts.
fn tail_gradient_at(cfg: &ExperimentConfig, dist: &SkillDistribution, step: u64) -> Result<TailGradientPoint> {
    let (wstar, w0) = trial_setup(cfg, 0)?;
    let eta = cfg.task.eta_for(dist);
    let opts = TrajectoryOptions { log_every: step.max(1), ..Default::default() };
    let log = population_gd_trajectory(&w0.w, wstar.as_slice(), dist.weights(), cfg.task.k, eta, step, &opts)?;
    let bins = assign_bins(dist, cfg.logging.bins)?;
    let tail = cfg.logging.bins - 1;
    let seed = cfg.seeds.trial_seed(SeedRole::Data, 0);
    let norm_with = |ctx_bins: &[usize], idx: u64| {
        tail_gradient_norm(
            &log.final_w,
            wstar.as_slice(),
            dist,
            cfg.task.k,
            &bins,
            tail,
            ctx_bins,
            TAIL_GRADIENT_SAMPLES,
            &mut derive_rng(seed, "tail-gradient", idx),
        )
    };
    Ok(TailGradientPoint { step, head_context: norm_with(&[0], 0)?, middle_context: norm_with(&[1, 2, 3], 1)? })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_sweep(ctx: &Ctx, out: &mut Artifacts) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let jobs: Vec<(f64, usize)> =
        sweep.alphas.iter().flat_map(|&a| (0..sweep.num_seeds).map(move |s| (a, s))).collect();
    let results: Vec<Result<(f64, usize, Outcome)>> = jobs
        .par_iter()
        .map(|&(alpha, seed)| {
            let kind = cfg.distribution.kind_with_alpha(Some(alpha))?;
            let dist = cfg.distribution.build_kind(kind, cfg.task.d, &cfg.seeds, seed as u64)?;
            let opts = trajectory_options(cfg, &dist, Some(sweep.threshold))?;
            Ok((alpha, seed, simulate(cfg, &dist, seed as u64, sweep.dynamics, &opts)?))
        })
        .collect();
    let mut summary = format!("# schema={SUMMARY_SCHEMA} config_hash={}\n", ctx.hash);
    summary.push_str("alpha,seed,steps_to_threshold,final_loss,final_recovery_error,status\n");
    let mut trials = Vec::new();
    for r in results {
        let (alpha, seed, res) = r?;
        let name = format!("alpha-{alpha}-seed-{seed}");
        match res {
            Ok(log) => {
                out.write(&format!("trajectories/{name}.csv"), log.to_csv(&ctx.hash).as_bytes())?;
                let last = log.last();
                let _ = writeln!(
                    summary,
                    "{alpha},{seed},{},{:?},{:?},completed",
                    fmt_opt(log.first_loss_crossing(sweep.threshold)),
                    last.loss,
                    last.recovery_error
                );
                trials.push(completed(name));
            }
            Err(step) => {
                let _ = writeln!(summary, "{alpha},{seed},,,,diverged@{step}");
                trials.push(TrialRecord { name, status: TrialStatus::Diverged { step } });
            }
        }
    }
    out.write("summary.csv", summary.as_bytes())?;
    Ok(trials)
}

fn run_separation(ctx: &Ctx, out: &mut Artifacts) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let sec = cfg.separation.as_ref().expect("validated");
    let root = cfg.seeds.root.expect("validated");
    let mut sep = SeparationConfig::new(cfg.task.d, cfg.task.k, sec.alpha, sec.num_seeds, root);
    sep.stream_roots = SeedStreams {
        wstar: cfg.seeds.wstar.unwrap_or(root),
        init: cfg.seeds.init.unwrap_or(root),
        data: cfg.seeds.data.unwrap_or(root),
    };
    sep.batch_size = cfg.task.batch_size;
    sep.init_scale = cfg.task.init_scale;
    sep.success_recovery = sec.success_recovery;
    sep.max_steps = cfg.task.steps;
    sep.curve_points = sec.curve_points;
    let report = separation_experiment(&sep)?;
    out.write("separation.csv", report.curve_csv(&ctx.hash).as_bytes())?;
    let mut text = String::new();
    let _ = writeln!(text, "success_budget={}", fmt_opt(report.success_budget));
    let _ = writeln!(text, "median_uniform_loss={}", fmt_opt(report.median_uniform_loss));
    for (i, b) in report.power_law_budgets.iter().enumerate() {
        let _ = writeln!(text, "power_law_budget[{i}]={}", fmt_opt(*b));
    }
    for (name, v) in [
        ("power_law_final_recovery", &report.power_law_final_recovery),
        ("uniform_final_recovery", &report.uniform_final_recovery),
        ("uniform_final_loss", &report.uniform_final_loss),
    ] {
        for (i, x) in v.iter().enumerate() {
            let _ = writeln!(text, "{name}[{i}]={x}");
        }
    }
    let _ = writeln!(text, "diverged={}", report.diverged);
    out.write("separation.txt", text.as_bytes())?;
    let mut trials: Vec<TrialRecord> = (0..sec.num_seeds).map(|s| completed(format!("seed-{s}"))).collect();
    for t in trials.iter_mut().take(report.diverged) {
        t.status = TrialStatus::Diverged { step: 0 };
    }
    Ok(trials)
}

fn run_landscape(ctx: &Ctx, out: &mut Artifacts) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let sec = cfg.landscape.as_ref().expect("validated");
    let d = cfg.task.d;
    let arms = [("uniform", DistributionKind::Uniform), ("power-law", DistributionKind::Zipf { alpha: sec.alpha })];
    let checkpoint_every = if cfg.logging.checkpoint_every > 0 { cfg.logging.checkpoint_every } else { (cfg.task.steps / 100).max(1) };
    let mut summary = String::new();
    let mut trials = Vec::new();
    for (name, kind) in arms {
        let dist = cfg.distribution.build_kind(kind, d, &cfg.seeds, 0)?;
        let opts = TrajectoryOptions { log_every: cfg.task.steps, checkpoint_every, ..Default::default() };
        let log = match simulate(cfg, &dist, 0, Dynamics::Population, &opts)? {
            Ok(log) => log,
            Err(step) => {
                trials.push(TrialRecord { name: name.into(), status: TrialStatus::Diverged { step } });
                continue;
            }
        };
        let (wstar, w0) = trial_setup(cfg, 0)?;
        let diffs = checkpoint_diffs(&log.checkpoints, sec.pca_checkpoints);
        let pca = pca_top2(&diffs, cfg.seeds.trial_seed(SeedRole::Data, 0))?;
        let path: Vec<Vec<f64>> = log.checkpoints.iter().map(|c| c.w.clone()).collect();
        let slice = landscape_slice(
            &w0.w,
            &pca.dir1,
            &pca.dir2,
            [sec.extent; 2],
            [sec.resolution; 2],
            wstar.as_slice(),
            dist.weights(),
            cfg.task.k,
            &path,
        )?;
        out.write(&format!("landscape-{name}.csv"), slice.grid_csv(&ctx.hash).as_bytes())?;
        let mut sidecar = slice.sidecar_json();
        sidecar["config_hash"] = ctx.hash.clone().into();
        sidecar["explained_variance"] = pca.explained.to_vec().into();
        sidecar["dir2_degenerate"] = pca.dir2_degenerate.into();
        out.write_json(&format!("landscape-{name}.json"), &sidecar)?;
        let _ = writeln!(summary, "{name}_center_loss={}", slice.center_value());
        let _ = writeln!(summary, "{name}_max_slope_within_radius={}", slice.max_slope_within(sec.radius));
        let _ = writeln!(summary, "{name}_dir2_degenerate={}", pca.dir2_degenerate);
        trials.push(completed(name));
    }
    out.write("landscape.txt", summary.as_bytes())?;
    Ok(trials)
}

fn run_probes(ctx: &Ctx, out: &mut Artifacts) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let sec = cfg.probes.clone().unwrap_or_default();
    let (t, k) = (&cfg.task, cfg.task.k);
    let dist = cfg.distribution.build(t.d, &cfg.seeds, 0)?;
    let (wstar, w0) = trial_setup(cfg, 0)?;
    let seed = cfg.seeds.trial_seed(SeedRole::Data, 0);
    let mut trials = Vec::new();

    let st = check_stationary_points(wstar.as_slice(), dist.weights(), k, sec.stationary_probes, &mut derive_rng(seed, "stationary", 0))?;
    let text = format!(
        "grad_norm_origin={}\ngrad_norm_plus={}\ngrad_norm_minus={}\nmin_probe_grad_norm={}\npass={}\n",
        st.grad_norm_origin, st.grad_norm_plus, st.grad_norm_minus, st.min_probe_grad_norm, st.pass
    );
    out.write("probes/stationary.txt", text.as_bytes())?;

    let ic = check_init_concentration(t.init_scale, dist.weights(), sec.init_trials, InitBrackets::default(), &mut derive_rng(seed, "init-concentration", 0))?;
    let text = format!(
        "median_abs_a={}\na_ratio_quantiles={:?}\nb_ratio_quantiles={:?}\na_in_bracket={}\nb_in_bracket={}\npass={}\n",
        ic.median_abs_a, ic.a_ratio_quantiles, ic.b_ratio_quantiles, ic.a_in_bracket, ic.b_in_bracket, ic.pass
    );
    out.write("probes/init.txt", text.as_bytes())?;

    if t.steps > 0 {
        let opts = TrajectoryOptions { log_every: cfg.logging.log_every, ..Default::default() };
        match simulate(cfg, &dist, 0, Dynamics::Population, &opts)? {
            Ok(log) => {
                let pl = check_pl_inequality(&log, dist.weights(), k, t.eta_for(&dist));
                let text = format!(
                    "min_ratio={}\nchecked_steps={}\nskipped_steps={}\npreconditions_met={}\npass={}\n",
                    fmt_opt(pl.min_ratio),
                    pl.ratios.len(),
                    pl.skipped_steps.len(),
                    pl.preconditions_met,
                    pl.pass
                );
                out.write("probes/pl.txt", text.as_bytes())?;
                trials.push(completed("pl"));
            }
            Err(step) => trials.push(TrialRecord { name: "pl".into(), status: TrialStatus::Diverged { step } }),
        }
    }

    let mid: Vec<f64> = w0.w.iter().zip(wstar.as_slice()).map(|(a, b)| 0.5 * (a + b)).collect();
    let batch = noise_batch_size(&mid, &wstar, &dist, k, sec.noise_delta, 20_000, &mut derive_rng(seed, "noise-trace", 0))?;
    let noise = estimate_gradient_noise(&mid, &wstar, &dist, k, batch, sec.noise_batches, &mut derive_rng(seed, "noise", 0))?;
    let text = format!(
        "delta={}\nbatch_size={}\nmean_noise_norm={}\npopulation_grad_norm={}\nratio={}\nviolation_fraction={}\n",
        sec.noise_delta, noise.batch_size, noise.mean_noise_norm, noise.population_grad_norm, noise.ratio, noise.violation_fraction
    );
    out.write("probes/noise.txt", text.as_bytes())?;

    let csq = csq_packing(&CsqPackingConfig {
        d: sec.csq_d,
        epsilon: sec.csq_epsilon,
        num_vectors: sec.csq_vectors,
        k,
        seed: derive_seed(seed, "csq", 0),
    })?;
    let text = format!(
        "max_overlap={}\nmax_correlation={}\nbudget={}\nwithin_budget={}\npass={}\n",
        csq.max_overlap, csq.max_correlation, csq.budget, csq.within_budget, csq.pass
    );
    out.write("probes/csq.txt", text.as_bytes())?;
    trials.push(completed("probes"));
    Ok(trials)
}

fn run_gen_data(ctx: &Ctx, out: &mut Artifacts) -> Result<Vec<TrialRecord>> {
    let cfg = ctx.cfg;
    let g = cfg.generate.as_ref().expect("validated");
    let dist = cfg.distribution.build(g.num_skills(), &cfg.seeds, 0)?;
    let seed = cfg.seeds.trial_seed(SeedRole::Data, 0);
    let graph = match g.task {
        GenTask::MultihopQa => Some(gen_relation_graph(
            g.num_entities.expect("validated"),
            g.num_relations,
            g.allow_self_loops,
            &mut derive_rng(seed, "graph", 0),
        )?),
        _ => None,
    };
    let shards: Vec<(usize, usize)> =
        (0..g.n.div_ceil(g.shard_size)).map(|i| (i, g.shard_size.min(g.n - i * g.shard_size))).collect();
    let parts: Vec<Result<Vec<DatasetRecord>>> = shards
        .par_iter()
        .map(|&(i, n)| {
            let mut rng = derive_rng(seed, "shard", i as u64);
            match g.task {
                GenTask::Arithmetic => {
                    let ac = ArithmeticConfig { num_ops: g.num_ops, low: g.operand_low, high: g.operand_high };
                    gen_arithmetic(&ac, &dist, n, &mut rng)
                }
                GenTask::StateTracking => {
                    let hops = match &g.hop_mixture {
                        Some(w) => Hops::Mixture(w.clone()),
                        None => Hops::Fixed(g.k.expect("validated")),
                    };
                    gen_state_tracking(&hops, &dist, n, &mut rng)
                }
                GenTask::MultihopQa => {
                    let graph = graph.as_ref().expect("built above");
                    let k = g.k.expect("validated");
                    if g.fact_ratio > 0.0 {
                        gen_qa_stream(graph, k, &dist, n, g.fact_ratio, &mut rng)
                    } else {
                        gen_multihop_qa(graph, k, &dist, n, g.include_facts, &mut rng)
                    }
                }
                GenTask::Gsm => {
                    let gc = GsmConfig {
                        min_ops: g.min_ops,
                        max_ops: g.max_ops,
                        modulus: g.modulus,
                        max_value: g.max_value,
                        multi_hop_template: g.multi_hop_template,
                        ..GsmConfig::default()
                    };
                    gen_gsm(&gc, &dist, n, &mut rng)
                }
            }
        })
        .collect();
    let mut records = Vec::with_capacity(g.n);
    for p in parts {
        records.extend(p?);
    }
    out.write("data.jsonl", to_jsonl(&records)?.as_bytes())?;
    let task_name = match g.task {
        GenTask::Arithmetic => "arithmetic",
        GenTask::StateTracking => "state-tracking",
        GenTask::MultihopQa => "multihop-qa",
        GenTask::Gsm => "gsm",
    };
    let mut manifest = DatasetManifest::new(task_name, seed, serde_json::to_value(g)?, dist.weights(), &records);
    manifest.config["config_hash"] = ctx.hash.clone().into();
    out.write_json("data.manifest.json", &manifest)?;
    if let Some(graph) = &graph {
        out.write("facts.txt", (graph.facts().join("\n") + "\n").as_bytes())?;
    }
    Ok(vec![completed("dataset")])
}
