//! Experiment configuration files.
//!
//! Configs are TOML. Unknown keys are rejected, and [`ExperimentConfig::validate`]
//! reports every range violation at once.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::composition::{default_eta, DEFAULT_INIT_SCALE};
use crate::distributions::{DistributionKind, RankOrdering, SkillDistribution};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MinimalRun,
    PopulationRun,
    SweepAlpha,
    Separation,
    Landscape,
    Probes,
    GenData,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MinimalRun => "minimal-run",
            ExperimentKind::PopulationRun => "population-run",
            ExperimentKind::SweepAlpha => "sweep-alpha",
            ExperimentKind::Separation => "separation",
            ExperimentKind::Landscape => "landscape",
            ExperimentKind::Probes => "probes",
            ExperimentKind::GenData => "gen-data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Output root; overridden by `SKILLCOMP_OUT` and `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Maximum number of trials run at once (default: available cores).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub seeds: SeedConfig,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub distribution: DistributionConfig,
    #[serde(default)]
    pub logging: LoggingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landscape: Option<LandscapeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateSection>,
}

/// Seeds per random stream. Each stream's trial seed is
/// `derive_seed(base, role, trial)`, where `base` is the stream override or
/// the root seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub root: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wstar: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    Wstar,
    Init,
    Data,
    Order,
}

impl SeedRole {
    fn name(self) -> &'static str {
        match self {
            SeedRole::Wstar => "wstar",
            SeedRole::Init => "init",
            SeedRole::Data => "data",
            SeedRole::Order => "order",
        }
    }
}

impl SeedConfig {
    pub fn trial_seed(&self, role: SeedRole, trial: u64) -> u64 {
        let base = match role {
            SeedRole::Wstar => self.wstar,
            SeedRole::Init => self.init,
            SeedRole::Data => self.data,
            SeedRole::Order => self.order,
        };
        derive_seed(base.or(self.root).unwrap_or(0), role.name(), trial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenVectorInit {
    #[default]
    Rademacher,
    Ones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub d: usize,
    pub k: usize,
    /// Initialization scale `r`.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    /// Step size; defaults to half the stability bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    pub steps: u64,
    #[serde(default)]
    pub wstar: HiddenVectorInit,
}

fn default_init_scale() -> f64 {
    DEFAULT_INIT_SCALE
}

fn default_batch() -> usize {
    1
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            d: 0,
            k: 0,
            init_scale: DEFAULT_INIT_SCALE,
            eta: None,
            batch_size: 1,
            steps: 0,
            wstar: HiddenVectorInit::Rademacher,
        }
    }
}

impl TaskConfig {
    pub fn eta_for(&self, dist: &SkillDistribution) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(self.k, dist.norm2()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingName {
    #[default]
    Identity,
    Reversed,
    /// Seeded shuffle from the `order` seed stream.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionName {
    #[default]
    Uniform,
    Zipf,
    BinnedZipf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    #[serde(default)]
    pub kind: DistributionName,
    /// Power-law exponent (zipf, binned-zipf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Number of bins (binned-zipf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub ordering: OrderingName,
}

impl DistributionConfig {
    /// The configured shape, with `alpha` replaced when given.
    pub fn kind_with_alpha(&self, alpha: Option<f64>) -> Result<DistributionKind> {
        let a = alpha.or(self.alpha);
        match self.kind {
            DistributionName::Uniform => Ok(DistributionKind::Uniform),
            DistributionName::Zipf => a
                .map(|alpha| DistributionKind::Zipf { alpha })
                .ok_or_else(|| Error::Config(vec!["distribution.alpha is required for zipf".into()])),
            DistributionName::BinnedZipf => match (self.m, a) {
                (Some(m), Some(alpha)) => Ok(DistributionKind::BinnedZipf { m, alpha }),
                _ => Err(Error::Config(vec!["distribution.m and alpha are required for binned-zipf".into()])),
            },
        }
    }

    pub fn build(&self, d: usize, seeds: &SeedConfig, trial: u64) -> Result<SkillDistribution> {
        self.build_kind(self.kind_with_alpha(None)?, d, seeds, trial)
    }

    pub fn build_kind(&self, kind: DistributionKind, d: usize, seeds: &SeedConfig, trial: u64) -> Result<SkillDistribution> {
        let ordering = match self.ordering {
            OrderingName::Identity => RankOrdering::Identity,
            OrderingName::Reversed => RankOrdering::Reversed,
            OrderingName::Random => RankOrdering::Random(seeds.trial_seed(SeedRole::Order, trial)),
        };
        SkillDistribution::new(kind, d, ordering)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoggingConfig {
    #[serde(default = "one")]
    pub log_every: u64,
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub loss_thresholds: Vec<f64>,
    #[serde(default)]
    pub recovery_thresholds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_recovery: Option<f64>,
    /// Number of rank bins whose restricted losses are logged (0 for none).
    #[serde(default)]
    pub bins: usize,
}

fn one() -> u64 {
    1
}

impl Default for LoggingConfig {
    fn default() -> Self {
        LoggingConfig {
            log_every: 1,
            checkpoint_every: 0,
            loss_thresholds: Vec::new(),
            recovery_thresholds: Vec::new(),
            stop_loss: None,
            stop_recovery: None,
            bins: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// Exact population gradient descent.
    #[default]
    Population,
    /// Minibatch SGD with `task.batch_size`.
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    #[serde(default = "one_usize")]
    pub num_seeds: usize,
    /// Loss threshold for the steps-to-threshold column.
    #[serde(default = "default_sweep_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub dynamics: Dynamics,
}

fn one_usize() -> usize {
    1
}

fn default_sweep_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSection {
    pub alpha: f64,
    #[serde(default = "five")]
    pub num_seeds: usize,
    #[serde(default = "default_success")]
    pub success_recovery: f64,
    #[serde(default = "default_curve_points")]
    pub curve_points: u64,
}

fn five() -> usize {
    5
}

fn default_success() -> f64 {
    0.1
}

fn default_curve_points() -> u64 {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSection {
    /// Exponent of the power-law arm; the other arm is uniform.
    pub alpha: f64,
    /// Grid points per axis (odd).
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Half-width of the grid along each direction.
    #[serde(default = "default_extent")]
    pub extent: f64,
    /// Radius around the centre used for the slope summary.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Use only the first this-many checkpoints for PCA (default: all).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_checkpoints: Option<usize>,
}

fn default_resolution() -> usize {
    21
}

fn default_extent() -> f64 {
    0.1
}

fn default_radius() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbesSection {
    #[serde(default = "default_probe_count")]
    pub stationary_probes: usize,
    #[serde(default = "default_init_trials")]
    pub init_trials: usize,
    #[serde(default = "default_noise_batches")]
    pub noise_batches: usize,
    /// Failure probability for the noise batch-size rule.
    #[serde(default = "default_noise_delta")]
    pub noise_delta: f64,
    #[serde(default = "default_csq_d")]
    pub csq_d: usize,
    #[serde(default = "default_csq_q")]
    pub csq_vectors: usize,
    #[serde(default = "default_csq_eps")]
    pub csq_epsilon: f64,
}

impl Default for ProbesSection {
    fn default() -> Self {
        ProbesSection {
            stationary_probes: default_probe_count(),
            init_trials: default_init_trials(),
            noise_batches: default_noise_batches(),
            noise_delta: default_noise_delta(),
            csq_d: default_csq_d(),
            csq_vectors: default_csq_q(),
            csq_epsilon: default_csq_eps(),
        }
    }
}

fn default_probe_count() -> usize {
    1000
}

fn default_init_trials() -> usize {
    10_000
}

fn default_noise_batches() -> usize {
    200
}

fn default_noise_delta() -> f64 {
    0.01
}

fn default_csq_d() -> usize {
    400
}

fn default_csq_q() -> usize {
    100
}

fn default_csq_eps() -> f64 {
    0.31
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenTask {
    Arithmetic,
    StateTracking,
    MultihopQa,
    Gsm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    pub task: GenTask,
    pub n: usize,
    /// Records per shard; shards are generated in parallel and merged in order.
    #[serde(default = "default_shard")]
    pub shard_size: usize,
    /// State tracking and QA: hop count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// State tracking: weights over hop counts `1..`, replacing `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop_mixture: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_entities: Option<usize>,
    #[serde(default = "default_relations")]
    pub num_relations: usize,
    #[serde(default = "yes")]
    pub allow_self_loops: bool,
    #[serde(default)]
    pub include_facts: bool,
    /// QA: share of one-hop fact records in the stream.
    #[serde(default)]
    pub fact_ratio: f64,
    /// GSM: modulus (omit for bounded arithmetic).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(default = "default_max_value")]
    pub max_value: u64,
    #[serde(default = "default_min_ops")]
    pub min_ops: usize,
    #[serde(default = "default_max_ops")]
    pub max_ops: usize,
    #[serde(default)]
    pub multi_hop_template: bool,
    /// Arithmetic: operators per expression.
    #[serde(default = "default_num_ops")]
    pub num_ops: usize,
    #[serde(default = "default_low")]
    pub operand_low: i64,
    #[serde(default = "default_high")]
    pub operand_high: i64,
}

fn default_shard() -> usize {
    10_000
}

fn default_relations() -> usize {
    20
}

fn yes() -> bool {
    true
}

fn default_max_value() -> u64 {
    1000
}

fn default_min_ops() -> usize {
    2
}

fn default_max_ops() -> usize {
    8
}

fn default_num_ops() -> usize {
    4
}

fn default_low() -> i64 {
    1
}

fn default_high() -> i64 {
    50
}

impl GenerateSection {
    /// Number of skills the distribution must cover.
    pub fn num_skills(&self) -> usize {
        match self.task {
            GenTask::Arithmetic => (self.operand_high - self.operand_low + 1).max(0) as usize,
            GenTask::StateTracking => crate::generators::s5::S5_ORDER,
            GenTask::MultihopQa => self.num_relations,
            GenTask::Gsm => match self.modulus {
                Some(p) => p as usize,
                None => 201,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the canonical JSON form (output locations excluded).
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        canon.parallelism = None;
        let json = serde_json::to_string(&canon).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    /// Checks every range constraint and returns all violations together.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        check(self.seeds.root.is_some(), "seeds.root is required (or pass --seed)".into());
        check(self.parallelism != Some(0), "parallelism must be at least 1".into());

        let needs_task = !matches!(self.kind, ExperimentKind::GenData);
        if needs_task {
            let t = &self.task;
            check(t.d >= 1, format!("task.d must be at least 1, got {}", t.d));
            check(t.k >= 1, format!("task.k must be at least 1, got {}", t.k));
            check(t.init_scale > 0.0 && t.init_scale.is_finite(), format!("task.init_scale must be positive, got {}", t.init_scale));
            if let Some(eta) = t.eta {
                check(eta > 0.0 && eta.is_finite(), format!("task.eta must be positive, got {eta}"));
            }
            check(t.batch_size >= 1, "task.batch_size must be at least 1".into());
            let steps_needed = !matches!(self.kind, ExperimentKind::Separation | ExperimentKind::Probes);
            if steps_needed {
                check(t.steps >= 1, "task.steps must be at least 1".into());
            }
            self.check_distribution(t.d, &mut check);
            let l = &self.logging;
            check(l.bins <= t.d, format!("logging.bins ({}) exceeds task.d ({})", l.bins, t.d));
        }
        for (name, v) in [("stop_loss", self.logging.stop_loss), ("stop_recovery", self.logging.stop_recovery)] {
            if let Some(v) = v {
                check(v >= 0.0, format!("logging.{name} must be non-negative"));
            }
        }

        match self.kind {
            ExperimentKind::SweepAlpha => match &self.sweep {
                None => check(false, "sweep-alpha needs a [sweep] section".into()),
                Some(s) => {
                    check(!s.alphas.is_empty(), "sweep.alphas must not be empty".into());
                    for &a in &s.alphas {
                        check(a > 0.0 && a.is_finite(), format!("sweep.alphas entries must be positive, got {a}"));
                    }
                    check(s.num_seeds >= 1, "sweep.num_seeds must be at least 1".into());
                    check(s.threshold > 0.0, "sweep.threshold must be positive".into());
                    check(
                        self.distribution.kind != DistributionName::Uniform,
                        "sweep-alpha needs a zipf or binned-zipf distribution".into(),
                    );
                }
            },
            ExperimentKind::Separation => match &self.separation {
                None => check(false, "separation needs a [separation] section".into()),
                Some(s) => {
                    check(s.alpha > 0.0, "separation.alpha must be positive".into());
                    check(s.num_seeds >= 1, "separation.num_seeds must be at least 1".into());
                    check(s.success_recovery > 0.0, "separation.success_recovery must be positive".into());
                    check(self.task.steps >= 1, "task.steps (the step cap) must be at least 1".into());
                }
            },
            ExperimentKind::Landscape => match &self.landscape {
                None => check(false, "landscape needs a [landscape] section".into()),
                Some(s) => {
                    check(s.alpha > 0.0, "landscape.alpha must be positive".into());
                    check(s.resolution % 2 == 1, format!("landscape.resolution must be odd, got {}", s.resolution));
                    check(s.extent > 0.0 && s.radius > 0.0, "landscape.extent and radius must be positive".into());
                    check(self.task.d >= 2, "landscape needs task.d >= 2".into());
                    let every = if self.logging.checkpoint_every > 0 { self.logging.checkpoint_every } else { (self.task.steps / 100).max(1) };
                    check(self.task.steps / every >= 2, "landscape needs at least 3 checkpoints (task.steps / logging.checkpoint_every >= 2)".into());
                }
            },
            ExperimentKind::Probes => {
                if let Some(p) = &self.probes {
                    check(p.init_trials >= 1000, "probes.init_trials must be at least 1000".into());
                    check(p.noise_batches >= 100, "probes.noise_batches must be at least 100".into());
                    check(p.noise_delta > 0.0 && p.noise_delta < 1.0, "probes.noise_delta must lie in (0, 1)".into());
                    check(p.csq_epsilon > 0.0 && p.csq_epsilon <= 1.0, "probes.csq_epsilon must lie in (0, 1]".into());
                    check(p.csq_vectors >= 2 && p.csq_d >= 1, "probes.csq_vectors >= 2 and csq_d >= 1".into());
                }
            }
            ExperimentKind::GenData => match &self.generate {
                None => check(false, "gen-data needs a [generate] section".into()),
                Some(g) => {
                    check(g.n >= 1, "generate.n must be at least 1".into());
                    check(g.shard_size >= 1, "generate.shard_size must be at least 1".into());
                    let skills = g.num_skills();
                    check(skills >= 1, "the generator's skill set is empty".into());
                    if skills >= 1 {
                        self.check_distribution(skills, &mut check);
                    }
                    match g.task {
                        GenTask::StateTracking | GenTask::MultihopQa => {
                            if let Some(w) = &g.hop_mixture {
                                check(g.task == GenTask::StateTracking, "generate.hop_mixture applies to state-tracking only".into());
                                check(!w.is_empty() && w.iter().all(|&x| x >= 0.0) && w.iter().sum::<f64>() > 0.0, "generate.hop_mixture needs non-negative weights with a positive sum".into());
                            } else {
                                check(g.k.is_some_and(|k| k >= 1), "generate.k must be at least 1".into());
                            }
                        }
                        _ => {}
                    }
                    if g.task == GenTask::MultihopQa {
                        check(g.num_entities.is_some_and(|e| e >= 2), "generate.num_entities must be at least 2".into());
                        check((0.0..=1.0).contains(&g.fact_ratio), "generate.fact_ratio must lie in [0, 1]".into());
                        check(g.num_relations >= 1, "generate.num_relations must be at least 1".into());
                    }
                    if g.task == GenTask::Gsm {
                        check(g.min_ops >= 2 && g.max_ops <= 8 && g.min_ops <= g.max_ops, "generate.min_ops..max_ops must lie within 2..=8".into());
                    }
                    if g.task == GenTask::Arithmetic {
                        check(g.operand_low <= g.operand_high, "generate.operand_low must not exceed operand_high".into());
                        check(g.num_ops >= 1, "generate.num_ops must be at least 1".into());
                    }
                }
            },
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn check_distribution(&self, d: usize, check: &mut impl FnMut(bool, String)) {
        let dc = &self.distribution;
        let swept = self.kind == ExperimentKind::SweepAlpha;
        match dc.kind {
            DistributionName::Uniform => {}
            DistributionName::Zipf | DistributionName::BinnedZipf => {
                match dc.alpha {
                    Some(a) => check(a > 0.0 && a.is_finite(), format!("distribution.alpha must be positive, got {a}")),
                    None => check(swept, "distribution.alpha is required".into()),
                }
                if dc.kind == DistributionName::BinnedZipf {
                    match dc.m {
                        Some(m) => check(m >= 1 && m <= d, format!("distribution.m must lie in 1..={d}, got {m}")),
                        None => check(false, "distribution.m is required for binned-zipf".into()),
                    }
                }
            }
        }
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "minimal-run"
[seeds]
root = 7
[task]
d = 2
k = 2
steps = 10
[distribution]
kind = "zipf"
alpha = 1.5
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::MinimalRun);
        assert_eq!(cfg.distribution.build(2, &cfg.seeds, 0).unwrap().kind(), Some(DistributionKind::Zipf { alpha: 1.5 }));
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), ExperimentConfig::from_toml(MINIMAL).unwrap().hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("steps = 10", "steps = 10\nstpes = 3");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(Error::Toml(_))));
    }

    #[test]
    fn all_violations_reported() {
        let bad = MINIMAL.replace("d = 2", "d = 0").replace("k = 2", "k = 0").replace("root = 7", "");
        let err = ExperimentConfig::from_toml(&bad).unwrap().validate().unwrap_err();
        match err {
            Error::Config(v) => assert!(v.len() >= 3, "{v:?}"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn trial_seeds_are_stable_per_role() {
        let s = SeedConfig { root: Some(1), data: Some(99), ..Default::default() };
        assert_eq!(s.trial_seed(SeedRole::Init, 3), derive_seed(1, "init", 3));
        assert_eq!(s.trial_seed(SeedRole::Data, 3), derive_seed(99, "data", 3));
        assert_ne!(s.trial_seed(SeedRole::Init, 3), s.trial_seed(SeedRole::Init, 4));
    }
}
