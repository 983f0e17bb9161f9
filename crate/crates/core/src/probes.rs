//! Numerical checks of the landscape properties and the uniform-vs-power-law
//! sample-budget comparison.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::composition::{
    accumulate_gradient, default_eta, init_gaussian, stability_bound, HiddenSkillVector, ModelState, SgdTrainer,
    DEFAULT_INIT_SCALE,
};
use crate::distributions::SkillDistribution;
use crate::error::{invalid, Result};
use crate::population::{ipow, norm, pl_ratio, population_gradient, population_loss};
use crate::rng::{derive_rng, derive_seed, rng_from_seed};
use crate::sgd::run_sgd;
use crate::trajectory::{TrajectoryLog, TrajectoryOptions};

pub const PL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlCheck {
    /// `(step, ratio)` for every logged step above the loss floor.
    pub ratios: Vec<(u64, f64)>,
    pub skipped_steps: Vec<u64>,
    pub min_ratio: Option<f64>,
    pub pass: bool,
    /// False when the run was outside the inequality's regime (step size above
    /// the stability bound, or `|A(0)| <= B(0)`); the verdict is then
    /// informational only.
    pub preconditions_met: bool,
}

/// PL ratios recomputed from the logged statistics.
pub fn check_pl_inequality(log: &TrajectoryLog, p: &[f64], k: usize, eta: f64) -> PlCheck {
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let p_norm = norm(p);
    let mut ratios = Vec::new();
    let mut skipped_steps = Vec::new();
    for r in log.all_records() {
        match pl_ratio(r.grad_norm, r.loss, r.a, p_min, k) {
            Some(x) => ratios.push((r.step, x)),
            None => skipped_steps.push(r.step),
        }
    }
    let min_ratio = ratios.iter().map(|&(_, x)| x).reduce(f64::min);
    let preconditions_met = eta <= stability_bound(k, p_norm) && log.initial.a.abs() > log.initial.b;
    PlCheck {
        pass: ratios.iter().all(|&(_, x)| x >= 1.0 - PL_TOLERANCE),
        ratios,
        skipped_steps,
        min_ratio,
        preconditions_met,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryCheck {
    pub grad_norm_origin: f64,
    pub grad_norm_plus: f64,
    pub grad_norm_minus: f64,
    pub probe_grad_norms: Vec<f64>,
    pub min_probe_grad_norm: f64,
    pub pass: bool,
}

/// Gradient norms at the three stationary points and at random probes drawn
/// uniformly from `[-1.5, 1.5]^d`, at least `1e-3` away from each of them in
/// the max norm. `-w*` is stationary only for even `k`, so odd `k` skips it
/// in the verdict.
pub fn check_stationary_points<R: Rng + ?Sized>(
    wstar: &[f64],
    p: &[f64],
    k: usize,
    num_probes: usize,
    rng: &mut R,
) -> Result<StationaryCheck> {
    let d = wstar.len();
    population_loss(&vec![0.0; d], wstar, p, k)?;
    let grad_at = |w: &[f64]| norm(&population_gradient(w, wstar, p, k));
    let neg: Vec<f64> = wstar.iter().map(|x| -x).collect();
    let grad_norm_origin = grad_at(&vec![0.0; d]);
    let grad_norm_plus = grad_at(wstar);
    let grad_norm_minus = grad_at(&neg);
    let far = |w: &[f64]| {
        let dist = |c: &dyn Fn(usize) -> f64| (0..d).map(|i| (w[i] - c(i)).abs()).fold(0.0, f64::max);
        dist(&|_| 0.0) >= 1e-3 && dist(&|i| wstar[i]) >= 1e-3 && dist(&|i| -wstar[i]) >= 1e-3
    };
    let mut probe_grad_norms = Vec::with_capacity(num_probes);
    while probe_grad_norms.len() < num_probes {
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        if far(&w) {
            probe_grad_norms.push(grad_at(&w));
        }
    }
    let min_probe_grad_norm = probe_grad_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = grad_norm_origin <= 1e-12
        && grad_norm_plus <= 1e-12
        && (k % 2 == 1 || grad_norm_minus <= 1e-12)
        && probe_grad_norms.iter().all(|&g| g > 0.0);
    Ok(StationaryCheck { grad_norm_origin, grad_norm_plus, grad_norm_minus, probe_grad_norms, min_probe_grad_norm, pass })
}

/// Engineering brackets standing in for the unspecified absolute constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitBrackets {
    pub a_low: f64,
    pub a_high: f64,
    pub b_high: f64,
    /// Required share of trials inside the brackets.
    pub coverage: f64,
}

impl Default for InitBrackets {
    fn default() -> Self {
        InitBrackets { a_low: 1e-3, a_high: 5.0, b_high: 10.0, coverage: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitConcentration {
    pub num_trials: usize,
    pub median_abs_a: f64,
    /// 1%, 50% and 99% quantiles of `|A(0)| / (r ‖p‖₂)`.
    pub a_ratio_quantiles: [f64; 3],
    /// 1%, 50% and 99% quantiles of `|B(0) - r²| / (r² ‖p‖₂)`.
    pub b_ratio_quantiles: [f64; 3],
    pub a_in_bracket: f64,
    pub b_in_bracket: f64,
    pub pass: bool,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi {
        return sorted[lo];
    }
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Statistics of `A(0)` and `B(0)` over independent Gaussian initializations.
/// `w*` is taken as all ones; `A(0)` is symmetric so the sign pattern does
/// not matter.
pub fn check_init_concentration<R: Rng + ?Sized>(
    r: f64,
    p: &[f64],
    num_trials: usize,
    brackets: InitBrackets,
    rng: &mut R,
) -> Result<InitConcentration> {
    if num_trials < 1000 {
        return Err(invalid(format!("need at least 1000 trials, got {num_trials}")));
    }
    if !(r > 0.0) {
        return Err(invalid(format!("init scale must be positive, got {r}")));
    }
    let d = p.len();
    let root: u64 = rng.gen();
    let normal = Normal::new(0.0, r).map_err(|e| invalid(e.to_string()))?;
    let draws: Vec<(f64, f64)> = (0..num_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut g = derive_rng(root, "init-trial", t);
            let (mut a, mut b) = (0.0, 0.0);
            for &pi in p.iter().take(d) {
                let w: f64 = normal.sample(&mut g);
                a += pi * w;
                b += pi * w * w;
            }
            (a, b)
        })
        .collect();
    let pn = norm(p);
    let mut abs_a: Vec<f64> = draws.iter().map(|&(a, _)| a.abs()).collect();
    let mut a_ratio: Vec<f64> = abs_a.iter().map(|a| a / (r * pn)).collect();
    let mut b_ratio: Vec<f64> = draws.iter().map(|&(_, b)| (b - r * r).abs() / (r * r * pn)).collect();
    let n = num_trials as f64;
    let a_in_bracket = a_ratio.iter().filter(|&&x| x >= brackets.a_low && x <= brackets.a_high).count() as f64 / n;
    let b_in_bracket = b_ratio.iter().filter(|&&x| x <= brackets.b_high).count() as f64 / n;
    abs_a.sort_by(f64::total_cmp);
    a_ratio.sort_by(f64::total_cmp);
    b_ratio.sort_by(f64::total_cmp);
    let q3 = |v: &[f64]| [quantile(v, 0.01), quantile(v, 0.5), quantile(v, 0.99)];
    Ok(InitConcentration {
        num_trials,
        median_abs_a: quantile(&abs_a, 0.5),
        a_ratio_quantiles: q3(&a_ratio),
        b_ratio_quantiles: q3(&b_ratio),
        a_in_bracket,
        b_in_bracket,
        pass: a_in_bracket >= brackets.coverage && b_in_bracket >= brackets.coverage,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientNoiseStats {
    pub batch_size: usize,
    /// Mean of `‖ĝ_B - ∇L‖` over batches.
    pub mean_noise_norm: f64,
    pub population_grad_norm: f64,
    /// `mean_noise_norm / population_grad_norm`.
    pub ratio: f64,
    /// Share of batches with `‖ĝ_B - ∇L‖ > ‖∇L‖ / 8`.
    pub violation_fraction: f64,
}

/// Monte-Carlo estimate of the minibatch gradient noise at a fixed `w`.
pub fn estimate_gradient_noise<R: Rng + ?Sized>(
    w: &[f64],
    wstar: &HiddenSkillVector,
    dist: &SkillDistribution,
    k: usize,
    batch_size: usize,
    num_batches: usize,
    rng: &mut R,
) -> Result<GradientNoiseStats> {
    if num_batches < 100 {
        return Err(invalid(format!("need at least 100 batches, got {num_batches}")));
    }
    if batch_size == 0 || k == 0 {
        return Err(invalid("batch size and k must be positive"));
    }
    let ws = wstar.as_slice();
    let pop = population_gradient(w, ws, dist.weights(), k);
    let pop_norm = norm(&pop);
    let mut grad = vec![0.0; w.len()];
    let mut scratch = Vec::new();
    let mut indices = vec![0; k];
    let scale = 1.0 / batch_size as f64;
    let (mut total, mut violations) = (0.0, 0usize);
    for _ in 0..num_batches {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for _ in 0..batch_size {
            indices.iter_mut().for_each(|i| *i = dist.sample(rng));
            let label: f64 = indices.iter().map(|&i| ws[i]).product();
            accumulate_gradient(w, &indices, label, scale, &mut grad, &mut scratch);
        }
        let noise = grad.iter().zip(&pop).map(|(g, p)| (g - p).powi(2)).sum::<f64>().sqrt();
        total += noise;
        if noise > pop_norm / 8.0 {
            violations += 1;
        }
    }
    let mean_noise_norm = total / num_batches as f64;
    Ok(GradientNoiseStats {
        batch_size,
        mean_noise_norm,
        population_grad_norm: pop_norm,
        ratio: if pop_norm > 0.0 { mean_noise_norm / pop_norm } else if mean_noise_norm == 0.0 { 0.0 } else { f64::INFINITY },
        violation_fraction: violations as f64 / num_batches as f64,
    })
}

/// Batch size making `P(‖ξ‖ > ‖∇L‖/8) <= delta` by Chebyshev:
/// `B >= 64 tr(Σ) / (delta ‖∇L‖²)`, with the per-sample gradient covariance
/// trace estimated from `num_samples` draws.
pub fn noise_batch_size<R: Rng + ?Sized>(
    w: &[f64],
    wstar: &HiddenSkillVector,
    dist: &SkillDistribution,
    k: usize,
    delta: f64,
    num_samples: usize,
    rng: &mut R,
) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) || num_samples == 0 {
        return Err(invalid("need delta in (0,1) and at least one sample"));
    }
    let ws = wstar.as_slice();
    let pop = population_gradient(w, ws, dist.weights(), k);
    let pop_sq: f64 = pop.iter().map(|x| x * x).sum();
    if pop_sq == 0.0 {
        return Ok(1);
    }
    let mut grad = vec![0.0; w.len()];
    let mut scratch = Vec::new();
    let mut indices = vec![0; k];
    let mut second_moment = 0.0;
    for _ in 0..num_samples {
        indices.iter_mut().for_each(|i| *i = dist.sample(rng));
        let label: f64 = indices.iter().map(|&i| ws[i]).product();
        for &i in &indices {
            grad[i] = 0.0;
        }
        accumulate_gradient(w, &indices, label, 1.0, &mut grad, &mut scratch);
        let mut sq = 0.0;
        for (t, &i) in indices.iter().enumerate() {
            if !indices[..t].contains(&i) {
                sq += grad[i] * grad[i];
            }
        }
        second_moment += sq;
    }
    let trace = (second_moment / num_samples as f64 - pop_sq).max(0.0);
    Ok(((64.0 * trace / (delta * pop_sq)).ceil() as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsqPackingConfig {
    pub d: usize,
    pub epsilon: f64,
    pub num_vectors: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CsqPackingReport {
    /// `max_{i≠j} |w_iᵀ w_j| / d`.
    pub max_overlap: f64,
    /// `max_overlap^k`, the largest pairwise correlation of the parity functions.
    pub max_correlation: f64,
    /// `exp(ε² d / 4)`, the packing-size budget (constant taken as 1).
    pub budget: f64,
    pub within_budget: bool,
    pub pass: bool,
}

/// `sqrt(2 ln(2 q² / δ) / d)`: the overlap that all `q(q-1)/2` pairs stay
/// under with probability at least `1 - δ`.
pub fn hoeffding_overlap_bound(d: usize, q: usize, delta: f64) -> f64 {
    (2.0 * (2.0 * (q * q) as f64 / delta).ln() / d as f64).sqrt()
}

/// Draws `q` uniform hypercube vectors and measures their largest pairwise overlap.
pub fn csq_packing(config: &CsqPackingConfig) -> Result<CsqPackingReport> {
    let CsqPackingConfig { d, epsilon, num_vectors: q, k, seed } = *config;
    if !(epsilon > 0.0 && epsilon <= 1.0) || d == 0 || q < 2 {
        return Err(invalid("csq packing needs d >= 1, q >= 2 and epsilon in (0, 1]"));
    }
    let budget = (epsilon * epsilon * d as f64 / 4.0).exp();
    let within_budget = q as f64 <= budget;
    if !within_budget {
        log::warn!("{q} vectors exceed the packing budget {budget:.3} for d={d}, epsilon={epsilon}");
    }
    let mut rng = rng_from_seed(seed);
    let vecs: Vec<Vec<i8>> = (0..q).map(|_| (0..d).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).collect();
    let mut max_dot = 0i64;
    for i in 0..q {
        for j in i + 1..q {
            let dot: i64 = vecs[i].iter().zip(&vecs[j]).map(|(&a, &b)| (a * b) as i64).sum();
            max_dot = max_dot.max(dot.abs());
        }
    }
    let max_overlap = max_dot as f64 / d as f64;
    Ok(CsqPackingReport {
        max_overlap,
        max_correlation: ipow(max_overlap, k),
        budget,
        within_budget,
        pass: max_overlap <= epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationConfig {
    pub d: usize,
    pub k: usize,
    pub alpha: f64,
    pub batch_size: usize,
    pub num_seeds: usize,
    /// Base seeds of the hidden-vector, initialization and data streams;
    /// seed `s` of each stream is `derive_seed(base, role, s)`.
    pub stream_roots: SeedStreams,
    pub init_scale: f64,
    /// Recovery error that counts as success for the power-law arm.
    pub success_recovery: f64,
    /// Step cap for the power-law arm's search for its success budget.
    pub max_steps: u64,
    /// Number of curve points logged per arm.
    pub curve_points: u64,
}

impl SeparationConfig {
    pub fn new(d: usize, k: usize, alpha: f64, num_seeds: usize, root_seed: u64) -> Self {
        SeparationConfig {
            d,
            k,
            alpha,
            batch_size: 32,
            num_seeds,
            stream_roots: SeedStreams { wstar: root_seed, init: root_seed, data: root_seed },
            init_scale: DEFAULT_INIT_SCALE,
            success_recovery: 0.1,
            max_steps: 2_000_000,
            curve_points: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedStreams {
    pub wstar: u64,
    pub init: u64,
    pub data: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub samples: u64,
    pub power_law_recovery: f64,
    pub power_law_loss: f64,
    pub uniform_recovery: f64,
    pub uniform_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub seeds: Vec<SeedStreams>,
    /// Samples the power-law arm needed per seed (`None` if it never succeeded).
    pub power_law_budgets: Vec<Option<u64>>,
    /// Median of `power_law_budgets`, failures counted as infinite.
    pub success_budget: Option<u64>,
    pub power_law_final_recovery: Vec<f64>,
    pub uniform_final_loss: Vec<f64>,
    pub uniform_final_recovery: Vec<f64>,
    pub median_uniform_loss: Option<f64>,
    /// Median curves over seeds at common sample counts.
    pub curve: Vec<CurvePoint>,
    pub diverged: usize,
}

struct ArmRun {
    log: TrajectoryLog,
}

fn run_arm(
    cfg: &SeparationConfig,
    dist: &SkillDistribution,
    wstar: &HiddenSkillVector,
    w0: &ModelState,
    data_seed: u64,
    steps: u64,
    opts: &TrajectoryOptions,
) -> Result<ArmRun> {
    let eta = default_eta(cfg.k, dist.norm2());
    let mut trainer = SgdTrainer::new(dist, wstar, cfg.k, eta, cfg.batch_size)?;
    let mut state = w0.clone();
    let mut rng = rng_from_seed(data_seed);
    let log = run_sgd(&mut trainer, &mut state, steps, opts, &mut rng)?;
    Ok(ArmRun { log })
}

/// Runs SGD under Zipf and uniform skill distributions with shared hidden
/// vector, initialization and data stream seeds.
///
/// The power-law arm first runs until its recovery error reaches
/// `success_recovery`; the median sample count over seeds becomes the common
/// budget, and both arms are then run for that budget.
pub fn separation_experiment(cfg: &SeparationConfig) -> Result<SeparationReport> {
    if cfg.num_seeds == 0 || cfg.batch_size == 0 || cfg.k == 0 || cfg.d == 0 {
        return Err(invalid("separation experiment needs positive d, k, batch size and seed count"));
    }
    let zipf = SkillDistribution::zipf(cfg.d, cfg.alpha)?;
    let uniform = SkillDistribution::uniform(cfg.d)?;
    let seeds: Vec<SeedStreams> = (0..cfg.num_seeds as u64)
        .map(|s| SeedStreams {
            wstar: derive_seed(cfg.stream_roots.wstar, "wstar", s),
            init: derive_seed(cfg.stream_roots.init, "init", s),
            data: derive_seed(cfg.stream_roots.data, "data", s),
        })
        .collect();
    let setups: Vec<(HiddenSkillVector, ModelState)> = seeds
        .iter()
        .map(|s| {
            let wstar = HiddenSkillVector::rademacher(cfg.d, &mut rng_from_seed(s.wstar));
            let w0 = init_gaussian(cfg.d, cfg.init_scale, &mut rng_from_seed(s.init))?;
            Ok((wstar, w0))
        })
        .collect::<Result<_>>()?;

    let search = TrajectoryOptions {
        log_every: cfg.max_steps.max(1),
        recovery_thresholds: vec![cfg.success_recovery],
        stop_recovery: Some(cfg.success_recovery),
        ..Default::default()
    };
    let searches: Vec<Result<ArmRun>> = setups
        .par_iter()
        .zip(&seeds)
        .map(|((wstar, w0), s)| run_arm(cfg, &zipf, wstar, w0, s.data, cfg.max_steps, &search))
        .collect();
    let mut diverged = 0;
    let power_law_budgets: Vec<Option<u64>> = searches
        .iter()
        .map(|r| match r {
            Ok(run) => run.log.first_recovery_crossing(cfg.success_recovery).map(|t| t * cfg.batch_size as u64),
            Err(_) => {
                diverged += 1;
                None
            }
        })
        .collect();
    let mut sorted: Vec<u64> = power_law_budgets.iter().map(|b| b.unwrap_or(u64::MAX)).collect();
    sorted.sort_unstable();
    let mid = sorted[(sorted.len() - 1) / 2];
    let success_budget = (mid != u64::MAX).then_some(mid);

    let mut report = SeparationReport {
        seeds,
        power_law_budgets,
        success_budget,
        power_law_final_recovery: Vec::new(),
        uniform_final_loss: Vec::new(),
        uniform_final_recovery: Vec::new(),
        median_uniform_loss: None,
        curve: Vec::new(),
        diverged,
    };
    let Some(budget) = success_budget else {
        return Ok(report);
    };
    let steps = budget.div_ceil(cfg.batch_size as u64);
    let opts = TrajectoryOptions { log_every: (steps / cfg.curve_points.max(1)).max(1), ..Default::default() };
    let runs: Vec<(Result<ArmRun>, Result<ArmRun>)> = setups
        .par_iter()
        .zip(&report.seeds)
        .map(|((wstar, w0), s)| {
            (
                run_arm(cfg, &zipf, wstar, w0, s.data, steps, &opts),
                run_arm(cfg, &uniform, wstar, w0, s.data, steps, &opts),
            )
        })
        .collect();
    let mut curves: Vec<(&TrajectoryLog, &TrajectoryLog)> = Vec::new();
    for (z, u) in &runs {
        match (z, u) {
            (Ok(z), Ok(u)) => {
                report.power_law_final_recovery.push(z.log.last().recovery_error);
                report.uniform_final_loss.push(u.log.last().loss);
                report.uniform_final_recovery.push(u.log.last().recovery_error);
                curves.push((&z.log, &u.log));
            }
            _ => report.diverged += 1,
        }
    }
    if !report.uniform_final_loss.is_empty() {
        report.median_uniform_loss = Some(median(&report.uniform_final_loss));
    }
    if let Some((first, _)) = curves.first() {
        for (i, rec) in first.all_records().enumerate() {
            let pick = |f: &dyn Fn(&(&TrajectoryLog, &TrajectoryLog)) -> f64| median(&curves.iter().map(f).collect::<Vec<_>>());
            report.curve.push(CurvePoint {
                samples: rec.step * cfg.batch_size as u64,
                power_law_recovery: pick(&|c| c.0.all_records().nth(i).unwrap().recovery_error),
                power_law_loss: pick(&|c| c.0.all_records().nth(i).unwrap().loss),
                uniform_recovery: pick(&|c| c.1.all_records().nth(i).unwrap().recovery_error),
                uniform_loss: pick(&|c| c.1.all_records().nth(i).unwrap().loss),
            });
        }
    }
    Ok(report)
}

impl SeparationReport {
    pub fn curve_csv(&self, config_hash: &str) -> String {
        let mut out = format!("# schema=skillcomp.separation/v1 config_hash={config_hash}\n");
        out.push_str("samples,power_law_recovery,power_law_loss,uniform_recovery,uniform_loss\n");
        for c in &self.curve {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?}\n",
                c.samples, c.power_law_recovery, c.power_law_loss, c.uniform_recovery, c.uniform_loss
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::population_gd_trajectory;

    #[test]
    fn pl_near_optimum_and_skip_at_optimum() {
        let dist = SkillDistribution::zipf(8, 1.2).unwrap();
        let p = dist.weights();
        let ws = vec![1.0; 8];
        let w: Vec<f64> = ws.iter().enumerate().map(|(i, x)| x + if i % 2 == 0 { 1e-3 } else { -1e-3 }).collect();
        let eta = default_eta(4, dist.norm2());
        let log = population_gd_trajectory(&w, &ws, p, 4, eta, 5, &TrajectoryOptions::default()).unwrap();
        let check = check_pl_inequality(&log, p, 4, eta);
        assert!(check.pass, "{:?}", check.min_ratio);
        let at_opt = population_gd_trajectory(&ws, &ws, p, 4, eta, 2, &TrajectoryOptions::default()).unwrap();
        let check = check_pl_inequality(&at_opt, p, 4, eta);
        assert!(check.ratios.is_empty());
        assert_eq!(check.skipped_steps, vec![0, 1, 2]);
    }

    #[test]
    fn stationary_points_small_instance() {
        let dist = SkillDistribution::zipf(10, 1.0).unwrap();
        let ws = HiddenSkillVector::rademacher(10, &mut rng_from_seed(1));
        let check = check_stationary_points(ws.as_slice(), dist.weights(), 4, 1000, &mut rng_from_seed(2)).unwrap();
        assert!(check.pass);
        assert_eq!(check.grad_norm_origin, 0.0);
        assert!(check.min_probe_grad_norm > 0.0);
        let odd = check_stationary_points(ws.as_slice(), dist.weights(), 3, 100, &mut rng_from_seed(3)).unwrap();
        assert!(odd.pass);
        assert!(odd.grad_norm_minus > 0.1);
    }

    #[test]
    fn median_with_infinite_entries() {
        assert_eq!(median(&[f64::INFINITY, 3.0, f64::INFINITY]), f64::INFINITY);
        assert_eq!(median(&[f64::INFINITY, 3.0, 1.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn init_single_coordinate_std() {
        let rep = check_init_concentration(0.1, &[1.0], 20_000, InitBrackets::default(), &mut rng_from_seed(5)).unwrap();
        // median |N(0, r²)| = 0.6745 r
        assert!((rep.median_abs_a / (0.6745 * 0.1) - 1.0).abs() < 0.05);
        assert!(check_init_concentration(0.1, &[1.0], 10, InitBrackets::default(), &mut rng_from_seed(5)).is_err());
    }

    #[test]
    fn noise_vanishes_at_optimum_and_scales_with_batch() {
        let dist = SkillDistribution::zipf(10, 1.5).unwrap();
        let ws = HiddenSkillVector::rademacher(10, &mut rng_from_seed(3));
        let at_opt = estimate_gradient_noise(ws.as_slice(), &ws, &dist, 4, 8, 100, &mut rng_from_seed(4)).unwrap();
        assert_eq!(at_opt.mean_noise_norm, 0.0);
        let w: Vec<f64> = ws.as_slice().iter().map(|x| 0.6 * x).collect();
        let n16 = estimate_gradient_noise(&w, &ws, &dist, 4, 16, 2000, &mut rng_from_seed(5)).unwrap();
        let n32 = estimate_gradient_noise(&w, &ws, &dist, 4, 32, 2000, &mut rng_from_seed(6)).unwrap();
        let shrink = n16.mean_noise_norm / n32.mean_noise_norm;
        assert!((shrink / 2f64.sqrt() - 1.0).abs() < 0.2, "shrink {shrink}");
    }

    #[test]
    fn packing_identities() {
        let rep = csq_packing(&CsqPackingConfig { d: 4, epsilon: 1.0, num_vectors: 2, k: 4, seed: 0 }).unwrap();
        assert!(rep.max_overlap <= 1.0);
        assert!((ipow(0.1, 4) - 1e-4).abs() < 1e-18);
        let rep = csq_packing(&CsqPackingConfig { d: 100, epsilon: 0.5, num_vectors: 20, k: 3, seed: 1 }).unwrap();
        assert_eq!(rep.max_correlation, ipow(rep.max_overlap, 3));
    }

    #[test]
    fn one_skill_separation_is_trivial() {
        let mut cfg = SeparationConfig::new(1, 2, 1.5, 3, 11);
        cfg.max_steps = 100_000;
        let rep = separation_experiment(&cfg).unwrap();
        let budget = rep.success_budget.unwrap();
        assert!(budget < 200_000, "{budget}");
        // one skill: both arms see the same distribution
        assert_eq!(rep.uniform_final_recovery, rep.power_law_final_recovery);
        assert!(median(&rep.uniform_final_recovery) <= 0.1, "{:?}", rep.uniform_final_recovery);
    }
}
