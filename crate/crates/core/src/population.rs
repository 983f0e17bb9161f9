//! Closed-form population loss and gradient, and deterministic population GD.
//!
//! With `A = Σ p_i w_i w*_i` and `B = Σ p_i w_i²`, independence of the `k`
//! positions gives `L(w) = ½(B^k - 2A^k + 1)` and
//! `∇L = k D (B^{k-1} w - A^{k-1} w*)`, `D = diag(p)`.

use serde::Serialize;

use crate::composition::{recovery_error, stability_bound};
use crate::error::{invalid, Error, Result};
use crate::trajectory::{Checkpoint, Crossing, TrajectoryLog, TrajectoryOptions, TrajectoryRecord};

/// Losses at or below this are treated as the minimum and excluded from PL ratios.
pub const PL_LOSS_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationStats {
    pub a: f64,
    pub b: f64,
}

pub fn overlap_a(w: &[f64], wstar: &[f64], p: &[f64]) -> f64 {
    w.iter().zip(wstar).zip(p).map(|((w, s), p)| p * w * s).sum()
}

pub fn norm_b(w: &[f64], p: &[f64]) -> f64 {
    w.iter().zip(p).map(|(w, p)| p * w * w).sum()
}

pub fn population_stats(w: &[f64], wstar: &[f64], p: &[f64]) -> PopulationStats {
    PopulationStats { a: overlap_a(w, wstar, p), b: norm_b(w, p) }
}

#[inline]
pub(crate) fn ipow(x: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Weighted sums needed to evaluate the loss without cancellation near `±w*`.
///
/// Besides `A` and `B` it tracks `Σ p e` and `Σ p e²` for `e = u - 1` and
/// `e = -u - 1`, `u = w ⊙ w*`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct LossParts {
    pub a: f64,
    pub b: f64,
    plus_lin: f64,
    plus_sq: f64,
    minus_lin: f64,
    minus_sq: f64,
}

impl LossParts {
    #[inline]
    pub fn add(&mut self, p: f64, w: f64, s: f64) {
        let u = w * s;
        self.a += p * u;
        self.b += p * w * w;
        let ep = u - 1.0;
        self.plus_lin += p * ep;
        self.plus_sq += p * ep * ep;
        let em = u + 1.0;
        self.minus_lin -= p * em;
        self.minus_sq += p * em * em;
    }

    pub fn collect(w: &[f64], wstar: &[f64], p: &[f64]) -> Self {
        let mut parts = LossParts::default();
        for ((&w, &s), &p) in w.iter().zip(wstar).zip(p) {
            parts.add(p, w, s);
        }
        parts
    }

    /// `½(B^k - 2A^k + 1)`. Near a minimizer the binomial expansion in the
    /// deviation sums replaces the direct formula.
    pub fn loss(&self, k: usize) -> f64 {
        let (lin, sq) = if k % 2 == 0 && self.a < 0.0 {
            (self.minus_lin, self.minus_sq)
        } else {
            (self.plus_lin, self.plus_sq)
        };
        let x = 2.0 * lin + sq;
        let value = if x.abs() < 0.5 && lin.abs() < 0.5 {
            // (1+x)^k - 2(1+lin)^k + 1 = Σ_{m>=1} C(k,m) (x^m - 2 lin^m)
            let mut total = 0.0;
            let mut binom = 1.0;
            let (mut xm, mut lm) = (1.0, 1.0);
            for m in 1..=k {
                binom = binom * (k - m + 1) as f64 / m as f64;
                xm *= x;
                lm *= lin;
                total += binom * (xm - 2.0 * lm);
            }
            0.5 * total
        } else {
            0.5 * (ipow(self.b, k) - 2.0 * ipow(self.a, k) + 1.0)
        };
        value.max(0.0)
    }
}

fn check_lengths(w: &[f64], wstar: &[f64], p: &[f64]) -> Result<()> {
    if w.len() != wstar.len() || w.len() != p.len() || w.is_empty() {
        return Err(invalid(format!(
            "length mismatch: w={}, w*={}, p={}",
            w.len(),
            wstar.len(),
            p.len()
        )));
    }
    Ok(())
}

fn check_signs(wstar: &[f64]) -> Result<()> {
    if wstar.iter().any(|&s| s != 1.0 && s != -1.0) {
        return Err(invalid("closed-form population loss needs w* entries in {-1, +1}"));
    }
    Ok(())
}

pub fn population_loss(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> Result<f64> {
    check_lengths(w, wstar, p)?;
    check_signs(wstar)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(LossParts::collect(w, wstar, p).loss(k))
}

pub fn population_gradient(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> Vec<f64> {
    let PopulationStats { a, b } = population_stats(w, wstar, p);
    let cb = k as f64 * ipow(b, k - 1);
    let ca = k as f64 * ipow(a, k - 1);
    w.iter()
        .zip(wstar)
        .zip(p)
        .map(|((&w, &s), &p)| p * (cb * w - ca * s))
        .collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Loss and gradient statistics at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointStats {
    pub loss: f64,
    pub a: f64,
    pub b: f64,
    pub grad_norm: f64,
    pub recovery_error: f64,
    pub pl_ratio: Option<f64>,
}

pub fn point_stats(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> PointStats {
    let parts = LossParts::collect(w, wstar, p);
    let loss = parts.loss(k);
    let grad_norm = norm(&population_gradient(w, wstar, p, k));
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    PointStats {
        loss,
        a: parts.a,
        b: parts.b,
        grad_norm,
        recovery_error: recovery_error(w, wstar),
        pl_ratio: pl_ratio(grad_norm, loss, parts.a, p_min, k),
    }
}

/// `‖∇L‖² / (2 k p_min A^{2k-2} L)`; `None` at the minimum.
pub fn pl_ratio(grad_norm: f64, loss: f64, a: f64, p_min: f64, k: usize) -> Option<f64> {
    if loss <= PL_LOSS_FLOOR {
        return None;
    }
    let denom = 2.0 * k as f64 * p_min * ipow(a, 2 * k - 2) * loss;
    Some(if denom > 0.0 { grad_norm * grad_norm / denom } else { f64::INFINITY })
}

/// Loss restricted to sequences drawn only from `skills`, with in-set weights
/// renormalized.
pub fn restricted_population_loss(w: &[f64], wstar: &[f64], p: &[f64], k: usize, skills: &[usize]) -> Result<f64> {
    if skills.is_empty() {
        return Err(invalid("restricted loss over an empty skill set"));
    }
    let mass: f64 = skills.iter().map(|&s| p[s]).sum();
    let mut parts = LossParts::default();
    for &s in skills {
        parts.add(p[s] / mass, w[s], wstar[s]);
    }
    Ok(parts.loss(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianBound {
    /// `2k(2k-1) p_max |A|^{k-1} + k(k-1) ‖p‖² |A|^{k-2}`.
    pub explicit: f64,
    /// `3k² ‖p‖₂`.
    pub universal: f64,
    /// The value to report: the explicit bound capped by the universal one,
    /// or the universal one in the degenerate region.
    pub reported: f64,
    /// `B^k <= 2|A|^k`, the region where the explicit bound is valid.
    pub in_stable_region: bool,
    /// `A = 0` with `k >= 3`.
    pub degenerate: bool,
}

/// `2k(2k-1) p_max |A|^{k-1} + k(k-1) ‖p‖₂² |A|^{k-2}`.
pub fn explicit_hessian_bound(a: f64, p_max: f64, p_sq: f64, k: usize) -> f64 {
    let kf = k as f64;
    let abs_a = a.abs();
    2.0 * kf * (2.0 * kf - 1.0) * p_max * ipow(abs_a, k - 1) + kf * (kf - 1.0) * p_sq * ipow(abs_a, k.saturating_sub(2))
}

pub fn hessian_opnorm_bound(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> HessianBound {
    let PopulationStats { a, b } = population_stats(w, wstar, p);
    let kf = k as f64;
    let p_max = p.iter().copied().fold(0.0, f64::max);
    let p_sq: f64 = p.iter().map(|x| x * x).sum();
    let abs_a = a.abs();
    let explicit = explicit_hessian_bound(a, p_max, p_sq, k);
    let universal = 3.0 * kf * kf * p_sq.sqrt();
    let degenerate = a == 0.0 && k >= 3;
    let in_stable_region = ipow(b, k) <= 2.0 * ipow(abs_a, k);
    let reported = if degenerate { universal } else { explicit.min(universal) };
    HessianBound { explicit, universal, reported, in_stable_region, degenerate }
}

/// Number of steps predicted by the PL decrement rate to reach `target` from
/// initial loss `l0`, capped at `cap`.
pub fn default_horizon(eta: f64, k: usize, p_min: f64, a0: f64, l0: f64, target: f64, cap: u64) -> u64 {
    let rate = eta * k as f64 * p_min * ipow(a0.abs(), 2 * k - 2);
    if rate <= 0.0 || l0 <= target {
        return if l0 <= target { 0 } else { cap };
    }
    let steps = (6.0 / rate) * (l0 / target).ln();
    if steps.is_finite() && steps < cap as f64 {
        steps.ceil() as u64
    } else {
        cap
    }
}

/// Deterministic population gradient descent from `w0` for up to `steps`
/// updates.
pub fn population_gd_trajectory(
    w0: &[f64],
    wstar: &[f64],
    p: &[f64],
    k: usize,
    eta: f64,
    steps: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryLog> {
    check_lengths(w0, wstar, p)?;
    check_signs(wstar)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("learning rate must be positive, got {eta}")));
    }
    let p_norm = norm(p);
    let bound = stability_bound(k, p_norm);
    if eta > bound {
        log::warn!("learning rate {eta} exceeds the stability bound {bound}; descent is not guaranteed");
    }
    let p_min = p.iter().copied().fold(f64::INFINITY, f64::min);
    let kf = k as f64;

    let mut w = w0.to_vec();
    let mut parts = LossParts::collect(&w, wstar, p);
    let mut rec_err = recovery_error(&w, wstar);
    let (mut loss_crossings, mut recovery_crossings) = opts.crossings();
    let mut records: Vec<TrajectoryRecord> = Vec::new();
    let mut checkpoints = Vec::new();
    let mut t = 0u64;

    loop {
        let loss = parts.loss(k);
        Crossing::observe(&mut loss_crossings, t, loss);
        Crossing::observe(&mut recovery_crossings, t, rec_err);
        let stop = opts.should_stop(loss, rec_err);
        let update = t < steps && !stop;
        let log_now = t == 0 || !update || opts.should_log(t);

        let bin_losses = match (&opts.bins, log_now) {
            (Some(bins), true) => bins
                .iter()
                .map(|skills| restricted_population_loss(&w, wstar, p, k, skills))
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        if opts.should_checkpoint(t) || (!update && opts.checkpoint_every > 0) {
            checkpoints.push(Checkpoint { step: t, w: w.clone() });
        }

        // One pass: gradient at w_t, the update, and the statistics of w_{t+1}.
        let cb = kf * ipow(parts.b, k - 1);
        let ca = kf * ipow(parts.a, k - 1);
        let mut next = LossParts::default();
        let mut grad_sq = 0.0;
        let (mut dev_minus, mut dev_plus) = (0.0f64, 0.0f64);
        let mut finite = true;
        for ((wi, &s), &pi) in w.iter_mut().zip(wstar).zip(p) {
            let g = pi * (cb * *wi - ca * s);
            grad_sq += g * g;
            if update {
                *wi -= eta * g;
                finite &= wi.is_finite();
                next.add(pi, *wi, s);
                dev_minus = dev_minus.max((*wi - s).abs());
                dev_plus = dev_plus.max((*wi + s).abs());
            }
        }
        let grad_norm = grad_sq.sqrt();

        if log_now {
            records.push(TrajectoryRecord {
                step: t,
                loss,
                a: parts.a,
                b: parts.b,
                grad_norm,
                recovery_error: rec_err,
                pl_ratio: pl_ratio(grad_norm, loss, parts.a, p_min, k),
                batch_loss: None,
                bin_losses,
            });
        }
        if !update {
            let initial = records.remove(0);
            return Ok(TrajectoryLog {
                initial,
                records,
                checkpoints,
                loss_crossings,
                recovery_crossings,
                final_w: w,
                final_step: t,
                stopped_early: stop && t < steps,
            });
        }
        if !finite {
            return Err(Error::Divergence { step: t + 1 });
        }
        parts = next;
        rec_err = dev_minus.min(dev_plus);
        t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::zipf_weights;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    /// Probability-weighted enumeration over all `d^k` index sequences.
    fn brute_force(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> (f64, Vec<f64>) {
        let d = w.len();
        let mut loss = 0.0;
        let mut grad = vec![0.0; d];
        let mut seq = vec![0usize; k];
        loop {
            let prob: f64 = seq.iter().map(|&i| p[i]).product();
            let f: f64 = seq.iter().map(|&i| w[i]).product();
            let y: f64 = seq.iter().map(|&i| wstar[i]).product();
            loss += prob * 0.5 * (f - y).powi(2);
            for t in 0..k {
                let loo: f64 = seq.iter().enumerate().filter(|&(u, _)| u != t).map(|(_, &i)| w[i]).product();
                grad[seq[t]] += prob * (f - y) * loo;
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    return (loss, grad);
                }
                seq[pos] += 1;
                if seq[pos] < d {
                    break;
                }
                seq[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn overlap_and_norm_cases() {
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let ws = [1.0, 1.0];
        assert!((overlap_a(&ws, &ws, &p) - 1.0).abs() < 1e-15);
        assert_eq!(overlap_a(&[0.0, 0.0], &ws, &p), 0.0);
        assert!((overlap_a(&[1.0, 0.0], &ws, &p) - 2.0 / 3.0).abs() < 1e-15);
        assert!((norm_b(&[1.0, -1.0], &p) - 1.0).abs() < 1e-15);
        assert_eq!(norm_b(&[0.0, 0.0], &p), 0.0);
        assert!((norm_b(&[1.0, 0.0], &p) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn loss_cases() {
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let ws = [1.0, 1.0];
        assert_eq!(population_loss(&ws, &ws, &p, 2).unwrap(), 0.0);
        assert!((population_loss(&[0.0, 0.0], &ws, &p, 2).unwrap() - 0.5).abs() < 1e-15);
        let l = population_loss(&[1.0, 0.0], &ws, &p, 2).unwrap();
        assert!((l - 5.0 / 18.0).abs() < 1e-15);
        assert!((brute_force(&[1.0, 0.0], &ws, &p, 2).0 - 5.0 / 18.0).abs() < 1e-15);
        assert!(population_loss(&[1.0, 0.0], &[1.0, 0.5], &p, 2).is_err());
        assert!(population_loss(&[1.0], &ws, &p, 2).is_err());
    }

    #[test]
    fn gradient_cases() {
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let ws = [1.0, 1.0];
        assert!(population_gradient(&ws, &ws, &p, 2).iter().all(|&g| g == 0.0));
        assert!(population_gradient(&[0.0, 0.0], &ws, &p, 2).iter().all(|&g| g == 0.0));
        let g = population_gradient(&[1.0, 0.0], &ws, &p, 2);
        assert!(g[0].abs() < 1e-15 && (g[1] + 4.0 / 9.0).abs() < 1e-15, "{g:?}");
        // central differences of the closed-form loss
        let w = [1.0, 0.0];
        for i in 0..2 {
            let h = 1e-6;
            let mut wp = w;
            let mut wm = w;
            wp[i] += h;
            wm[i] -= h;
            let fd = (population_loss(&wp, &ws, &p, 2).unwrap() - population_loss(&wm, &ws, &p, 2).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_forms_match_enumeration() {
        let mut rng = rng_from_seed(21);
        for _ in 0..100 {
            let d = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=4);
            let mut p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            let ws: Vec<f64> = (0..d).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.3..1.3)).collect();
            let (bl, bg) = brute_force(&w, &ws, &p, k);
            assert!((population_loss(&w, &ws, &p, k).unwrap() - bl).abs() < 1e-10);
            let g = population_gradient(&w, &ws, &p, k);
            assert!(g.iter().zip(&bg).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    #[test]
    fn stable_loss_agrees_with_direct_formula_away_from_cancellation() {
        let mut rng = rng_from_seed(22);
        let p = zipf_weights(20, 1.3).unwrap();
        for _ in 0..200 {
            let k = rng.gen_range(1..=8);
            let ws: Vec<f64> = (0..20).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
            let scale = rng.gen_range(0.0..1.5);
            let w: Vec<f64> = ws.iter().map(|s| s * scale + rng.gen_range(-0.3..0.3)).collect();
            let PopulationStats { a, b } = population_stats(&w, &ws, &p);
            let direct = 0.5 * (b.powi(k as i32) - 2.0 * a.powi(k as i32) + 1.0);
            let stable = population_loss(&w, &ws, &p, k).unwrap();
            assert!((direct - stable).abs() < 1e-12, "{direct} {stable}");
        }
    }

    #[test]
    fn loss_keeps_relative_precision_near_optimum() {
        // Perturb one coordinate by eps: L ≈ (k/2) p_j eps² to leading order.
        let p = zipf_weights(50, 1.5).unwrap();
        let ws = vec![1.0; 50];
        let mut w = ws.clone();
        let eps = 1e-7;
        w[49] += eps;
        let l = population_loss(&w, &ws, &p, 4).unwrap();
        let lead = 0.5 * p[49] * eps * eps * (4.0 + 4.0 * 3.0 * p[49]);
        assert!(((l - lead) / lead).abs() < 1e-5, "{l} vs {lead}");
        // mirror for even k
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        assert_eq!(population_loss(&neg, &ws, &p, 4).unwrap(), l);
    }

    #[test]
    fn hessian_bound_cases() {
        let p = [0.25; 4];
        let ws = [1.0, -1.0, 1.0, 1.0];
        let hb = hessian_opnorm_bound(&ws, &ws, &p, 2);
        assert!((hb.explicit - 3.5).abs() < 1e-14);
        assert!(hb.in_stable_region);
        assert!(hb.reported <= 12.0 * 0.5);
        // linear in the (p_max, ‖p‖²) factors at fixed A
        let e1 = explicit_hessian_bound(0.7, 0.3, 0.2, 4);
        let e2 = explicit_hessian_bound(0.7, 0.6, 0.4, 4);
        assert!((e2 - 2.0 * e1).abs() < 1e-14);
        let double = hessian_opnorm_bound(&ws, &ws, &[0.5; 4], 2);
        assert!((double.universal - 2.0 * hb.universal).abs() < 1e-14);
        let deg = hessian_opnorm_bound(&[1.0, 1.0, 0.0, 0.0], &[1.0, -1.0, 1.0, 1.0], &p, 3);
        assert!(deg.degenerate);
        assert_eq!(deg.reported, deg.universal);
    }

    #[test]
    fn trajectory_fixed_points() {
        let p = zipf_weights(6, 1.0).unwrap();
        let ws = vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let opts = TrajectoryOptions::default();
        let log = population_gd_trajectory(&ws, &ws, &p, 4, 0.01, 50, &opts).unwrap();
        assert!(log.all_records().all(|r| r.loss == 0.0 && r.grad_norm == 0.0));
        assert_eq!(log.final_w, ws);
        let zero = vec![0.0; 6];
        let log = population_gd_trajectory(&zero, &ws, &p, 4, 0.01, 50, &opts).unwrap();
        assert!(log.all_records().all(|r| r.loss == 0.5));
        assert_eq!(log.records.len(), 50);
        assert_eq!(log.final_step, 50);
    }

    #[test]
    fn trajectory_statistics_match_fresh_recomputation() {
        let mut rng = rng_from_seed(23);
        let p = zipf_weights(12, 1.5).unwrap();
        let ws: Vec<f64> = (0..12).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
        let w0: Vec<f64> = (0..12).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let opts = TrajectoryOptions { checkpoint_every: 1, ..Default::default() };
        let eta = 0.5 * crate::composition::stability_bound(4, norm(&p));
        let log = population_gd_trajectory(&w0, &ws, &p, 4, eta, 400, &opts).unwrap();
        assert_eq!(log.checkpoints.len(), 401);
        for (rec, cp) in log.all_records().zip(&log.checkpoints) {
            assert_eq!(rec.step, cp.step);
            assert!((rec.a - overlap_a(&cp.w, &ws, &p)).abs() <= 1e-12);
            assert!((rec.b - norm_b(&cp.w, &p)).abs() <= 1e-12);
            let fresh = point_stats(&cp.w, &ws, &p, 4);
            assert!((rec.loss - fresh.loss).abs() <= 1e-12);
            assert!((rec.grad_norm - fresh.grad_norm).abs() <= 1e-12);
            assert!((rec.recovery_error - fresh.recovery_error).abs() <= 1e-12);
        }
        let losses: Vec<f64> = log.all_records().map(|r| r.loss).collect();
        assert!(losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn trajectory_rejects_divergence() {
        let p = [0.5, 0.5];
        let ws = [1.0, 1.0];
        let err = population_gd_trajectory(&[1e80, 1e80], &ws, &p, 4, 1.0, 10, &TrajectoryOptions::default());
        assert!(matches!(err, Err(Error::Divergence { step: 1 })));
    }

    #[test]
    fn single_skill_is_learnable() {
        let log = population_gd_trajectory(&[0.3], &[-1.0], &[1.0], 2, 0.05, 5000, &TrajectoryOptions {
            stop_loss: Some(1e-12),
            ..Default::default()
        })
        .unwrap();
        assert!(log.stopped_early);
        assert!(log.last().recovery_error < 1e-5);
    }

    #[test]
    fn horizon_is_capped() {
        assert_eq!(default_horizon(0.01, 4, 0.001, 0.0, 0.5, 1e-8, 99), 99);
        assert_eq!(default_horizon(0.01, 4, 0.001, 0.5, 1e-9, 1e-8, 99), 0);
        let h = default_horizon(0.01, 2, 0.1, 1.0, 0.5, 1e-8, u64::MAX);
        assert_eq!(h, ((6.0 / (0.01 * 2.0 * 0.1)) * (0.5f64 / 1e-8).ln()).ceil() as u64);
    }
}
