//! The k-multiplicative composition task and its scalar-product learner.
//!
//! A sample is a length-`k` sequence of skill indices; its label is the product
//! of the hidden `±1` scalars behind those skills. The learner predicts the
//! product of its own coordinates at the same indices and is trained with the
//! squared loss `½(f - y)²`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::distributions::SkillDistribution;
use crate::error::{invalid, Error, Result};

/// Ground-truth vector with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSkillVector(Vec<f64>);

impl HiddenSkillVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("hidden vector must have at least one entry"));
        }
        if values.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(invalid("hidden vector entries must be exactly -1 or +1"));
        }
        Ok(Self(values))
    }

    pub fn ones(d: usize) -> Self {
        Self(vec![1.0; d])
    }

    /// I.i.d. Rademacher entries.
    pub fn rademacher<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self((0..d).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect())
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Vec<f64> {
        self.0.iter().map(|v| -v).collect()
    }
}

impl AsRef<[f64]> for HiddenSkillVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub indices: Vec<usize>,
    pub label: f64,
}

impl Sample {
    /// Builds a sample whose label is the product of `wstar` at `indices`.
    pub fn labelled(wstar: &HiddenSkillVector, indices: Vec<usize>) -> Result<Self> {
        let label = predict(wstar.as_slice(), &indices)?;
        Ok(Sample { indices, label })
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// Learner parameters and the number of updates applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub w: Vec<f64>,
    pub step: u64,
    pub init_scale: f64,
}

impl ModelState {
    pub fn from_weights(w: Vec<f64>) -> Self {
        ModelState { w, step: 0, init_scale: 0.0 }
    }
}

/// `w(0) ~ N(0, r² I_d)`.
pub fn init_gaussian<R: Rng + ?Sized>(d: usize, r: f64, rng: &mut R) -> Result<ModelState> {
    if d == 0 {
        return Err(invalid("init_gaussian: d must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("init_gaussian: scale must be positive, got {r}")));
    }
    let normal = Normal::new(0.0, r).map_err(|e| invalid(e.to_string()))?;
    let w = (0..d).map(|_| normal.sample(rng)).collect();
    Ok(ModelState { w, step: 0, init_scale: r })
}

pub fn generate_sample<R: Rng + ?Sized>(
    wstar: &HiddenSkillVector,
    dist: &SkillDistribution,
    k: usize,
    rng: &mut R,
) -> Sample {
    let mut indices = Vec::with_capacity(k);
    fill_indices(dist, k, rng, &mut indices);
    let label = indices.iter().map(|&i| wstar.0[i]).product();
    Sample { indices, label }
}

fn fill_indices<R: Rng + ?Sized>(dist: &SkillDistribution, k: usize, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    out.extend((0..k).map(|_| dist.sample(rng)));
}

/// `∏_t w[indices_t]`.
pub fn predict(w: &[f64], indices: &[usize]) -> Result<f64> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= w.len()) {
        return Err(invalid(format!("skill index {bad} out of range for d={}", w.len())));
    }
    Ok(indices.iter().map(|&i| w[i]).product())
}

pub fn sample_loss(w: &[f64], sample: &Sample) -> Result<f64> {
    let f = predict(w, &sample.indices)?;
    Ok(0.5 * (f - sample.label).powi(2))
}

/// Dense gradient of the per-sample loss. Positions sharing a skill index
/// contribute separately and add up.
pub fn sample_gradient(w: &[f64], sample: &Sample) -> Result<Vec<f64>> {
    predict(w, &sample.indices)?;
    let mut grad = vec![0.0; w.len()];
    let mut scratch = Vec::new();
    accumulate_gradient(w, &sample.indices, sample.label, 1.0, &mut grad, &mut scratch);
    Ok(grad)
}

/// Adds `scale · ∇ℓ` into `out` and returns the sample loss.
///
/// Leave-one-out products use prefix/suffix products, so zero coordinates are
/// handled without division. `scratch` is reused across calls.
pub(crate) fn accumulate_gradient(
    w: &[f64],
    indices: &[usize],
    label: f64,
    scale: f64,
    out: &mut [f64],
    scratch: &mut Vec<f64>,
) -> f64 {
    let k = indices.len();
    scratch.clear();
    scratch.resize(k + 1, 1.0);
    // scratch[t] = product of w at positions < t
    for t in 0..k {
        scratch[t + 1] = scratch[t] * w[indices[t]];
    }
    let f = scratch[k];
    let residual = f - label;
    let coef = scale * residual;
    let mut suffix = 1.0;
    for t in (0..k).rev() {
        out[indices[t]] += coef * scratch[t] * suffix;
        suffix *= w[indices[t]];
    }
    0.5 * residual * residual
}

/// `min(‖w - w*‖_∞, ‖w + w*‖_∞)`.
pub fn recovery_error(w: &[f64], wstar: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0f64, 0.0f64);
    for (&a, &b) in w.iter().zip(wstar) {
        minus = minus.max((a - b).abs());
        plus = plus.max((a + b).abs());
    }
    minus.min(plus)
}

/// The step size above which descent is no longer guaranteed: `1 / (10 k² ‖p‖₂)`.
pub fn stability_bound(k: usize, p_norm2: f64) -> f64 {
    1.0 / (10.0 * (k * k) as f64 * p_norm2)
}

/// Half the stability bound.
pub fn default_eta(k: usize, p_norm2: f64) -> f64 {
    0.5 * stability_bound(k, p_norm2)
}

pub const DEFAULT_INIT_SCALE: f64 = 0.1;

/// Mean gradient and mean loss of a batch of samples.
pub fn batch_gradient(w: &[f64], samples: &[Sample]) -> Result<(Vec<f64>, f64)> {
    if samples.is_empty() {
        return Err(invalid("batch_gradient: empty batch"));
    }
    let mut grad = vec![0.0; w.len()];
    let mut scratch = Vec::new();
    let scale = 1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for s in samples {
        predict(w, &s.indices)?;
        loss += accumulate_gradient(w, &s.indices, s.label, scale, &mut grad, &mut scratch);
    }
    Ok((grad, loss * scale))
}

/// Reusable minibatch SGD driver for one trial.
///
/// Index draws are consumed `batch_size * k` at a time from `rng`, so two
/// trainers sharing a data stream see identical index sequences.
#[derive(Debug, Clone)]
pub struct SgdTrainer<'a> {
    pub dist: &'a SkillDistribution,
    pub wstar: &'a HiddenSkillVector,
    pub k: usize,
    pub eta: f64,
    pub batch_size: usize,
    grad: Vec<f64>,
    indices: Vec<usize>,
    scratch: Vec<f64>,
}

impl<'a> SgdTrainer<'a> {
    pub fn new(
        dist: &'a SkillDistribution,
        wstar: &'a HiddenSkillVector,
        k: usize,
        eta: f64,
        batch_size: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid(format!("learning rate must be positive, got {eta}")));
        }
        if batch_size == 0 {
            return Err(invalid("batch size must be at least 1"));
        }
        if dist.d() != wstar.d() {
            return Err(invalid(format!(
                "distribution has {} skills but hidden vector has {}",
                dist.d(),
                wstar.d()
            )));
        }
        let bound = stability_bound(k, dist.norm2());
        if eta > bound {
            log::warn!("learning rate {eta} exceeds the stability bound {bound}; descent is not guaranteed");
        }
        Ok(SgdTrainer {
            dist,
            wstar,
            k,
            eta,
            batch_size,
            grad: vec![0.0; dist.d()],
            indices: Vec::with_capacity(k),
            scratch: Vec::with_capacity(k + 1),
        })
    }

    /// One minibatch update. Returns the batch-average loss before the update.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut ModelState, rng: &mut R) -> Result<f64> {
        if state.w.len() != self.dist.d() {
            return Err(invalid("model dimension does not match the distribution"));
        }
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let scale = 1.0 / self.batch_size as f64;
        let ws = self.wstar.as_slice();
        let mut loss = 0.0;
        for _ in 0..self.batch_size {
            fill_indices(self.dist, self.k, rng, &mut self.indices);
            let label: f64 = self.indices.iter().map(|&i| ws[i]).product();
            loss += accumulate_gradient(&state.w, &self.indices, label, scale, &mut self.grad, &mut self.scratch);
        }
        let mut finite = true;
        for (w, g) in state.w.iter_mut().zip(&self.grad) {
            *w -= self.eta * g;
            finite &= w.is_finite();
        }
        state.step += 1;
        if !finite {
            return Err(Error::Divergence { step: state.step });
        }
        Ok(loss * scale)
    }
}

/// Single minibatch SGD update with freshly drawn samples.
#[allow(clippy::too_many_arguments)]
pub fn minibatch_step<R: Rng + ?Sized>(
    state: &mut ModelState,
    dist: &SkillDistribution,
    wstar: &HiddenSkillVector,
    k: usize,
    eta: f64,
    batch_size: usize,
    rng: &mut R,
) -> Result<f64> {
    SgdTrainer::new(dist, wstar, k, eta, batch_size)?.step(state, rng)
}
