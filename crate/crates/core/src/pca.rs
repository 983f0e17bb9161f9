//! Top-two principal directions of a set of checkpoint differences.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

pub const PCA_TOLERANCE: f64 = 1e-10;
pub const PCA_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pca2 {
    pub dir1: Vec<f64>,
    pub dir2: Vec<f64>,
    /// Share of total variance along each direction.
    pub explained: [f64; 2],
    /// The centred data has (numerically) rank one; `dir2` is then an
    /// arbitrary unit vector orthogonal to `dir1`.
    pub dir2_degenerate: bool,
    pub iterations: [usize; 2],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn project_out(v: &mut [f64], u: &[f64]) {
    let c = dot(v, u);
    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
}

/// `C v` with `C = (1/n) Σ x xᵀ`, without forming `C`.
fn cov_apply(rows: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    let scale = 1.0 / rows.len() as f64;
    for r in rows {
        let c = dot(r, v) * scale;
        out.iter_mut().zip(r).for_each(|(o, x)| *o += c * x);
    }
}

fn random_unit(d: usize, rng: &mut impl rand::Rng, against: Option<&[f64]>) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = against {
            project_out(&mut v, u);
            project_out(&mut v, u);
        }
        if normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

/// Leading eigenpair of the covariance restricted to the complement of `deflate`.
fn power_iterate(rows: &[Vec<f64>], mut v: Vec<f64>, deflate: Option<&[f64]>) -> (Vec<f64>, f64, usize) {
    let mut next = vec![0.0; v.len()];
    let mut lambda = 0.0;
    for it in 1..=PCA_MAX_ITERATIONS {
        cov_apply(rows, &v, &mut next);
        if let Some(u) = deflate {
            project_out(&mut next, u);
        }
        lambda = normalize(&mut next);
        if lambda == 0.0 {
            return (v, 0.0, it);
        }
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta < PCA_TOLERANCE {
            return (v, lambda, it);
        }
    }
    (v, lambda, PCA_MAX_ITERATIONS)
}

/// Principal directions of `diffs` after subtracting their mean.
///
/// The start vectors come from `seed`, so the output is deterministic.
/// Signs are fixed so the largest-magnitude entry of each direction is
/// positive.
pub fn pca_top2(diffs: &[Vec<f64>], seed: u64) -> Result<Pca2> {
    if diffs.len() < 2 {
        return Err(invalid(format!("PCA needs at least 2 difference vectors, got {}", diffs.len())));
    }
    let d = diffs[0].len();
    if d < 2 || diffs.iter().any(|v| v.len() != d) {
        return Err(invalid("PCA inputs must share a dimension of at least 2"));
    }
    let n = diffs.len() as f64;
    let mean: Vec<f64> = (0..d).map(|i| diffs.iter().map(|v| v[i]).sum::<f64>() / n).collect();
    let rows: Vec<Vec<f64>> = diffs.iter().map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let total: f64 = rows.iter().map(|r| dot(r, r)).sum::<f64>() / n;

    let mut rng = rng_from_seed(seed);
    let start = random_unit(d, &mut rng, None);
    let (mut dir1, l1, it1) = power_iterate(&rows, start, None);
    if l1 == 0.0 {
        return Err(invalid("PCA inputs have zero variance after centring"));
    }
    fix_sign(&mut dir1);
    let start = random_unit(d, &mut rng, Some(&dir1));
    let (mut dir2, l2, it2) = power_iterate(&rows, start, Some(&dir1));
    let dir2_degenerate = l2 <= 1e-12 * l1;
    // re-orthogonalize to keep |dir1·dir2| at round-off level
    project_out(&mut dir2, &dir1);
    normalize(&mut dir2);
    fix_sign(&mut dir2);
    let explained = [l1 / total, if dir2_degenerate { 0.0 } else { l2 / total }];
    Ok(Pca2 { dir1, dir2, explained, dir2_degenerate, iterations: [it1, it2] })
}

fn fix_sign(v: &mut [f64]) {
    let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
