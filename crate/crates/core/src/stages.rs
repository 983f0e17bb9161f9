//! Rank-binned metrics, stage boundaries, tail gradient norms and 2D loss
//! landscape slices.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::distributions::{RankBins, SkillDistribution};
use crate::error::{invalid, Result};
use crate::population::{norm, population_gradient, restricted_population_loss, LossParts};
use crate::trajectory::{Checkpoint, TrajectoryLog};

pub const LANDSCAPE_SCHEMA: &str = "skillcomp.landscape/v1";

pub fn assign_bins(dist: &SkillDistribution, num_bins: usize) -> Result<RankBins> {
    RankBins::new(dist.ordering(), num_bins)
}

/// Loss on sequences whose indices all lie in bin `bin_id`.
pub fn binwise_population_loss(
    w: &[f64],
    wstar: &[f64],
    p: &[f64],
    k: usize,
    bins: &RankBins,
    bin_id: usize,
) -> Result<f64> {
    if bin_id >= bins.num_bins() {
        return Err(invalid(format!("bin {bin_id} out of range ({} bins)", bins.num_bins())));
    }
    restricted_population_loss(w, wstar, p, k, bins.skills(bin_id))
}

/// Bin skill lists in bin order, for `TrajectoryOptions::bins`.
pub fn bin_skill_sets(bins: &RankBins) -> Vec<Vec<usize>> {
    (0..bins.num_bins()).map(|b| bins.skills(b).to_vec()).collect()
}

fn union_skills(bins: &RankBins, ids: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &b in ids {
        if b >= bins.num_bins() {
            return Err(invalid(format!("bin {b} out of range ({} bins)", bins.num_bins())));
        }
        out.extend_from_slice(bins.skills(b));
    }
    if out.is_empty() {
        return Err(invalid("context bins are empty"));
    }
    Ok(out)
}

/// Mean per-sample gradient norm over samples with exactly one position
/// (chosen uniformly) holding a `tail_bin` skill and the other `k - 1`
/// positions holding skills from `context_bins`.
#[allow(clippy::too_many_arguments)]
pub fn tail_gradient_norm<R: Rng + ?Sized>(
    w: &[f64],
    wstar: &[f64],
    dist: &SkillDistribution,
    k: usize,
    bins: &RankBins,
    tail_bin: usize,
    context_bins: &[usize],
    num_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 || num_samples == 0 {
        return Err(invalid("tail_gradient_norm needs k >= 1 and at least one sample"));
    }
    let tail_skills = union_skills(bins, &[tail_bin])?;
    let ctx_skills = union_skills(bins, context_bins)?;
    let tail = dist.conditional(&tail_skills)?;
    let ctx = dist.conditional(&ctx_skills)?;
    let mut indices = vec![0usize; k];
    let mut total = 0.0;
    for _ in 0..num_samples {
        let pos = rng.gen_range(0..k);
        for (t, slot) in indices.iter_mut().enumerate() {
            *slot = if t == pos { tail_skills[tail.sample(rng)] } else { ctx_skills[ctx.sample(rng)] };
        }
        total += sparse_gradient_norm(w, wstar, &indices);
    }
    Ok(total / num_samples as f64)
}

/// Norm of the per-sample gradient, touching only the indexed coordinates.
fn sparse_gradient_norm(w: &[f64], wstar: &[f64], indices: &[usize]) -> f64 {
    let k = indices.len();
    let f: f64 = indices.iter().map(|&i| w[i]).product();
    let y: f64 = indices.iter().map(|&i| wstar[i]).product();
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(k);
    for t in 0..k {
        let loo: f64 = indices.iter().enumerate().filter(|&(s, _)| s != t).map(|(_, &i)| w[i]).product();
        let g = (f - y) * loo;
        match entries.iter_mut().find(|(i, _)| *i == indices[t]) {
            Some(e) => e.1 += g,
            None => entries.push((indices[t], g)),
        }
    }
    entries.iter().map(|(_, g)| g * g).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageThresholds {
    /// Stage 1 ends once the total loss is at most `(1 - stage1_drop) L₀`.
    pub stage1_drop: f64,
    /// Stage 2 starts once the bin-1 loss is at most `bin1_fraction · L₀`.
    pub bin1_fraction: f64,
}

impl Default for StageThresholds {
    fn default() -> Self {
        StageThresholds { stage1_drop: 0.05, bin1_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailGradientPoint {
    pub step: u64,
    /// Context drawn from bin 1.
    pub head_context: f64,
    /// Context drawn from bins 2 to 4.
    pub middle_context: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage1_exit_step: Option<u64>,
    pub stage2_entry_step: Option<u64>,
    /// First step at which each bin's loss is at most half its initial value.
    pub bin_halving_steps: Vec<Option<u64>>,
    pub steps: Vec<u64>,
    /// `bin_losses[b][i]` is bin `b`'s loss at `steps[i]`.
    pub bin_losses: Vec<Vec<f64>>,
    pub tail_gradient: Vec<TailGradientPoint>,
}

impl StageReport {
    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let fmt = |v: Option<u64>| v.map(|s| s.to_string()).unwrap_or_default();
        let mut out = String::new();
        let _ = writeln!(out, "stage1_exit_step={}", fmt(self.stage1_exit_step));
        let _ = writeln!(out, "stage2_entry_step={}", fmt(self.stage2_entry_step));
        for (b, s) in self.bin_halving_steps.iter().enumerate() {
            let _ = writeln!(out, "bin{}_halving_step={}", b + 1, fmt(*s));
        }
        for t in &self.tail_gradient {
            let _ = writeln!(out, "tail_gradient@{}={},{}", t.step, t.head_context, t.middle_context);
        }
        out
    }
}

/// First logged step whose bin-`bin` loss is at most `fraction` of its
/// initial value.
pub fn bin_fraction_step(log: &TrajectoryLog, bin: usize, fraction: f64) -> Option<u64> {
    let start = *log.initial.bin_losses.get(bin)?;
    log.all_records().find(|r| r.bin_losses[bin] <= fraction * start).map(|r| r.step)
}

/// Stage boundaries from a log carrying bin losses (bin 1 first).
///
/// Stage 2 is searched from the stage-1 exit onward, so the two boundaries
/// are ordered whenever both exist.
pub fn detect_stages(log: &TrajectoryLog, thresholds: StageThresholds) -> Result<StageReport> {
    let nbins = log.initial.bin_losses.len();
    if nbins == 0 {
        return Err(invalid("trajectory log has no bin losses"));
    }
    let l0 = log.initial.loss;
    let stage1 = log.all_records().find(|r| r.loss <= (1.0 - thresholds.stage1_drop) * l0).map(|r| r.step);
    let stage2 = stage1.and_then(|s1| {
        log.all_records()
            .filter(|r| r.step >= s1)
            .find(|r| r.bin_losses[0] <= thresholds.bin1_fraction * l0)
            .map(|r| r.step)
    });
    let steps = log.all_records().map(|r| r.step).collect();
    let bin_losses = (0..nbins).map(|b| log.all_records().map(|r| r.bin_losses[b]).collect()).collect();
    Ok(StageReport {
        stage1_exit_step: stage1,
        stage2_entry_step: stage2,
        bin_halving_steps: (0..nbins).map(|b| bin_fraction_step(log, b, 0.5)).collect(),
        steps,
        bin_losses,
        tail_gradient: Vec::new(),
    })
}

/// Differences between consecutive checkpoints, optionally limited to the
/// first `limit` checkpoints.
pub fn checkpoint_diffs(checkpoints: &[Checkpoint], limit: Option<usize>) -> Vec<Vec<f64>> {
    let n = limit.map_or(checkpoints.len(), |l| l.min(checkpoints.len()));
    checkpoints[..n]
        .windows(2)
        .map(|p| p[1].w.iter().zip(&p[0].w).map(|(a, b)| a - b).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeSlice {
    pub center: Vec<f64>,
    pub dir1: Vec<f64>,
    pub dir2: Vec<f64>,
    /// Half-widths along `dir1` and `dir2`.
    pub extents: [f64; 2],
    /// Grid coordinates along each direction.
    pub coords: [Vec<f64>; 2],
    /// `grid[i][j]` is the loss at `center + coords[0][i]·dir1 + coords[1][j]·dir2`.
    pub grid: Vec<Vec<f64>>,
    /// Norm of the population gradient projected onto the plane.
    pub slopes: Vec<Vec<f64>>,
    /// Trajectory points projected onto the plane.
    pub trajectory: Vec<[f64; 2]>,
}

fn axis(half_width: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let m = (n - 1) as f64;
    (0..n).map(|i| half_width * (2.0 * i as f64 - m) / m).collect()
}

/// Loss on the grid `center + a·dir1 + b·dir2`, `|a| <= extents[0]`,
/// `|b| <= extents[1]`. Resolutions must be odd so the centre is a grid
/// point.
#[allow(clippy::too_many_arguments)]
pub fn landscape_slice(
    center: &[f64],
    dir1: &[f64],
    dir2: &[f64],
    extents: [f64; 2],
    resolution: [usize; 2],
    wstar: &[f64],
    p: &[f64],
    k: usize,
    trajectory: &[Vec<f64>],
) -> Result<LandscapeSlice> {
    let d = center.len();
    if dir1.len() != d || dir2.len() != d || wstar.len() != d || p.len() != d {
        return Err(invalid("landscape inputs must share one dimension"));
    }
    if resolution.iter().any(|&n| n == 0 || n % 2 == 0) {
        return Err(invalid(format!("grid resolution must be odd, got {resolution:?}")));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for (name, v) in [("dir1", dir1), ("dir2", dir2)] {
        if (dot(v, v).sqrt() - 1.0).abs() > 1e-8 {
            return Err(invalid(format!("{name} is not a unit vector")));
        }
    }
    if dot(dir1, dir2).abs() > 1e-8 {
        return Err(invalid("slice directions are not orthogonal"));
    }
    let coords = [axis(extents[0], resolution[0]), axis(extents[1], resolution[1])];
    let rows: Vec<(Vec<f64>, Vec<f64>)> = coords[0]
        .par_iter()
        .map(|&a| {
            let mut w = vec![0.0; d];
            let mut losses = Vec::with_capacity(coords[1].len());
            let mut slopes = Vec::with_capacity(coords[1].len());
            for &b in &coords[1] {
                for j in 0..d {
                    w[j] = center[j] + a * dir1[j] + b * dir2[j];
                }
                losses.push(LossParts::collect(&w, wstar, p).loss(k));
                let g = population_gradient(&w, wstar, p, k);
                slopes.push(norm(&[dot(&g, dir1), dot(&g, dir2)]));
            }
            (losses, slopes)
        })
        .collect();
    let (grid, slopes) = rows.into_iter().unzip();
    let trajectory = trajectory
        .iter()
        .map(|w| {
            let diff: Vec<f64> = w.iter().zip(center).map(|(x, c)| x - c).collect();
            [dot(&diff, dir1), dot(&diff, dir2)]
        })
        .collect();
    Ok(LandscapeSlice {
        center: center.to_vec(),
        dir1: dir1.to_vec(),
        dir2: dir2.to_vec(),
        extents,
        coords,
        grid,
        slopes,
        trajectory,
    })
}

impl LandscapeSlice {
    pub fn center_value(&self) -> f64 {
        self.grid[self.coords[0].len() / 2][self.coords[1].len() / 2]
    }

    /// Largest in-plane slope over grid points within `radius` of the centre.
    pub fn max_slope_within(&self, radius: f64) -> f64 {
        let mut best = 0.0f64;
        for (i, &a) in self.coords[0].iter().enumerate() {
            for (j, &b) in self.coords[1].iter().enumerate() {
                if (a * a + b * b).sqrt() <= radius {
                    best = best.max(self.slopes[i][j]);
                }
            }
        }
        best
    }

    /// Grid indices of the smallest loss value.
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.grid.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < self.grid[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Rectangular CSV: rows follow `dir1`, columns follow `dir2`.
    pub fn grid_csv(&self, config_hash: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema={LANDSCAPE_SCHEMA} config_hash={config_hash}");
        out.push_str("a\\b");
        for b in &self.coords[1] {
            let _ = write!(out, ",{b:?}");
        }
        out.push('\n');
        for (a, row) in self.coords[0].iter().zip(&self.grid) {
            let _ = write!(out, "{a:?}");
            for v in row {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Directions, extents, coordinates, slopes and trajectory projections.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": LANDSCAPE_SCHEMA,
            "center": self.center,
            "dir1": self.dir1,
            "dir2": self.dir2,
            "extents": self.extents,
            "coords": self.coords,
            "slopes": self.slopes,
            "trajectory": self.trajectory,
        })
    }
}
