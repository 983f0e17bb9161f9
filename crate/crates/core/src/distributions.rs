//! Skill-frequency distributions over `d` skills.
//!
//! Weights are first built in *rank* order (rank 0 is the most frequent skill)
//! and then assigned to skill indices through an explicit rank ordering. All
//! indices in this module are 0-based.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// Shape of the rank-ordered weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionKind {
    Uniform,
    Zipf { alpha: f64 },
    BinnedZipf { m: usize, alpha: f64 },
}

/// How ranks are mapped onto skill indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankOrdering {
    /// Rank `j` is skill `j` (lexicographic order of the skill table).
    Identity,
    /// Rank `j` is skill `d - 1 - j`.
    Reversed,
    /// Seeded uniform shuffle.
    Random(u64),
}

impl RankOrdering {
    /// Permutation mapping rank position to skill index.
    pub fn permutation(&self, d: usize) -> Vec<usize> {
        match *self {
            RankOrdering::Identity => (0..d).collect(),
            RankOrdering::Reversed => (0..d).rev().collect(),
            RankOrdering::Random(seed) => {
                let mut perm: Vec<usize> = (0..d).collect();
                perm.shuffle(&mut rng_from_seed(seed));
                perm
            }
        }
    }
}

/// `H_{d,alpha} = sum_{t=1}^{d} t^{-alpha}`, summed smallest term first.
pub fn harmonic_number(d: usize, alpha: f64) -> f64 {
    (1..=d).rev().map(|t| (t as f64).powf(-alpha)).sum()
}

/// Zipf weights `p_j = j^{-alpha} / H_{d,alpha}` in rank order.
pub fn zipf_weights(d: usize, alpha: f64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("zipf_weights: d must be at least 1"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("zipf_weights: alpha must be positive, got {alpha}")));
    }
    let h = harmonic_number(d, alpha);
    Ok((1..=d).map(|j| (j as f64).powf(-alpha) / h).collect())
}

pub fn uniform_weights(d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("uniform_weights: d must be at least 1"));
    }
    Ok(vec![1.0 / d as f64; d])
}

/// Sizes of `m` contiguous groups covering `d` items; the first `d % m` groups
/// get one extra item.
pub fn group_sizes(d: usize, m: usize) -> Vec<usize> {
    let base = d / m;
    let extra = d % m;
    (0..m).map(|i| base + usize::from(i < extra)).collect()
}

/// Coarse power law: bin `i` (1-based) carries total mass proportional to
/// `i^{-alpha}`, split evenly among the skills inside it.
///
/// When `m` does not divide `d` the *later* bins hold the extra skill, which
/// keeps per-skill weights non-increasing in rank.
pub fn binned_zipf_weights(d: usize, m: usize, alpha: f64) -> Result<Vec<f64>> {
    if m == 0 || m > d {
        return Err(invalid(format!("binned_zipf_weights: need 1 <= m <= d, got m={m}, d={d}")));
    }
    if m == d {
        return zipf_weights(d, alpha);
    }
    let totals = zipf_weights(m, alpha)?;
    let mut weights = Vec::with_capacity(d);
    for (size, total) in group_sizes(d, m).into_iter().rev().zip(totals) {
        weights.extend(std::iter::repeat_n(total / size as f64, size));
    }
    Ok(weights)
}

/// An immutable probability vector over skills together with its rank ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillDistribution {
    kind: Option<DistributionKind>,
    rank_weights: Vec<f64>,
    ordering: Vec<usize>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SkillDistribution {
    pub fn new(kind: DistributionKind, d: usize, ordering: RankOrdering) -> Result<Self> {
        let rank_weights = match kind {
            DistributionKind::Uniform => uniform_weights(d)?,
            DistributionKind::Zipf { alpha } => zipf_weights(d, alpha)?,
            DistributionKind::BinnedZipf { m, alpha } => binned_zipf_weights(d, m, alpha)?,
        };
        let perm = ordering.permutation(d);
        let mut dist = apply_ordering(&rank_weights, &perm)?;
        dist.kind = Some(kind);
        Ok(dist)
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(DistributionKind::Uniform, d, RankOrdering::Identity)
    }

    pub fn zipf(d: usize, alpha: f64) -> Result<Self> {
        Self::new(DistributionKind::Zipf { alpha }, d, RankOrdering::Identity)
    }

    /// `None` when built from explicit weights.
    pub fn kind(&self) -> Option<DistributionKind> {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    /// Probability of each skill index.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights in rank order, before the ordering is applied.
    pub fn rank_weights(&self) -> &[f64] {
        &self.rank_weights
    }

    /// `ordering()[j]` is the skill holding rank `j`.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn skill_at_rank(&self, rank: usize) -> usize {
        self.ordering[rank]
    }

    pub fn norm2(&self) -> f64 {
        self.weights.iter().map(|p| p * p).sum::<f64>().sqrt()
    }

    pub fn p_min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Inverse-CDF draw over the cumulative table.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.skill_for_uniform(u)
    }

    /// Skill whose cumulative interval contains `u` in `[0, 1)`.
    pub fn skill_for_uniform(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.weights.len() - 1)
    }

    /// Restriction to `skills`, renormalized to sum to one.
    pub fn conditional(&self, skills: &[usize]) -> Result<SkillDistribution> {
        if skills.is_empty() {
            return Err(invalid("conditional distribution over an empty skill set"));
        }
        let mass: f64 = skills.iter().map(|&s| self.weights[s]).sum();
        let local: Vec<f64> = skills.iter().map(|&s| self.weights[s] / mass).collect();
        let identity: Vec<usize> = (0..skills.len()).collect();
        apply_ordering(&local, &identity)
    }
}

/// Assign the weight of rank `j` to skill `ordering[j]`.
pub fn apply_ordering(rank_weights: &[f64], ordering: &[usize]) -> Result<SkillDistribution> {
    let d = rank_weights.len();
    if d == 0 {
        return Err(invalid("empty weight vector"));
    }
    if ordering.len() != d {
        return Err(invalid(format!("ordering has length {}, expected {d}", ordering.len())));
    }
    let mut seen = vec![false; d];
    for &s in ordering {
        if s >= d || seen[s] {
            return Err(invalid("ordering is not a permutation of the skill indices"));
        }
        seen[s] = true;
    }
    if rank_weights.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(invalid("every weight must be strictly positive and finite"));
    }
    let total: f64 = rank_weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("weights sum to {total}, expected 1")));
    }
    let mut weights = vec![0.0; d];
    for (rank, &skill) in ordering.iter().enumerate() {
        weights[skill] = rank_weights[rank];
    }
    let cumulative = weights
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    Ok(SkillDistribution {
        kind: None,
        rank_weights: rank_weights.to_vec(),
        ordering: ordering.to_vec(),
        weights,
        cumulative,
    })
}

/// Partition of ranks into contiguous percentile bins.
///
/// With `d % num_bins != 0` the earlier bins hold one extra rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankBins {
    d: usize,
    ranges: Vec<std::ops::Range<usize>>,
    skills: Vec<Vec<usize>>,
    bin_of_skill: Vec<usize>,
}

impl RankBins {
    /// Bins over ranks, mapped to skills through `ordering` (rank -> skill).
    pub fn new(ordering: &[usize], num_bins: usize) -> Result<Self> {
        let d = ordering.len();
        if num_bins == 0 || num_bins > d {
            return Err(invalid(format!("need 1 <= num_bins <= d, got {num_bins} bins for d={d}")));
        }
        let mut ranges = Vec::with_capacity(num_bins);
        let mut start = 0;
        for size in group_sizes(d, num_bins) {
            ranges.push(start..start + size);
            start += size;
        }
        let mut bin_of_skill = vec![0; d];
        let skills = ranges
            .iter()
            .enumerate()
            .map(|(b, r)| {
                r.clone()
                    .map(|rank| {
                        let s = ordering[rank];
                        bin_of_skill[s] = b;
                        s
                    })
                    .collect()
            })
            .collect();
        Ok(RankBins { d, ranges, skills, bin_of_skill })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_bins(&self) -> usize {
        self.ranges.len()
    }

    pub fn rank_range(&self, bin: usize) -> std::ops::Range<usize> {
        self.ranges[bin].clone()
    }

    pub fn skills(&self, bin: usize) -> &[usize] {
        &self.skills[bin]
    }

    pub fn bin_of_skill(&self, skill: usize) -> usize {
        self.bin_of_skill[skill]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }
}
