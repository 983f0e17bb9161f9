//! Permutations of five symbols and the state-tracking dataset.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::DatasetRecord;
use crate::distributions::SkillDistribution;
use crate::error::{invalid, Result};

pub const S5_ORDER: usize = 120;

/// A permutation of `{1, ..., 5}` stored as the images of `1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm([u8; 5]);

impl Perm {
    pub const IDENTITY: Perm = Perm([1, 2, 3, 4, 5]);

    pub fn new(mapping: [u8; 5]) -> Result<Self> {
        let mut seen = [false; 5];
        for &x in &mapping {
            if !(1..=5).contains(&x) || seen[(x - 1) as usize] {
                return Err(invalid(format!("{mapping:?} is not a permutation of 1..5")));
            }
            seen[(x - 1) as usize] = true;
        }
        Ok(Perm(mapping))
    }

    pub fn mapping(&self) -> [u8; 5] {
        self.0
    }

    /// Image of `x` in `1..=5`.
    pub fn apply(&self, x: u8) -> u8 {
        self.0[(x - 1) as usize]
    }

    /// `self` first, then `then`: `x -> then(self(x))`.
    pub fn then(&self, then: &Perm) -> Perm {
        Perm(self.0.map(|x| then.apply(x)))
    }

    pub fn inverse(&self) -> Perm {
        let mut out = [0u8; 5];
        for (i, &x) in self.0.iter().enumerate() {
            out[(x - 1) as usize] = i as u8 + 1;
        }
        Perm(out)
    }

    /// Position in the lexicographic order of mapping arrays (Lehmer code).
    pub fn lex_index(&self) -> usize {
        let mut idx = 0;
        for i in 0..5 {
            let smaller_after = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            idx = idx * (5 - i) + smaller_after;
        }
        idx
    }

    pub fn from_lex_index(mut idx: usize) -> Result<Perm> {
        if idx >= S5_ORDER {
            return Err(invalid(format!("permutation index {idx} out of range")));
        }
        let mut pool: Vec<u8> = (1..=5).collect();
        let mut out = [0u8; 5];
        let mut radix = 24;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = pool.remove(idx / radix);
            idx %= radix;
            if i < 4 {
                radix /= 4 - i;
            }
        }
        Ok(Perm(out))
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e] = self.0;
        write!(f, "({a} {b} {c} {d} {e})")
    }
}

/// Composition in reading order: `g` is applied first.
pub fn s5_compose(g: &Perm, h: &Perm) -> Perm {
    g.then(h)
}

/// All 120 permutations in lexicographic order of their mappings.
pub fn all_permutations() -> Vec<Perm> {
    let mut out = Vec::with_capacity(S5_ORDER);
    for a in 1..=5u8 {
        for b in 1..=5u8 {
            for c in 1..=5u8 {
                for d in 1..=5u8 {
                    for e in 1..=5u8 {
                        if let Ok(p) = Perm::new([a, b, c, d, e]) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Either a fixed hop count or weights over hop counts `1..=weights.len()`.
#[derive(Debug, Clone, PartialEq)]
pub enum Hops {
    Fixed(usize),
    Mixture(Vec<f64>),
}

/// Records whose input is `k` permutations (5 tokens each) drawn from `dist`
/// over lexicographic indices, and whose answer is their composition.
pub fn gen_state_tracking<R: Rng + ?Sized>(
    hops: &Hops,
    dist: &SkillDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<DatasetRecord>> {
    if dist.d() != S5_ORDER {
        return Err(invalid(format!("state tracking needs a distribution over 120 skills, got {}", dist.d())));
    }
    let mixture = match hops {
        Hops::Fixed(0) => return Err(invalid("hop count must be at least 1")),
        Hops::Fixed(_) => None,
        Hops::Mixture(w) => Some(WeightedIndex::new(w).map_err(|e| invalid(format!("hop mixture: {e}")))?),
    };
    let perms = all_permutations();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let k = match (hops, &mixture) {
            (Hops::Fixed(k), _) => *k,
            (_, Some(m)) => m.sample(rng) + 1,
            _ => unreachable!(),
        };
        let skills: Vec<usize> = (0..k).map(|_| dist.sample(rng)).collect();
        let target = skills.iter().fold(Perm::IDENTITY, |acc, &s| acc.then(&perms[s]));
        let tokens: Vec<String> = skills.iter().flat_map(|&s| perms[s].0).map(|t| t.to_string()).collect();
        out.push(DatasetRecord {
            task: "state-tracking".into(),
            prompt: tokens.join(" "),
            answer: target.0.map(|t| t.to_string()).join(" "),
            skills,
            meta: serde_json::json!({ "k": k }),
        });
    }
    Ok(out)
}
