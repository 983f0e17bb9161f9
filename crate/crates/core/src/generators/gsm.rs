//! Grade-school math word problems built from a layered dependency graph.
//!
//! Variables `0..L` are literal leaves; variable `L + i` is operation node
//! `i`, whose operands are earlier variables. Node `i` always consumes node
//! `i - 1`, so the query (the last node) depends on every operation.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::names::{ANIMAL_NAMES, PLACE_NAMES};
use super::DatasetRecord;
use crate::distributions::SkillDistribution;
use crate::error::{invalid, Error, Result};

pub const MIN_OPS: usize = 2;
pub const MAX_OPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GsmOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl GsmOp {
    pub const ALL: [GsmOp; 4] = [GsmOp::Add, GsmOp::Sub, GsmOp::Mul, GsmOp::Div];

    fn symbol(self) -> &'static str {
        match self {
            GsmOp::Add => "+",
            GsmOp::Sub => "-",
            GsmOp::Mul => "*",
            GsmOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsmNode {
    pub op: GsmOp,
    pub lhs: usize,
    pub rhs: usize,
}

/// How values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arith {
    /// Everything modulo a prime; division multiplies by the inverse.
    Modular(u64),
    /// Plain integers that must stay in `[0, max]`, with exact division.
    Bounded(u64),
}

/// Why an operation was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    Negative,
    TooLarge,
    Inexact,
    DivideByZero,
}

impl Arith {
    pub fn apply(self, op: GsmOp, a: u64, b: u64) -> std::result::Result<u64, Violation> {
        match self {
            Arith::Modular(p) => match op {
                GsmOp::Add => Ok((a + b) % p),
                GsmOp::Sub => Ok((a + p - b) % p),
                GsmOp::Mul => Ok(a * b % p),
                GsmOp::Div if b == 0 => Err(Violation::DivideByZero),
                GsmOp::Div => Ok(a * mod_pow(b, p - 2, p) % p),
            },
            Arith::Bounded(max) => {
                let v = match op {
                    GsmOp::Add => a + b,
                    GsmOp::Sub => a.checked_sub(b).ok_or(Violation::Negative)?,
                    GsmOp::Mul => a.checked_mul(b).ok_or(Violation::TooLarge)?,
                    GsmOp::Div if b == 0 => return Err(Violation::DivideByZero),
                    GsmOp::Div if a % b != 0 => return Err(Violation::Inexact),
                    GsmOp::Div => a / b,
                };
                if v > max {
                    Err(Violation::TooLarge)
                } else {
                    Ok(v)
                }
            }
        }
    }

    fn admits(self, v: u64) -> bool {
        match self {
            Arith::Modular(p) => v < p,
            Arith::Bounded(max) => v <= max,
        }
    }
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|i| i * i <= n).all(|i| n % i != 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsmDag {
    pub leaves: Vec<u64>,
    pub nodes: Vec<GsmNode>,
}

impl GsmDag {
    pub fn num_vars(&self) -> usize {
        self.leaves.len() + self.nodes.len()
    }

    /// Every operand refers to an earlier variable.
    pub fn is_acyclic(&self) -> bool {
        let l = self.leaves.len();
        self.nodes.iter().enumerate().all(|(i, n)| n.lhs < l + i && n.rhs < l + i)
    }

    /// Values of all variables in topological order.
    pub fn evaluate(&self, arith: Arith) -> std::result::Result<Vec<u64>, Violation> {
        if self.leaves.iter().any(|&v| !arith.admits(v)) {
            return Err(Violation::TooLarge);
        }
        let mut values = self.leaves.clone();
        for n in &self.nodes {
            let v = arith.apply(n.op, values[n.lhs], values[n.rhs])?;
            values.push(v);
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GsmProblem {
    pub dag: GsmDag,
    pub arith: Arith,
    pub values: Vec<u64>,
    pub names: Vec<String>,
    pub query: usize,
    pub problem: String,
    pub solution: String,
    pub answer: u64,
}

impl GsmProblem {
    /// Renders a problem for `dag`, querying its last variable.
    pub fn render(
        dag: GsmDag,
        arith: Arith,
        names: Vec<String>,
        place: &str,
        merges: &[bool],
    ) -> Result<GsmProblem> {
        if !dag.is_acyclic() || dag.nodes.is_empty() {
            return Err(invalid("problem graph must be acyclic with at least one operation"));
        }
        if names.len() != dag.num_vars() {
            return Err(invalid("one name per variable is required"));
        }
        let values = dag.evaluate(arith).map_err(|v| invalid(format!("graph violates its constraints: {v:?}")))?;
        let query = dag.num_vars() - 1;
        let l = dag.leaves.len();
        let modulus = match arith {
            Arith::Modular(p) => Some(p),
            Arith::Bounded(_) => None,
        };

        let mut problem = format!("We are in {place}.");
        if let Some(p) = modulus {
            problem.push_str(&format!(" All numbers are counted modulo {p}."));
        }
        for (i, v) in dag.leaves.iter().enumerate() {
            problem.push_str(&format!(" There are {v} {}.", names[i]));
        }
        for (i, n) in dag.nodes.iter().enumerate() {
            let what = match n.op {
                GsmOp::Add => "sum",
                GsmOp::Sub => "difference",
                GsmOp::Mul => "product",
                GsmOp::Div => "quotient",
            };
            problem.push_str(&format!(
                " The number of {} is the {what} of {} and {}.",
                names[l + i],
                names[n.lhs],
                names[n.rhs]
            ));
        }
        problem.push_str(&format!(" What is the {}?", names[query]));

        let suffix = modulus.map(|p| format!(" (mod {p})")).unwrap_or_default();
        let mut known = vec![false; dag.num_vars()];
        let mut steps: Vec<String> = Vec::new();
        let mut i = 0;
        while i < dag.nodes.len() {
            let n = dag.nodes[i];
            let mut text = String::new();
            for v in [n.lhs, n.rhs] {
                if v < l && !known[v] {
                    known[v] = true;
                    text.push_str(&format!("We know the {} is {}. ", names[v], values[v]));
                }
            }
            let merge = merges.get(i).copied().unwrap_or(false)
                && i + 1 < dag.nodes.len()
                && [dag.nodes[i + 1].lhs, dag.nodes[i + 1].rhs].contains(&(l + i));
            if merge {
                // skip the intermediate result: "(a + b) * c"
                let next = dag.nodes[i + 1];
                let inner = format!("({} {} {})", values[n.lhs], n.op.symbol(), values[n.rhs]);
                let var = l + i;
                let other = if next.lhs == var { next.rhs } else { next.lhs };
                if other < l && !known[other] {
                    known[other] = true;
                    text.push_str(&format!("We know the {} is {}. ", names[other], values[other]));
                }
                let (a, b) = if next.lhs == var {
                    (inner, values[next.rhs].to_string())
                } else {
                    (values[next.lhs].to_string(), inner)
                };
                text.push_str(&format!(
                    "The {} is {a} {} {b} = {}{suffix}.",
                    names[l + i + 1],
                    next.op.symbol(),
                    values[l + i + 1]
                ));
                i += 2;
            } else {
                let (a, b, c) = (values[n.lhs], values[n.rhs], values[l + i]);
                let name = &names[l + i];
                text.push_str(&match n.op {
                    GsmOp::Add => format!("The {name} is {a} + {b} = {c}{suffix}."),
                    GsmOp::Sub => format!("The {name} is {a} - {b} = {c}{suffix}."),
                    GsmOp::Mul => format!("Multiplying {a} by {b} gives {c}{suffix}, which is the {name}."),
                    GsmOp::Div => format!("Splitting {a} evenly into {b} parts gives {c}{suffix}, which is the {name}."),
                });
                i += 1;
            }
            steps.push(text);
        }
        let answer = values[query];
        steps.push(format!("Answer: #### {answer}"));
        Ok(GsmProblem { dag, arith, values, names, query, problem, solution: steps.join(" "), answer })
    }

    pub fn num_ops(&self) -> usize {
        self.dag.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GsmConfig {
    pub min_ops: usize,
    pub max_ops: usize,
    /// `Some(p)` for modular arithmetic with prime `p`.
    pub modulus: Option<u64>,
    /// Upper bound on every value without a modulus.
    pub max_value: u64,
    /// Merge adjacent solution steps at random.
    pub multi_hop_template: bool,
    /// Chance that an operation reuses an earlier variable instead of a fresh leaf.
    pub reuse_prob: f64,
    /// Rejected draws allowed per problem before giving up.
    pub max_attempts: usize,
}

impl Default for GsmConfig {
    fn default() -> Self {
        GsmConfig {
            min_ops: MIN_OPS,
            max_ops: MAX_OPS,
            modulus: Some(211),
            max_value: 1000,
            multi_hop_template: false,
            reuse_prob: 0.25,
            max_attempts: 10_000,
        }
    }
}

impl GsmConfig {
    pub fn arith(&self) -> Arith {
        match self.modulus {
            Some(p) => Arith::Modular(p),
            None => Arith::Bounded(self.max_value),
        }
    }

    pub fn validate(&self, num_skills: usize) -> Result<()> {
        if self.min_ops < MIN_OPS || self.max_ops > MAX_OPS || self.min_ops > self.max_ops {
            return Err(invalid(format!("operation count range must lie within {MIN_OPS}..={MAX_OPS}")));
        }
        if let Some(p) = self.modulus {
            if !is_prime(p) || p > u32::MAX as u64 {
                return Err(invalid(format!("modulus {p} is not a prime below 2^32")));
            }
            if num_skills as u64 > p {
                return Err(invalid(format!("{num_skills} number skills exceed modulus {p}")));
            }
        } else if num_skills as u64 > self.max_value + 1 {
            return Err(invalid(format!("{num_skills} number skills exceed the value bound {}", self.max_value)));
        }
        if !(0.0..=1.0).contains(&self.reuse_prob) || self.max_attempts == 0 {
            return Err(invalid("reuse_prob must lie in [0, 1] and max_attempts must be positive"));
        }
        Ok(())
    }
}

/// Consecutive rejections on one operation before the whole graph is redrawn.
const RESTART_AFTER: usize = 64;

/// Draws one problem; skill `i` is the number `i`.
pub fn gen_gsm_problem<R: Rng + ?Sized>(cfg: &GsmConfig, dist: &SkillDistribution, rng: &mut R) -> Result<GsmProblem> {
    cfg.validate(dist.d())?;
    let arith = cfg.arith();
    let num_ops = rng.gen_range(cfg.min_ops..=cfg.max_ops);
    let num_leaves = num_ops + 1;
    let mut rejections: BTreeMap<Violation, usize> = BTreeMap::new();
    let mut attempts = 0;
    let mut streak = 0;
    let mut leaves: Vec<u64> = vec![dist.sample(rng) as u64];
    let mut nodes: Vec<GsmNode> = Vec::with_capacity(num_ops);
    let mut node_values: Vec<u64> = Vec::with_capacity(num_ops);
    while nodes.len() < num_ops {
        if attempts == cfg.max_attempts {
            let diagnostics = rejections.iter().map(|(k, v)| format!("{k:?}: {v}")).collect::<Vec<_>>().join(", ");
            return Err(Error::Generation { attempts, diagnostics });
        }
        attempts += 1;
        if streak == RESTART_AFTER {
            streak = 0;
            leaves.truncate(1);
            leaves[0] = dist.sample(rng) as u64;
            nodes.clear();
            node_values.clear();
        }
        let i = nodes.len();
        // leaf i + 1 is drawn with node i; it may end up a distractor
        let fresh = dist.sample(rng) as u64;
        let chain = if i == 0 { 0 } else { num_leaves + i - 1 };
        let other = if i > 0 && rng.gen_bool(cfg.reuse_prob) {
            let pool: Vec<usize> = (0..=i).chain(num_leaves..num_leaves + i).filter(|&v| v != chain).collect();
            *pool.choose(rng).unwrap()
        } else {
            i + 1
        };
        let op = GsmOp::ALL[rng.gen_range(0..4)];
        let (lhs, rhs) = if rng.gen_bool(0.5) { (chain, other) } else { (other, chain) };
        let value_of = |v: usize| match v {
            v if v == i + 1 => fresh,
            v if v < num_leaves => leaves[v],
            v => node_values[v - num_leaves],
        };
        match arith.apply(op, value_of(lhs), value_of(rhs)) {
            Ok(v) => {
                streak = 0;
                leaves.push(fresh);
                node_values.push(v);
                nodes.push(GsmNode { op, lhs, rhs });
            }
            Err(why) => {
                streak += 1;
                *rejections.entry(why).or_default() += 1;
            }
        }
    }
    let dag = GsmDag { leaves, nodes };
    let mut names: Vec<String> = ANIMAL_NAMES.iter().map(|s| s.to_string()).collect();
    names.shuffle(rng);
    names.truncate(dag.num_vars());
    let place = PLACE_NAMES[rng.gen_range(0..PLACE_NAMES.len())];
    let merges: Vec<bool> = if cfg.multi_hop_template { (0..num_ops).map(|_| rng.gen_bool(0.5)).collect() } else { Vec::new() };
    GsmProblem::render(dag, arith, names, place, &merges)
}

pub fn gen_gsm<R: Rng + ?Sized>(
    cfg: &GsmConfig,
    dist: &SkillDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<DatasetRecord>> {
    (0..n)
        .map(|_| {
            let p = gen_gsm_problem(cfg, dist, rng)?;
            Ok(DatasetRecord {
                task: "gsm".into(),
                prompt: p.problem.clone(),
                answer: p.answer.to_string(),
                skills: p.dag.leaves.iter().map(|&v| v as usize).collect(),
                meta: serde_json::json!({
                    "modulus": cfg.modulus,
                    "num_ops": p.num_ops(),
                    "dag": p.dag,
                    "values": p.values,
                    "solution": p.solution,
                }),
            })
        })
        .collect()
}
