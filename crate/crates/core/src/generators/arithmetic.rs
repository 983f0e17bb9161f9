//! Multi-step integer arithmetic over `+`, `-` and `*`.

use rand::Rng;
use serde::Serialize;

use super::DatasetRecord;
use crate::distributions::SkillDistribution;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub const ALL: [ArithOp; 3] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul];

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    fn parse(tok: &str) -> Option<Self> {
        match tok {
            "+" => Some(ArithOp::Add),
            "-" | "−" => Some(ArithOp::Sub),
            "*" | "×" | "x" => Some(ArithOp::Mul),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    pub operands: Vec<i64>,
    pub ops: Vec<ArithOp>,
}

impl Expression {
    pub fn new(operands: Vec<i64>, ops: Vec<ArithOp>) -> Result<Self> {
        if operands.is_empty() || operands.len() != ops.len() + 1 {
            return Err(invalid("an expression needs exactly one more operand than operators"));
        }
        Ok(Expression { operands, ops })
    }

    /// Whitespace-separated tokens, e.g. `23 + 15 * 7 - 42 * 3`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut operands = Vec::new();
        let mut ops = Vec::new();
        for (pos, tok) in text.split_whitespace().enumerate() {
            let err = |message: String| Error::Parse { position: pos, message };
            if pos % 2 == 0 {
                let v = tok.parse::<i64>().map_err(|_| err(format!("expected a number, found {tok:?}")))?;
                operands.push(v);
            } else {
                ops.push(ArithOp::parse(tok).ok_or_else(|| err(format!("expected an operator, found {tok:?}")))?);
            }
        }
        if operands.is_empty() {
            return Err(Error::Parse { position: 0, message: "empty expression".into() });
        }
        if operands.len() == ops.len() {
            return Err(Error::Parse { position: 2 * ops.len() - 1, message: "expression ends with an operator".into() });
        }
        Ok(Expression { operands, ops })
    }

    /// Products are folded first, then sums and differences left to right.
    pub fn eval(&self) -> Result<i64> {
        let overflow = || invalid("arithmetic overflow");
        let mut total = 0i64;
        let mut sign = 1i64;
        let mut term = self.operands[0];
        for (op, &x) in self.ops.iter().zip(&self.operands[1..]) {
            match op {
                ArithOp::Mul => term = term.checked_mul(x).ok_or_else(overflow)?,
                ArithOp::Add | ArithOp::Sub => {
                    total = total.checked_add(sign * term).ok_or_else(overflow)?;
                    sign = if *op == ArithOp::Add { 1 } else { -1 };
                    term = x;
                }
            }
        }
        total.checked_add(sign * term).ok_or_else(overflow)
    }
}

impl std::fmt::Display for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.operands[0])?;
        for (op, x) in self.ops.iter().zip(&self.operands[1..]) {
            write!(f, " {} {x}", op.symbol())?;
        }
        Ok(())
    }
}

pub fn eval_arithmetic(text: &str) -> Result<i64> {
    Expression::parse(text)?.eval()
}

pub fn arithmetic_prompt(expr: &Expression) -> String {
    format!("User: Calculate {expr}.\nAssistant:\\boxed{{")
}

/// The target continuation; the leading space keeps negative answers
/// tokenized like positive ones.
pub fn arithmetic_label(value: i64) -> String {
    format!(" {value}}}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArithmeticConfig {
    pub num_ops: usize,
    /// Inclusive operand range; skill `i` is the operand `low + i`.
    pub low: i64,
    pub high: i64,
}

impl Default for ArithmeticConfig {
    fn default() -> Self {
        ArithmeticConfig { num_ops: 4, low: 1, high: 50 }
    }
}

impl ArithmeticConfig {
    pub fn num_operands(&self) -> usize {
        (self.high - self.low + 1).max(0) as usize
    }
}

/// Expressions with operators uniform over `{+, -, *}` and operands drawn
/// from `dist` (one skill per operand value).
pub fn gen_arithmetic<R: Rng + ?Sized>(
    cfg: &ArithmeticConfig,
    dist: &SkillDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<DatasetRecord>> {
    if cfg.high < cfg.low {
        return Err(invalid(format!("empty operand range [{}, {}]", cfg.low, cfg.high)));
    }
    if dist.d() != cfg.num_operands() {
        return Err(invalid(format!("distribution has {} skills but the range holds {}", dist.d(), cfg.num_operands())));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let skills: Vec<usize> = (0..=cfg.num_ops).map(|_| dist.sample(rng)).collect();
        let ops: Vec<ArithOp> = (0..cfg.num_ops).map(|_| ArithOp::ALL[rng.gen_range(0..3)]).collect();
        let expr = Expression::new(skills.iter().map(|&s| cfg.low + s as i64).collect(), ops)?;
        let value = expr.eval()?;
        out.push(DatasetRecord {
            task: "arithmetic".into(),
            prompt: arithmetic_prompt(&expr),
            answer: arithmetic_label(value),
            skills,
            meta: serde_json::json!({ "expression": expr.to_string(), "value": value }),
        });
    }
    Ok(out)
}
