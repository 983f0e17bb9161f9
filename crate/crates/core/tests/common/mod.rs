//! Independent oracles shared by the generator tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::HashMap;

use skillcomp::generators::DatasetRecord;

/// Evaluates `a op b op c ...` with `*` binding tighter than `+`/`-`,
/// left to right, without the crate's parser.
pub fn eval_infix(text: &str) -> Option<i128> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() % 2 == 0 {
        return None;
    }
    let mut terms: Vec<i128> = Vec::new();
    let mut signs: Vec<i128> = vec![1];
    let mut current: i128 = tokens[0].parse().ok()?;
    for pair in tokens[1..].chunks(2) {
        let v: i128 = pair[1].parse().ok()?;
        match pair[0] {
            "*" => current *= v,
            "+" | "-" => {
                terms.push(current);
                signs.push(if pair[0] == "+" { 1 } else { -1 });
                current = v;
            }
            _ => return None,
        }
    }
    terms.push(current);
    Some(terms.iter().zip(&signs).map(|(t, s)| t * s).sum())
}

/// Knowledge base rebuilt from rendered fact sentences.
pub struct FactTable {
    map: HashMap<(String, String), String>,
}

impl FactTable {
    /// Parses `The <relation> of <entity> is <target>.` lines.
    pub fn from_sentences<S: AsRef<str>>(facts: &[S]) -> FactTable {
        let mut map = HashMap::new();
        for f in facts {
            let f = f.as_ref();
            let body = f.strip_prefix("The ").and_then(|s| s.strip_suffix('.')).expect("fact shape");
            let (rel, rest) = body.split_once(" of ").expect("relation");
            let (ent, target) = rest.split_once(" is ").expect("target");
            map.insert((rel.to_string(), ent.to_string()), target.to_string());
        }
        FactTable { map }
    }

    /// Answers `Who is the r_k of ... the r_1 of X?` by reading the question
    /// text and following facts from the innermost relation outward.
    pub fn answer(&self, question: &str) -> Option<String> {
        let body = question.strip_prefix("Who is ")?.strip_suffix("?\nAnswer:")?;
        let parts: Vec<&str> = body.split(" of ").collect();
        let (start, rels) = parts.split_last()?;
        let mut cur = start.to_string();
        for rel in rels.iter().rev() {
            let r = rel.strip_prefix("the ")?;
            cur = self.map.get(&(r.to_string(), cur))?.clone();
        }
        Some(cur)
    }
}

/// Values of a serialized GSM DAG, recomputed from its JSON form. Division is
/// checked by multiplying back rather than by computing an inverse.
pub fn eval_gsm_dag(dag: &serde_json::Value, modulus: Option<u64>, max_value: u64) -> Result<Vec<u64>, String> {
    let mut values: Vec<u64> = dag["leaves"].as_array().ok_or("leaves")?.iter().map(|v| v.as_u64().unwrap()).collect();
    let nodes = dag["nodes"].as_array().ok_or("nodes")?;
    for (i, n) in nodes.iter().enumerate() {
        let (l, r) = (n["lhs"].as_u64().unwrap() as usize, n["rhs"].as_u64().unwrap() as usize);
        if l >= values.len() || r >= values.len() {
            return Err(format!("node {i} refers forward"));
        }
        let (a, b) = (values[l], values[r]);
        let op = n["op"].as_str().unwrap();
        let v = match modulus {
            Some(p) => match op {
                "add" => (a + b) % p,
                "sub" => (a + p - b) % p,
                "mul" => a * b % p,
                "div" => {
                    if b == 0 {
                        return Err("division by zero".into());
                    }
                    (0..p).find(|q| q * b % p == a).ok_or("no quotient")?
                }
                _ => return Err(format!("unknown op {op}")),
            },
            None => {
                let v = match op {
                    "add" => a + b,
                    "sub" => a.checked_sub(b).ok_or("negative intermediate")?,
                    "mul" => a * b,
                    "div" => {
                        if b == 0 || a % b != 0 {
                            return Err(format!("inexact division {a} / {b}"));
                        }
                        a / b
                    }
                    _ => return Err(format!("unknown op {op}")),
                };
                if v > max_value {
                    return Err(format!("value {v} above {max_value}"));
                }
                v
            }
        };
        values.push(v);
    }
    Ok(values)
}

/// Largest deviation of skill counts from `n_draws * p`, in binomial
/// standard deviations.
pub fn max_binomial_z(records: &[DatasetRecord], weights: &[f64]) -> f64 {
    let mut counts = vec![0u64; weights.len()];
    for r in records {
        for &s in &r.skills {
            counts[s] += 1;
        }
    }
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(weights)
        .map(|(&c, &p)| {
            let mean = n as f64 * p;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            if sd == 0.0 {
                if c as f64 == mean { 0.0 } else { f64::INFINITY }
            } else {
                (c as f64 - mean).abs() / sd
            }
        })
        .fold(0.0, f64::max)
}

/// Expected loss and gradient over all `d^k` index sequences.
pub fn enumerate_population(w: &[f64], wstar: &[f64], p: &[f64], k: usize) -> (f64, Vec<f64>) {
    let d = w.len();
    let mut loss = 0.0;
    let mut grad = vec![0.0; d];
    let mut idx = vec![0usize; k];
    loop {
        let prob: f64 = idx.iter().map(|&i| p[i]).product();
        let f: f64 = idx.iter().map(|&i| w[i]).product();
        let y: f64 = idx.iter().map(|&i| wstar[i]).product();
        loss += prob * 0.5 * (f - y) * (f - y);
        for t in 0..k {
            let others: f64 = (0..k).filter(|&s| s != t).map(|s| w[idx[s]]).product();
            grad[idx[t]] += prob * (f - y) * others;
        }
        let mut pos = 0;
        loop {
            if pos == k {
                return (loss, grad);
            }
            idx[pos] += 1;
            if idx[pos] < d {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
