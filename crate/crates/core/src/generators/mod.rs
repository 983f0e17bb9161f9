//! Dataset generators for the empirical tasks, emitted as JSON lines.

pub mod arithmetic;
pub mod gsm;
pub mod multihop;
pub mod names;
pub mod s5;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const DATASET_SCHEMA: &str = "skillcomp.dataset/v1";

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub task: String,
    pub prompt: String,
    pub answer: String,
    /// Skill indices the record was built from, in order of use.
    pub skills: Vec<usize>,
    pub meta: serde_json::Value,
}

pub fn to_jsonl(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_jsonl(text: &str) -> Result<Vec<DatasetRecord>> {
    text.lines().filter(|l| !l.is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

/// Count of each skill index over all records.
pub fn skill_histogram(records: &[DatasetRecord], num_skills: usize) -> Vec<u64> {
    let mut counts = vec![0u64; num_skills];
    for r in records {
        for &s in &r.skills {
            if s < num_skills {
                counts[s] += 1;
            }
        }
    }
    counts
}

/// Sidecar describing a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema: String,
    pub task: String,
    pub seed: u64,
    pub record_count: usize,
    pub config: serde_json::Value,
    /// Weights the skills were drawn from.
    pub configured_weights: Vec<f64>,
    /// Skill counts actually emitted, after any rejection.
    pub realized_histogram: Vec<u64>,
}

impl DatasetManifest {
    pub fn new(
        task: &str,
        seed: u64,
        config: serde_json::Value,
        configured_weights: &[f64],
        records: &[DatasetRecord],
    ) -> Self {
        DatasetManifest {
            schema: DATASET_SCHEMA.into(),
            task: task.into(),
            seed,
            record_count: records.len(),
            config,
            configured_weights: configured_weights.to_vec(),
            realized_histogram: skill_histogram(records, configured_weights.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_roundtrip() {
        let recs = vec![DatasetRecord {
            task: "t".into(),
            prompt: "a\nb".into(),
            answer: " 2}".into(),
            skills: vec![1, 1, 3],
            meta: serde_json::json!({ "k": 2 }),
        }];
        let text = to_jsonl(&recs).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(from_jsonl(&text).unwrap(), recs);
        assert_eq!(skill_histogram(&recs, 4), vec![0, 2, 0, 1]);
    }
}
