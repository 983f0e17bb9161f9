//! Relation graphs over named people and nested k-hop questions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::names::{PERSON_NAMES, RELATION_NAMES};
use super::DatasetRecord;
use crate::distributions::SkillDistribution;
use crate::error::{invalid, Result};

/// Every entity has exactly one outgoing edge per relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationGraph {
    entity_names: Vec<String>,
    relation_names: Vec<String>,
    /// `edges[e][r]` is the target of relation `r` from entity `e`.
    edges: Vec<Vec<usize>>,
}

impl RelationGraph {
    pub fn from_parts(entity_names: Vec<String>, relation_names: Vec<String>, edges: Vec<Vec<usize>>) -> Result<Self> {
        let (ne, nr) = (entity_names.len(), relation_names.len());
        if ne < 2 || nr == 0 {
            return Err(invalid("a relation graph needs at least 2 entities and 1 relation"));
        }
        if edges.len() != ne || edges.iter().any(|row| row.len() != nr || row.iter().any(|&t| t >= ne)) {
            return Err(invalid("every entity needs one valid target per relation"));
        }
        Ok(RelationGraph { entity_names, relation_names, edges })
    }

    pub fn num_entities(&self) -> usize {
        self.entity_names.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relation_names.len()
    }

    pub fn entity_name(&self, e: usize) -> &str {
        &self.entity_names[e]
    }

    pub fn relation_name(&self, r: usize) -> &str {
        &self.relation_names[r]
    }

    pub fn target(&self, entity: usize, relation: usize) -> usize {
        self.edges[entity][relation]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// `The <relation> of <entity> is <target>.` for every edge.
    pub fn facts(&self) -> Vec<String> {
        (0..self.num_entities())
            .flat_map(|e| (0..self.num_relations()).map(move |r| (e, r)))
            .map(|(e, r)| self.fact(e, r))
            .collect()
    }

    pub fn fact(&self, entity: usize, relation: usize) -> String {
        format!(
            "The {} of {} is {}.",
            self.relation_names[relation],
            self.entity_names[entity],
            self.entity_names[self.target(entity, relation)]
        )
    }
}

/// Random graph with targets uniform over all entities (or all other
/// entities when `allow_self_loops` is false).
pub fn gen_relation_graph<R: Rng + ?Sized>(
    num_entities: usize,
    num_relations: usize,
    allow_self_loops: bool,
    rng: &mut R,
) -> Result<RelationGraph> {
    if num_entities < 2 {
        return Err(invalid("a relation graph needs at least 2 entities"));
    }
    if num_entities > PERSON_NAMES.len() || num_relations > RELATION_NAMES.len() || num_relations == 0 {
        return Err(invalid(format!(
            "the bundled lists hold {} names and {} relations",
            PERSON_NAMES.len(),
            RELATION_NAMES.len()
        )));
    }
    let edges = (0..num_entities)
        .map(|e| {
            (0..num_relations)
                .map(|_| {
                    if allow_self_loops {
                        rng.gen_range(0..num_entities)
                    } else {
                        let t = rng.gen_range(0..num_entities - 1);
                        if t >= e {
                            t + 1
                        } else {
                            t
                        }
                    }
                })
                .collect()
        })
        .collect();
    RelationGraph::from_parts(
        PERSON_NAMES[..num_entities].iter().map(|s| s.to_string()).collect(),
        RELATION_NAMES[..num_relations].iter().map(|s| s.to_string()).collect(),
        edges,
    )
}

/// `Who is the r_k of ... the r_1 of <start>?\nAnswer:`
pub fn render_question(graph: &RelationGraph, start: usize, relations: &[usize]) -> String {
    let mut q = String::from("Who is");
    for &r in relations.iter().rev() {
        q.push_str(&format!(" the {} of", graph.relation_name(r)));
    }
    format!("{q} {}?\nAnswer:", graph.entity_name(start))
}

/// Records with a uniform start entity and `k` relations drawn from `dist`.
/// With `include_facts`, the one-hop facts along the path are stored in
/// `meta.facts`.
pub fn gen_multihop_qa<R: Rng + ?Sized>(
    graph: &RelationGraph,
    k: usize,
    dist: &SkillDistribution,
    n: usize,
    include_facts: bool,
    rng: &mut R,
) -> Result<Vec<DatasetRecord>> {
    if k == 0 {
        return Err(invalid("hop count must be at least 1"));
    }
    if dist.d() != graph.num_relations() {
        return Err(invalid(format!("distribution has {} skills for {} relations", dist.d(), graph.num_relations())));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let start = rng.gen_range(0..graph.num_entities());
        let relations: Vec<usize> = (0..k).map(|_| dist.sample(rng)).collect();
        let mut path = vec![start];
        let mut facts = Vec::new();
        for &r in &relations {
            let cur = *path.last().unwrap();
            facts.push(graph.fact(cur, r));
            path.push(graph.target(cur, r));
        }
        let mut meta = serde_json::json!({ "k": k, "path": path.iter().map(|&e| graph.entity_name(e)).collect::<Vec<_>>() });
        if include_facts {
            meta["facts"] = facts.into();
        }
        out.push(DatasetRecord {
            task: "multihop-qa".into(),
            prompt: render_question(graph, start, &relations),
            answer: graph.entity_name(*path.last().unwrap()).to_string(),
            skills: relations,
            meta,
        });
    }
    Ok(out)
}

/// A stream mixing one-hop fact records (share `fact_ratio`) with k-hop
/// questions.
pub fn gen_qa_stream<R: Rng + ?Sized>(
    graph: &RelationGraph,
    k: usize,
    dist: &SkillDistribution,
    n: usize,
    fact_ratio: f64,
    rng: &mut R,
) -> Result<Vec<DatasetRecord>> {
    if !(0.0..=1.0).contains(&fact_ratio) {
        return Err(invalid(format!("fact ratio must lie in [0, 1], got {fact_ratio}")));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.gen_bool(fact_ratio) {
            let e = rng.gen_range(0..graph.num_entities());
            let r = dist.sample(rng);
            let t = graph.target(e, r);
            out.push(DatasetRecord {
                task: "qa-fact".into(),
                prompt: format!("The {} of {} is", graph.relation_name(r), graph.entity_name(e)),
                answer: graph.entity_name(t).to_string(),
                skills: vec![r],
                meta: serde_json::json!({ "k": 1 }),
            });
        } else {
            out.extend(gen_multihop_qa(graph, k, dist, 1, false, rng)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn worked_example() {
        // Bob -teacher-> Carol -instructor-> Alice
        let g = RelationGraph::from_parts(
            names(&["Alice", "Bob", "Carol"]),
            names(&["teacher", "instructor"]),
            vec![vec![0, 0], vec![2, 1], vec![1, 0]],
        )
        .unwrap();
        assert_eq!(render_question(&g, 1, &[0, 1]), "Who is the instructor of the teacher of Bob?\nAnswer:");
        assert_eq!(g.fact(1, 0), "The teacher of Bob is Carol.");
        assert_eq!(g.fact(2, 1), "The instructor of Carol is Alice.");
        assert_eq!(g.target(g.target(1, 0), 1), 0);
    }

    #[test]
    fn graph_shape_and_determinism() {
        let g = gen_relation_graph(50, 20, true, &mut rng_from_seed(1)).unwrap();
        assert_eq!(g.num_edges(), 1000);
        assert_eq!(g.facts().len(), 1000);
        assert_eq!(g, gen_relation_graph(50, 20, true, &mut rng_from_seed(1)).unwrap());
        let no_loops = gen_relation_graph(20, 20, false, &mut rng_from_seed(2)).unwrap();
        assert!((0..20).all(|e| (0..20).all(|r| no_loops.target(e, r) != e)));
        assert!(gen_relation_graph(1, 20, true, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn one_hop_answer_is_edge_target() {
        let g = gen_relation_graph(20, 20, true, &mut rng_from_seed(3)).unwrap();
        let dist = SkillDistribution::zipf(20, 1.0).unwrap();
        for r in gen_multihop_qa(&g, 1, &dist, 100, true, &mut rng_from_seed(4)).unwrap() {
            let start = r.meta["path"][0].as_str().unwrap();
            let e = (0..20).find(|&e| g.entity_name(e) == start).unwrap();
            assert_eq!(r.answer, g.entity_name(g.target(e, r.skills[0])));
        }
        assert!(gen_multihop_qa(&g, 0, &dist, 1, false, &mut rng_from_seed(4)).is_err());
    }

    #[test]
    fn stream_mixes_facts() {
        let g = gen_relation_graph(20, 20, true, &mut rng_from_seed(5)).unwrap();
        let dist = SkillDistribution::uniform(20).unwrap();
        let recs = gen_qa_stream(&g, 3, &dist, 400, 0.5, &mut rng_from_seed(6)).unwrap();
        let facts = recs.iter().filter(|r| r.task == "qa-fact").count();
        assert!(facts > 150 && facts < 250);
    }
}
