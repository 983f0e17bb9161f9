//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 12`.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{enumerate_population, eval_gsm_dag, eval_infix, max_binomial_z, FactTable};
use rand::Rng;
use skillcomp::composition::{default_eta, init_gaussian, sample_gradient, sample_loss, HiddenSkillVector, Sample};
use skillcomp::distributions::{DistributionKind, RankOrdering, SkillDistribution};
use skillcomp::experiment::{run_experiment, ExperimentConfig, RunOverrides, RunReport};
use skillcomp::generators::arithmetic::{eval_arithmetic, gen_arithmetic, ArithmeticConfig};
use skillcomp::generators::gsm::{gen_gsm, GsmConfig};
use skillcomp::generators::multihop::{gen_multihop_qa, gen_relation_graph, render_question, RelationGraph};
use skillcomp::generators::s5::{all_permutations, gen_state_tracking, s5_compose, Hops, Perm};
use skillcomp::population::{population_gd_trajectory, population_gradient, population_loss};
use skillcomp::probes::{check_init_concentration, check_stationary_points, csq_packing, median, CsqPackingConfig, InitBrackets};
use skillcomp::rng::{derive_rng, rng_from_seed};
use skillcomp::trajectory::{TrajectoryLog, TrajectoryOptions};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    ensure(elapsed < limit, format!("{detail}; {:.1}s of {}s allowed", elapsed.as_secs_f64(), limit.as_secs()))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(name: &str, out: &Path) -> Result<RunReport, String> {
    let cfg = ExperimentConfig::load(&configs_dir().join(name)).map_err(|e| e.to_string())?;
    let ov = RunOverrides { output_root: Some(out.to_path_buf()), ..Default::default() };
    run_experiment(&cfg, &ov).map_err(|e| e.to_string())
}

fn key_values(path: &Path) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_owned(), v.to_owned())).collect())
}

fn parse<T: std::str::FromStr>(kv: &HashMap<String, String>, key: &str) -> Result<T, String> {
    kv.get(key).and_then(|v| v.parse().ok()).ok_or_else(|| format!("missing or malformed {key}"))
}

/// Last data row of a trajectory CSV as `column -> value`.
fn last_row(path: &Path) -> Result<HashMap<String, f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or("empty csv")?.split(',').collect();
    let last = lines.next_back().ok_or("no rows")?;
    Ok(header.iter().zip(last.split(',')).filter_map(|(h, v)| v.parse().ok().map(|x| (h.to_string(), x))).collect())
}

fn simplex(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=4);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let wstar: Vec<f64> = (0..d).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect();
        let p = simplex(&(0..d).map(|_| rng.gen_range(0.05..1.0)).collect::<Vec<_>>());
        let (loss, grad) = enumerate_population(&w, &wstar, &p, k);
        let closed = population_loss(&w, &wstar, &p, k).map_err(|e| e.to_string())?;
        worst = worst.max((closed - loss).abs());
        for (a, b) in population_gradient(&w, &wstar, &p, k).iter().zip(&grad) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:.2e} over 200 instances"))
        .and_then(|d| within(t.elapsed(), Duration::from_secs(10), d))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from_seed(202);
    let h = 1e-5;
    let (mut worst, mut repeated) = (0.0f64, 0);
    for n in 0..1000 {
        let d = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5) * if rng.gen() { 1.0 } else { -1.0 }).collect();
        let wstar = HiddenSkillVector::rademacher(d, &mut rng);
        let mut indices: Vec<usize> = (0..k).map(|_| rng.gen_range(0..d)).collect();
        if n % 2 == 0 && k >= 2 {
            indices[k - 1] = indices[0];
        }
        if (1..k).any(|t| indices[..t].contains(&indices[t])) {
            repeated += 1;
        }
        let s = Sample::labelled(&wstar, indices).map_err(|e| e.to_string())?;
        let g = sample_gradient(&w, &s).map_err(|e| e.to_string())?;
        for i in 0..d {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (sample_loss(&up, &s).unwrap() - sample_loss(&down, &s).unwrap()) / (2.0 * h);
            worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1e-3));
        }
    }
    ensure(worst <= 1e-6 && repeated >= 500, format!("max relative error {worst:.2e}; {repeated} samples with repeated indices"))
        .and_then(|d| within(t.elapsed(), Duration::from_secs(5), d))
}

fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(303);
    let (mut worst_stationary, mut min_probe) = (0.0f64, f64::INFINITY);
    for _ in 0..20 {
        let d = rng.gen_range(1..=20);
        // -w* is a minimizer only for even k.
        let k = 2 * rng.gen_range(1..=3);
        let wstar = HiddenSkillVector::rademacher(d, &mut rng);
        let p = simplex(&(0..d).map(|_| rng.gen_range(0.05..1.0)).collect::<Vec<_>>());
        let c = check_stationary_points(wstar.as_slice(), &p, k, 1000, &mut rng).map_err(|e| e.to_string())?;
        worst_stationary = worst_stationary.max(c.grad_norm_origin).max(c.grad_norm_plus).max(c.grad_norm_minus);
        min_probe = min_probe.min(c.min_probe_grad_norm);
    }
    ensure(
        worst_stationary <= 1e-12 && min_probe > 0.0,
        format!("max stationary gradient {worst_stationary:.2e}, min probe gradient {min_probe:.2e}"),
    )
}

/// Regression baseline for the population run's stopping step.
const POPULATION_RUN_STEPS: f64 = 248_348.0;

fn criteria_4_5_8(out: &Path) -> [(u32, Outcome); 3] {
    let t = Instant::now();
    let report = match run_config("population-stages.toml", out) {
        Ok(r) => r,
        Err(e) => return [(4, Err(e.clone())), (5, Err(e.clone())), (8, Err(e))],
    };
    let elapsed = t.elapsed();
    let c4 = (|| {
        let pl = key_values(&report.dir.join("pl.txt"))?;
        let pass: bool = parse(&pl, "pl_pass")?;
        let pre: bool = parse(&pl, "pl_preconditions_met")?;
        let min: f64 = parse(&pl, "pl_min_ratio")?;
        let checked: usize = parse(&pl, "pl_checked_steps")?;
        ensure(pass && pre, format!("min PL ratio {min:.4} over {checked} logged steps, preconditions met: {pre}"))
            .and_then(|d| within(elapsed, Duration::from_secs(60), d))
    })();
    let c5 = (|| {
        let last = last_row(&report.dir.join("trajectory.csv"))?;
        let (step, loss, rec) = (last["step"], last["loss"], last["recovery_error"]);
        let drift = (step - POPULATION_RUN_STEPS).abs() / POPULATION_RUN_STEPS;
        ensure(
            loss <= 1e-8 && rec <= 1e-3 && drift <= 0.1,
            format!("loss {loss:.2e}, recovery error {rec:.2e} at step {step} (baseline {POPULATION_RUN_STEPS}, drift {:.1}%)", drift * 100.0),
        )
    })();
    let c8 = (|| {
        let st = key_values(&report.dir.join("stages.txt"))?;
        let b1: u64 = parse(&st, "bin1_halving_step")?;
        let b5: u64 = parse(&st, "bin5_halving_step")?;
        let s2: u64 = parse(&st, "stage2_entry_step")?;
        let tg = st.get(&format!("tail_gradient@{s2}")).ok_or("missing tail gradient")?;
        let (head, middle) = tg.split_once(',').ok_or("malformed tail gradient")?;
        let (head, middle): (f64, f64) = (head.parse().map_err(|_| "head")?, middle.parse().map_err(|_| "middle")?);
        ensure(
            b1 <= b5 && head > middle,
            format!("bin 1 halves at {b1}, bin 5 at {b5}; tail gradient at stage 2 ({s2}): head {head:.3e} vs middle {middle:.3e}"),
        )
    })();
    [(4, c4), (5, c5), (8, c8)]
}

fn criterion_6(out: &Path) -> Outcome {
    let t = Instant::now();
    let report = run_config("separation.toml", out)?;
    let kv = key_values(&report.dir.join("separation.txt"))?;
    let budget: u64 = parse(&kv, "success_budget")?;
    let loss: f64 = parse(&kv, "median_uniform_loss")?;
    ensure(loss >= 0.45, format!("uniform median loss {loss:.6} at the power-law budget of {budget} samples"))
        .and_then(|d| within(t.elapsed(), Duration::from_secs(600), d))
}

fn criterion_7() -> Outcome {
    let (d, r) = (10_000, 0.1);
    let zipf = SkillDistribution::zipf(d, 1.5).map_err(|e| e.to_string())?;
    let uniform = SkillDistribution::uniform(d).map_err(|e| e.to_string())?;
    let z = check_init_concentration(r, zipf.weights(), 10_000, InitBrackets::default(), &mut rng_from_seed(71))
        .map_err(|e| e.to_string())?;
    let u = check_init_concentration(r, uniform.weights(), 10_000, InitBrackets::default(), &mut rng_from_seed(72))
        .map_err(|e| e.to_string())?;
    let ratio = z.median_abs_a / u.median_abs_a;
    let expected = zipf.norm2() / uniform.norm2();
    let rel = (ratio - expected).abs() / expected;
    ensure(ratio > 10.0 && rel <= 0.2, format!("median |A(0)| ratio {ratio:.2}, norm ratio {expected:.2} ({:.1}% off)", rel * 100.0))
}

/// Regression baseline for the uniform arm's slope near the initialization.
const UNIFORM_SLOPE: f64 = 1.55e-6;

fn criterion_9(out: &Path) -> Outcome {
    let report = run_config("landscape.toml", out)?;
    let kv = key_values(&report.dir.join("landscape.txt"))?;
    let u: f64 = parse(&kv, "uniform_max_slope_within_radius")?;
    let p: f64 = parse(&kv, "power-law_max_slope_within_radius")?;
    let drift = (u - UNIFORM_SLOPE).abs() / UNIFORM_SLOPE;
    ensure(
        p > u && u <= 1e-4 && drift <= 0.1,
        format!("max slope power-law {p:.3e} vs uniform {u:.3e} (baseline {UNIFORM_SLOPE:.2e})"),
    )
}

fn gd_run(dist: &SkillDistribution, k: usize, r: f64, eta: f64, steps: u64, seed: u64, opts: &TrajectoryOptions) -> Result<TrajectoryLog, String> {
    let d = dist.d();
    let wstar = HiddenSkillVector::rademacher(d, &mut derive_rng(seed, "wstar", 0));
    let w0 = init_gaussian(d, r, &mut derive_rng(seed, "init", 0)).map_err(|e| e.to_string())?;
    population_gd_trajectory(&w0.w, wstar.as_slice(), dist.weights(), k, eta, steps, opts).map_err(|e| e.to_string())
}

fn criterion_10() -> Outcome {
    let (d, k, r, steps, seeds) = (200, 6, 0.3, 6_000_000u64, 8u64);
    let alphas = [0.25, 1.0, 1.5];
    let dists: Vec<SkillDistribution> = alphas.iter().map(|&a| SkillDistribution::zipf(d, a).unwrap()).collect();
    // One step size for every arm, stable for the most concentrated one.
    let eta = default_eta(k, dists[2].norm2());
    let opts = TrajectoryOptions { log_every: steps / 10, loss_thresholds: vec![0.1], ..Default::default() };
    let mut drops = vec![Vec::new(); 3];
    let mut finals = vec![Vec::new(); 3];
    let mut low_alpha_hits = 0;
    for seed in 0..seeds {
        for (j, dist) in dists.iter().enumerate() {
            let log = gd_run(dist, k, r, eta, steps, seed, &opts)?;
            drops[j].push(log.initial.loss - log.records[0].loss);
            finals[j].push(log.last().loss);
            if j == 0 && log.first_loss_crossing(0.1).is_some() {
                low_alpha_hits += 1;
            }
        }
    }
    let med_drop: Vec<f64> = drops.iter().map(|v| median(v)).collect();
    let final_high = median(&finals[2]);
    ensure(
        low_alpha_hits == 0 && final_high <= 1e-6 && med_drop[0] < med_drop[1] && med_drop[1] < med_drop[2],
        format!(
            "alpha 0.25 reached 0.1 in {low_alpha_hits}/{seeds} seeds; alpha 1.5 median final loss {final_high:.2e}; median early drops {:.2e} < {:.2e} < {:.2e}",
            med_drop[0], med_drop[1], med_drop[2]
        ),
    )
}

fn criterion_11() -> Outcome {
    let (d, k, r, steps, seeds) = (120, 4, 0.1, 3_000_000u64, 3u64);
    let mut medians = Vec::new();
    for m in [2, d / 12, d] {
        let dist = SkillDistribution::new(DistributionKind::BinnedZipf { m, alpha: 1.5 }, d, RankOrdering::Identity)
            .map_err(|e| e.to_string())?;
        let eta = default_eta(k, dist.norm2());
        let opts = TrajectoryOptions { log_every: steps, loss_thresholds: vec![1e-4], stop_loss: Some(1e-4), ..Default::default() };
        let mut hits = Vec::new();
        for seed in 0..seeds {
            let log = gd_run(&dist, k, r, eta, steps, seed, &opts)?;
            hits.push(log.first_loss_crossing(1e-4).map_or(f64::INFINITY, |s| s as f64));
        }
        medians.push((m, median(&hits)));
    }
    let ok = medians.windows(2).all(|w| w[1].1 <= w[0].1) && medians.iter().any(|(_, s)| s.is_finite());
    ensure(ok, medians.iter().map(|(m, s)| format!("m={m}: {s}")).collect::<Vec<_>>().join(", "))
}

fn criterion_12() -> Outcome {
    let mut notes = Vec::new();
    let v = eval_arithmetic("23 + 15 * 7 - 42 * 3").map_err(|e| e.to_string())?;
    if v != 2 {
        return Err(format!("worked arithmetic example evaluated to {v}"));
    }
    notes.push("arithmetic example = 2".to_string());

    let perms = all_permutations();
    let id = Perm::IDENTITY;
    for g in &perms {
        if s5_compose(g, &id) != *g || s5_compose(&id, g) != *g || s5_compose(g, &g.inverse()) != id {
            return Err(format!("group law fails at {:?}", g.mapping()));
        }
    }
    let mut rng = rng_from_seed(1212);
    for _ in 0..1000 {
        let [a, b, c] = [0; 3].map(|_| perms[rng.gen_range(0..120)]);
        if s5_compose(&s5_compose(&a, &b), &c) != s5_compose(&a, &s5_compose(&b, &c)) {
            return Err("associativity fails".into());
        }
    }
    notes.push(format!("{} permutations, 1000 triples", perms.len()));

    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let worked = RelationGraph::from_parts(names(&["Alice", "Bob", "Carol"]), names(&["teacher", "instructor"]), vec![vec![0, 0], vec![2, 1], vec![1, 0]])
        .map_err(|e| e.to_string())?;
    let table = FactTable::from_sentences(&[worked.fact(1, 0), worked.fact(2, 1)]);
    let q = render_question(&worked, 1, &[0, 1]);
    if table.answer(&q).as_deref() != Some("Alice") {
        return Err(format!("worked QA example: {q:?} -> {:?}", table.answer(&q)));
    }
    let graph = gen_relation_graph(120, 20, true, &mut rng).map_err(|e| e.to_string())?;
    let table = FactTable::from_sentences(&graph.facts());
    let rel_dist = SkillDistribution::new(DistributionKind::Zipf { alpha: 1.0 }, 20, RankOrdering::Random(5)).unwrap();
    let qa = gen_multihop_qa(&graph, 3, &rel_dist, 10_000, false, &mut rng).map_err(|e| e.to_string())?;
    let wrong = qa.iter().filter(|r| table.answer(&r.prompt).as_deref() != Some(r.answer.as_str())).count();
    if wrong > 0 {
        return Err(format!("{wrong} of 10000 QA answers disagree with the fact table"));
    }
    notes.push("10000 QA + worked example".into());

    for modulus in [Some(211), None] {
        let cfg = GsmConfig { modulus, ..Default::default() };
        let skills = if modulus.is_some() { 211 } else { 201 };
        let dist = SkillDistribution::zipf(skills, 1.0).unwrap();
        let recs = gen_gsm(&cfg, &dist, 10_000, &mut rng).map_err(|e| e.to_string())?;
        for r in &recs {
            let values = eval_gsm_dag(&r.meta["dag"], modulus, cfg.max_value)?;
            let ops = r.meta["num_ops"].as_u64().unwrap_or(0);
            let in_range = match modulus {
                Some(p) => values.iter().all(|&v| v < p),
                None => values.iter().all(|&v| v <= cfg.max_value),
            };
            if !(2..=8).contains(&ops) || !in_range || r.answer != values.last().unwrap().to_string() {
                return Err(format!("bad GSM record: {}", r.prompt));
            }
        }
    }
    notes.push("20000 GSM".into());

    let n = 100_000;
    let arith_cfg = ArithmeticConfig::default();
    let arith_dist = SkillDistribution::new(DistributionKind::Zipf { alpha: 1.0 }, arith_cfg.num_operands(), RankOrdering::Random(1)).unwrap();
    let arith = gen_arithmetic(&arith_cfg, &arith_dist, n, &mut rng).map_err(|e| e.to_string())?;
    if let Some(r) = arith.iter().take(1000).find(|r| eval_infix(r.meta["expression"].as_str().unwrap()).map(|v| format!(" {v}}}")) != Some(r.answer.clone())) {
        return Err(format!("arithmetic answer mismatch: {}", r.prompt));
    }
    let s5_dist = SkillDistribution::new(DistributionKind::Zipf { alpha: 1.0 }, 120, RankOrdering::Random(2)).unwrap();
    let states = gen_state_tracking(&Hops::Fixed(4), &s5_dist, n, &mut rng).map_err(|e| e.to_string())?;
    let qa = gen_multihop_qa(&graph, 2, &rel_dist, n, false, &mut rng).map_err(|e| e.to_string())?;
    let z = [
        max_binomial_z(&arith, arith_dist.weights()),
        max_binomial_z(&states, s5_dist.weights()),
        max_binomial_z(&qa, rel_dist.weights()),
    ];
    notes.push(format!("histogram z {:.2}/{:.2}/{:.2}", z[0], z[1], z[2]));
    ensure(z.iter().all(|&x| x < 5.0), notes.join("; "))
}

fn criterion_13() -> Outcome {
    let cfg = CsqPackingConfig { d: 400, epsilon: 0.31, num_vectors: 100, k: 4, seed: 13 };
    let rep = csq_packing(&cfg).map_err(|e| e.to_string())?;
    ensure(
        rep.max_overlap <= 0.31 && rep.max_correlation <= 0.31f64.powi(4),
        format!("max overlap {:.3}, max correlation {:.2e}", rep.max_overlap, rep.max_correlation),
    )
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            for (k, v) in tree(&p) {
                out.insert(Path::new(&e.file_name()).join(k), v);
            }
        } else {
            out.insert(PathBuf::from(e.file_name()), std::fs::read(&p).unwrap_or_default());
        }
    }
    out
}

fn criterion_14(out: &Path) -> Outcome {
    let mut compared = 0;
    for name in ["sweep-alpha.toml", "gen-qa.toml", "probes.toml"] {
        let (a, b) = (out.join(format!("a-{name}")), out.join(format!("b-{name}")));
        let cfg = ExperimentConfig::load(&configs_dir().join(name)).map_err(|e| e.to_string())?;
        run_experiment(&cfg, &RunOverrides { output_root: Some(a.clone()), parallelism: Some(1), ..Default::default() })
            .map_err(|e| e.to_string())?;
        run_experiment(&cfg, &RunOverrides { output_root: Some(b.clone()), parallelism: Some(4), ..Default::default() })
            .map_err(|e| e.to_string())?;
        let (ta, tb) = (tree(&a), tree(&b));
        if ta.is_empty() || ta != tb {
            return Err(format!("{name}: artifacts differ between reruns"));
        }
        compared += ta.len();
    }
    Ok(format!("{compared} artifacts byte-identical across reruns"))
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |n: u32| wanted.is_empty() || wanted.contains(&n);
    let tmp = tempfile::tempdir().expect("temp dir");
    let timed = |n: u32, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        (n, r, t.elapsed())
    };
    let singles: [(u32, &dyn Fn() -> Outcome); 11] = [
        (1, &criterion_1),
        (2, &criterion_2),
        (3, &criterion_3),
        (6, &|| criterion_6(&tmp.path().join("separation"))),
        (7, &criterion_7),
        (9, &|| criterion_9(&tmp.path().join("landscape"))),
        (10, &criterion_10),
        (11, &criterion_11),
        (12, &criterion_12),
        (13, &criterion_13),
        (14, &|| criterion_14(&tmp.path().join("determinism"))),
    ];
    let mut results: Vec<(u32, Outcome, Duration)> =
        singles.iter().filter(|(n, _)| run(*n)).map(|(n, f)| timed(*n, *f)).collect();
    if run(4) || run(5) || run(8) {
        let t = Instant::now();
        let shared = criteria_4_5_8(&tmp.path().join("population"));
        let elapsed = t.elapsed();
        results.extend(shared.into_iter().filter(|(n, _)| run(*n)).map(|(n, r)| (n, r, elapsed)));
    }

    results.sort_by_key(|(n, _, _)| *n);
    let mut failed = 0;
    for (n, r, t) in &results {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2}: {tag} ({:.1}s) {detail}", t.as_secs_f64());
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
