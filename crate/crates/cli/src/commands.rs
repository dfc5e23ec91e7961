//! The subcommands. Each returns the payload of its run report.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Result};
use diverse_cq_core::baselines::{
    delta_min, delta_sum, element, ultrametric_to_volume, ultrametric_tree_from_matrix, weitzman,
    weitzman_ultrametric, DistanceFn, UltrametricNode,
};
use diverse_cq_core::engine::{enumerate_answers, provenance_map, td_answers, yannakakis_answers, AnswerSet};
use diverse_cq_core::optimize::{
    brute_force_diversify, greedy_combined, greedy_diversify, greedy_set_function, CombinedMode, Mode,
};
use diverse_cq_core::query::{
    free_connex_join_tree, free_connex_subtree, gyo_join_tree, parse_cq, ConjunctiveQuery, TreeDecomposition,
};
use diverse_cq_core::rational::format_rational;
use diverse_cq_core::volume::{
    multiattribute_from_volume, volume_from_multiattribute, EuclideanAssignment, GroundPoint, Measure,
    MultiAttributeWeights, VolumeAssignment,
};
use diverse_cq_core::{DataValue, Database, Error, Rational, Schema, Tuple};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{
    BenchArgs, CompareArgs, ConvertArgs, DiversifyArgs, EngineArg, EvalArgs, ModeArg, QueryInput, VolumeArgs,
    VolumeSpec,
};
use crate::io::{
    load_database, load_matrix, load_multiattr, load_query, load_sets, load_tree_decomposition, load_ultrametric,
    load_weights, Inputs,
};
use crate::report::{rational_json, result_json, tuple_json, tuples_json, Timer};

/// A failed self-check; reported with exit code 1.
#[derive(Debug)]
pub struct Internal(pub String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Internal {}

struct Loaded {
    db: Database,
    query: ConjunctiveQuery,
    td: Option<TreeDecomposition>,
    stats: Value,
}

fn load(input: &QueryInput, inputs: &mut Inputs, timer: &mut Timer) -> Result<Loaded> {
    let (db, stats) = timer.time("load", || load_database(&input.data, inputs))?;
    let query = load_query(&input.query, db.schema(), inputs)?;
    let td = match &input.td {
        Some(p) => Some(load_tree_decomposition(p, &query, input.td_width, inputs)?),
        None => None,
    };
    Ok(Loaded {
        db,
        query,
        td,
        stats: serde_json::to_value(stats)?,
    })
}

fn query_json(q: &ConjunctiveQuery) -> Value {
    json!({
        "text": q.to_string(),
        "full": q.is_full(),
        "self_join_free": q.is_self_join_free(),
        "acyclic": gyo_join_tree(q).is_ok(),
    })
}

/// Answers through the supplied decomposition, a join tree, or a plain join.
fn evaluate(q: &ConjunctiveQuery, d: &Database, td: Option<&TreeDecomposition>) -> Result<(AnswerSet, &'static str)> {
    if let Some(td) = td {
        return Ok((td_answers(q, td, d)?, "tree-decomposition"));
    }
    match gyo_join_tree(q) {
        Ok(jt) => Ok((yannakakis_answers(q, &jt, d)?, "yannakakis")),
        Err(Error::NotAcyclic) => Ok((enumerate_answers(q, d)?, "naive")),
        Err(e) => Err(e.into()),
    }
}

pub fn eval(args: &EvalArgs, inputs: &mut Inputs, timer: &mut Timer) -> Result<Value> {
    let l = load(&args.input, inputs, timer)?;
    let (answers, engine) = timer.time("evaluate", || evaluate(&l.query, &l.db, l.td.as_ref()))?;
    let mut out = json!({
        "relations": l.stats,
        "query": query_json(&l.query),
        "engine": engine,
        "answer_count": answers.len(),
    });
    if args.dump {
        out["answers"] = tuples_json(&answers.answers);
    }
    Ok(out)
}

/// A scoring function over answers.
enum Volume {
    Discrete(VolumeAssignment),
    Ball(EuclideanAssignment),
}

fn weights(v: &VolumeArgs, positional: bool, inputs: &mut Inputs) -> Result<Measure> {
    let m = v
        .measure
        .as_ref()
        .ok_or_else(|| anyhow!("--volume {} needs --measure weighted:<file>", v.volume.as_string()))?;
    load_weights(&m.file, positional, m.default, inputs)
}

/// Builds the assignment. Provenance balls are computed for `answers`.
fn build_volume(
    v: &VolumeArgs,
    q: &ConjunctiveQuery,
    d: &Database,
    answers: &[Tuple],
    seed: u64,
    inputs: &mut Inputs,
) -> Result<Volume> {
    if v.measure.is_some() && !matches!(v.volume, VolumeSpec::ElemWeighted | VolumeSpec::PosWeighted) {
        bail!("--measure only applies to --volume elem-w or pos-w");
    }
    Ok(match v.volume {
        VolumeSpec::Elem => Volume::Discrete(VolumeAssignment::elem()),
        VolumeSpec::Pos => Volume::Discrete(VolumeAssignment::pos()),
        VolumeSpec::ElemWeighted => Volume::Discrete(VolumeAssignment::elem_weighted(weights(v, false, inputs)?)),
        VolumeSpec::PosWeighted => Volume::Discrete(VolumeAssignment::pos_weighted(weights(v, true, inputs)?)),
        VolumeSpec::Provenance => {
            Volume::Discrete(VolumeAssignment::provenance(provenance_map(q, d, answers, v.max_extensions)?))
        }
        VolumeSpec::Ball(r) => Volume::Ball(EuclideanAssignment::new(r, v.samples, seed)?),
    })
}

impl Volume {
    fn greedy(&self, answers: &[Tuple], k: usize) -> Result<Value> {
        Ok(match self {
            Volume::Discrete(v) => result_json(&greedy_diversify(answers, k, v)?),
            Volume::Ball(v) => result_json(&greedy_diversify(answers, k, v)?),
        })
    }

    fn greedy_selection(&self, answers: &[Tuple], k: usize) -> Result<Vec<Tuple>> {
        Ok(match self {
            Volume::Discrete(v) => greedy_diversify(answers, k, v)?.selected,
            Volume::Ball(v) => greedy_diversify(answers, k, v)?.selected,
        })
    }

    fn exact(&self, answers: &[Tuple], k: usize, cap: u128) -> Result<Value> {
        Ok(match self {
            Volume::Discrete(v) => result_json(&brute_force_diversify(answers, k, v, cap)?),
            Volume::Ball(v) => result_json(&brute_force_diversify(answers, k, v, cap)?),
        })
    }

    fn diversity(&self, s: &[Tuple]) -> Result<Value> {
        Ok(match self {
            Volume::Discrete(v) => rational_json(&v.diversity(s)?),
            Volume::Ball(v) => {
                let e = v.diversity(s)?;
                json!({ "value": e.value, "stderr": e.stderr, "samples": e.samples })
            }
        })
    }
}

pub fn diversify(args: &DiversifyArgs, inputs: &mut Inputs, timer: &mut Timer) -> Result<Value> {
    let l = load(&args.input, inputs, timer)?;
    let (q, d, td) = (&l.query, &l.db, l.td.as_ref());
    let mut out = json!({
        "relations": l.stats,
        "query": query_json(q),
        "volume": args.volume.volume.as_string(),
        "k": args.k,
    });
    let engine = match args.mode {
        ModeArg::GreedyCombined => pick_engine(args.engine, args.volume.volume, q, td),
        _ => EngineArg::Naive,
    };
    let (result, materialized) = match (args.mode, engine) {
        (ModeArg::GreedyCombined, EngineArg::Tropical) => {
            let v = match build_volume(&args.volume, q, d, &[], args.seed, inputs)? {
                Volume::Discrete(v) => v,
                Volume::Ball(_) => bail!("the tropical engine needs --volume pos or pos-w"),
            };
            let r = timer.time("select", || greedy_combined(q, d, args.k, CombinedMode::Tropical(&v), td))?;
            (result_json(&r), None)
        }
        (ModeArg::GreedyCombined, EngineArg::Provenance) => {
            if args.volume.volume != VolumeSpec::Provenance {
                bail!("the provenance engine needs --volume provenance");
            }
            let r = timer.time("select", || greedy_combined(q, d, args.k, CombinedMode::Provenance, td))?;
            (result_json(&r), None)
        }
        (mode, _) => {
            let (answers, _) = timer.time("evaluate", || evaluate(q, d, td))?;
            let v = timer.time("volume", || build_volume(&args.volume, q, d, &answers.answers, args.seed, inputs))?;
            let mut r = timer.time("select", || match mode {
                ModeArg::Exact => v.exact(&answers.answers, args.k, args.max_subsets),
                _ => v.greedy(&answers.answers, args.k),
            })?;
            if mode == ModeArg::GreedyCombined {
                r["mode"] = json!(Mode::GreedyCombined.as_str());
            }
            (r, Some(answers.len()))
        }
    };
    out["engine"] = json!(match engine {
        EngineArg::Tropical => "tropical",
        EngineArg::Provenance => "provenance",
        _ => "naive",
    });
    out["answers_materialized"] = json!(materialized);
    out["result"] = result;
    Ok(out)
}

/// Resolves `auto` to the fastest engine the inputs allow.
fn pick_engine(e: EngineArg, v: VolumeSpec, q: &ConjunctiveQuery, td: Option<&TreeDecomposition>) -> EngineArg {
    if e != EngineArg::Auto {
        return e;
    }
    match v {
        VolumeSpec::Pos | VolumeSpec::PosWeighted if td.is_some() || gyo_join_tree(q).is_ok() => EngineArg::Tropical,
        VolumeSpec::Provenance if q.is_self_join_free() => {
            let connex = match td {
                Some(td) => free_connex_subtree(q, td).is_ok(),
                None => free_connex_join_tree(q).is_ok(),
            };
            if connex {
                EngineArg::Provenance
            } else {
                EngineArg::Naive
            }
        }
        _ => EngineArg::Naive,
    }
}

struct Scorer<'a> {
    volume: &'a Volume,
    distance: &'a DistanceFn,
    max_weitzman: usize,
}

impl Scorer<'_> {
    fn weitzman(&self, s: &[Tuple]) -> Result<Option<Rational>> {
        if s.len() > self.max_weitzman {
            return Ok(None);
        }
        Ok(Some(weitzman(s, self.distance, self.max_weitzman)?))
    }

    fn scores(&self, s: &[Tuple]) -> Result<Value> {
        Ok(json!({
            "volume": self.volume.diversity(s)?,
            "sum": rational_json(&delta_sum(s, self.distance)?),
            "min": rational_json(&delta_min(s, self.distance)?),
            "weitzman": self.weitzman(s)?.map(|w| rational_json(&w)),
        }))
    }
}

pub fn compare(args: &CompareArgs, inputs: &mut Inputs, timer: &mut Timer) -> Result<Value> {
    let l = load(&args.input, inputs, timer)?;
    let (q, d) = (&l.query, &l.db);
    let (answers, _) = timer.time("evaluate", || evaluate(q, d, l.td.as_ref()))?;
    let answers = answers.answers;
    let volume = build_volume(&args.volume, q, d, &answers, args.seed, inputs)?;
    let distance = match args.distance.as_str() {
        "hamming" => DistanceFn::Hamming,
        other => match other.strip_prefix("matrix:") {
            Some(path) => DistanceFn::Matrix(load_matrix(std::path::Path::new(path), inputs)?),
            None => bail!("unknown distance `{other}`; use hamming or matrix:<file>"),
        },
    };
    let scorer = Scorer {
        volume: &volume,
        distance: &distance,
        max_weitzman: args.max_weitzman,
    };
    let mut methods = Vec::new();
    timer.time("compare", || -> Result<()> {
        let by_volume = volume.greedy_selection(&answers, args.k)?;
        let by_sum = greedy_set_function(&answers, args.k, |s| delta_sum(s, &distance))?;
        let by_min = greedy_set_function(&answers, args.k, |s| delta_min(s, &distance))?;
        let mut sets = vec![("volume", by_volume), ("sum", by_sum), ("min", by_min)];
        if args.k.min(answers.len()) <= args.max_weitzman {
            let cap = args.max_weitzman;
            sets.push(("weitzman", greedy_set_function(&answers, args.k, |s| weitzman(s, &distance, cap))?));
        }
        for (name, s) in sets {
            methods.push(json!({
                "method": name,
                "selected": tuples_json(&s),
                "scores": scorer.scores(&s)?,
            }));
        }
        Ok(())
    })?;
    let mut out = json!({
        "relations": l.stats,
        "query": query_json(q),
        "volume": args.volume.volume.as_string(),
        "distance": args.distance,
        "k": args.k,
        "answer_count": answers.len(),
        "methods": methods,
    });
    if let Some(path) = &args.sets {
        let sets = load_sets(path, inputs)?;
        let scored = sets
            .iter()
            .map(|s| Ok(json!({ "set": tuples_json(s), "scores": scorer.scores(s)? })))
            .collect::<Result<Vec<_>>>()?;
        out["sets"] = Value::Array(scored);
    }
    Ok(out)
}

fn labels(ts: &[&Tuple]) -> Value {
    Value::Array(ts.iter().map(|t| json!(diverse_cq_core::relcore::join_values(&t.values))).collect())
}

fn lambda_json(maw: &MultiAttributeWeights) -> Value {
    Value::Array(
        maw.lambda()
            .iter()
            .map(|(mask, w)| json!({ "subset": labels(&maw.members(*mask)), "weight": rational_json(w) }))
            .collect(),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check_failed(check: &str) -> Result<()> {
    if check.ends_with("FAIL") {
        return Err(Internal(format!("conversion check failed: {check}")).into());
    }
    Ok(())
}

/// Compares `v_λ` with `δ_V` on every non-empty subset of the universe.
fn multiattr_check(maw: &MultiAttributeWeights, v: &VolumeAssignment, limit: usize) -> Result<String> {
    let n = maw.universe().len();
    if n > limit {
        return Ok(format!("v_λ = δ_V not checked: universe of {n} exceeds {limit}: SKIPPED"));
    }
    let mut ok = true;
    for mask in 1u32..(1u32 << n) {
        let s: Vec<Tuple> = maw.members(mask).into_iter().cloned().collect();
        ok &= maw.value_of_mask(mask) == v.diversity(&s)?;
    }
    Ok(format!("v_λ = δ_V on all {} non-empty subsets: {}", (1u64 << n) - 1, verdict(ok)))
}

fn node_json(n: &UltrametricNode) -> Value {
    let mut out = json!({ "edge_length": rational_json(&n.edge_length) });
    if let Some(l) = &n.label {
        out["label"] = json!(l);
    }
    if !n.children.is_empty() {
        out["children"] = Value::Array(n.children.iter().map(node_json).collect());
    }
    out
}

pub fn convert(args: &ConvertArgs, inputs: &mut Inputs, timer: &mut Timer) -> Result<Value> {
    if let Some(path) = &args.multiattr {
        let maw = load_multiattr(path, inputs)?;
        let v = volume_from_multiattribute(&maw, args.max_universe)?;
        let check = timer.time("check", || multiattr_check(&maw, &v, args.check_limit))?;
        let balls = maw
            .universe()
            .iter()
            .map(|x| {
                let subsets: Vec<Value> = v
                    .ball(x)?
                    .points()
                    .iter()
                    .map(|p| match p {
                        GroundPoint::AttributeSet(m) => labels(&maw.members(*m)),
                        other => json!(other.to_string()),
                    })
                    .collect();
                Ok(json!({ "element": tuple_json(x), "ball": subsets }))
            })
            .collect::<Result<Vec<_>>>()?;
        check_failed(&check)?;
        return Ok(json!({
            "conversion": "multiattr-to-volume",
            "universe": tuples_json(maw.universe()),
            "lambda": lambda_json(&maw),
            "balls": balls,
            "check": check,
        }));
    }
    if args.volume_dump {
        let (data, query) = match (&args.data, &args.query) {
            (Some(d), Some(q)) => (d.clone(), q.clone()),
            _ => bail!("--volume-dump needs --data and --query"),
        };
        let input = QueryInput {
            data,
            query,
            td: None,
            td_width: Rational::from_integer(1),
        };
        let l = load(&input, inputs, timer)?;
        let (answers, _) = evaluate(&l.query, &l.db, None)?;
        let v = match build_volume(&args.volume, &l.query, &l.db, &answers.answers, args.seed, inputs)? {
            Volume::Discrete(v) => v,
            Volume::Ball(_) => bail!("ball volumes have no finite multi-attribute form"),
        };
        let maw = multiattribute_from_volume(&v, &answers.answers, args.max_universe)?;
        let back = volume_from_multiattribute(&maw, args.max_universe)?;
        let check = timer.time("check", || -> Result<String> {
            let forward = multiattr_check(&maw, &v, args.check_limit)?;
            let round = multiattr_check(&maw, &back, args.check_limit)?;
            Ok(if forward.ends_with("PASS") && round.ends_with("PASS") {
                format!("{forward}; round trip: PASS")
            } else if forward.ends_with("SKIPPED") {
                forward
            } else {
                format!("{forward}; round trip: {}", verdict(round.ends_with("PASS")))
            })
        })?;
        check_failed(&check)?;
        return Ok(json!({
            "conversion": "volume-to-multiattr",
            "volume": args.volume.volume.as_string(),
            "universe": tuples_json(maw.universe()),
            "lambda": lambda_json(&maw),
            "check": check,
        }));
    }
    if let Some(path) = &args.ultrametric {
        let tree = load_ultrametric(path, inputs)?;
        let v = ultrametric_to_volume(&tree);
        let leaves: Vec<String> = tree.labels().cloned().collect();
        let check = timer.time("check", || -> Result<String> {
            if leaves.len() > args.check_limit {
                return Ok(format!(
                    "δ_V = δ_W + r not checked: {} leaves exceed {}: SKIPPED",
                    leaves.len(),
                    args.check_limit
                ));
            }
            let d = DistanceFn::Ultrametric(tree.clone());
            let mut ok = true;
            for mask in 1u32..(1u32 << leaves.len()) {
                if mask.count_ones() > 4 {
                    continue;
                }
                let s: Vec<&String> = (0..leaves.len()).filter(|i| mask & (1 << i) != 0).map(|i| &leaves[i]).collect();
                let tuples: Vec<Tuple> = s.iter().map(|l| element(l)).collect();
                let recursive = weitzman(&tuples, &d, tuples.len())?;
                ok &= v.diversity(&tuples)? == recursive + tree.radius();
                ok &= weitzman_ultrametric(&s, &tree)? == recursive;
            }
            Ok(format!("δ_V = δ_W + r on all subsets ≤ size 4: {}", verdict(ok)))
        })?;
        check_failed(&check)?;
        let edges = (1..=tree.edge_count() as u32)
            .map(|e| json!({ "edge": e, "length": rational_json(&tree.edge_length(e)) }))
            .collect::<Vec<_>>();
        let balls = leaves
            .iter()
            .map(|l| Ok(json!({ "leaf": l, "edges": tree.path_edges(l)? })))
            .collect::<Result<Vec<_>>>()?;
        return Ok(json!({
            "conversion": "ultrametric-to-volume",
            "radius": rational_json(&tree.radius()),
            "edges": edges,
            "balls": balls,
            "check": check,
        }));
    }
    if let Some(path) = &args.matrix {
        let m = load_matrix(path, inputs)?;
        let tree = ultrametric_tree_from_matrix(&m)?;
        let l = m.labels();
        let mut ok = true;
        for i in 0..m.len() {
            for j in 0..m.len() {
                ok &= tree.distance(&l[i], &l[j])? == m.entry(i, j);
            }
        }
        let check = format!("tree distances reproduce the matrix: {}", verdict(ok));
        check_failed(&check)?;
        return Ok(json!({
            "conversion": "matrix-to-ultrametric",
            "radius": rational_json(&tree.radius()),
            "tree": node_json(&tree.to_node()),
            "check": check,
        }));
    }
    bail!("choose one of --multiattr, --volume-dump, --ultrametric or --matrix")
}

/// A random directed graph without loops or repeated edges.
fn random_graph(rng: &mut ChaCha8Rng, nodes: usize, edges: usize) -> Result<Database> {
    if nodes < 2 || edges > nodes * (nodes - 1) {
        bail!("{edges} edges do not fit on {nodes} nodes");
    }
    let mut seen = BTreeSet::new();
    while seen.len() < edges {
        let (a, b) = (rng.random_range(0..nodes), rng.random_range(0..nodes));
        if a != b {
            seen.insert((a, b));
        }
    }
    let schema = Schema::new().with("E", 2)?;
    let mut b = Database::builder(schema);
    for (x, y) in seen {
        b.insert("E", vec![DataValue::num(x as i128), DataValue::num(y as i128)])?;
    }
    Ok(b.build())
}

fn path_query(length: usize) -> Result<ConjunctiveQuery> {
    if length == 0 {
        bail!("the path needs at least one atom");
    }
    let vars: Vec<String> = (1..=length + 1).map(|i| format!("x{i}")).collect();
    let atoms: Vec<String> = (0..length).map(|i| format!("E({},{})", vars[i], vars[i + 1])).collect();
    Ok(parse_cq(&format!("Q({}) <- {}.", vars.join(","), atoms.join(", ")))?)
}

pub fn bench(args: &BenchArgs, timer: &mut Timer) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let d = random_graph(&mut rng, args.nodes, args.edges)?;
    let q = path_query(args.length)?;
    let v = VolumeAssignment::pos();
    let combined = timer.time("greedy-combined", || greedy_combined(&q, &d, args.k, CombinedMode::Tropical(&v), None))?;
    let answers = timer.time("materialize", || {
        let jt = gyo_join_tree(&q)?;
        yannakakis_answers(&q, &jt, &d)
    })?;
    let materialized = timer.time("materialized-greedy", || greedy_diversify(&answers.answers, args.k, &v))?;
    let picked = sample(&mut rng, answers.len(), args.sample.min(answers.len()));
    let mut subset: Vec<Tuple> = picked.iter().map(|i| answers.answers[i].clone()).collect();
    subset.sort();
    let sampled = timer.time("sample-greedy", || greedy_diversify(&subset, args.k, &v))?;
    if combined.total != materialized.total {
        return Err(Internal(format!(
            "combined greedy total {} differs from materialized greedy total {}",
            format_rational(&combined.total),
            format_rational(&materialized.total)
        ))
        .into());
    }
    Ok(json!({
        "query": q.to_string(),
        "nodes": args.nodes,
        "edges": args.edges,
        "k": args.k,
        "combined": { "materialized": false, "result": result_json(&combined) },
        "materialized": { "answers": answers.len(), "result": result_json(&materialized) },
        "sample": { "size": subset.len(), "result": result_json(&sampled) },
        "answers_at_least_10000": answers.len() >= 10_000,
        "combined_at_least_sample": combined.total >= sampled.total,
    }))
}
