//! Readers for the flat-file inputs of the command line tool.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use diverse_cq_core::baselines::{element, DistanceMatrix, UltrametricNode, UltrametricTree};
use diverse_cq_core::query::{parse_cq_with_schema, validate_tree_decomposition, ConjunctiveQuery, TreeDecomposition};
use diverse_cq_core::rational::parse_decimal;
use diverse_cq_core::volume::{GroundPoint, Measure, MultiAttributeWeights};
use diverse_cq_core::{DataValue, Database, Interner, Rational, Schema, Tuple};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A file read during a run, with the SHA-256 of its bytes.
#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Reads files and remembers their digests.
#[derive(Default, Debug)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|_| anyhow!("{} is not valid UTF-8", path.display()))
    }
}

/// Row and column counts of one loaded relation.
#[derive(Clone, Debug, Serialize)]
pub struct RelationStats {
    pub relation: String,
    pub rows: usize,
    pub columns: usize,
}

/// An exact number written as a decimal (`0.25`) or a fraction (`1/4`).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_decimal(p.trim()).ok_or_else(|| anyhow!("`{text}` is not a number"))?;
        let q = parse_decimal(q.trim()).ok_or_else(|| anyhow!("`{text}` is not a number"))?;
        if q == Rational::from_integer(0) {
            bail!("`{text}` divides by zero");
        }
        return Ok(p / q);
    }
    parse_decimal(text).ok_or_else(|| anyhow!("`{text}` is not a number"))
}

/// Parses `schema.txt`: one `Relation/arity` per line, `#` starts a comment.
pub fn parse_schema(text: &str, path: &Path) -> Result<Schema> {
    let mut schema = Schema::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), i + 1);
        let (name, arity) = line
            .split_once('/')
            .ok_or_else(|| anyhow!("{}: expected `Relation/arity`, found `{line}`", at()))?;
        let arity: usize = arity
            .trim()
            .parse()
            .map_err(|_| anyhow!("{}: `{}` is not an arity", at(), arity.trim()))?;
        schema
            .declare(name.trim(), arity)
            .map_err(|e| anyhow!("{}: {e}", at()))?;
    }
    Ok(schema)
}

/// Loads `schema.txt` and one headerless `<Relation>.csv` per relation.
pub fn load_database(dir: &Path, inputs: &mut Inputs) -> Result<(Database, Vec<RelationStats>)> {
    let schema_path = dir.join("schema.txt");
    let schema = parse_schema(&inputs.read(&schema_path)?, &schema_path)?;
    let mut builder = Database::builder(schema.clone());
    let mut interner = Interner::new();
    let mut stats = Vec::new();
    for (name, arity) in schema.relations() {
        let path = dir.join(format!("{name}.csv"));
        if !path.is_file() {
            bail!("missing relation file {}", path.display());
        }
        let text = inputs.read(&path)?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        for record in reader.records() {
            let record = record.with_context(|| format!("cannot parse {}", path.display()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() == 1 && record[0].trim().is_empty() {
                continue;
            }
            if record.len() != arity {
                bail!(
                    "{}:{line}: relation {name} has arity {arity} but the line has {} values",
                    path.display(),
                    record.len()
                );
            }
            let mut values = Vec::with_capacity(arity);
            for field in record.iter() {
                let field = field.trim();
                if field.is_empty() {
                    bail!("{}:{line}: empty value", path.display());
                }
                values.push(interner.intern(field));
            }
            builder.insert(name, values)?;
        }
    }
    let db = builder.build();
    for r in db.relations() {
        stats.push(RelationStats {
            relation: r.name().to_string(),
            rows: r.len(),
            columns: r.arity(),
        });
    }
    Ok((db, stats))
}

pub fn load_query(path: &Path, schema: &Schema, inputs: &mut Inputs) -> Result<ConjunctiveQuery> {
    let text = inputs.read(path)?;
    parse_cq_with_schema(&text, schema).map_err(|e| anyhow!("{}: {e}", path.display()))
}

#[derive(Deserialize)]
struct TdFile {
    nodes: Vec<TdNode>,
}

#[derive(Deserialize)]
struct TdNode {
    id: serde_json::Value,
    bag: Vec<String>,
    #[serde(default)]
    parent: Option<serde_json::Value>,
}

/// Reads `{nodes:[{id, bag, parent}]}` and checks it decomposes `q`.
pub fn load_tree_decomposition(
    path: &Path,
    q: &ConjunctiveQuery,
    width: Rational,
    inputs: &mut Inputs,
) -> Result<TreeDecomposition> {
    let file: TdFile = serde_json::from_str(&inputs.read(path)?)
        .with_context(|| format!("{} is not a tree decomposition", path.display()))?;
    let key = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let index: BTreeMap<String, usize> = file.nodes.iter().enumerate().map(|(i, n)| (key(&n.id), i)).collect();
    if index.len() != file.nodes.len() {
        bail!("{}: node ids must be distinct", path.display());
    }
    let mut bags = Vec::new();
    let mut parents = Vec::new();
    for n in &file.nodes {
        let bag = n
            .bag
            .iter()
            .map(|v| {
                q.var_id(v)
                    .ok_or_else(|| anyhow!("{}: `{v}` is not a variable of the query", path.display()))
            })
            .collect::<Result<Vec<_>>>()?;
        bags.push(bag);
        let parent = match &n.parent {
            None | Some(serde_json::Value::Null) => None,
            Some(p) => Some(
                *index
                    .get(&key(p))
                    .ok_or_else(|| anyhow!("{}: unknown parent `{}`", path.display(), key(p)))?,
            ),
        };
        parents.push(parent);
    }
    let td = TreeDecomposition::new(bags, parents, width).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    validate_tree_decomposition(q, &td).map_err(|v| anyhow!("{}: {v}", path.display()))?;
    Ok(td)
}

/// Parses a weight point: `value` or, when positional, `value@position`.
fn weight_point(text: &str, positional: bool, interner: &mut Interner) -> Result<GroundPoint> {
    match (positional, text.rsplit_once('@')) {
        (true, Some((value, pos))) => {
            let pos: u32 = pos.trim().parse().map_err(|_| anyhow!("`{pos}` is not a position"))?;
            if pos == 0 {
                bail!("positions start at 1");
            }
            Ok(GroundPoint::PosValue(interner.intern(value.trim()), pos))
        }
        (true, None) => bail!("`{text}` needs a position, as in `{text}@1`"),
        (false, _) => Ok(GroundPoint::Value(interner.intern(text.trim()))),
    }
}

/// Reads `point,weight` lines into a weighted measure.
pub fn load_weights(path: &Path, positional: bool, default: Rational, inputs: &mut Inputs) -> Result<Measure> {
    let text = inputs.read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut interner = Interner::new();
    let mut weights = BTreeMap::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("cannot parse {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != 2 {
            bail!("{}:{line}: expected `point,weight`", path.display());
        }
        let at = |e: anyhow::Error| anyhow!("{}:{line}: {e}", path.display());
        let point = weight_point(&record[0], positional, &mut interner).map_err(at)?;
        let weight = parse_rational(&record[1]).map_err(at)?;
        if weights.insert(point, weight).is_some() {
            bail!("{}:{line}: point `{}` is weighted twice", path.display(), record[0].trim());
        }
    }
    Measure::weighted(weights, default).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Reads a distance matrix: a header row of element names, then one row of
/// distances per element, optionally led by that element's name.
pub fn load_matrix(path: &Path, inputs: &mut Inputs) -> Result<DistanceMatrix> {
    let text = inputs.read(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| anyhow!("{}: missing header row", path.display()))?
        .with_context(|| format!("cannot parse {}", path.display()))?;
    let mut labels: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    if labels.first().is_some_and(|l| l.is_empty()) {
        labels.remove(0);
    }
    let n = labels.len();
    let mut rows = Vec::new();
    for record in records {
        let record = record.with_context(|| format!("cannot parse {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        let values = match fields.len() {
            l if l == n => &fields[..],
            l if l == n + 1 => {
                let expected = labels.get(rows.len()).map(String::as_str).unwrap_or("");
                if fields[0] != expected {
                    bail!("{}:{line}: row label `{}` should be `{expected}`", path.display(), fields[0]);
                }
                &fields[1..]
            }
            1 if fields[0].is_empty() => continue,
            l => bail!("{}:{line}: expected {n} distances, found {l}", path.display()),
        };
        let row = values
            .iter()
            .map(|v| parse_rational(v).map_err(|e| anyhow!("{}:{line}: {e}", path.display())))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    DistanceMatrix::new(labels, rows).map_err(|e| anyhow!("{}: {e}", path.display()))
}

#[derive(Deserialize)]
struct TreeJson {
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    edge_length: Option<serde_json::Value>,
    #[serde(default)]
    children: Vec<TreeJson>,
}

fn tree_node(t: &TreeJson) -> Result<UltrametricNode> {
    let edge_length = match &t.edge_length {
        None => Rational::from_integer(0),
        Some(serde_json::Value::String(s)) => parse_rational(s)?,
        Some(serde_json::Value::Number(n)) => parse_rational(&n.to_string())?,
        Some(other) => bail!("`{other}` is not an edge length"),
    };
    Ok(UltrametricNode {
        label: t.label.clone(),
        edge_length,
        children: t.children.iter().map(tree_node).collect::<Result<_>>()?,
    })
}

/// Reads a tree `{label?, edge_length?, children?}` with labelled leaves.
pub fn load_ultrametric(path: &Path, inputs: &mut Inputs) -> Result<UltrametricTree> {
    let json: TreeJson = serde_json::from_str(&inputs.read(path)?)
        .with_context(|| format!("{} is not a tree", path.display()))?;
    let root = tree_node(&json).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    UltrametricTree::new(&root).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Reads `a;b,weight` lines: a `;`-separated subset and its weight. The
/// universe is every element named, in sorted order.
pub fn load_multiattr(path: &Path, inputs: &mut Inputs) -> Result<MultiAttributeWeights> {
    let text = inputs.read(path)?;
    let mut entries: Vec<(BTreeSet<String>, Rational, usize)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (set, weight) = line
            .rsplit_once(',')
            .ok_or_else(|| anyhow!("{}:{}: expected `a;b,weight`", path.display(), i + 1))?;
        let set: BTreeSet<String> = set.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if set.is_empty() {
            bail!("{}:{}: the subset is empty", path.display(), i + 1);
        }
        let weight = parse_rational(weight).map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))?;
        entries.push((set, weight, i + 1));
    }
    let universe: Vec<String> = entries
        .iter()
        .flat_map(|(s, _, _)| s.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if universe.len() > 32 {
        bail!("{}: {} elements exceed the 32-element limit", path.display(), universe.len());
    }
    let mut lambda: BTreeMap<u32, Rational> = BTreeMap::new();
    for (set, weight, line) in entries {
        let mask = set
            .iter()
            .map(|e| 1u32 << universe.iter().position(|u| u == e).expect("collected above"))
            .fold(0, |a, b| a | b);
        if lambda.insert(mask, weight).is_some() {
            bail!("{}:{line}: subset listed twice", path.display());
        }
    }
    MultiAttributeWeights::new(universe.iter().map(|e| element(e)).collect(), lambda)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Parses `Name(v1,v2,...)`.
pub fn parse_tuple(text: &str, interner: &mut Interner) -> Result<Tuple> {
    let text = text.trim();
    let (name, rest) = text
        .split_once('(')
        .ok_or_else(|| anyhow!("`{text}` is not a tuple like `R(a,b)`"))?;
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| anyhow!("`{text}` is missing its closing parenthesis"))?;
    let name = name.trim();
    if name.is_empty() {
        bail!("`{text}` has no relation name");
    }
    let values: Vec<DataValue> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|v| interner.intern(v.trim())).collect()
    };
    Ok(Tuple::new(name, values))
}

/// Reads one set of tuples per line, tuples separated by `;`.
pub fn load_sets(path: &Path, inputs: &mut Inputs) -> Result<Vec<Vec<Tuple>>> {
    let text = inputs.read(path)?;
    let mut interner = Interner::new();
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let set = line
            .split(';')
            .map(|t| parse_tuple(t, &mut interner).map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1)))
            .collect::<Result<Vec<_>>>()?;
        sets.push(set);
    }
    Ok(sets)
}
