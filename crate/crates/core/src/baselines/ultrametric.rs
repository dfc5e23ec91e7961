use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::distance::{element, DistanceMatrix};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::volume::{GroundPoint, Measure, Region, VolumeAssignment};

/// A nested description of an ultrametric tree. Leaves carry labels; the
/// root's edge length is ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UltrametricNode {
    pub label: Option<String>,
    pub edge_length: Rational,
    pub children: Vec<UltrametricNode>,
}

impl UltrametricNode {
    pub fn leaf(label: &str, edge_length: Rational) -> Self {
        UltrametricNode {
            label: Some(label.to_string()),
            edge_length,
            children: Vec::new(),
        }
    }

    pub fn inner(edge_length: Rational, children: Vec<UltrametricNode>) -> Self {
        UltrametricNode {
            label: None,
            edge_length,
            children,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    parent: Option<usize>,
    edge: Rational,
    depth: Rational,
    children: Vec<usize>,
    label: Option<String>,
}

/// A rooted tree with non-negative edge lengths whose leaves all lie at the
/// same distance `radius` from the root. The distance of two leaves is the
/// length of the path from either leaf up to their lowest common ancestor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UltrametricTree {
    nodes: Vec<Node>,
    leaves: BTreeMap<String, usize>,
    radius: Rational,
}

impl UltrametricTree {
    pub fn new(root: &UltrametricNode) -> Result<Self> {
        let zero = Rational::from_integer(0);
        let mut nodes: Vec<Node> = Vec::new();
        let mut stack: Vec<(&UltrametricNode, Option<usize>)> = alloc::vec![(root, None)];
        while let Some((n, parent)) = stack.pop() {
            let edge = if parent.is_some() { n.edge_length } else { zero };
            if edge < zero {
                return Err(Error::Invalid("edge lengths must be non-negative".into()));
            }
            let id = nodes.len();
            let depth = parent.map_or(zero, |p| nodes[p].depth + edge);
            nodes.push(Node {
                parent,
                edge,
                depth,
                children: Vec::new(),
                label: n.label.clone(),
            });
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            for c in n.children.iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        let mut leaves = BTreeMap::new();
        let mut radius = None;
        for (id, n) in nodes.iter().enumerate() {
            if !n.children.is_empty() {
                continue;
            }
            let label = n
                .label
                .clone()
                .ok_or_else(|| Error::Invalid("every leaf needs a label".into()))?;
            if leaves.insert(label.clone(), id).is_some() {
                return Err(Error::Invalid(alloc::format!("leaf label `{label}` is used twice")));
            }
            match radius {
                None => radius = Some(n.depth),
                Some(r) if r != n.depth => {
                    return Err(Error::Invalid(alloc::format!(
                        "leaf `{label}` is at depth {}, expected {}",
                        format_rational(&n.depth),
                        format_rational(&r)
                    )))
                }
                _ => {}
            }
        }
        Ok(UltrametricTree {
            nodes,
            leaves,
            radius: radius.unwrap_or(zero),
        })
    }

    /// Common root-to-leaf path length.
    pub fn radius(&self) -> Rational {
        self.radius
    }

    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.leaves.keys()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    fn leaf(&self, label: &str) -> Result<usize> {
        self.leaves
            .get(label)
            .copied()
            .ok_or_else(|| Error::OutsideUniverse(label.to_string()))
    }

    fn ancestors(&self, mut u: usize) -> Vec<usize> {
        let mut out = alloc::vec![u];
        while let Some(p) = self.nodes[u].parent {
            out.push(p);
            u = p;
        }
        out
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<Rational> {
        let up: BTreeSet<usize> = self.ancestors(self.leaf(a)?).into_iter().collect();
        let lca = self
            .ancestors(self.leaf(b)?)
            .into_iter()
            .find(|u| up.contains(u))
            .expect("leaves share the root");
        Ok(self.radius - self.nodes[lca].depth)
    }

    /// Edges on the root-to-leaf path, by child node id.
    pub fn path_edges(&self, label: &str) -> Result<Vec<u32>> {
        let leaf = self.leaf(label)?;
        Ok(self
            .ancestors(leaf)
            .into_iter()
            .filter(|&u| self.nodes[u].parent.is_some())
            .map(|u| u as u32)
            .collect())
    }

    pub fn edge_length(&self, edge: u32) -> Rational {
        self.nodes[edge as usize].edge
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// The nested description of this tree.
    pub fn to_node(&self) -> UltrametricNode {
        self.node(0)
    }

    fn node(&self, u: usize) -> UltrametricNode {
        let n = &self.nodes[u];
        UltrametricNode {
            label: n.label.clone(),
            edge_length: n.edge,
            children: n.children.iter().map(|&c| self.node(c)).collect(),
        }
    }

    /// Leaf distances as a matrix over the labels in sorted order.
    pub fn to_matrix(&self) -> DistanceMatrix {
        let labels: Vec<String> = self.leaves.keys().cloned().collect();
        let entries = labels
            .iter()
            .map(|a| labels.iter().map(|b| self.distance(a, b).expect("known leaf")).collect())
            .collect();
        DistanceMatrix::new(labels, entries).expect("tree distances form a metric")
    }
}

/// Total length of the smallest root subtree spanning `labels`, minus the radius.
pub fn weitzman_ultrametric<S: AsRef<str>>(labels: &[S], tree: &UltrametricTree) -> Result<Rational> {
    if labels.is_empty() {
        return Ok(Rational::from_integer(0));
    }
    let mut edges = BTreeSet::new();
    for l in labels {
        edges.extend(tree.path_edges(l.as_ref())?);
    }
    let total = edges
        .into_iter()
        .fold(Rational::from_integer(0), |acc, e| acc + tree.edge_length(e));
    Ok(total - tree.radius)
}

/// The assignment mapping each leaf to the edges of its root path, measured
/// by edge length. Leaves are represented by [`element`] tuples.
pub fn ultrametric_to_volume(tree: &UltrametricTree) -> VolumeAssignment {
    let balls = tree
        .labels()
        .map(|l| {
            let region = Region::from_points(
                tree.path_edges(l)
                    .expect("known leaf")
                    .into_iter()
                    .map(GroundPoint::Edge),
            );
            (element(l), region)
        })
        .collect();
    let weights = (1..tree.nodes.len() as u32)
        .map(|e| (GroundPoint::Edge(e), tree.edge_length(e)))
        .collect();
    let measure = Measure::weighted(weights, Rational::from_integer(0)).expect("edge lengths are non-negative");
    VolumeAssignment::table("ultrametric", balls, measure)
}

/// Rebuilds the tree of an ultrametric matrix, or reports the first triple
/// `(a, b, c)` in label order with `d(a,c) > max(d(a,b), d(b,c))`.
pub fn ultrametric_tree_from_matrix(m: &DistanceMatrix) -> Result<UltrametricTree> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Invalid("the matrix has no elements".into()));
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let near = m.entry(i, j).max(m.entry(j, k));
                if m.entry(i, k) > near {
                    let l = m.labels();
                    return Err(Error::NotUltrametric {
                        a: l[i].clone(),
                        b: l[j].clone(),
                        c: l[k].clone(),
                        far: format_rational(&m.entry(i, k)),
                        near: format_rational(&near),
                    });
                }
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let top = level(m, &all);
    Ok(UltrametricTree::new(&build(m, &all, top, top)).expect("construction yields equal depths"))
}

fn level(m: &DistanceMatrix, members: &[usize]) -> Rational {
    members
        .iter()
        .flat_map(|&i| members.iter().map(move |&j| m.entry(i, j)))
        .max()
        .unwrap_or_else(|| Rational::from_integer(0))
}

fn build(m: &DistanceMatrix, members: &[usize], own: Rational, parent: Rational) -> UltrametricNode {
    if members.len() == 1 {
        return UltrametricNode::leaf(&m.labels()[members[0]], parent);
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &x in members {
        match classes
            .iter_mut()
            .find(|c| own > Rational::from_integer(0) && m.entry(c[0], x) < own)
        {
            Some(c) => c.push(x),
            None => classes.push(alloc::vec![x]),
        }
    }
    let children = classes
        .iter()
        .map(|c| build(m, c, level(m, c), own))
        .collect();
    UltrametricNode::inner(parent - own, children)
}
