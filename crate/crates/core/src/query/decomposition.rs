//! Tree decompositions, GYO join trees and free-connex subtrees.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{ConjunctiveQuery, VarId};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// A rooted tree whose nodes carry variable bags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<VarId>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    declared_width: Rational,
}

impl TreeDecomposition {
    /// Builds a decomposition from bags and parent pointers. Exactly one node
    /// must have no parent and every node must reach it.
    pub fn new(bags: Vec<Vec<VarId>>, parent: Vec<Option<usize>>, declared_width: Rational) -> Result<Self> {
        let n = bags.len();
        if n == 0 || parent.len() != n {
            return Err(Error::Invalid(
                "a tree decomposition needs at least one node and one parent entry per node".into(),
            ));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Invalid(alloc::format!(
                "a tree decomposition needs exactly one root, found {}",
                roots.len()
            )));
        }
        let mut children = alloc::vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::Invalid(alloc::format!("node {i} has unknown parent {p}")));
                }
                children[p].push(i);
            }
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(Error::Invalid(alloc::format!("node {start} lies on a parent cycle")));
                }
            }
        }
        let bags = bags
            .into_iter()
            .map(|b| b.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        Ok(TreeDecomposition {
            bags,
            parent,
            children,
            root: roots[0],
            declared_width,
        })
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn bag(&self, node: usize) -> &[VarId] {
        &self.bags[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn declared_width(&self) -> Rational {
        self.declared_width
    }

    /// Variables shared with the parent; empty at the root.
    pub fn key(&self, node: usize) -> Vec<VarId> {
        match self.parent[node] {
            None => Vec::new(),
            Some(p) => intersect(&self.bags[node], &self.bags[p]),
        }
    }

    /// Union of the bags in the subtree below `node`.
    pub fn subtree_vars(&self, node: usize) -> Vec<VarId> {
        let mut out = BTreeSet::new();
        let mut stack = alloc::vec![node];
        while let Some(u) = stack.pop() {
            out.extend(self.bags[u].iter().copied());
            stack.extend(self.children[u].iter().copied());
        }
        out.into_iter().collect()
    }

    /// Nodes with every parent before its children.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = alloc::vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev().copied());
        }
        out
    }

    /// Nodes with every child before its parent.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = self.preorder();
        out.reverse();
        out
    }

    /// Body atoms whose variables all lie in the bag of `node`.
    pub fn covering_atoms(&self, q: &ConjunctiveQuery, node: usize) -> Vec<usize> {
        (0..q.body().len())
            .filter(|&a| is_subset(&q.atom_vars(a), &self.bags[node]))
            .collect()
    }

    /// Assigns every atom to the first node (by id) whose bag covers it.
    pub fn atom_assignment(&self, q: &ConjunctiveQuery) -> Result<Vec<usize>> {
        (0..q.body().len())
            .map(|a| {
                let vars = q.atom_vars(a);
                (0..self.len())
                    .find(|&u| is_subset(&vars, &self.bags[u]))
                    .ok_or_else(|| Error::InvalidDecomposition(uncovered(q, a)))
            })
            .collect()
    }

    /// Whether every bag equals the variable set of some atom.
    pub fn is_join_tree_of(&self, q: &ConjunctiveQuery) -> bool {
        self.bags
            .iter()
            .all(|b| (0..q.body().len()).any(|a| q.atom_vars(a) == *b))
    }
}

/// The first property a tree decomposition fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownVariable { node: usize, variable: String },
    Disconnected { variable: String, nodes: Vec<usize> },
    UncoveredAtom { atom: usize, text: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVariable { node, variable } => {
                write!(f, "node {node} mentions `{variable}`, which is not a query variable")
            }
            Violation::Disconnected { variable, nodes } => write!(
                f,
                "the nodes containing `{variable}` ({nodes:?}) do not form a connected subtree"
            ),
            Violation::UncoveredAtom { atom, text } => {
                write!(f, "atom #{atom} `{text}` is not contained in any bag")
            }
        }
    }
}

fn uncovered(q: &ConjunctiveQuery, atom: usize) -> Violation {
    let a = &q.body()[atom];
    let names: Vec<&str> = (0..a.vars.len()).map(|p| q.var_name(q.written_var(atom, p))).collect();
    Violation::UncoveredAtom {
        atom,
        text: alloc::format!("{}({})", a.relation, names.join(",")),
    }
}

/// Checks connectedness, then coverage.
pub fn validate_tree_decomposition(
    q: &ConjunctiveQuery,
    td: &TreeDecomposition,
) -> core::result::Result<(), Violation> {
    for (node, bag) in td.bags.iter().enumerate() {
        for v in bag {
            if v.index() >= q.var_count() || !q.is_original(*v) {
                return Err(Violation::UnknownVariable {
                    node,
                    variable: alloc::format!("#{}", v.0),
                });
            }
        }
    }
    for v in q.variables() {
        let nodes: Vec<usize> = (0..td.len()).filter(|&u| td.bags[u].contains(&v)).collect();
        let tops = nodes
            .iter()
            .filter(|&&u| td.parent[u].is_none_or(|p| !td.bags[p].contains(&v)))
            .count();
        if tops > 1 {
            return Err(Violation::Disconnected {
                variable: q.var_name(v).to_string(),
                nodes,
            });
        }
    }
    for a in 0..q.body().len() {
        let vars = q.atom_vars(a);
        if !td.bags.iter().any(|b| is_subset(&vars, b)) {
            return Err(uncovered(q, a));
        }
    }
    Ok(())
}

/// Builds a join tree by GYO ear removal. Node `i` holds the variables of
/// atom `i`; the last atom standing becomes the root.
pub fn gyo_join_tree(q: &ConjunctiveQuery) -> Result<TreeDecomposition> {
    let n = q.body().len();
    if n == 0 {
        return TreeDecomposition::new(alloc::vec![Vec::new()], alloc::vec![None], Rational::from_integer(1));
    }
    let edges: Vec<Vec<VarId>> = (0..n).map(|a| q.atom_vars(a)).collect();
    let parent = gyo_over(&edges).ok_or(Error::NotAcyclic)?;
    TreeDecomposition::new(edges, parent, Rational::from_integer(1))
}

fn gyo_over(edges: &[Vec<VarId>]) -> Option<Vec<Option<usize>>> {
    let n = edges.len();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut parent = alloc::vec![None; n];
    while alive.len() > 1 {
        let mut removed = None;
        for (pos, &e) in alive.iter().enumerate() {
            let others: BTreeSet<VarId> = alive
                .iter()
                .filter(|&&f| f != e)
                .flat_map(|&f| edges[f].iter().copied())
                .collect();
            let shared: Vec<VarId> = edges[e].iter().copied().filter(|v| others.contains(v)).collect();
            let witness = alive
                .iter()
                .copied()
                .find(|&f| f != e && is_subset(&shared, &edges[f]));
            if let Some(f) = witness {
                parent[e] = Some(f);
                removed = Some(pos);
                break;
            }
        }
        {
            let pos = removed?;
            alive.remove(pos);
        }
    }
    Some(parent)
}

/// A decomposition together with a connected set of nodes containing the
/// root whose bags cover exactly the head variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeConnex {
    pub td: TreeDecomposition,
    /// Node ids of the connex subtree, ascending.
    pub connex: Vec<usize>,
}

impl FreeConnex {
    pub fn is_connex(&self, node: usize) -> bool {
        self.connex.binary_search(&node).is_ok()
    }
}

/// Finds a connex subtree, re-rooting the decomposition and inserting
/// projection bags where a node carries non-head variables.
pub fn free_connex_subtree(q: &ConjunctiveQuery, td: &TreeDecomposition) -> Result<FreeConnex> {
    validate_tree_decomposition(q, td).map_err(Error::InvalidDecomposition)?;
    let head = q.head_set();
    let n = td.len();
    let in_head = |vars: &[VarId]| vars.iter().all(|v| head.contains(v));

    let mut component = alloc::vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut order = alloc::vec![td.root];
    order.extend((0..n).filter(|&u| u != td.root));
    for start in order {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = Vec::new();
        let mut stack = alloc::vec![start];
        component[start] = id;
        while let Some(u) = stack.pop() {
            members.push(u);
            let mut neighbours: Vec<usize> = td.children[u].clone();
            neighbours.extend(td.parent[u]);
            for w in neighbours {
                if component[w] == usize::MAX && in_head(&intersect(&td.bags[u], &td.bags[w])) {
                    component[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    let chosen = components.into_iter().find(|members| {
        let covered: BTreeSet<VarId> = members
            .iter()
            .flat_map(|&u| td.bags[u].iter().copied().filter(|v| head.contains(v)))
            .collect();
        covered == head
    });
    let Some(members) = chosen else {
        return Err(Error::NotFreeConnex);
    };

    let anchor = closest_to_root(td, &members);
    let rerooted = reroot(&td.parent, anchor);
    let mut parent = rerooted.clone();
    let mut bags = td.bags.clone();
    let mut image: Vec<usize> = (0..n).collect();
    for &u in &members {
        if !in_head(&bags[u]) {
            image[u] = bags.len();
            bags.push(bags[u].iter().copied().filter(|v| head.contains(v)).collect());
            parent.push(None);
        }
    }
    let mut connex = Vec::with_capacity(members.len());
    for &u in &members {
        parent[image[u]] = rerooted[u].map(|w| image[w]);
        if image[u] != u {
            parent[u] = Some(image[u]);
        }
        connex.push(image[u]);
    }
    connex.sort_unstable();
    let td = TreeDecomposition::new(bags, parent, td.declared_width)?;
    debug_assert!(validate_tree_decomposition(q, &td).is_ok());
    debug_assert!(connex.contains(&td.root));
    Ok(FreeConnex { td, connex })
}

/// A free-connex decomposition built from the query alone: the GYO join
/// tree when it qualifies, otherwise a join tree of the body extended by one
/// bag holding exactly the head variables.
pub fn free_connex_join_tree(q: &ConjunctiveQuery) -> Result<FreeConnex> {
    let td = gyo_join_tree(q)?;
    match free_connex_subtree(q, &td) {
        Err(Error::NotFreeConnex) => {}
        other => return other,
    }
    let head: Vec<VarId> = q.head_set().into_iter().collect();
    let mut bags: Vec<Vec<VarId>> = (0..q.body().len()).map(|a| q.atom_vars(a)).collect();
    bags.push(head);
    let parent = gyo_over(&bags).ok_or(Error::NotFreeConnex)?;
    let extended = TreeDecomposition::new(bags, parent, td.declared_width)?;
    free_connex_subtree(q, &extended)
}

fn closest_to_root(td: &TreeDecomposition, members: &[usize]) -> usize {
    let depth = |mut u: usize| {
        let mut d = 0;
        while let Some(p) = td.parent[u] {
            u = p;
            d += 1;
        }
        d
    };
    *members.iter().min_by_key(|&&u| (depth(u), u)).expect("component is non-empty")
}

fn reroot(parent: &[Option<usize>], new_root: usize) -> Vec<Option<usize>> {
    let mut out = parent.to_vec();
    let mut prev = None;
    let mut cur = Some(new_root);
    while let Some(u) = cur {
        let next = parent[u];
        out[u] = prev;
        prev = Some(u);
        cur = next;
    }
    out
}

pub(crate) fn intersect(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

pub(crate) fn is_subset(a: &[VarId], b: &[VarId]) -> bool {
    a.iter().all(|v| b.contains(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_cq;
    use alloc::vec;

    fn v(q: &ConjunctiveQuery, names: &[&str]) -> Vec<VarId> {
        names.iter().map(|n| q.var_id(n).unwrap()).collect()
    }

    #[test]
    fn path_join_tree() {
        let q = parse_cq("Q(x1,x2,x3) <- E(x1,x2), E(x2,x3).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        assert_eq!(td.len(), 2);
        assert_eq!(td.root(), 1);
        assert_eq!(td.key(0), v(&q, &["x2"]));
        assert!(td.key(1).is_empty());
        assert!(validate_tree_decomposition(&q, &td).is_ok());
        assert!(td.is_join_tree_of(&q));
    }

    #[test]
    fn triangle_is_cyclic() {
        let q = parse_cq("Q(x,y,z) <- E(x,y), E(y,z), E(z,x).").unwrap();
        assert_eq!(gyo_join_tree(&q), Err(Error::NotAcyclic));
    }

    #[test]
    fn single_atom_tree() {
        let q = parse_cq("Q(x) <- R(x,y).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        assert_eq!(td.len(), 1);
        assert!(td.key(td.root()).is_empty());
        assert_eq!(td.subtree_vars(0), v(&q, &["x", "y"]));
    }

    #[test]
    fn disconnected_atoms_are_joined_by_empty_keys() {
        let q = parse_cq("Q(x,y) <- R(x), S(y).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        assert!(validate_tree_decomposition(&q, &td).is_ok());
        assert!(td.key(0).is_empty());
    }

    #[test]
    fn violations_are_reported() {
        let q = parse_cq("Q(a,b,c) <- R(a,b), S(b,c).").unwrap();
        let td = TreeDecomposition::new(vec![v(&q, &["a", "b"])], vec![None], Rational::from_integer(1)).unwrap();
        match validate_tree_decomposition(&q, &td) {
            Err(Violation::UncoveredAtom { atom: 1, text }) => assert_eq!(text, "S(b,c)"),
            other => panic!("unexpected {other:?}"),
        }
        let td = TreeDecomposition::new(
            vec![v(&q, &["a", "b"]), v(&q, &["b", "c"]), v(&q, &["a"])],
            vec![None, Some(0), Some(1)],
            Rational::from_integer(1),
        )
        .unwrap();
        match validate_tree_decomposition(&q, &td) {
            Err(Violation::Disconnected { variable, nodes }) => {
                assert_eq!(variable, "a");
                assert_eq!(nodes, vec![0, 2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let one = Rational::from_integer(1);
        assert!(TreeDecomposition::new(vec![vec![], vec![]], vec![None, None], one).is_err());
        assert!(TreeDecomposition::new(vec![vec![], vec![]], vec![Some(1), Some(0)], one).is_err());
        assert!(TreeDecomposition::new(vec![], vec![], one).is_err());
    }

    #[test]
    fn full_query_is_connex_everywhere() {
        let q = parse_cq("Q(x,y,z) <- R(x,y), S(y,z).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        let fc = free_connex_subtree(&q, &td).unwrap();
        assert_eq!(fc.td, td);
        assert_eq!(fc.connex, vec![0, 1]);
    }

    #[test]
    fn projection_bag_becomes_root() {
        let q = parse_cq("Q(x) <- R(x,y).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        let fc = free_connex_subtree(&q, &td).unwrap();
        assert_eq!(fc.td.len(), 2);
        assert_eq!(fc.td.root(), 1);
        assert_eq!(fc.td.bag(1), v(&q, &["x"]).as_slice());
        assert_eq!(fc.connex, vec![1]);
        assert_eq!(fc.td.parent(0), Some(1));
    }

    #[test]
    fn split_head_is_not_connex() {
        let q = parse_cq("Q(x,z) <- R(x,y), S(y,z).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        assert_eq!(free_connex_subtree(&q, &td), Err(Error::NotFreeConnex));
    }

    #[test]
    fn connex_component_away_from_root_is_rerooted() {
        let q = parse_cq("Q(x,y) <- T(y,w), R(x,y), S(w,u).").unwrap();
        let td = TreeDecomposition::new(
            vec![v(&q, &["y", "w"]), v(&q, &["x", "y"]), v(&q, &["w", "u"])],
            vec![Some(2), Some(0), None],
            Rational::from_integer(1),
        )
        .unwrap();
        let fc = free_connex_subtree(&q, &td).unwrap();
        assert!(validate_tree_decomposition(&q, &fc.td).is_ok());
        assert!(fc.is_connex(fc.td.root()));
        let covered: BTreeSet<VarId> = fc.connex.iter().flat_map(|&u| fc.td.bag(u).iter().copied()).collect();
        assert_eq!(covered, q.head_set());
    }

    #[test]
    fn boolean_query_gets_empty_connex_root() {
        let q = parse_cq("Q() <- R(x,y), S(y).").unwrap();
        let td = gyo_join_tree(&q).unwrap();
        let fc = free_connex_subtree(&q, &td).unwrap();
        assert!(fc.td.bag(fc.td.root()).is_empty());
        assert_eq!(fc.connex.len(), 1);
    }
}
