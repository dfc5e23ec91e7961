use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::relcore::Schema;

/// Index of a variable in [`ConjunctiveQuery::var_name`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A body atom after normalization: no variable repeats inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub relation: Arc<str>,
    pub vars: Vec<VarId>,
}

/// Records that `fresh` replaced a repeated occurrence of `original` at
/// `position` (0-based) of body atom `atom`. Rows of that atom only match
/// when both columns hold the same value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityRewrite {
    pub atom: usize,
    pub position: usize,
    pub fresh: VarId,
    pub original: VarId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    name: Arc<str>,
    var_names: Vec<Arc<str>>,
    head: Vec<VarId>,
    body: Vec<Atom>,
    rewrites: Vec<EqualityRewrite>,
    original: Vec<bool>,
    is_full: bool,
    is_self_join_free: bool,
}

impl ConjunctiveQuery {
    /// Builds a query from variable names. Repeated variables inside an atom
    /// are replaced by fresh variables plus an [`EqualityRewrite`].
    pub fn new<S: AsRef<str>>(name: &str, head: &[S], body: &[(S, Vec<S>)]) -> Result<Self> {
        let mut ids: BTreeMap<String, VarId> = BTreeMap::new();
        let mut var_names: Vec<Arc<str>> = Vec::new();
        let mut original: Vec<bool> = Vec::new();
        let mut intern = |n: &str, ids: &mut BTreeMap<String, VarId>| -> VarId {
            if let Some(&id) = ids.get(n) {
                return id;
            }
            let id = VarId(var_names.len() as u32);
            var_names.push(Arc::from(n));
            original.push(true);
            ids.insert(n.to_string(), id);
            id
        };
        let head_ids: Vec<VarId> = head.iter().map(|h| intern(h.as_ref(), &mut ids)).collect();
        let mut pending = Vec::new();
        for (relation, vars) in body {
            let vars: Vec<VarId> = vars.iter().map(|v| intern(v.as_ref(), &mut ids)).collect();
            pending.push((Arc::<str>::from(relation.as_ref()), vars));
        }
        let body_vars: BTreeSet<VarId> = pending.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        for h in &head_ids {
            if !body_vars.contains(h) {
                return Err(Error::UnboundHeadVariable(var_names[h.index()].to_string()));
            }
        }
        let head_set: BTreeSet<VarId> = head_ids.iter().copied().collect();
        let is_full = body_vars.is_subset(&head_set);
        let mut relations = BTreeSet::new();
        let is_self_join_free = pending.iter().all(|(r, _)| relations.insert(r.clone()));

        let mut body_atoms = Vec::with_capacity(pending.len());
        let mut rewrites = Vec::new();
        for (atom_index, (relation, vars)) in pending.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            let mut normalized = Vec::with_capacity(vars.len());
            for (position, v) in vars.into_iter().enumerate() {
                if seen.insert(v) {
                    normalized.push(v);
                    continue;
                }
                let fresh = VarId(var_names.len() as u32);
                var_names.push(Arc::from(format!("{}#{}", var_names[v.index()], fresh.0)));
                original.push(false);
                rewrites.push(EqualityRewrite {
                    atom: atom_index,
                    position,
                    fresh,
                    original: v,
                });
                normalized.push(fresh);
            }
            body_atoms.push(Atom {
                relation,
                vars: normalized,
            });
        }
        Ok(ConjunctiveQuery {
            name: Arc::from(name),
            var_names,
            head: head_ids,
            body: body_atoms,
            rewrites,
            original,
            is_full,
            is_self_join_free,
        })
    }

    pub fn name(&self) -> &Arc<str> {
        &self.name
    }

    pub fn head(&self) -> &[VarId] {
        &self.head
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn rewrites(&self) -> &[EqualityRewrite] {
        &self.rewrites
    }

    pub fn is_full(&self) -> bool {
        self.is_full
    }

    pub fn is_self_join_free(&self) -> bool {
        self.is_self_join_free
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.index()]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_names
            .iter()
            .zip(&self.original)
            .position(|(n, &o)| o && &**n == name)
            .map(|i| VarId(i as u32))
    }

    /// Number of variables including fresh ones.
    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    /// Whether `v` was written by the user rather than introduced by
    /// normalization.
    pub fn is_original(&self, v: VarId) -> bool {
        self.original[v.index()]
    }

    /// Variables as written, in first-occurrence order.
    pub fn variables(&self) -> Vec<VarId> {
        (0..self.var_names.len() as u32)
            .map(VarId)
            .filter(|v| self.is_original(*v))
            .collect()
    }

    pub fn head_set(&self) -> BTreeSet<VarId> {
        self.head.iter().copied().collect()
    }

    /// The variable written at `position` of atom `atom`, undoing the rewrite.
    pub fn written_var(&self, atom: usize, position: usize) -> VarId {
        let v = self.body[atom].vars[position];
        self.resolve(v)
    }

    /// Maps a fresh variable back to the variable it stands for.
    pub fn resolve(&self, v: VarId) -> VarId {
        if self.is_original(v) {
            return v;
        }
        self.rewrites
            .iter()
            .find(|r| r.fresh == v)
            .map(|r| r.original)
            .expect("fresh variable has a rewrite record")
    }

    /// Distinct written variables of an atom, sorted.
    pub fn atom_vars(&self, atom: usize) -> Vec<VarId> {
        self.body[atom]
            .vars
            .iter()
            .copied()
            .filter(|v| self.is_original(*v))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Checks relation names and arities against a schema.
    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        for atom in &self.body {
            let arity = schema
                .arity(&atom.relation)
                .ok_or_else(|| Error::UnknownRelation(atom.relation.to_string()))?;
            if arity != atom.vars.len() {
                return Err(Error::ArityMismatch {
                    relation: atom.relation.to_string(),
                    expected: arity,
                    found: atom.vars.len(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, vars: &mut dyn Iterator<Item = VarId>| {
            for (i, v) in vars.enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(self.var_name(v))?;
            }
            Ok(())
        };
        write!(f, "{}(", self.name)?;
        list(f, &mut self.head.iter().copied())?;
        f.write_str(") <- ")?;
        for (i, atom) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}(", atom.relation)?;
            list(f, &mut (0..atom.vars.len()).map(|p| self.written_var(i, p)))?;
            f.write_str(")")?;
        }
        f.write_str(".")
    }
}
