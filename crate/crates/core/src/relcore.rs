//! Values, tuples, schemas and immutable indexed databases.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_decimal, Rational};

/// A data value: an exact decimal number or an interned text symbol.
///
/// Numbers sort before text; numbers compare numerically and text compares
/// by its bytes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataValue {
    Num(Rational),
    Text(Arc<str>),
}

impl DataValue {
    pub fn as_number(&self) -> Option<&Rational> {
        match self {
            DataValue::Num(n) => Some(n),
            DataValue::Text(_) => None,
        }
    }

    pub fn num(n: i128) -> Self {
        DataValue::Num(Rational::from_integer(n))
    }
}

impl fmt::Display for DataValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataValue::Num(n) => f.write_str(&format_rational(n)),
            DataValue::Text(s) => f.write_str(s),
        }
    }
}

/// Shares one allocation per distinct text payload.
#[derive(Default, Debug, Clone)]
pub struct Interner {
    symbols: BTreeSet<Arc<str>>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `text`, parsing it as an exact decimal first.
    pub fn intern(&mut self, text: &str) -> DataValue {
        match parse_decimal(text) {
            Some(n) => DataValue::Num(n),
            None => DataValue::Text(self.symbol(text)),
        }
    }

    /// Interns `text` as a symbol without trying to parse it.
    pub fn symbol(&mut self, text: &str) -> Arc<str> {
        if let Some(existing) = self.symbols.get(text) {
            return existing.clone();
        }
        let sym: Arc<str> = Arc::from(text);
        self.symbols.insert(sym.clone());
        sym
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A fact `R(v1, ..., vn)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    pub relation: Arc<str>,
    pub values: Vec<DataValue>,
}

impl Tuple {
    pub fn new(relation: impl Into<Arc<str>>, values: Vec<DataValue>) -> Self {
        Tuple {
            relation: relation.into(),
            values,
        }
    }

    /// Builds a tuple from textual values, parsing numbers where possible.
    pub fn parse(relation: &str, values: &[&str]) -> Self {
        let mut interner = Interner::new();
        Tuple::new(relation, values.iter().map(|v| interner.intern(v)).collect())
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Relation names and their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    arities: BTreeMap<Arc<str>, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, relation: &str, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::Invalid(alloc::format!(
                "relation `{relation}` must have positive arity"
            )));
        }
        if self.arities.contains_key(relation) {
            return Err(Error::DuplicateRelation(relation.to_string()));
        }
        self.arities.insert(Arc::from(relation), arity);
        Ok(())
    }

    pub fn with(mut self, relation: &str, arity: usize) -> Result<Self> {
        self.declare(relation, arity)?;
        Ok(self)
    }

    pub fn arity(&self, relation: &str) -> Option<usize> {
        self.arities.get(relation).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Arc<str>, usize)> {
        self.arities.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }
}

/// One relation: sorted distinct rows plus one index per column.
#[derive(Clone, Debug)]
pub struct Relation {
    name: Arc<str>,
    arity: usize,
    rows: Vec<Vec<DataValue>>,
    columns: Vec<BTreeMap<DataValue, Vec<u32>>>,
}

impl Relation {
    fn build(name: Arc<str>, arity: usize, rows: BTreeSet<Vec<DataValue>>) -> Self {
        let rows: Vec<Vec<DataValue>> = rows.into_iter().collect();
        let mut columns = alloc::vec![BTreeMap::<DataValue, Vec<u32>>::new(); arity];
        for (i, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                columns[c].entry(v.clone()).or_default().push(i as u32);
            }
        }
        Relation {
            name,
            arity,
            rows,
            columns,
        }
    }

    pub fn name(&self) -> &Arc<str> {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in ascending lexicographic order.
    pub fn rows(&self) -> &[Vec<DataValue>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[DataValue] {
        &self.rows[index]
    }

    pub fn tuple(&self, index: usize) -> Tuple {
        Tuple {
            relation: self.name.clone(),
            values: self.rows[index].clone(),
        }
    }

    /// Indices of the rows whose `column` holds `value`, ascending.
    pub fn lookup(&self, column: usize, value: &DataValue) -> &[u32] {
        self.columns
            .get(column)
            .and_then(|c| c.get(value))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, values: &[DataValue]) -> bool {
        self.rows.binary_search_by(|r| r.as_slice().cmp(values)).is_ok()
    }

    /// Distinct values of one column.
    pub fn column_values(&self, column: usize) -> impl Iterator<Item = &DataValue> {
        self.columns[column].keys()
    }
}

/// Accumulates tuples before freezing them into a [`Database`].
#[derive(Debug, Clone)]
pub struct DatabaseBuilder {
    schema: Schema,
    rows: BTreeMap<Arc<str>, BTreeSet<Vec<DataValue>>>,
}

impl DatabaseBuilder {
    pub fn new(schema: Schema) -> Self {
        let rows = schema
            .relations()
            .map(|(name, _)| (name.clone(), BTreeSet::new()))
            .collect();
        DatabaseBuilder { schema, rows }
    }

    /// Adds a row; duplicates are absorbed.
    pub fn insert(&mut self, relation: &str, values: Vec<DataValue>) -> Result<bool> {
        let expected = self
            .schema
            .arity(relation)
            .ok_or_else(|| Error::UnknownRelation(relation.to_string()))?;
        if values.len() != expected {
            return Err(Error::ArityMismatch {
                relation: relation.to_string(),
                expected,
                found: values.len(),
            });
        }
        Ok(self
            .rows
            .get_mut(relation)
            .expect("declared relation has a row set")
            .insert(values))
    }

    pub fn insert_tuple(&mut self, tuple: Tuple) -> Result<bool> {
        let Tuple { relation, values } = tuple;
        self.insert(&relation, values)
    }

    pub fn build(self) -> Database {
        let relations = self
            .rows
            .into_iter()
            .map(|(name, rows)| {
                let arity = self.schema.arity(&name).unwrap_or(0);
                (name.clone(), Relation::build(name, arity, rows))
            })
            .collect();
        Database {
            schema: self.schema,
            relations,
        }
    }
}

/// An immutable set of tuples over a schema.
#[derive(Debug, Clone)]
pub struct Database {
    schema: Schema,
    relations: BTreeMap<Arc<str>, Relation>,
}

impl Database {
    pub fn builder(schema: Schema) -> DatabaseBuilder {
        DatabaseBuilder::new(schema)
    }

    /// Builds a database from tuples, declaring each relation with the
    /// arity of its first tuple.
    pub fn from_tuples<I: IntoIterator<Item = Tuple>>(tuples: I) -> Result<Self> {
        let tuples: Vec<Tuple> = tuples.into_iter().collect();
        let mut schema = Schema::new();
        for t in &tuples {
            if schema.arity(&t.relation).is_none() {
                schema.declare(&t.relation, t.arity())?;
            }
        }
        let mut builder = DatabaseBuilder::new(schema);
        for t in tuples {
            builder.insert_tuple(t)?;
        }
        Ok(builder.build())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn contains(&self, tuple: &Tuple) -> bool {
        self.relation(&tuple.relation)
            .is_some_and(|r| r.contains(&tuple.values))
    }

    /// All tuples in relation-name then value order.
    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        self.relations
            .values()
            .flat_map(|r| (0..r.len()).map(move |i| r.tuple(i)))
    }

    pub fn len(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Renders a value list as `a,b,c`.
pub fn join_values(values: &[DataValue]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v.to_string());
    }
    out
}
