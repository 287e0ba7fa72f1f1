use std::collections::BTreeMap;

use crate::{Error, OffsetSet, Result};

/// Extension of a relation.
///
/// A tuple `v` of length `arity - 1` stands for the orbit
/// `{(a, a + v[0], …, a + v[arity - 2]) : a ∈ ℤ}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Body {
    Full,
    Empty,
    Tuples(Vec<Vec<i64>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelationDef {
    name: String,
    arity: usize,
    body: Body,
}

impl RelationDef {
    pub fn full(name: impl Into<String>, arity: usize) -> Result<Self> {
        Self::with_body(name.into(), arity, Body::Full)
    }

    pub fn empty(name: impl Into<String>, arity: usize) -> Result<Self> {
        Self::with_body(name.into(), arity, Body::Empty)
    }

    fn with_body(name: String, arity: usize, body: Body) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ZeroArity(name));
        }
        Ok(RelationDef { name, arity, body })
    }

    /// Builds a relation from offset tuples, sorting and deduplicating them.
    ///
    /// An empty tuple list yields `Empty`; arity 1 collapses to `Full` or
    /// `Empty` since a translation-invariant unary relation is ℤ or ∅.
    pub fn from_tuples(
        name: impl Into<String>,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<i64>>,
    ) -> Result<Self> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::ZeroArity(name));
        }
        let mut tuples: Vec<Vec<i64>> = tuples.into_iter().collect();
        for (index, t) in tuples.iter().enumerate() {
            if t.len() != arity - 1 {
                return Err(Error::TupleLength {
                    relation: name,
                    arity,
                    index,
                    found: t.len(),
                    expected: arity - 1,
                });
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        let body = match (arity, tuples.is_empty()) {
            (_, true) => Body::Empty,
            (1, false) => Body::Full,
            _ => Body::Tuples(tuples),
        };
        Ok(RelationDef { name, arity, body })
    }

    /// Binary relation `R_S` from an offset list.
    pub fn binary(name: impl Into<String>, offsets: impl IntoIterator<Item = i64>) -> Self {
        Self::from_tuples(name, 2, offsets.into_iter().map(|k| vec![k]))
            .expect("binary tuples have length 1")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn tuples(&self) -> Option<&[Vec<i64>]> {
        match &self.body {
            Body::Tuples(t) => Some(t),
            _ => None,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Largest absolute offset over all tuples; 0 for FULL/EMPTY bodies.
    pub fn max_abs_offset(&self) -> i64 {
        self.tuples()
            .map(|ts| {
                ts.iter()
                    .flat_map(|t| t.iter().map(|k| k.abs()))
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0)
    }

    /// Binary projection onto coordinates `i`, `j` (0-based): `{t_j - t_i}`.
    pub fn project(&self, i: usize, j: usize) -> Result<OffsetSet> {
        let tuples = self
            .tuples()
            .ok_or_else(|| Error::NotTuples(self.name.clone()))?;
        if i == j || i >= self.arity || j >= self.arity {
            return Err(Error::Coordinates {
                relation: self.name.clone(),
                arity: self.arity,
                i,
                j,
            });
        }
        tuples
            .iter()
            .map(|v| coord(v, j).checked_sub(coord(v, i)).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(OffsetSet::from_offsets)
    }

    /// Membership of a concrete integer tuple.
    pub fn contains(&self, t: &[i64]) -> Result<bool> {
        if t.len() != self.arity {
            return Err(Error::ArityMismatch {
                relation: self.name.clone(),
                expected: self.arity,
                found: t.len(),
            });
        }
        match &self.body {
            Body::Full => Ok(true),
            Body::Empty => Ok(false),
            Body::Tuples(ts) => {
                let mut rel = Vec::with_capacity(t.len() - 1);
                for &x in &t[1..] {
                    rel.push(x.checked_sub(t[0]).ok_or(Error::Overflow)?);
                }
                Ok(ts.binary_search(&rel).is_ok())
            }
        }
    }

    /// Membership of an offset tuple already normalized to a zero first coordinate.
    pub(crate) fn contains_offsets(&self, offsets: &[i64]) -> bool {
        match &self.body {
            Body::Full => true,
            Body::Empty => false,
            Body::Tuples(ts) => ts.binary_search_by(|t| t.as_slice().cmp(offsets)).is_ok(),
        }
    }
}

/// Coordinate `i` of the integer tuple encoded by offset tuple `v` at base 0.
#[inline]
pub(crate) fn coord(v: &[i64], i: usize) -> i64 {
    if i == 0 {
        0
    } else {
        v[i - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    name: String,
    relations: Vec<RelationDef>,
    index: BTreeMap<String, usize>,
}

impl Template {
    pub fn new(name: impl Into<String>, relations: Vec<RelationDef>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, r) in relations.iter().enumerate() {
            if index.insert(r.name.clone(), i).is_some() {
                return Err(Error::DuplicateRelation(r.name.clone()));
            }
        }
        Ok(Template {
            name: name.into(),
            relations,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[RelationDef] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDef> {
        self.index.get(name).map(|&i| &self.relations[i])
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has_tuples(&self) -> bool {
        self.relations.iter().any(|r| r.tuples().is_some())
    }
}
