use std::fmt;

use crate::{Error, Result};

/// A translation-invariant binary relation `{(x, x + k) : k ∈ S}` on ℤ.
///
/// `Full` stands for all of ℤ² and is never enumerated. A finite set is kept
/// strictly increasing; the empty finite set is the unsatisfiable relation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OffsetSet(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Full,
    Finite(Vec<i64>),
}

impl OffsetSet {
    pub fn full() -> Self {
        OffsetSet(Repr::Full)
    }

    pub fn empty() -> Self {
        OffsetSet(Repr::Finite(Vec::new()))
    }

    pub fn singleton(k: i64) -> Self {
        OffsetSet(Repr::Finite(vec![k]))
    }

    pub fn from_offsets<I: IntoIterator<Item = i64>>(offsets: I) -> Self {
        let mut v: Vec<i64> = offsets.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        OffsetSet(Repr::Finite(v))
    }

    /// Offsets in `[lo, hi]`.
    pub fn range(lo: i64, hi: i64) -> Self {
        OffsetSet(Repr::Finite((lo..=hi).collect()))
    }

    pub fn is_full(&self) -> bool {
        matches!(self.0, Repr::Full)
    }

    /// True for the empty finite set only.
    pub fn is_empty(&self) -> bool {
        matches!(&self.0, Repr::Finite(v) if v.is_empty())
    }

    /// The sorted offsets, or `None` for `Full`.
    pub fn as_slice(&self) -> Option<&[i64]> {
        match &self.0 {
            Repr::Full => None,
            Repr::Finite(v) => Some(v),
        }
    }

    pub fn len(&self) -> Option<usize> {
        self.as_slice().map(<[i64]>::len)
    }

    pub fn contains(&self, k: i64) -> bool {
        match &self.0 {
            Repr::Full => true,
            Repr::Finite(v) => v.binary_search(&k).is_ok(),
        }
    }

    pub fn min(&self) -> Option<i64> {
        self.as_slice().and_then(|v| v.first().copied())
    }

    pub fn max(&self) -> Option<i64> {
        self.as_slice().and_then(|v| v.last().copied())
    }

    /// Largest absolute offset of a finite set (0 when empty).
    pub fn max_abs(&self) -> Option<i64> {
        self.as_slice()
            .map(|v| v.iter().map(|k| k.abs()).max().unwrap_or(0))
    }

    /// True when this finite set lies inside `[-bound, bound]`. `Full` never does.
    pub fn within(&self, bound: i64) -> bool {
        match self.as_slice() {
            None => false,
            Some([]) => true,
            Some(v) => v[0] >= -bound && v[v.len() - 1] <= bound,
        }
    }

    pub fn is_subset(&self, other: &OffsetSet) -> bool {
        match (&self.0, &other.0) {
            (_, Repr::Full) => true,
            (Repr::Full, Repr::Finite(_)) => false,
            (Repr::Finite(a), Repr::Finite(_)) => a.iter().all(|&k| other.contains(k)),
        }
    }

    /// Relational composition: the sumset `{s + t}`.
    ///
    /// The empty set annihilates everything, `Full` included; otherwise `Full`
    /// absorbs.
    pub fn sum(&self, other: &OffsetSet) -> Result<OffsetSet> {
        if self.is_empty() || other.is_empty() {
            return Ok(OffsetSet::empty());
        }
        let (a, b) = match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => (a, b),
            _ => return Ok(OffsetSet::full()),
        };
        let mut out = Vec::with_capacity(a.len() * b.len());
        for &s in a {
            for &t in b {
                out.push(s.checked_add(t).ok_or(Error::Overflow)?);
            }
        }
        Ok(OffsetSet::from_offsets(out))
    }

    pub fn intersect(&self, other: &OffsetSet) -> OffsetSet {
        match (&self.0, &other.0) {
            (Repr::Full, _) => other.clone(),
            (_, Repr::Full) => self.clone(),
            (Repr::Finite(a), Repr::Finite(b)) => {
                let mut out = Vec::with_capacity(a.len().min(b.len()));
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            out.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                OffsetSet(Repr::Finite(out))
            }
        }
    }

    /// `self ∩ (a ⊕ b)` without materializing the sumset when `self` is finite.
    pub fn intersect_sum(&self, a: &OffsetSet, b: &OffsetSet) -> Result<OffsetSet> {
        let target = match &self.0 {
            Repr::Full => return a.sum(b),
            Repr::Finite(t) => t,
        };
        if a.is_empty() || b.is_empty() {
            return Ok(OffsetSet::empty());
        }
        let (av, bv) = match (a.as_slice(), b.as_slice()) {
            (Some(av), Some(bv)) => (av, bv),
            _ => return Ok(self.clone()),
        };
        let mut out = Vec::with_capacity(target.len());
        for &s in target {
            let mut hit = false;
            for &x in av {
                let need = s.checked_sub(x).ok_or(Error::Overflow)?;
                if bv.binary_search(&need).is_ok() {
                    hit = true;
                    break;
                }
            }
            if hit {
                out.push(s);
            }
        }
        Ok(OffsetSet(Repr::Finite(out)))
    }

    /// The converse relation `{-s}`.
    pub fn invert(&self) -> OffsetSet {
        match &self.0 {
            Repr::Full => OffsetSet::full(),
            Repr::Finite(v) => OffsetSet(Repr::Finite(v.iter().rev().map(|k| -k).collect())),
        }
    }

    /// `{base + s}`; `Full` stays `Full`.
    pub fn translate(&self, base: i64) -> Result<OffsetSet> {
        match &self.0 {
            Repr::Full => Ok(OffsetSet::full()),
            Repr::Finite(v) => v
                .iter()
                .map(|&k| k.checked_add(base).ok_or(Error::Overflow))
                .collect::<Result<Vec<_>>>()
                .map(|v| OffsetSet(Repr::Finite(v))),
        }
    }
}

impl fmt::Display for OffsetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Full => f.write_str("FULL"),
            Repr::Finite(v) => {
                f.write_str("{")?;
                for (i, k) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for OffsetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<i64> for OffsetSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        OffsetSet::from_offsets(iter)
    }
}
