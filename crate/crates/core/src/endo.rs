//! Eventually periodic endomorphism candidates.
//!
//! A [`PeriodicMapSpec`] describes `e(x) = values[x mod p] + drift·p·⌊x/p⌋`.
//! With drift ±1 the map satisfies `e(x + p) = e(x) ± p`, so preservation of
//! translation-invariant relations only needs base points in one period. With
//! drift 0 the map has finite range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::DistanceProfile;
use crate::relation::coord;
use crate::{Body, Error, RelationDef, Result, Template};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Drift {
    Down,
    Constant,
    Up,
}

impl Drift {
    pub fn sign(self) -> i64 {
        match self {
            Drift::Down => -1,
            Drift::Constant => 0,
            Drift::Up => 1,
        }
    }

    pub const ALL: [Drift; 3] = [Drift::Up, Drift::Down, Drift::Constant];
}

impl fmt::Display for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Drift::Down => "-1",
            Drift::Constant => "0",
            Drift::Up => "+1",
        })
    }
}

impl FromStr for Drift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+1" | "1" => Ok(Drift::Up),
            "-1" => Ok(Drift::Down),
            "0" | "+0" | "-0" => Ok(Drift::Constant),
            other => Err(Error::InvalidMap(format!("drift must be +1, -1 or 0, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicMapSpec {
    values: Vec<i64>,
    drift: Drift,
}

impl PeriodicMapSpec {
    pub fn new(values: Vec<i64>, drift: Drift) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMap("period must be at least 1".into()));
        }
        Ok(PeriodicMapSpec { values, drift })
    }

    pub fn identity() -> Self {
        PeriodicMapSpec {
            values: vec![0],
            drift: Drift::Up,
        }
    }

    pub fn constant(c: i64) -> Self {
        PeriodicMapSpec {
            values: vec![c],
            drift: Drift::Constant,
        }
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn drift(&self) -> Drift {
        self.drift
    }

    pub fn eval(&self, x: i64) -> i64 {
        let p = self.values.len() as i64;
        let base = self.values[x.rem_euclid(p) as usize];
        base + self.drift.sign() * p * x.div_euclid(p)
    }

    /// `x ↦ x + c` or `x ↦ -x + c`.
    pub fn is_isometry(&self) -> bool {
        let first = self.values[0];
        match self.drift {
            Drift::Constant => false,
            Drift::Up => self.values.iter().enumerate().all(|(i, &v)| v - i as i64 == first),
            Drift::Down => self.values.iter().enumerate().all(|(i, &v)| v + i as i64 == first),
        }
    }

    /// `self ∘ inner` (apply `inner` first), defined when both drift +1.
    pub fn compose(&self, inner: &PeriodicMapSpec) -> Result<PeriodicMapSpec> {
        if self.drift != Drift::Up || inner.drift != Drift::Up {
            return Err(Error::InvalidMap("composition is implemented for drift +1 maps".into()));
        }
        let p = lcm(self.period(), inner.period());
        let values = (0..p as i64).map(|x| self.eval(inner.eval(x))).collect();
        PeriodicMapSpec::new(values, Drift::Up)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

impl fmt::Display for PeriodicMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values: Vec<String> = self.values.iter().map(i64::to_string).collect();
        write!(
            f,
            "p={}; values={}; drift={}",
            self.values.len(),
            values.join(","),
            self.drift
        )
    }
}

impl FromStr for PeriodicMapSpec {
    type Err = Error;

    /// Parses `p=<int>; values=<v0,...>; drift=<+1|-1|0>`.
    fn from_str(s: &str) -> Result<Self> {
        let (mut period, mut values, mut drift) = (None, None, None);
        for field in s.split(';').map(str::trim).filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::InvalidMap(format!("expected key=value, got `{field}`")))?;
            match key.trim() {
                "p" => {
                    period = Some(value.trim().parse::<usize>().map_err(|e| {
                        Error::InvalidMap(format!("bad period `{}`: {e}", value.trim()))
                    })?)
                }
                "values" => {
                    values = Some(
                        value
                            .split(',')
                            .map(|v| {
                                v.trim().parse::<i64>().map_err(|e| {
                                    Error::InvalidMap(format!("bad value `{}`: {e}", v.trim()))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "drift" => drift = Some(value.parse::<Drift>()?),
                other => return Err(Error::InvalidMap(format!("unknown field `{other}`"))),
            }
        }
        let period = period.ok_or_else(|| Error::InvalidMap("missing `p`".into()))?;
        let values = values.ok_or_else(|| Error::InvalidMap("missing `values`".into()))?;
        let drift = drift.ok_or_else(|| Error::InvalidMap("missing `drift`".into()))?;
        if values.len() != period {
            return Err(Error::InvalidMap(format!(
                "p={period} but {} values given",
                values.len()
            )));
        }
        PeriodicMapSpec::new(values, drift)
    }
}

/// A relation tuple whose image leaves the relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoViolation {
    pub relation: String,
    pub tuple: Vec<i64>,
    pub image: Vec<i64>,
}

/// Checks every relation tuple with base point in `[0, p)`.
pub fn is_endomorphism(spec: &PeriodicMapSpec, t: &Template) -> Option<EndoViolation> {
    t.relations()
        .iter()
        .find_map(|rel| violation_in(spec, rel))
}

fn violation_in(spec: &PeriodicMapSpec, rel: &RelationDef) -> Option<EndoViolation> {
    let Body::Tuples(tuples) = rel.body() else {
        return None;
    };
    let k = rel.arity();
    let mut image = vec![0i64; k];
    let mut offsets = vec![0i64; k - 1];
    for v in tuples {
        for a in 0..spec.period() as i64 {
            for (c, slot) in image.iter_mut().enumerate() {
                *slot = spec.eval(a + coord(v, c));
            }
            for c in 1..k {
                offsets[c - 1] = image[c] - image[0];
            }
            if !rel.contains_offsets(&offsets) {
                return Some(EndoViolation {
                    relation: rel.name().to_string(),
                    tuple: (0..k).map(|c| a + coord(v, c)).collect(),
                    image,
                });
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndoKind {
    FiniteRange,
    /// `e(v + D) = e(v) + direction·D`.
    Periodic { direction: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoClassification {
    pub kind: EndoKind,
    /// Stable numbers up to `p·D`.
    pub stable_numbers: Vec<u64>,
    pub minimal_stable: Option<u64>,
}

/// Whether `q` is stable: `e(v + q) - e(v)` is the same value in `{q, -q}` for all `v`.
pub fn is_stable(spec: &PeriodicMapSpec, q: u64) -> bool {
    if spec.drift == Drift::Constant || q == 0 {
        return false;
    }
    let q = q as i64;
    let first = spec.eval(q) - spec.eval(0);
    if first != q && first != -q {
        return false;
    }
    (0..spec.period() as i64).all(|v| spec.eval(v + q) - spec.eval(v) == first)
}

pub fn classify_endomorphism(spec: &PeriodicMapSpec, t: &Template) -> Result<EndoClassification> {
    if let Some(v) = is_endomorphism(spec, t) {
        return Err(Error::Precondition(format!(
            "not an endomorphism: {:?} in `{}` maps to {:?}",
            v.tuple, v.relation, v.image
        )));
    }
    let profile = DistanceProfile::of(t).unwrap_or_else(|_| DistanceProfile::new([]));
    let big_d = profile.max_distance();
    let direction = spec.drift.sign();
    if direction == 0 {
        return Ok(EndoClassification {
            kind: EndoKind::FiniteRange,
            stable_numbers: Vec::new(),
            minimal_stable: None,
        });
    }
    let cap = spec.period() as u64 * big_d.max(1);
    let stable_numbers: Vec<u64> = (1..=cap).filter(|&q| is_stable(spec, q)).collect();
    let minimal_stable = stable_numbers.first().copied();
    let Some(min) = minimal_stable else {
        return Err(Error::Invariant(format!(
            "periodic map has no stable number up to {cap}"
        )));
    };
    if let Some(bad) = stable_numbers.iter().find(|&&q| q % min != 0) {
        return Err(Error::Invariant(format!(
            "stable number {bad} is not a multiple of the minimal stable number {min}"
        )));
    }
    // divisibility of D is a property of connected templates only
    if profile.is_connected() && big_d % min != 0 {
        return Err(Error::Invariant(format!(
            "minimal stable number {min} does not divide D = {big_d}"
        )));
    }
    Ok(EndoClassification {
        kind: EndoKind::Periodic { direction },
        stable_numbers,
        minimal_stable,
    })
}

/// Keeps tuples whose components are all multiples of `q`, divided by `q`.
pub fn reduce_template(t: &Template, q: u64) -> Result<Template> {
    if q == 0 {
        return Err(Error::Precondition("reduction factor must be positive".into()));
    }
    let q = q as i64;
    let relations = t
        .relations()
        .iter()
        .map(|rel| match rel.body() {
            Body::Full | Body::Empty => Ok(rel.clone()),
            Body::Tuples(ts) => RelationDef::from_tuples(
                rel.name(),
                rel.arity(),
                ts.iter()
                    .filter(|v| v.iter().all(|x| x % q == 0))
                    .map(|v| v.iter().map(|x| x / q).collect()),
            ),
        })
        .collect::<Result<Vec<_>>>()?;
    Template::new(t.name(), relations)
}

#[derive(Clone, Debug)]
pub struct EndoSearch {
    pub max_period: usize,
    pub value_window: i64,
    /// Drift values to try, in order, for each period.
    pub drifts: Vec<Drift>,
}

impl EndoSearch {
    /// `max_period = D`, `value_window = 2D`, all drifts.
    pub fn defaults_for(t: &Template) -> Self {
        let big_d = DistanceProfile::of(t)
            .map(|p| p.max_distance())
            .unwrap_or(0)
            .max(1);
        EndoSearch {
            max_period: big_d as usize,
            value_window: 2 * big_d as i64,
            drifts: Drift::ALL.to_vec(),
        }
    }
}

/// First non-isometric endomorphism in the order (period, drift, values),
/// values compared lexicographically. `None` only refutes within the bounds.
pub fn search_periodic_endomorphism(t: &Template, opts: &EndoSearch) -> Option<PeriodicMapSpec> {
    let w = opts.value_window;
    for p in 1..=opts.max_period {
        for &drift in &opts.drifts {
            let mut values = vec![-w; p];
            loop {
                let spec = PeriodicMapSpec {
                    values: values.clone(),
                    drift,
                };
                if !spec.is_isometry() && is_endomorphism(&spec, t).is_none() {
                    return Some(spec);
                }
                if !advance(&mut values, w) {
                    break;
                }
            }
        }
    }
    None
}

/// Lexicographic successor in `[-w, w]^p`; false after the last tuple.
fn advance(values: &mut [i64], w: i64) -> bool {
    for slot in values.iter_mut().rev() {
        if *slot < w {
            *slot += 1;
            return true;
        }
        *slot = -w;
    }
    false
}
