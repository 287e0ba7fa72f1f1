//! The d-modular median and its preservation checks.
//!
//! `m_d(x, y, z)` is the median when all three arguments are congruent mod
//! `d`, the first of the congruent pair when exactly two are, and `x`
//! otherwise. It is a majority operation that commutes with translations,
//! so preservation of a translation-invariant relation only has to be checked
//! with the first argument tuple based at 0.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::DistanceProfile;
use crate::relation::coord;
use crate::{Body, RelationDef, Result, Template};

pub fn modular_median(d: u64, x: i64, y: i64, z: i64) -> i64 {
    debug_assert!(d >= 1);
    let m = d as i128;
    let (rx, ry, rz) = (
        (x as i128).rem_euclid(m),
        (y as i128).rem_euclid(m),
        (z as i128).rem_euclid(m),
    );
    match (rx == ry, rx == rz, ry == rz) {
        (true, true, _) => median(x, y, z),
        (true, false, _) | (false, true, _) => x,
        (false, false, true) => y,
        (false, false, false) => x,
    }
}

fn median(x: i64, y: i64, z: i64) -> i64 {
    x.max(y).min(x.min(y).max(z))
}

/// Three integer tuples of a relation whose componentwise image is outside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub relation: String,
    pub inputs: [Vec<i64>; 3],
    pub image: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preservation {
    /// Exhaustively verified over base shifts in `[-window, window]`.
    /// `trivial` marks FULL/EMPTY bodies, which need no enumeration.
    Preserved { window: i64, trivial: bool },
    Violated(Counterexample),
}

impl Preservation {
    pub fn holds(&self) -> bool {
        matches!(self, Preservation::Preserved { .. })
    }
}

/// `B = 6(Δ + d) + 1` where `Δ` is the relation's largest absolute offset.
pub fn default_window(d: u64, rel: &RelationDef) -> i64 {
    6 * (rel.max_abs_offset() + d as i64) + 1
}

pub fn preserves_relation(d: u64, rel: &RelationDef) -> Preservation {
    preserves_relation_within(d, rel, default_window(d, rel))
}

/// Checks every triple of tuples with base points `0`, `a2`, `a3`,
/// `a2, a3 ∈ [-window, window]`. The first violation in the order
/// `(v1, v2, v3, a2, a3)` is returned, independent of thread scheduling.
pub fn preserves_relation_within(d: u64, rel: &RelationDef, window: i64) -> Preservation {
    assert!(d >= 1, "modulus must be positive");
    let tuples = match rel.body() {
        Body::Full | Body::Empty => {
            return Preservation::Preserved {
                window,
                trivial: true,
            }
        }
        Body::Tuples(t) => t,
    };
    let k = rel.arity();
    let n = tuples.len();
    let found = (0..n).into_par_iter().find_map_first(|i1| {
        let mut image = vec![0i64; k];
        let mut rel_image = vec![0i64; k - 1];
        let v1 = &tuples[i1];
        for v2 in tuples {
            for v3 in tuples {
                for a2 in -window..=window {
                    for a3 in -window..=window {
                        for (c, slot) in image.iter_mut().enumerate() {
                            *slot = modular_median(
                                d,
                                coord(v1, c),
                                a2 + coord(v2, c),
                                a3 + coord(v3, c),
                            );
                        }
                        for c in 1..k {
                            rel_image[c - 1] = image[c] - image[0];
                        }
                        if !rel.contains_offsets(&rel_image) {
                            return Some(Counterexample {
                                relation: rel.name().to_string(),
                                inputs: [
                                    (0..k).map(|c| coord(v1, c)).collect(),
                                    (0..k).map(|c| a2 + coord(v2, c)).collect(),
                                    (0..k).map(|c| a3 + coord(v3, c)).collect(),
                                ],
                                image: image.clone(),
                            });
                        }
                    }
                }
            }
        }
        None
    });
    match found {
        Some(cx) => Preservation::Violated(cx),
        None => Preservation::Preserved {
            window,
            trivial: false,
        },
    }
}

/// Random search for a violation with independent base points for all three
/// tuples. Shift magnitudes are drawn log-uniformly up to `max_shift` so that
/// both near-collisions and widely separated triples are sampled.
pub fn falsify_randomized<R: Rng + ?Sized>(
    d: u64,
    rel: &RelationDef,
    trials: usize,
    max_shift: i64,
    rng: &mut R,
) -> Option<Counterexample> {
    let tuples = rel.tuples()?;
    let k = rel.arity();
    let decades = (max_shift.max(1) as f64).log10();
    let shift = |rng: &mut R| -> i64 {
        let scale = 10f64.powf(rng.gen_range(0.0..=decades)).round() as i64;
        let scale = scale.clamp(1, max_shift.max(1));
        rng.gen_range(-scale..=scale)
    };
    for _ in 0..trials {
        let picks: Vec<(&Vec<i64>, i64)> = (0..3)
            .map(|_| (&tuples[rng.gen_range(0..tuples.len())], shift(rng)))
            .collect();
        let inputs: Vec<Vec<i64>> = picks
            .iter()
            .map(|(v, a)| (0..k).map(|c| a + coord(v, c)).collect())
            .collect();
        let image: Vec<i64> = (0..k)
            .map(|c| modular_median(d, inputs[0][c], inputs[1][c], inputs[2][c]))
            .collect();
        if !rel.contains(&image).unwrap_or(false) {
            return Some(Counterexample {
                relation: rel.name().to_string(),
                inputs: [inputs[0].clone(), inputs[1].clone(), inputs[2].clone()],
                image,
            });
        }
    }
    None
}

/// A modulus `d` for which `m_d` preserved every relation of a template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolymorphismFinding {
    pub modulus: u64,
    /// Largest window used across the template's relations.
    pub verified_window: i64,
    pub randomized_trials: usize,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub d_max: u64,
    /// Overrides `B = 6(Δ + d) + 1` for every relation.
    pub window: Option<i64>,
    /// Extra randomized falsification trials per relation after the window passes.
    pub randomized_trials: usize,
    pub max_shift: i64,
    pub seed: u64,
}

impl SearchOptions {
    pub fn new(d_max: u64) -> Self {
        SearchOptions {
            d_max,
            window: None,
            randomized_trials: 0,
            max_shift: 1_000_000,
            seed: 0,
        }
    }
}

/// Default search range `d ≤ 2D` (at least 1).
pub fn default_d_max(t: &Template) -> u64 {
    DistanceProfile::of(t)
        .map(|p| 2 * p.max_distance())
        .unwrap_or(0)
        .max(1)
}

pub fn find_modular_median(t: &Template, d_max: u64) -> Option<PolymorphismFinding> {
    find_modular_median_with(t, &SearchOptions::new(d_max))
}

pub fn find_modular_median_with(t: &Template, opts: &SearchOptions) -> Option<PolymorphismFinding> {
    use rand::SeedableRng;

    'moduli: for d in 1..=opts.d_max.max(1) {
        let mut verified_window = 0;
        for rel in t.relations() {
            let window = opts.window.unwrap_or_else(|| default_window(d, rel));
            match preserves_relation_within(d, rel, window) {
                Preservation::Preserved { window, .. } => {
                    verified_window = verified_window.max(window)
                }
                Preservation::Violated(_) => continue 'moduli,
            }
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed ^ d);
        for rel in t.relations() {
            if falsify_randomized(d, rel, opts.randomized_trials, opts.max_shift, &mut rng).is_some()
            {
                continue 'moduli;
            }
        }
        return Some(PolymorphismFinding {
            modulus: d,
            verified_window,
            randomized_trials: opts.randomized_trials,
        });
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposability {
    /// Arity below 3, or a FULL or EMPTY body: determined by binary projections trivially.
    Vacuous,
    /// No window candidate separates the relation from its binary projections.
    Holds { window: i64 },
    /// A tuple consistent with every binary projection that is not in the relation.
    Fails { witness: Vec<i64> },
}

impl Decomposability {
    pub fn holds(&self) -> bool {
        !matches!(self, Decomposability::Fails { .. })
    }
}

/// `arity·Δ + 1`.
pub fn default_decomposition_window(rel: &RelationDef) -> i64 {
    rel.arity() as i64 * rel.max_abs_offset() + 1
}

/// Looks for `t` with `t_0 = 0`, components in `[-window, window]`, such that
/// every pair of coordinates of `t` is realized by some tuple of the relation
/// while `t` itself is not in it.
///
/// Candidates are drawn from the product of the projections onto `(0, j)`;
/// any other window tuple already fails one of those pairs.
pub fn check_two_decomposable(rel: &RelationDef, window: i64) -> Result<Decomposability> {
    if rel.arity() < 3 || rel.tuples().is_none() {
        return Ok(Decomposability::Vacuous);
    }
    let k = rel.arity();
    let mut pairs = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                pairs[i][j] = Some(rel.project(i, j)?);
            }
        }
    }
    let axes: Vec<Vec<i64>> = (1..k)
        .map(|j| {
            pairs[0][j]
                .as_ref()
                .and_then(|s| s.as_slice())
                .unwrap_or(&[])
                .iter()
                .copied()
                .filter(|v| v.abs() <= window)
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; k - 1];
    if axes.iter().any(Vec::is_empty) {
        return Ok(Decomposability::Holds { window });
    }
    let mut t = vec![0i64; k];
    loop {
        for (c, &i) in idx.iter().enumerate() {
            t[c + 1] = axes[c][i];
        }
        let pairwise = (1..k).all(|i| {
            (i + 1..k).all(|j| {
                pairs[i][j]
                    .as_ref()
                    .is_some_and(|s| s.contains(t[j] - t[i]))
            })
        });
        if pairwise && !rel.contains_offsets(&t[1..]) {
            return Ok(Decomposability::Fails { witness: t });
        }
        // odometer
        let mut c = 0;
        loop {
            if c == k - 1 {
                return Ok(Decomposability::Holds { window });
            }
            idx[c] += 1;
            if idx[c] < axes[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}
