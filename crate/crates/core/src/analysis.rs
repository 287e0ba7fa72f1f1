//! Gaifman distance profile of a template.
//!
//! Two integers are adjacent in the Gaifman graph of a template exactly when
//! their difference is one of finitely many distances `d_1 < … < d_n`
//! (`D = d_n`). The graph is connected iff `gcd(d_1, …, d_n) = 1`. For
//! connected templates every `0 < q < D` is reached from 0 by a shortest walk
//! of some length `l_q`, and `c = max D·l_q` bounds how far any endomorphism
//! can stretch a pair of points beyond their original distance.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::relation::coord;
use crate::{Error, Result, Template};

/// Total BFS window width at which [`DistanceProfile::path_length`] gives up.
pub const MAX_WINDOW_WIDTH: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistanceProfile {
    distances: Vec<u64>,
}

impl DistanceProfile {
    /// Profile from an explicit distance list; zeros are dropped.
    pub fn new(distances: impl IntoIterator<Item = u64>) -> Self {
        let mut distances: Vec<u64> = distances.into_iter().filter(|&d| d > 0).collect();
        distances.sort_unstable();
        distances.dedup();
        DistanceProfile { distances }
    }

    pub fn of(t: &Template) -> Result<Self> {
        gaifman_distances(t).map(DistanceProfile::new)
    }

    pub fn distances(&self) -> &[u64] {
        &self.distances
    }

    /// `D`, or 0 when the Gaifman graph has no edges.
    pub fn max_distance(&self) -> u64 {
        self.distances.last().copied().unwrap_or(0)
    }

    pub fn gcd(&self) -> u64 {
        self.distances.iter().fold(0, |g, &d| gcd(g, d))
    }

    pub fn is_connected(&self) -> bool {
        self.gcd() == 1
    }

    /// Length of a shortest walk from 0 to `q` using steps `±d_i`.
    pub fn path_length(&self, q: u64) -> Result<u64> {
        if q == 0 {
            return Err(Error::Precondition("path length needs q >= 1".into()));
        }
        if !self.is_connected() {
            return Err(Error::Disconnected(self.gcd()));
        }
        let big_d = self.max_distance();
        let mut half = q
            .checked_add(10u64.saturating_mul(big_d))
            .ok_or(Error::Overflow)?;
        loop {
            let width = 2 * half + 1;
            if width > MAX_WINDOW_WIDTH {
                return Err(Error::WindowExhausted(MAX_WINDOW_WIDTH));
            }
            if let Some(len) = self.bfs(q, half) {
                return Ok(len);
            }
            half *= 2;
        }
    }

    fn bfs(&self, target: u64, half: u64) -> Option<u64> {
        let width = (2 * half + 1) as usize;
        let origin = half as usize;
        let goal = origin + target as usize;
        let mut dist = vec![u32::MAX; width];
        let mut queue = VecDeque::new();
        dist[origin] = 0;
        queue.push_back(origin);
        while let Some(u) = queue.pop_front() {
            if u == goal {
                return Some(dist[u] as u64);
            }
            for &d in &self.distances {
                let d = d as usize;
                let next = [u.checked_sub(d), u.checked_add(d).filter(|&v| v < width)];
                for v in next.into_iter().flatten() {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        None
    }

    /// `l_q` for every `0 < q < D`.
    pub fn path_lengths(&self) -> Result<BTreeMap<u64, u64>> {
        (1..self.max_distance())
            .map(|q| self.path_length(q).map(|l| (q, l)))
            .collect()
    }

    /// `max_{0<q<D} D·l_q`, or 0 when `D = 1`.
    pub fn stretch_bound(&self) -> Result<u64> {
        if !self.is_connected() {
            return Err(Error::Disconnected(self.gcd()));
        }
        let big_d = self.max_distance();
        let mut best = 0u64;
        for l in self.path_lengths()?.into_values() {
            best = best.max(big_d.checked_mul(l).ok_or(Error::Overflow)?);
        }
        Ok(best)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Nonzero pairwise coordinate differences over all tuples of all relations.
pub fn gaifman_distances(t: &Template) -> Result<Vec<u64>> {
    if !t.has_tuples() {
        return Err(Error::NoGaifmanEdges);
    }
    let mut out = Vec::new();
    for rel in t.relations() {
        let Some(tuples) = rel.tuples() else { continue };
        for v in tuples {
            for i in 0..rel.arity() {
                for j in i + 1..rel.arity() {
                    let diff = coord(v, j)
                        .checked_sub(coord(v, i))
                        .ok_or(Error::Overflow)?
                        .unsigned_abs();
                    if diff > 0 {
                        out.push(diff);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn is_connected(t: &Template) -> Result<bool> {
    DistanceProfile::of(t).map(|p| p.is_connected())
}

pub fn realizing_path_length(t: &Template, q: u64) -> Result<u64> {
    DistanceProfile::of(t)?.path_length(q)
}

pub fn stretch_constant(t: &Template) -> Result<u64> {
    DistanceProfile::of(t)?.stretch_bound()
}

/// Everything [`analyze`] derives from a template's distance profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub distances: Vec<u64>,
    pub max_distance: u64,
    pub connected: bool,
    /// `q ↦ l_q`; present only for connected templates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_lengths: Option<BTreeMap<u64, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch_bound: Option<u64>,
    /// `2(c + 1)`: size bound for ranges of generated finite-range operations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_range_bound: Option<u64>,
}

pub fn analyze(t: &Template) -> Result<AnalysisReport> {
    let profile = DistanceProfile::of(t)?;
    let connected = profile.is_connected();
    let (path_lengths, stretch_bound) = if connected {
        (Some(profile.path_lengths()?), Some(profile.stretch_bound()?))
    } else {
        (None, None)
    };
    let finite_range_bound = stretch_bound
        .map(|c| c.checked_add(1).and_then(|v| v.checked_mul(2)).ok_or(Error::Overflow))
        .transpose()?;
    debug_assert_eq!(connected, profile.gcd() == 1);
    Ok(AnalysisReport {
        distances: profile.distances().to_vec(),
        max_distance: profile.max_distance(),
        connected,
        path_lengths,
        stretch_bound,
        finite_range_bound,
    })
}
