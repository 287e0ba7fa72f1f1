use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::preprocess::BoundConstraint;
use crate::{OffsetSet, Result};

const UNREACHABLE: u32 = u32::MAX;

/// One proper replacement `P(k,l) ← P(k,l) ∩ (P(k,m) ⊕ P(m,l))`, in
/// instance variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replacement {
    pub pair: (usize, usize),
    pub via: usize,
    pub old: OffsetSet,
    pub new: OffsetSet,
}

impl fmt::Display for Replacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair=({},{}) via {} old={} new={}",
            self.pair.0, self.pair.1, self.via, self.old, self.new
        )
    }
}

/// Worklist discipline for [`PairMatrix::propagate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropagationStats {
    pub proper_replacements: u64,
    pub revisions: u64,
    pub full_to_finite: u64,
    pub bound_violations: u64,
    /// Bound on proper replacements implied by the initial cells.
    pub replacement_budget: u64,
    pub budget_exceeded: bool,
}

/// Offset sets `P(k,l)` for every ordered pair of variables of one connected
/// component, stored with `P(l,k) = -P(k,l)` at all times.
#[derive(Clone, Debug)]
pub struct PairMatrix {
    vars: Vec<usize>,
    n: usize,
    cells: Vec<OffsetSet>,
    /// Distance in the co-occurrence graph, row-major.
    distance: Vec<u32>,
    max_distance: i64,
    initial_finite_size: u64,
    stats: PropagationStats,
}

impl PairMatrix {
    /// Intersects the projections of every constraint covering a pair; pairs
    /// that never co-occur start as FULL.
    ///
    /// `vars` lists the component's variables in ascending order and
    /// `constraints` must only mention those variables.
    pub fn initialize(
        vars: &[usize],
        constraints: &[&BoundConstraint],
        max_distance: u64,
    ) -> Result<PairMatrix> {
        let n = vars.len();
        let local = |v: usize| vars.binary_search(&v).expect("variable in component");
        let mut cells = vec![OffsetSet::full(); n * n];
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            cells[i * n + i] = OffsetSet::singleton(0);
        }
        for c in constraints {
            for p in 0..c.args.len() {
                for q in p + 1..c.args.len() {
                    let (k, l) = (local(c.args[p]), local(c.args[q]));
                    let proj = c.relation.project(p, q)?;
                    let cell = cells[k * n + l].intersect(&proj);
                    cells[l * n + k] = cell.invert();
                    cells[k * n + l] = cell;
                    adjacency[k].push(l);
                    adjacency[l].push(k);
                }
            }
        }
        let mut distance = vec![UNREACHABLE; n * n];
        for s in 0..n {
            let row = &mut distance[s * n..(s + 1) * n];
            row[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if row[v] == UNREACHABLE {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        let initial_finite_size = (0..n)
            .flat_map(|k| (k + 1..n).map(move |l| (k, l)))
            .filter_map(|(k, l)| cells[k * n + l].len())
            .map(|s| s as u64)
            .sum();
        Ok(PairMatrix {
            vars: vars.to_vec(),
            n,
            cells,
            distance,
            max_distance: max_distance as i64,
            initial_finite_size,
            stats: PropagationStats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    /// `P(k,l)` in local indices.
    pub fn cell(&self, k: usize, l: usize) -> &OffsetSet {
        &self.cells[k * self.n + l]
    }

    pub fn graph_distance(&self, k: usize, l: usize) -> Option<u32> {
        let d = self.distance[k * self.n + l];
        (d != UNREACHABLE).then_some(d)
    }

    pub fn stats(&self) -> &PropagationStats {
        &self.stats
    }

    pub fn has_empty_cell(&self) -> bool {
        self.cells.iter().any(OffsetSet::is_empty)
    }

    fn set(&mut self, k: usize, l: usize, value: OffsetSet) {
        let n = self.n;
        self.cells[l * n + k] = value.invert();
        self.cells[k * n + l] = value;
    }

    /// Runs composition-intersection replacements to a fixpoint, stopping
    /// early once a cell becomes empty.
    ///
    /// A FULL cell is only refined through a midpoint on a shortest path of
    /// the co-occurrence graph, which keeps every finite cell of a pair at
    /// distance `ℓ` inside `[-ℓD, ℓD]` throughout. Once finite, a cell is
    /// refined through every midpoint, so the fixpoint is unchanged.
    pub fn propagate(
        &mut self,
        schedule: Schedule,
        trace: &mut dyn FnMut(&Replacement),
    ) -> Result<()> {
        let n = self.n;
        let mut queued = vec![false; n * n];
        let mut work: VecDeque<(usize, usize)> = VecDeque::new();
        for k in 0..n {
            for l in k + 1..n {
                work.push_back((k, l));
                queued[k * n + l] = true;
            }
        }
        let mut transitions = 0u64;
        'outer: while let Some((k, l)) = match schedule {
            Schedule::Fifo => work.pop_front(),
            Schedule::Lifo => work.pop_back(),
        } {
            queued[k * n + l] = false;
            let mut changed = false;
            for m in 0..n {
                if m == k || m == l {
                    continue;
                }
                let current = &self.cells[k * n + l];
                if current.is_full() && !self.on_geodesic(k, m, l) {
                    continue;
                }
                self.stats.revisions += 1;
                let next = current.intersect_sum(&self.cells[k * n + m], &self.cells[m * n + l])?;
                if next == *current {
                    continue;
                }
                let old = current.clone();
                if old.is_full() {
                    transitions += 1;
                }
                self.record(k, l, &next);
                trace(&Replacement {
                    pair: (self.vars[k], self.vars[l]),
                    via: self.vars[m],
                    old,
                    new: next.clone(),
                });
                let empty = next.is_empty();
                self.set(k, l, next);
                changed = true;
                if empty {
                    break 'outer;
                }
            }
            if changed {
                for m in 0..n {
                    if m == k || m == l {
                        continue;
                    }
                    for (a, b) in [(k.min(m), k.max(m)), (l.min(m), l.max(m))] {
                        if !queued[a * n + b] {
                            queued[a * n + b] = true;
                            work.push_back((a, b));
                        }
                    }
                }
            }
        }
        self.stats.full_to_finite = transitions;
        let per_transition = 2 * n as u64 * self.max_distance as u64 + 1;
        self.stats.replacement_budget = self.initial_finite_size + transitions * per_transition;
        self.stats.budget_exceeded = self.stats.proper_replacements > self.stats.replacement_budget;
        debug_assert!(!self.stats.budget_exceeded, "replacement budget exceeded");
        Ok(())
    }

    fn on_geodesic(&self, k: usize, m: usize, l: usize) -> bool {
        match (
            self.graph_distance(k, m),
            self.graph_distance(m, l),
            self.graph_distance(k, l),
        ) {
            (Some(a), Some(b), Some(c)) => a + b == c,
            _ => false,
        }
    }

    fn record(&mut self, k: usize, l: usize, next: &OffsetSet) {
        self.stats.proper_replacements += 1;
        let ok = match self.graph_distance(k, l) {
            Some(d) => next.within(d as i64 * self.max_distance),
            None => next.is_full(),
        };
        if !ok {
            self.stats.bound_violations += 1;
        }
        debug_assert!(ok, "cell ({k},{l}) = {next} escapes its distance window");
    }

    /// Triples `(k, l, m)` (local indices) where `P(k,l) ⊄ P(k,m) ⊕ P(m,l)`.
    pub fn closure_violations(&self) -> Result<Vec<(usize, usize, usize)>> {
        let n = self.n;
        let mut out = Vec::new();
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    if k == l || l == m || k == m {
                        continue;
                    }
                    let via = self.cell(k, m).sum(self.cell(m, l))?;
                    if !self.cell(k, l).is_subset(&via) {
                        out.push((k, l, m));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Mirror invariant over all cells.
    pub fn is_mirrored(&self) -> bool {
        (0..self.n).all(|k| (0..self.n).all(|l| *self.cell(l, k) == self.cell(k, l).invert()))
    }
}
