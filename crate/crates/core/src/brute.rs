//! Complete backtracking oracle.
//!
//! Adjacent variables of a constraint differ by at most `D`, so a connected
//! component with `n` variables that has any solution has one with its first
//! variable at 0 and every value in `[-(n-1)D, (n-1)D]`. Searching that
//! window exhaustively decides the instance.

use std::collections::{HashMap, VecDeque};

use crate::analysis::DistanceProfile;
use crate::{Assignment, Body, Error, Instance, OffsetSet, Result, Template};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteOptions {
    /// Refuse instances whose search-space estimate exceeds this many nodes.
    pub node_cap: u128,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions {
            node_cap: 100_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Valid,
    Violated { constraint: usize },
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verification::Valid)
    }
}

pub fn verify_assignment(inst: &Instance, t: &Template, a: &Assignment) -> Result<Verification> {
    inst.validate(t)?;
    if a.len() != inst.num_vars() {
        return Err(Error::AssignmentLength {
            expected: inst.num_vars(),
            found: a.len(),
        });
    }
    let mut tuple = Vec::new();
    for (i, c) in inst.constraints().iter().enumerate() {
        let rel = t.relation(&c.relation).expect("validated");
        tuple.clear();
        tuple.extend(c.args.iter().map(|&v| a.values[v]));
        if !rel.contains(&tuple)? {
            return Ok(Verification::Violated { constraint: i });
        }
    }
    Ok(Verification::Valid)
}

pub fn brute_solve(inst: &Instance, t: &Template) -> Result<Option<Assignment>> {
    brute_solve_with(inst, t, &BruteOptions::default())
}

/// Least witness in search order (breadth-first variables, ascending values),
/// `None` when the instance has no solution, or `Error::SearchCap` when the
/// estimate exceeds the cap.
pub fn brute_solve_with(
    inst: &Instance,
    t: &Template,
    opts: &BruteOptions,
) -> Result<Option<Assignment>> {
    let plan = Plan::build(inst, t)?;
    let Some(plan) = plan else {
        return Ok(None);
    };
    let estimate = plan.estimate();
    if estimate > opts.node_cap {
        return Err(Error::SearchCap {
            estimate,
            cap: opts.node_cap,
        });
    }
    let mut values: Vec<Option<i64>> = vec![None; inst.num_vars()];
    for comp in &plan.components {
        if !plan.search(inst, t, comp, 0, &mut values)? {
            return Ok(None);
        }
    }
    Ok(Some(Assignment::new(
        values.into_iter().map(|v| v.unwrap_or(0)).collect(),
    )))
}

/// Search-space estimate: product over non-root variables of the size of the
/// projection to their breadth-first parent, summed over components.
pub fn search_estimate(inst: &Instance, t: &Template) -> Result<u128> {
    Ok(Plan::build(inst, t)?.map_or(0, |p| p.estimate()))
}

struct Component {
    /// Variables in breadth-first order from the smallest.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    /// Constraints to check once `order[i]` is assigned.
    ready: Vec<Vec<usize>>,
    window: i64,
}

struct Plan {
    components: Vec<Component>,
    pairs: HashMap<(usize, usize), OffsetSet>,
}

impl Plan {
    fn build(inst: &Instance, t: &Template) -> Result<Option<Plan>> {
        inst.validate(t)?;
        let big_d = DistanceProfile::of(t).map(|p| p.max_distance()).unwrap_or(0) as i64;
        let n = inst.num_vars();
        let mut pairs: HashMap<(usize, usize), OffsetSet> = HashMap::new();
        let mut adjacency = vec![Vec::new(); n];
        for c in inst.constraints() {
            let rel = t.relation(&c.relation).expect("validated");
            match rel.body() {
                Body::Empty => return Ok(None),
                Body::Full => continue,
                Body::Tuples(_) => {}
            }
            for p in 0..c.args.len() {
                for q in 0..c.args.len() {
                    let (u, v) = (c.args[p], c.args[q]);
                    if u == v {
                        continue;
                    }
                    let proj = rel.project(p, q)?;
                    let cell = pairs.entry((u, v)).or_insert_with(OffsetSet::full);
                    *cell = cell.intersect(&proj);
                    adjacency[u].push(v);
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }

        let mut seen = vec![false; n];
        let mut parent = vec![None; n];
        let mut components = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut order = vec![];
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &v in &adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        parent[v] = Some(u);
                        queue.push_back(v);
                    }
                }
            }
            components.push(Component {
                window: (order.len() as i64 - 1) * big_d,
                parent: order.iter().map(|&v| parent[v]).collect(),
                ready: vec![Vec::new(); order.len()],
                order,
            });
        }

        // a constraint becomes checkable at the position of its last variable
        let mut position = vec![(0usize, 0usize); n];
        for (ci, comp) in components.iter().enumerate() {
            for (i, &v) in comp.order.iter().enumerate() {
                position[v] = (ci, i);
            }
        }
        for (k, c) in inst.constraints().iter().enumerate() {
            let rel = t.relation(&c.relation).expect("validated");
            if matches!(rel.body(), Body::Full) {
                continue;
            }
            let (ci, last) = c
                .args
                .iter()
                .map(|&v| position[v])
                .max_by_key(|&(_, i)| i)
                .expect("constraints have arguments");
            components[ci].ready[last].push(k);
        }
        Ok(Some(Plan { components, pairs }))
    }

    fn estimate(&self) -> u128 {
        self.components
            .iter()
            .map(|comp| {
                comp.order
                    .iter()
                    .zip(&comp.parent)
                    .filter_map(|(&v, p)| p.map(|p| (p, v)))
                    .map(|e| self.pairs[&e].len().unwrap_or(usize::MAX) as u128)
                    .fold(1u128, u128::saturating_mul)
            })
            .fold(0u128, u128::saturating_add)
    }

    fn search(
        &self,
        inst: &Instance,
        t: &Template,
        comp: &Component,
        i: usize,
        values: &mut [Option<i64>],
    ) -> Result<bool> {
        if i == comp.order.len() {
            return Ok(true);
        }
        let v = comp.order[i];
        let candidates: Vec<i64> = match comp.parent[i] {
            None => vec![0],
            Some(p) => {
                let base = values[p].expect("parent assigned first");
                self.pairs[&(p, v)]
                    .translate(base)?
                    .as_slice()
                    .expect("adjacent pairs are finite")
                    .iter()
                    .copied()
                    .filter(|x| x.abs() <= comp.window)
                    .collect()
            }
        };
        let mut tuple = Vec::new();
        'cand: for x in candidates {
            for &u in &comp.order[..i] {
                if let Some(s) = self.pairs.get(&(u, v)) {
                    if !s.contains(x - values[u].expect("earlier variables assigned")) {
                        continue 'cand;
                    }
                }
            }
            values[v] = Some(x);
            for &k in &comp.ready[i] {
                let c = &inst.constraints()[k];
                let rel = t.relation(&c.relation).expect("validated");
                tuple.clear();
                tuple.extend(c.args.iter().map(|&a| values[a].expect("ready constraint")));
                if !rel.contains(&tuple)? {
                    values[v] = None;
                    continue 'cand;
                }
            }
            if self.search(inst, t, comp, i + 1, values)? {
                return Ok(true);
            }
            values[v] = None;
        }
        Ok(false)
    }
}
