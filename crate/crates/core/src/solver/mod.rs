//! Path-consistency decision procedure.
//!
//! Each connected component of the instance gets a [`PairMatrix`] of offset
//! sets, initialized from constraint projections and narrowed by
//! composition-intersection until nothing changes. An empty cell refutes the
//! instance outright. Otherwise a witness is built greedily, one variable at
//! a time in breadth-first order, taking the least value compatible with all
//! cells and constraints among assigned variables. When the template has a
//! modular median polymorphism the fixpoint is globally consistent and the
//! greedy pass cannot get stuck.

mod matrix;
mod preprocess;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use matrix::{PairMatrix, PropagationStats, Replacement, Schedule};
pub use preprocess::{canonical_components, preprocess, BoundConstraint, Preprocessed};

use crate::analysis::DistanceProfile;
use crate::brute::{self, BruteOptions, Verification};
use crate::polymorphism::{default_d_max, find_modular_median};
use crate::{Assignment, Error, Instance, OffsetSet, Result, Template};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Consistency first, brute force for `Unknown` when within the cap.
    #[default]
    Auto,
    Consistency,
    Brute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unsat,
    Sat(Assignment),
    Unknown(String),
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub mode: Mode,
    pub schedule: Schedule,
    pub brute: BruteOptions,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub components: usize,
    pub proper_replacements: u64,
    pub revisions: u64,
    pub full_to_finite: u64,
    pub bound_violations: u64,
    pub budget_violations: u64,
    pub brute_fallback: bool,
}

impl SolveStats {
    fn absorb(&mut self, s: &PropagationStats) {
        self.proper_replacements += s.proper_replacements;
        self.revisions += s.revisions;
        self.full_to_finite += s.full_to_finite;
        self.bound_violations += s.bound_violations;
        self.budget_violations += u64::from(s.budget_exceeded);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub stats: SolveStats,
}

pub fn solve(inst: &Instance, t: &Template, opts: &SolveOptions) -> Result<SolveOutcome> {
    solve_traced(inst, t, opts, &mut |_| {})
}

pub fn solve_traced(
    inst: &Instance,
    t: &Template,
    opts: &SolveOptions,
    trace: &mut dyn FnMut(&Replacement),
) -> Result<SolveOutcome> {
    inst.validate(t)?;
    let mut stats = SolveStats::default();
    if opts.mode == Mode::Brute {
        let verdict = match brute::brute_solve_with(inst, t, &opts.brute)? {
            Some(a) => Verdict::Sat(a),
            None => Verdict::Unsat,
        };
        return Ok(SolveOutcome { verdict, stats });
    }
    let verdict = consistency(inst, t, opts.schedule, &mut stats, trace)?;
    let verdict = match verdict {
        Verdict::Unknown(reason) if opts.mode == Mode::Auto => {
            match brute::brute_solve_with(inst, t, &opts.brute) {
                Ok(found) => {
                    stats.brute_fallback = true;
                    match found {
                        Some(a) => Verdict::Sat(a),
                        None => Verdict::Unsat,
                    }
                }
                Err(Error::SearchCap { estimate, cap }) => Verdict::Unknown(format!(
                    "{reason}; brute force refused (estimate {estimate} > cap {cap})"
                )),
                Err(e) => return Err(e),
            }
        }
        v => v,
    };
    if let Verdict::Sat(a) = &verdict {
        if let Verification::Violated { constraint } = brute::verify_assignment(inst, t, a)? {
            return Err(Error::Invariant(format!(
                "witness {:?} violates constraint {constraint}",
                a.values
            )));
        }
    }
    Ok(SolveOutcome { verdict, stats })
}

fn consistency(
    inst: &Instance,
    t: &Template,
    schedule: Schedule,
    stats: &mut SolveStats,
    trace: &mut dyn FnMut(&Replacement),
) -> Result<Verdict> {
    let (num_vars, constraints) = match preprocess(inst, t)? {
        Preprocessed::Unsat { .. } => return Ok(Verdict::Unsat),
        Preprocessed::Ready {
            num_vars,
            constraints,
        } => (num_vars, constraints),
    };
    let big_d = DistanceProfile::of(t)
        .map(|p| p.max_distance())
        .unwrap_or(0);
    let components = canonical_components(num_vars, &constraints);
    stats.components = components.len();

    let mut matrices = Vec::with_capacity(components.len());
    for vars in &components {
        let members: Vec<&BoundConstraint> = constraints
            .iter()
            .filter(|c| vars.binary_search(&c.args[0]).is_ok())
            .collect();
        let mut m = PairMatrix::initialize(vars, &members, big_d)?;
        m.propagate(schedule, trace)?;
        stats.absorb(m.stats());
        if m.has_empty_cell() {
            return Ok(Verdict::Unsat);
        }
        matrices.push((m, members));
    }

    let mut values = vec![0i64; num_vars];
    for (m, members) in &matrices {
        match extract_solution(m, members)? {
            Some(local) => {
                for (&v, x) in m.vars().iter().zip(local) {
                    values[v] = x;
                }
            }
            None => {
                return if find_modular_median(t, default_d_max(t)).is_some() {
                    Err(Error::Invariant(
                        "witness extraction failed although the template has a modular median"
                            .into(),
                    ))
                } else {
                    Ok(Verdict::Unknown(
                        "fixpoint is nonempty but greedy extraction failed and no modular median was verified"
                            .into(),
                    ))
                };
            }
        }
    }
    Ok(Verdict::Sat(Assignment::new(values)))
}

/// Greedy witness for one propagated component, in local variable order.
///
/// Variables are visited breadth-first from the lowest index, which is pinned
/// to 0; each takes the least value allowed by every cell to an assigned
/// variable and by every constraint whose variables are now all assigned.
pub fn extract_solution(m: &PairMatrix, constraints: &[&BoundConstraint]) -> Result<Option<Vec<i64>>> {
    let n = m.len();
    let vars = m.vars();
    let local = |v: usize| vars.binary_search(&v).expect("variable in component");
    let mut adjacency = vec![Vec::new(); n];
    let mut by_var: Vec<Vec<(&BoundConstraint, Vec<usize>)>> = vec![Vec::new(); n];
    for c in constraints {
        let locals: Vec<usize> = c.args.iter().map(|&v| local(v)).collect();
        for &a in &locals {
            for &b in &locals {
                if a != b {
                    adjacency[a].push(b);
                }
            }
            by_var[a].push((*c, locals.clone()));
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }

    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }

    let mut value: Vec<Option<i64>> = vec![None; n];
    let mut tuple = Vec::new();
    for &j in &order {
        let mut candidates = OffsetSet::full();
        for (i, vi) in value.iter().enumerate() {
            if let Some(x) = vi {
                candidates = candidates.intersect(&m.cell(i, j).translate(*x)?);
            }
        }
        let Some(candidates) = candidates.as_slice().map(<[i64]>::to_vec) else {
            // first variable of the component
            value[j] = Some(0);
            continue;
        };
        let mut chosen = None;
        'cand: for x in candidates {
            value[j] = Some(x);
            for (c, locals) in &by_var[j] {
                if locals.iter().any(|&a| value[a].is_none()) {
                    continue;
                }
                tuple.clear();
                tuple.extend(locals.iter().map(|&a| value[a].expect("assigned")));
                if !c.relation.contains(&tuple)? {
                    continue 'cand;
                }
            }
            chosen = Some(x);
            break;
        }
        match chosen {
            Some(x) => value[j] = Some(x),
            None => return Ok(None),
        }
    }
    Ok(Some(value.into_iter().map(|v| v.expect("all assigned")).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Constraint, RelationDef};

    fn dist12() -> Template {
        Template::new("dist12", vec![RelationDef::binary("R", [1, 2, -1, -2])]).unwrap()
    }

    fn shifts() -> Template {
        Template::new(
            "shifts",
            vec![RelationDef::binary("A", [1]), RelationDef::binary("B", [1, 3])],
        )
        .unwrap()
    }

    fn edges(rel: &str, n: usize, es: &[(usize, usize)]) -> Instance {
        Instance::new(n, es.iter().map(|&(a, b)| Constraint::new(rel, [a, b])).collect()).unwrap()
    }

    fn consistency_only() -> SolveOptions {
        SolveOptions {
            mode: Mode::Consistency,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn extraction_examples() {
        let t = shifts();
        let path = edges("A", 3, &[(0, 1), (1, 2)]);
        let out = solve(&path, &t, &consistency_only()).unwrap();
        assert_eq!(out.verdict, Verdict::Sat(Assignment::new(vec![0, 1, 2])));

        let single = edges("B", 2, &[(0, 1)]);
        let out = solve(&single, &t, &consistency_only()).unwrap();
        assert_eq!(out.verdict, Verdict::Sat(Assignment::new(vec![0, 1])));

        let tri = edges("R", 3, &[(0, 1), (1, 2), (0, 2)]);
        let out = solve(&tri, &dist12(), &consistency_only()).unwrap();
        let Verdict::Sat(a) = out.verdict else {
            panic!("triangle is 3-colorable")
        };
        assert!(brute::verify_assignment(&tri, &dist12(), &a).unwrap().is_valid());
        assert_eq!(a.values[0], 0);
    }

    #[test]
    fn k4_over_dist12() {
        let k4 = edges("R", 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let out = solve(&k4, &dist12(), &SolveOptions::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
        let brute_only = SolveOptions {
            mode: Mode::Brute,
            ..SolveOptions::default()
        };
        assert_eq!(solve(&k4, &dist12(), &brute_only).unwrap().verdict, Verdict::Unsat);
    }

    #[test]
    fn propagation_refutes_odd_triangle() {
        let t = shifts();
        let tri = edges("B", 3, &[(0, 1), (1, 2), (0, 2)]);
        let out = solve(&tri, &t, &consistency_only()).unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
        assert!(out.stats.proper_replacements > 0);
    }

    #[test]
    fn free_variables_are_zero() {
        let t = shifts();
        let inst = edges("A", 4, &[(1, 3)]);
        let out = solve(&inst, &t, &consistency_only()).unwrap();
        assert_eq!(out.verdict, Verdict::Sat(Assignment::new(vec![0, 0, 0, 1])));
        assert_eq!(out.stats.components, 3);
    }

    #[test]
    fn empty_constraint_is_unsat_without_propagation() {
        let t = Template::new("t", vec![RelationDef::empty("E", 3).unwrap()]).unwrap();
        let inst = Instance::new(3, vec![Constraint::new("E", [0, 1, 2])]).unwrap();
        let out = solve(&inst, &t, &consistency_only()).unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
        assert_eq!(out.stats.revisions, 0);
    }

    #[test]
    fn ternary_constraints() {
        let t = Template::new(
            "t",
            vec![RelationDef::from_tuples("T", 3, vec![vec![1, 2], vec![2, 3]]).unwrap()],
        )
        .unwrap();
        let inst = Instance::new(
            4,
            vec![Constraint::new("T", [0, 1, 2]), Constraint::new("T", [1, 2, 3])],
        )
        .unwrap();
        let out = solve(&inst, &t, &consistency_only()).unwrap();
        let Verdict::Sat(a) = out.verdict else { panic!() };
        assert!(brute::verify_assignment(&inst, &t, &a).unwrap().is_valid());
    }

    #[test]
    fn renaming_variables_permutes_the_witness() {
        let t = shifts();
        let inst = edges("A", 3, &[(0, 1), (1, 2)]);
        let renamed = edges("A", 3, &[(2, 1), (1, 0)]);
        let Verdict::Sat(a) = solve(&inst, &t, &consistency_only()).unwrap().verdict else { panic!() };
        let Verdict::Sat(b) = solve(&renamed, &t, &consistency_only()).unwrap().verdict else { panic!() };
        // both are translates of the forced chain
        assert_eq!(a.values, vec![0, 1, 2]);
        assert_eq!(b.values, vec![0, -1, -2]);
    }

    #[test]
    fn trace_lines() {
        let t = shifts();
        let inst = Instance::new(
            3,
            vec![
                Constraint::new("A", [0, 1]),
                Constraint::new("A", [1, 2]),
                Constraint::new("B", [0, 2]),
            ],
        )
        .unwrap();
        let mut lines = Vec::new();
        let out = solve_traced(&inst, &t, &consistency_only(), &mut |r| lines.push(r.to_string()))
            .unwrap();
        assert_eq!(out.verdict, Verdict::Unsat);
        assert_eq!(lines, vec!["pair=(0,1) via 2 old={1} new={}".to_string()]);
    }
}
