use std::collections::BTreeMap;
use std::sync::Arc;

use crate::relation::coord;
use crate::{Body, Instance, RelationDef, Result, Template};

/// A constraint whose arguments are pairwise distinct and whose relation has
/// a tuple body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundConstraint {
    pub relation: Arc<RelationDef>,
    pub args: Vec<usize>,
    /// Index of the constraint in the original instance.
    pub origin: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preprocessed {
    /// Some constraint can never hold; `origin` names the first one.
    Unsat { origin: usize },
    Ready {
        num_vars: usize,
        constraints: Vec<BoundConstraint>,
    },
}

/// Rewrites repeated variables away and drops constraints that always hold.
///
/// For `R(x, x, y)` only the tuples agreeing on the repeated positions are
/// kept and the duplicate coordinate is removed. FULL constraints of any
/// arity are dropped; an EMPTY constraint (given or produced by the rewrite)
/// short-circuits to [`Preprocessed::Unsat`].
pub fn preprocess(inst: &Instance, t: &Template) -> Result<Preprocessed> {
    inst.validate(t)?;
    let shared: Vec<Arc<RelationDef>> = t.relations().iter().cloned().map(Arc::new).collect();
    let mut derived: BTreeMap<(usize, Vec<usize>), Arc<RelationDef>> = BTreeMap::new();
    let mut out = Vec::new();
    for (origin, c) in inst.constraints().iter().enumerate() {
        let ri = t.relation_index(&c.relation).expect("validated");
        let rel = &shared[ri];
        let mut distinct: Vec<usize> = Vec::new();
        let pattern: Vec<usize> = c
            .args
            .iter()
            .map(|v| match distinct.iter().position(|d| d == v) {
                Some(i) => i,
                None => {
                    distinct.push(*v);
                    distinct.len() - 1
                }
            })
            .collect();
        let relation = if distinct.len() == c.args.len() {
            rel.clone()
        } else {
            derived
                .entry((ri, pattern.clone()))
                .or_insert_with(|| Arc::new(collapse(rel, &pattern, distinct.len())))
                .clone()
        };
        match relation.body() {
            Body::Full => {}
            Body::Empty => return Ok(Preprocessed::Unsat { origin }),
            Body::Tuples(_) => out.push(BoundConstraint {
                relation,
                args: distinct,
                origin,
            }),
        }
    }
    Ok(Preprocessed::Ready {
        num_vars: inst.num_vars(),
        constraints: out,
    })
}

/// `pattern[p]` is the index of the distinct variable at position `p`.
fn collapse(rel: &RelationDef, pattern: &[usize], width: usize) -> RelationDef {
    let name = format!(
        "{}[{}]",
        rel.name(),
        pattern.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
    );
    let first_pos: Vec<usize> = (0..width)
        .map(|d| pattern.iter().position(|&p| p == d).expect("every index occurs"))
        .collect();
    let tuples: Vec<Vec<i64>> = match rel.body() {
        Body::Full => return RelationDef::full(name, width).expect("width >= 1"),
        Body::Empty => return RelationDef::empty(name, width).expect("width >= 1"),
        Body::Tuples(ts) => ts
            .iter()
            .filter(|v| {
                pattern
                    .iter()
                    .enumerate()
                    .all(|(p, &d)| coord(v, p) == coord(v, first_pos[d]))
            })
            .map(|v| first_pos[1..].iter().map(|&p| coord(v, p)).collect())
            .collect(),
    };
    RelationDef::from_tuples(name, width, tuples).expect("lengths match width")
}

/// Connected components of the variable co-occurrence graph, each sorted,
/// ordered by smallest member.
pub fn canonical_components(num_vars: usize, constraints: &[BoundConstraint]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..num_vars).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for c in constraints {
        for w in c.args.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..num_vars {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut comps: Vec<Vec<usize>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Constraint;

    fn ready(p: Preprocessed) -> (usize, Vec<BoundConstraint>) {
        match p {
            Preprocessed::Ready {
                num_vars,
                constraints,
            } => (num_vars, constraints),
            other => panic!("expected ready instance, got {other:?}"),
        }
    }

    #[test]
    fn repeated_variable_rewrite() {
        let r = RelationDef::from_tuples("R", 3, vec![vec![0, 2], vec![1, 2]]).unwrap();
        let t = Template::new("t", vec![r]).unwrap();
        let inst = Instance::new(2, vec![Constraint::new("R", [0, 0, 1])]).unwrap();
        let (_, cs) = ready(preprocess(&inst, &t).unwrap());
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].args, vec![0, 1]);
        assert_eq!(cs[0].relation.arity(), 2);
        assert_eq!(cs[0].relation.tuples().unwrap(), &[vec![2]]);
    }

    #[test]
    fn repeat_in_later_positions() {
        let r = RelationDef::from_tuples("R", 3, vec![vec![1, 1], vec![1, 2], vec![3, 3]]).unwrap();
        let t = Template::new("t", vec![r]).unwrap();
        let inst = Instance::new(2, vec![Constraint::new("R", [1, 0, 0])]).unwrap();
        let (_, cs) = ready(preprocess(&inst, &t).unwrap());
        assert_eq!(cs[0].args, vec![1, 0]);
        assert_eq!(cs[0].relation.tuples().unwrap(), &[vec![1], vec![3]]);
    }

    #[test]
    fn unchanged_without_repeats() {
        let t = Template::new("t", vec![RelationDef::binary("R", [1, 3])]).unwrap();
        let inst = Instance::new(2, vec![Constraint::new("R", [0, 1])]).unwrap();
        let (n, cs) = ready(preprocess(&inst, &t).unwrap());
        assert_eq!(n, 2);
        assert_eq!(cs[0].args, vec![0, 1]);
        assert_eq!(cs[0].relation.as_ref(), &t.relations()[0]);
    }

    #[test]
    fn empty_short_circuits_and_full_drops() {
        let t = Template::new(
            "t",
            vec![
                RelationDef::full("F", 2).unwrap(),
                RelationDef::empty("E", 2).unwrap(),
                RelationDef::binary("R", [1]),
            ],
        )
        .unwrap();
        let inst = Instance::new(
            3,
            vec![
                Constraint::new("F", [0, 1]),
                Constraint::new("R", [1, 2]),
                Constraint::new("E", [0, 2]),
            ],
        )
        .unwrap();
        assert_eq!(preprocess(&inst, &t).unwrap(), Preprocessed::Unsat { origin: 2 });
        let inst = Instance::new(3, vec![Constraint::new("F", [0, 1])]).unwrap();
        assert!(ready(preprocess(&inst, &t).unwrap()).1.is_empty());
        // R(x, x) with R = {1} has no diagonal tuple
        let inst = Instance::new(1, vec![Constraint::new("R", [0, 0])]).unwrap();
        assert_eq!(preprocess(&inst, &t).unwrap(), Preprocessed::Unsat { origin: 0 });
    }

    #[test]
    fn components() {
        let t = Template::new("t", vec![RelationDef::binary("R", [1])]).unwrap();
        let mk = |n, cs: &[[usize; 2]]| {
            let inst =
                Instance::new(n, cs.iter().map(|a| Constraint::new("R", *a)).collect()).unwrap();
            let (n, cs) = ready(preprocess(&inst, &t).unwrap());
            canonical_components(n, &cs)
        };
        assert_eq!(mk(3, &[[0, 1], [1, 2]]), vec![vec![0, 1, 2]]);
        assert_eq!(mk(4, &[[0, 1], [2, 3]]), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(mk(3, &[]), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(mk(4, &[[3, 1], [2, 0], [0, 3]]), vec![vec![0, 1, 2, 3]]);
    }
}
