use crate::{Error, Result, Template};

/// An atomic formula `R(x_{args[0]}, …)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub relation: String,
    pub args: Vec<usize>,
}

impl Constraint {
    pub fn new(relation: impl Into<String>, args: impl Into<Vec<usize>>) -> Self {
        Constraint {
            relation: relation.into(),
            args: args.into(),
        }
    }
}

/// The quantifier-free part of a primitive positive sentence: variables
/// `0..num_vars` and a conjunction of atomic constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(num_vars: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::NoVariables);
        }
        for (ci, c) in constraints.iter().enumerate() {
            if let Some(&var) = c.args.iter().find(|&&v| v >= num_vars) {
                return Err(Error::VariableOutOfRange {
                    constraint: ci,
                    var,
                    num_vars,
                });
            }
        }
        Ok(Instance {
            num_vars,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Checks relation names and arities against `t`.
    pub fn validate(&self, t: &Template) -> Result<()> {
        for c in &self.constraints {
            let rel = t
                .relation(&c.relation)
                .ok_or_else(|| Error::UnknownRelation(c.relation.clone()))?;
            if rel.arity() != c.args.len() {
                return Err(Error::ArityMismatch {
                    relation: c.relation.clone(),
                    expected: rel.arity(),
                    found: c.args.len(),
                });
            }
        }
        Ok(())
    }
}

/// One integer per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub values: Vec<i64>,
}

impl Assignment {
    pub fn new(values: Vec<i64>) -> Self {
        Assignment { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
