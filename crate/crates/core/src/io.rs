//! JSON documents for templates, instances, assignments and reports.
//!
//! ```json
//! {"name": "dist13", "relations": [{"name": "R", "arity": 2, "tuples": [[1],[3],[-1],[-3]]}]}
//! {"variables": 3, "constraints": [{"relation": "R", "args": [0,1]}]}
//! {"values": [0,1,2]}
//! ```
//!
//! A relation gives either `"tuples"` or `"body": "full" | "empty"`.
//! Parse failures come back as a [`Diagnostic`] carrying the JSON path of the
//! offending value and, for syntax errors, its line and column.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisReport;
use crate::endo::{EndoClassification, EndoViolation};
use crate::polymorphism::{Counterexample, PolymorphismFinding};
use crate::solver::{SolveStats, Verdict};
use crate::{Assignment, Body, Constraint, Instance, RelationDef, Template};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// JSON path such as `relations[0].tuples[2]`; `.` for the document root.
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyTag {
    Full,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDocument {
    pub name: String,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyTag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDocument {
    pub name: String,
    pub relations: Vec<RelationDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDocument {
    pub relation: String,
    pub args: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub variables: usize,
    pub constraints: Vec<ConstraintDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDocument {
    pub values: Vec<i64>,
}

fn decode<T: DeserializeOwned>(text: &str) -> Result<T, Diagnostic> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Diagnostic {
            path,
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: strip_position(&inner.to_string()),
        }
    })?;
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_template(text: &str) -> Result<Template, Diagnostic> {
    let doc: TemplateDocument = decode(text)?;
    template_from_document(&doc)
}

pub fn template_from_document(doc: &TemplateDocument) -> Result<Template, Diagnostic> {
    let mut names = BTreeSet::new();
    let mut relations = Vec::with_capacity(doc.relations.len());
    for (i, r) in doc.relations.iter().enumerate() {
        let here = format!("relations[{i}]");
        if !names.insert(r.name.as_str()) {
            return Err(Diagnostic::at(
                format!("{here}.name"),
                format!("duplicate relation name `{}`", r.name),
            ));
        }
        if r.arity == 0 {
            return Err(Diagnostic::at(format!("{here}.arity"), "arity must be at least 1"));
        }
        let rel = match (&r.tuples, r.body) {
            (Some(_), Some(_)) => {
                return Err(Diagnostic::at(here, "give either `tuples` or `body`, not both"))
            }
            (None, None) => return Err(Diagnostic::at(here, "missing `tuples` or `body`")),
            (None, Some(BodyTag::Full)) => RelationDef::full(&r.name, r.arity),
            (None, Some(BodyTag::Empty)) => RelationDef::empty(&r.name, r.arity),
            (Some(ts), None) => {
                if let Some(j) = ts.iter().position(|t| t.len() != r.arity - 1) {
                    return Err(Diagnostic::at(
                        format!("{here}.tuples[{j}]"),
                        format!(
                            "tuple has {} offsets; relation `{}` of arity {} needs {}",
                            ts[j].len(),
                            r.name,
                            r.arity,
                            r.arity - 1
                        ),
                    ));
                }
                RelationDef::from_tuples(&r.name, r.arity, ts.iter().cloned())
            }
        }
        .map_err(|e| Diagnostic::at(format!("relations[{i}]"), e.to_string()))?;
        relations.push(rel);
    }
    Template::new(&doc.name, relations).map_err(|e| Diagnostic::at(".", e.to_string()))
}

pub fn template_to_document(t: &Template) -> TemplateDocument {
    TemplateDocument {
        name: t.name().to_string(),
        relations: t
            .relations()
            .iter()
            .map(|r| {
                let (tuples, body) = match r.body() {
                    Body::Full => (None, Some(BodyTag::Full)),
                    Body::Empty => (None, Some(BodyTag::Empty)),
                    Body::Tuples(ts) => (Some(ts.clone()), None),
                };
                RelationDocument {
                    name: r.name().to_string(),
                    arity: r.arity(),
                    tuples,
                    body,
                }
            })
            .collect(),
    }
}

pub fn serialize_template(t: &Template) -> String {
    to_pretty(&template_to_document(t))
}

/// Parses an instance and checks it against the template it will be solved over.
pub fn parse_instance(text: &str, t: &Template) -> Result<Instance, Diagnostic> {
    let doc: InstanceDocument = decode(text)?;
    instance_from_document(&doc, t)
}

pub fn instance_from_document(doc: &InstanceDocument, t: &Template) -> Result<Instance, Diagnostic> {
    if doc.variables == 0 {
        return Err(Diagnostic::at("variables", "instance needs at least one variable"));
    }
    for (i, c) in doc.constraints.iter().enumerate() {
        let Some(rel) = t.relation(&c.relation) else {
            return Err(Diagnostic::at(
                format!("constraints[{i}].relation"),
                format!("unknown relation `{}`", c.relation),
            ));
        };
        if rel.arity() != c.args.len() {
            return Err(Diagnostic::at(
                format!("constraints[{i}].args"),
                format!(
                    "relation `{}` has arity {}, got {} arguments",
                    c.relation,
                    rel.arity(),
                    c.args.len()
                ),
            ));
        }
        if let Some(j) = c.args.iter().position(|&v| v >= doc.variables) {
            return Err(Diagnostic::at(
                format!("constraints[{i}].args[{j}]"),
                format!(
                    "variable {} out of range for {} variables",
                    c.args[j], doc.variables
                ),
            ));
        }
    }
    let constraints = doc
        .constraints
        .iter()
        .map(|c| Constraint::new(c.relation.clone(), c.args.clone()))
        .collect();
    Instance::new(doc.variables, constraints).map_err(|e| Diagnostic::at(".", e.to_string()))
}

pub fn instance_to_document(inst: &Instance) -> InstanceDocument {
    InstanceDocument {
        variables: inst.num_vars(),
        constraints: inst
            .constraints()
            .iter()
            .map(|c| ConstraintDocument {
                relation: c.relation.clone(),
                args: c.args.clone(),
            })
            .collect(),
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    to_pretty(&instance_to_document(inst))
}

pub fn parse_assignment(text: &str) -> Result<Assignment, Diagnostic> {
    let doc: AssignmentDocument = decode(text)?;
    Ok(Assignment::new(doc.values))
}

pub fn serialize_assignment(a: &Assignment) -> String {
    to_pretty(&AssignmentDocument {
        values: a.values.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictTag {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub relation: String,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolymorphismReport {
    pub d_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found: Option<PolymorphismFinding>,
    /// How the verdict was established, e.g. `window-verified`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub two_decomposable: Vec<DecompositionEntry>,
    /// First violation per modulus tried, when none was found.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoReport {
    pub spec: String,
    pub is_endomorphism: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<EndoClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<EndoViolation>,
}

/// Output of every command. Only the fields relevant to a command are set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing_constraint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<SolveStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polymorphism: Option<PolymorphismReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endomorphism: Option<EndoReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateDocument>,
}

impl ReportDocument {
    pub fn from_verdict(v: &Verdict) -> Self {
        match v {
            Verdict::Sat(a) => ReportDocument {
                verdict: Some(VerdictTag::Sat),
                witness: Some(a.values.clone()),
                ..Default::default()
            },
            Verdict::Unsat => ReportDocument {
                verdict: Some(VerdictTag::Unsat),
                ..Default::default()
            },
            Verdict::Unknown(reason) => ReportDocument {
                verdict: Some(VerdictTag::Unknown),
                reason: Some(reason.clone()),
                ..Default::default()
            },
        }
    }
}

pub fn serialize_report(report: &ReportDocument) -> String {
    to_pretty(report)
}

pub fn parse_report(text: &str) -> Result<ReportDocument, Diagnostic> {
    decode(text)
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}
