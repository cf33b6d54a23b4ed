//! Multi-endpoint query pipelines: declarative plans that fetch triple
//! patterns from several servers and join the results into a binding
//! table.
//!
//! A plan is a short list of steps over named variables:
//!
//! - `fetch`: run one pattern query; every variable in the pattern becomes
//!   a new column, one row per matched triple (cross-joined with whatever
//!   rows exist already).
//! - `extend`: run the pattern once per existing row with that row's
//!   values substituted in; matching triples bind the step's fresh
//!   variables and unmatched rows are dropped (inner join).
//! - `filter_host`: keep rows whose variable is an IRI with the given
//!   authority (host[:port]).
//!
//! Plans travel as JSON: `{"steps":[{"kind":"fetch","endpoint":...,
//! "pattern":{"subject":"?s",...}},...],"output":["?s",...]}`. A pattern
//! slot is a `?variable`, an N-Triples term (`<iri>`, `"literal"`,
//! `_:label`), or absent for an anonymous wildcard.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Deserialize;

use thiserror::Error;

use crate::client::{Client, ClientError, Endpoint};
use crate::term::{parse_term, KindSet, Term, TermKind, Triple, TriplePattern};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid plan JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("step {step}: {message}")]
    Invalid { step: usize, message: String },
    #[error("output variable ?{0} is never bound by any step")]
    UnboundOutput(String),
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: ClientError,
    },
    #[error("unknown variable ?{0}")]
    UnknownVariable(String),
}

fn invalid(step: usize, message: impl Into<String>) -> PlanError {
    PlanError::Invalid {
        step,
        message: message.into(),
    }
}

/// One pattern position: a named variable, a constant term, or an
/// anonymous wildcard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Var(String),
    Const(Term),
    Any,
}

impl Slot {
    fn parse(text: Option<&str>) -> Result<Slot, String> {
        let Some(text) = text else {
            return Ok(Slot::Any);
        };
        if let Some(name) = text.strip_prefix('?') {
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(format!("invalid variable name {text:?}"));
            }
            return Ok(Slot::Var(name.to_owned()));
        }
        parse_term(text, KindSet::ALL)
            .map(Slot::Const)
            .map_err(|e| format!("bad term {text:?}: {e}"))
    }

    fn var(&self) -> Option<&str> {
        match self {
            Slot::Var(name) => Some(name),
            _ => None,
        }
    }
}

/// A triple pattern whose positions may be variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTemplate {
    pub subject: Slot,
    pub predicate: Slot,
    pub object: Slot,
}

impl PatternTemplate {
    fn slots(&self) -> [&Slot; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variables in subject, predicate, object order (with position).
    fn vars(&self) -> Vec<(String, usize)> {
        self.slots()
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| slot.var().map(|name| (name.to_owned(), i)))
            .collect()
    }

    /// The wire pattern for one row: bound variables substitute their row
    /// values, fresh variables and `Any` become wildcards. `None` means the
    /// substituted pattern cannot match anything (literal subject or
    /// predicate, blank predicate), so no request should be made.
    fn wire_pattern(&self, columns: &[String], row: Option<&[Term]>) -> Option<TriplePattern> {
        let resolve = |slot: &Slot| -> Option<Option<Term>> {
            // Outer None = not representable; inner None = wildcard.
            match slot {
                Slot::Any => Some(None),
                Slot::Const(term) => Some(Some(term.clone())),
                Slot::Var(name) => match row {
                    Some(row) => match columns.iter().position(|c| c == name) {
                        Some(i) => Some(Some(row[i].clone())),
                        None => Some(None), // fresh variable: wildcard
                    },
                    None => Some(None),
                },
            }
        };
        let pattern = TriplePattern::new(
            resolve(&self.subject)?,
            resolve(&self.predicate)?,
            resolve(&self.object)?,
        )
        .ok()?; // blank-node predicate: matches nothing
        pattern.is_satisfiable().then_some(pattern)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanStep {
    Fetch {
        endpoint: Option<Endpoint>,
        pattern: PatternTemplate,
    },
    Extend {
        endpoint: Option<Endpoint>,
        pattern: PatternTemplate,
    },
    FilterHost { variable: String, authority: String },
}

/// An ordered list of steps plus the variables to project at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub steps: Vec<PlanStep>,
    pub output: Vec<String>,
}

#[derive(Deserialize)]
struct PatternJson {
    subject: Option<String>,
    predicate: Option<String>,
    object: Option<String>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StepJson {
    Fetch {
        endpoint: Option<String>,
        pattern: PatternJson,
    },
    Extend {
        endpoint: Option<String>,
        pattern: PatternJson,
    },
    FilterHost { variable: String, authority: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanJson {
    steps: Vec<StepJson>,
    output: Vec<String>,
}

fn parse_template(step: usize, json: &PatternJson) -> Result<PatternTemplate, PlanError> {
    let slot = |text: &Option<String>| {
        Slot::parse(text.as_deref()).map_err(|message| invalid(step, message))
    };
    Ok(PatternTemplate {
        subject: slot(&json.subject)?,
        predicate: slot(&json.predicate)?,
        object: slot(&json.object)?,
    })
}

fn parse_endpoint(step: usize, url: &Option<String>) -> Result<Option<Endpoint>, PlanError> {
    url.as_deref()
        .map(|u| Endpoint::new(u).map_err(|e| invalid(step, e.to_string())))
        .transpose()
}

fn variable_name(step: usize, text: &str) -> Result<String, PlanError> {
    match Slot::parse(Some(text)).map_err(|message| invalid(step, message))? {
        Slot::Var(name) => Ok(name),
        _ => Err(invalid(step, format!("expected a ?variable, got {text:?}"))),
    }
}

impl QueryPlan {
    /// Parse and validate a plan document.
    pub fn from_json(text: &str) -> Result<QueryPlan, PlanError> {
        let json: PlanJson = serde_json::from_str(text)?;
        let mut steps = Vec::with_capacity(json.steps.len());
        for (i, step) in json.steps.iter().enumerate() {
            steps.push(match step {
                StepJson::Fetch { endpoint, pattern } => PlanStep::Fetch {
                    endpoint: parse_endpoint(i, endpoint)?,
                    pattern: parse_template(i, pattern)?,
                },
                StepJson::Extend { endpoint, pattern } => PlanStep::Extend {
                    endpoint: parse_endpoint(i, endpoint)?,
                    pattern: parse_template(i, pattern)?,
                },
                StepJson::FilterHost {
                    variable,
                    authority,
                } => PlanStep::FilterHost {
                    variable: variable_name(i, variable)?,
                    authority: authority.clone(),
                },
            });
        }
        let output = json
            .output
            .iter()
            .map(|name| variable_name(json.steps.len(), name))
            .collect::<Result<Vec<_>, _>>()?;
        let plan = QueryPlan { steps, output };
        plan.validate()?;
        Ok(plan)
    }

    /// Static checks: every referenced variable is bound in time, no
    /// variable is introduced twice, constants are positionally possible.
    pub fn validate(&self) -> Result<(), PlanError> {
        let mut bound: HashSet<String> = HashSet::new();
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                PlanStep::Fetch { pattern, .. } | PlanStep::Extend { pattern, .. } => {
                    if let Slot::Const(term) = &pattern.predicate {
                        if term.kind() == TermKind::Blank {
                            return Err(invalid(i, "a blank node cannot be a predicate"));
                        }
                    }
                    let is_fetch = matches!(step, PlanStep::Fetch { .. });
                    let mut fresh_here: HashSet<&str> = HashSet::new();
                    for (name, _) in pattern.vars() {
                        let name_ref = pattern
                            .slots()
                            .iter()
                            .find_map(|s| s.var().filter(|v| **v == *name))
                            .expect("var came from these slots");
                        if bound.contains(&name) {
                            if is_fetch {
                                return Err(invalid(
                                    i,
                                    format!(
                                        "variable ?{name} is already bound; use an extend step to join on it"
                                    ),
                                ));
                            }
                        } else if !fresh_here.insert(name_ref) {
                            return Err(invalid(
                                i,
                                format!("variable ?{name} is introduced twice in one pattern"),
                            ));
                        }
                    }
                    for (name, _) in pattern.vars() {
                        bound.insert(name);
                    }
                }
                PlanStep::FilterHost {
                    variable,
                    authority,
                } => {
                    if !bound.contains(variable) {
                        return Err(invalid(
                            i,
                            format!("variable ?{variable} is not bound by any prior step"),
                        ));
                    }
                    if authority.is_empty() {
                        return Err(invalid(i, "authority must not be empty"));
                    }
                }
            }
        }
        for name in &self.output {
            if !bound.contains(name) {
                return Err(PlanError::UnboundOutput(name.clone()));
            }
        }
        Ok(())
    }
}

/// Variable bindings: named columns, one `Term` per column per row. Rows
/// are unique and keep first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BindingTable {
    columns: Vec<String>,
    rows: Vec<Vec<Term>>,
}

impl BindingTable {
    /// The join identity: no columns, one empty row.
    pub fn unit() -> Self {
        BindingTable {
            columns: Vec::new(),
            rows: vec![Vec::new()],
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Term>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn column_index(&self, variable: &str) -> Result<usize, PlanError> {
        let name = variable.strip_prefix('?').unwrap_or(variable);
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| PlanError::UnknownVariable(name.to_owned()))
    }

    fn dedup_rows(&mut self) {
        let mut seen: HashSet<&[Term]> = HashSet::with_capacity(self.rows.len());
        let mut keep = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            keep.push(seen.insert(row.as_slice()));
        }
        let mut keep = keep.into_iter();
        self.rows.retain(|_| keep.next().unwrap());
    }
}

/// Distinct values of one column, in term order. Accepts the variable with
/// or without its `?` sigil.
pub fn project_terms(table: &BindingTable, variable: &str) -> Result<Vec<Term>, PlanError> {
    let index = table.column_index(variable)?;
    let mut terms: Vec<Term> = table.rows.iter().map(|row| row[index].clone()).collect();
    terms.sort();
    terms.dedup();
    Ok(terms)
}

/// The authority (host[:port]) of an IRI, with any userinfo stripped.
fn iri_authority(iri: &str) -> Option<&str> {
    let rest = &iri[iri.find("://")? + 3..];
    let end = rest
        .find(['/', '?', '#'])
        .unwrap_or(rest.len());
    let authority = &rest[..end];
    let authority = authority
        .rfind('@')
        .map(|at| &authority[at + 1..])
        .unwrap_or(authority);
    (!authority.is_empty()).then_some(authority)
}

fn authority_matches(term: &Term, authority: &str) -> bool {
    term.as_iri()
        .and_then(iri_authority)
        .map(|a| a.eq_ignore_ascii_case(authority))
        .unwrap_or(false)
}

/// Keep the IRIs whose authority matches (ASCII-case-insensitively);
/// literals and blank nodes never pass.
pub fn filter_host(terms: &[Term], authority: &str) -> Vec<Term> {
    terms
        .iter()
        .filter(|t| authority_matches(t, authority))
        .cloned()
        .collect()
}

/// Run every row's query for one extend step, at most `parallelism` in
/// flight, and return per-row results in row order.
fn run_rows(
    client: &Client,
    endpoint: &Endpoint,
    patterns: &[Option<TriplePattern>],
    parallelism: usize,
) -> Vec<Result<Vec<Triple>, ClientError>> {
    let slots: Vec<Mutex<Option<Result<Vec<Triple>, ClientError>>>> =
        patterns.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = parallelism.clamp(1, patterns.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= patterns.len() {
                    break;
                }
                let result = match &patterns[i] {
                    Some(pattern) => client.query_all(endpoint, pattern),
                    None => Ok(Vec::new()),
                };
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

fn step_endpoint<'a>(
    step: usize,
    own: &'a Option<Endpoint>,
    default: Option<&'a Endpoint>,
) -> Result<&'a Endpoint, PlanError> {
    own.as_ref().or(default).ok_or_else(|| {
        invalid(
            step,
            "no endpoint in the step and no default endpoint given",
        )
    })
}

fn triple_position(triple: &Triple, position: usize) -> &Term {
    match position {
        0 => triple.subject(),
        1 => triple.predicate(),
        _ => triple.object(),
    }
}

/// Execute a plan with the default parallelism (4 concurrent requests
/// within an extend step).
pub fn run_plan(
    plan: &QueryPlan,
    client: &Client,
    default_endpoint: Option<&Endpoint>,
) -> Result<BindingTable, PlanError> {
    run_plan_with_parallelism(plan, client, default_endpoint, 4)
}

/// Execute a plan; the final table holds exactly the plan's output
/// variables, deduplicated, rows in deterministic first-derivation order.
pub fn run_plan_with_parallelism(
    plan: &QueryPlan,
    client: &Client,
    default_endpoint: Option<&Endpoint>,
    parallelism: usize,
) -> Result<BindingTable, PlanError> {
    plan.validate()?;
    let mut table = BindingTable::unit();

    for (i, step) in plan.steps.iter().enumerate() {
        match step {
            PlanStep::Fetch { endpoint, pattern } => {
                let endpoint = step_endpoint(i, endpoint, default_endpoint)?;
                let triples = match pattern.wire_pattern(&table.columns, None) {
                    Some(wire) => client
                        .query_all(endpoint, &wire)
                        .map_err(|source| PlanError::Step { step: i, source })?,
                    None => Vec::new(),
                };
                let fresh = pattern.vars();
                let mut rows = Vec::with_capacity(table.rows.len() * triples.len());
                for row in &table.rows {
                    for triple in &triples {
                        let mut extended = row.clone();
                        extended.extend(
                            fresh
                                .iter()
                                .map(|(_, position)| triple_position(triple, *position).clone()),
                        );
                        rows.push(extended);
                    }
                }
                table
                    .columns
                    .extend(fresh.into_iter().map(|(name, _)| name));
                table.rows = rows;
            }
            PlanStep::Extend { endpoint, pattern } => {
                let endpoint = step_endpoint(i, endpoint, default_endpoint)?;
                let fresh: Vec<(String, usize)> = pattern
                    .vars()
                    .into_iter()
                    .filter(|(name, _)| !table.columns.contains(name))
                    .collect();
                let patterns: Vec<Option<TriplePattern>> = table
                    .rows
                    .iter()
                    .map(|row| pattern.wire_pattern(&table.columns, Some(row)))
                    .collect();
                let results = run_rows(client, endpoint, &patterns, parallelism);
                let mut rows = Vec::new();
                for (row, result) in table.rows.iter().zip(results) {
                    let triples =
                        result.map_err(|source| PlanError::Step { step: i, source })?;
                    for triple in &triples {
                        let mut extended = row.clone();
                        extended.extend(
                            fresh
                                .iter()
                                .map(|(_, position)| triple_position(triple, *position).clone()),
                        );
                        rows.push(extended);
                    }
                }
                table
                    .columns
                    .extend(fresh.into_iter().map(|(name, _)| name));
                table.rows = rows;
            }
            PlanStep::FilterHost {
                variable,
                authority,
            } => {
                let index = table
                    .column_index(variable)
                    .map_err(|_| invalid(i, format!("variable ?{variable} is not bound")))?;
                table
                    .rows
                    .retain(|row| authority_matches(&row[index], authority));
            }
        }
        table.dedup_rows();
    }

    // Project to the requested output columns, then dedup again (projection
    // can merge rows).
    let indices: Vec<usize> = plan
        .output
        .iter()
        .map(|name| table.column_index(name))
        .collect::<Result<_, _>>()?;
    let mut projected = BindingTable {
        columns: plan.output.clone(),
        rows: table
            .rows
            .iter()
            .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
            .collect(),
    };
    projected.dedup_rows();
    Ok(projected)
}
