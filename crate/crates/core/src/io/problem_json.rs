//! JSON documents describing coalition problems.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{AgentSpec, CoalitionProblem, CompileError, ExclusionGroup, Plan, UncertaintyModel};
use crate::decimal::Decimal;
use crate::evaluator::{DistanceTable, EvalError};
use crate::logic::Atom;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] CompileError),
    #[error("distances: {0}")]
    Distances(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    agents: Vec<AgentSpec>,
    goals: Vec<Atom>,
    plans: Vec<Plan>,
    #[serde(default)]
    exclusions: Vec<ExclusionGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distances: Option<DistanceTable<Decimal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uncertainty: Option<UncertaintyModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<BTreeMap<Atom, Decimal>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDocument {
    pub title: Option<String>,
    pub notes: Option<String>,
    pub problem: CoalitionProblem,
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> Result<ProblemDocument, ProblemError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ProblemError::Schema { path: if path == "." { "$".into() } else { path }, message: e.into_inner().to_string() }
    })?;
    let problem = CoalitionProblem {
        agents: raw.agents,
        goals: raw.goals,
        plans: raw.plans,
        exclusions: raw.exclusions,
        distances: raw.distances,
        uncertainty: raw.uncertainty,
        weights: raw.weights,
    };
    problem.validate()?;
    if let Some(d) = &problem.distances {
        d.validate()?;
    }
    Ok(ProblemDocument { title: raw.title, notes: raw.notes, problem })
}
